"""Dense complex linear algebra for qubit states and their superoperators.

Qubit operators are plain 2x2 complex ndarrays; superoperators are 4x4
complex ndarrays acting on column-stacked vectorizations.  The
vectorization convention is fixed project-wide: ``vectorize(M)`` stacks
column 0 first, so ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.

All functions are pure; everything here works in units hbar = 1.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "KET_0",
    "KET_1",
    "ExpmError",
    "DensityReport",
    "vectorize",
    "devectorize",
    "left_mult_superop",
    "right_mult_superop",
    "expm",
    "bloch_to_density",
    "density_to_bloch",
    "validate_density",
    "is_trace_preserving_generator",
]

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)

# Row functional representing Tr(.) on column-stacked 2x2 matrices.
_TRACE_ROW = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)


class ExpmError(ValueError):
    """Matrix exponential argument cannot be handled by the kernel."""


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stack a 2x2 matrix into a length-4 vector (column 0 first)."""
    return np.asarray(m, dtype=complex).reshape(4, order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(v, dtype=complex).reshape((2, 2), order="F")


def left_mult_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator for X -> A @ X under column stacking."""
    return np.kron(IDENTITY, np.asarray(a, dtype=complex))


def right_mult_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator for X -> X @ A under column stacking."""
    return np.kron(np.asarray(a, dtype=complex).T, IDENTITY)


def expm(g: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(g * t) by scaling-and-squaring with a Taylor-series kernel.

    The argument is scaled by a power of two until its 1-norm is at most
    0.5, the series is summed to machine precision, and the result is
    squared back up.  Robustness over speed: inputs here are 4x4 (or
    2x2), so the series kernel is exact to ~1e-15 relative.

    Raises ExpmError for non-finite input or when the norm is too large
    for the scaling step (more than 2**60 times the kernel bound).
    """
    a = np.asarray(g, dtype=complex) * t
    if not np.all(np.isfinite(a)):
        raise ExpmError("matrix exponential of non-finite argument")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
        if squarings > 60:
            raise ExpmError(
                f"argument norm {norm:.3e} cannot be scaled into the "
                "series kernel's validity bound"
            )
        a = a / (2.0**squarings)
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 40):
        term = term @ a / k
        out = out + term
        if np.max(np.abs(term)) < 1e-18 * max(1.0, np.max(np.abs(out))):
            break
    for _ in range(squarings):
        out = out @ out
    return out


def bloch_to_density(a) -> np.ndarray:
    """Density matrix (I + a . sigma) / 2 for a Bloch vector a."""
    a = np.asarray(a, dtype=float)
    r = float(np.linalg.norm(a))
    if r > 1.0 + 1e-10:
        raise ValueError(f"Bloch vector norm {r} exceeds 1")
    return 0.5 * (IDENTITY + a[0] * SIGMA_X + a[1] * SIGMA_Y + a[2] * SIGMA_Z)


def density_to_bloch(rho: np.ndarray) -> np.ndarray:
    """Bloch vector (Tr rho sigma_x, Tr rho sigma_y, Tr rho sigma_z)."""
    rho = np.asarray(rho, dtype=complex)
    return np.array(
        [
            np.real(np.trace(rho @ SIGMA_X)),
            np.real(np.trace(rho @ SIGMA_Y)),
            np.real(np.trace(rho @ SIGMA_Z)),
        ]
    )


def _eigvals_hermitian_2x2(h: np.ndarray) -> tuple[float, float]:
    # Closed-form eigenvalues from trace and determinant; no iterative solver.
    mean = 0.5 * np.real(h[0, 0] + h[1, 1])
    disc = np.sqrt(
        0.25 * np.real(h[0, 0] - h[1, 1]) ** 2 + np.abs(h[0, 1]) ** 2
    )
    return mean - disc, mean + disc


@dataclass(frozen=True)
class DensityReport:
    """Diagnostics for the density-matrix invariants."""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    def passes(
        self,
        hermiticity_tol: float = 1e-12,
        trace_tol: float = 1e-12,
        positivity_floor: float = -1e-10,
    ) -> bool:
        return (
            self.hermiticity_defect <= hermiticity_tol
            and self.trace_defect <= trace_tol
            and self.min_eigenvalue >= positivity_floor
        )


def validate_density(rho: np.ndarray) -> DensityReport:
    """Hermiticity/trace/positivity diagnostics for a candidate state."""
    rho = np.asarray(rho, dtype=complex)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    trace_defect = float(np.abs(np.trace(rho) - 1.0))
    h = 0.5 * (rho + rho.conj().T)
    lo, _ = _eigvals_hermitian_2x2(h)
    return DensityReport(herm_defect, trace_defect, float(lo))


def is_trace_preserving_generator(g: np.ndarray, tol: float = 1e-10) -> bool:
    """True when the trace functional annihilates the generator from the left."""
    return float(np.max(np.abs(_TRACE_ROW @ np.asarray(g, dtype=complex)))) <= tol
