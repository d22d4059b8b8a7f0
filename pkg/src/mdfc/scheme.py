"""Measurement operators, correction unitaries, and feedback schemes.

A feedback scheme is an ordered list of (measurement operator, correction
unitary) pairs together with the Poisson event rate R.  The measurement
operators form a two-outcome POVM (sum of M^dag M equals the identity),
each correction is unitary, and every Lindblad operator of the scheme is
sqrt(R) * F_j @ M_j in pair order.

Sign convention, fixed project-wide: outcome "+" always pairs with the
"+"-signed correction rotation.
"""

from dataclasses import dataclass, field

import numpy as np

from .qmat import IDENTITY, KET_0, KET_1

__all__ = [
    "SchemeError",
    "MeasurementPair",
    "FeedbackScheme",
    "weak_z_measurement",
    "weak_x_measurement",
    "y_rotation",
    "z_rotation",
    "preparation_scheme",
    "pair_protection_scheme",
    "nonorthogonal_pair",
    "mixed_protection_scheme",
    "do_nothing_scheme",
    "lindblad_ops",
]

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)

COMPLETENESS_TOL = 1e-12
UNITARITY_TOL = 1e-12


class SchemeError(ValueError):
    """Invalid measurement/feedback construction."""


@dataclass(frozen=True)
class MeasurementPair:
    """Two-outcome POVM with strength parameter chi in [0, pi/2].

    chi = 0 is the projective limit, chi = pi/2 extracts no information
    (both operators proportional to the identity).
    """

    m_plus: np.ndarray
    m_minus: np.ndarray
    chi: float

    def __post_init__(self):
        comp = (
            self.m_plus.conj().T @ self.m_plus
            + self.m_minus.conj().T @ self.m_minus
        )
        defect = float(np.max(np.abs(comp - IDENTITY)))
        if defect > COMPLETENESS_TOL:
            raise SchemeError(f"POVM completeness defect {defect:.2e}")


@dataclass(frozen=True)
class FeedbackScheme:
    """Ordered (measurement, correction) pairs plus event rate R (units omega_c)."""

    pairs: tuple = field()
    rate: float = 0.0

    def __post_init__(self):
        if self.rate < 0:
            raise SchemeError(f"rate must be >= 0, got {self.rate}")
        object.__setattr__(
            self,
            "pairs",
            tuple(
                (np.asarray(m, dtype=complex), np.asarray(f, dtype=complex))
                for m, f in self.pairs
            ),
        )
        comp = sum(m.conj().T @ m for m, _ in self.pairs)
        defect = float(np.max(np.abs(comp - IDENTITY)))
        if defect > COMPLETENESS_TOL:
            raise SchemeError(f"scheme completeness defect {defect:.2e}")
        for i, (_, f) in enumerate(self.pairs):
            udef = float(np.max(np.abs(f.conj().T @ f - IDENTITY)))
            if udef > UNITARITY_TOL:
                raise SchemeError(f"correction {i} unitarity defect {udef:.2e}")


def _check_chi(chi: float) -> None:
    if not 0.0 <= chi <= np.pi / 2:
        raise SchemeError(f"chi must lie in [0, pi/2], got {chi}")


def weak_z_measurement(chi: float) -> MeasurementPair:
    """Variable-strength measurement along z.

    M_+ = diag(cos(chi/2), sin(chi/2)), M_- = diag(sin(chi/2), cos(chi/2)).
    """
    _check_chi(chi)
    c, s = np.cos(chi / 2), np.sin(chi / 2)
    return MeasurementPair(
        np.diag([c, s]).astype(complex), np.diag([s, c]).astype(complex), chi
    )


def weak_x_measurement(chi: float) -> MeasurementPair:
    """Variable-strength measurement along x: the z pair conjugated by Hadamard."""
    _check_chi(chi)
    zp = weak_z_measurement(chi)
    return MeasurementPair(
        _HADAMARD @ zp.m_plus @ _HADAMARD,
        _HADAMARD @ zp.m_minus @ _HADAMARD,
        chi,
    )


def y_rotation(eta: float, sign: int = +1) -> np.ndarray:
    """Rotation exp(-i * sign * eta * sigma_y / 2) about the y axis."""
    if sign not in (+1, -1):
        raise SchemeError(f"sign must be +1 or -1, got {sign}")
    a = sign * eta
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def z_rotation(eta: float, sign: int = +1) -> np.ndarray:
    """Rotation exp(-i * sign * eta * sigma_z / 2) about the z axis."""
    if sign not in (+1, -1):
        raise SchemeError(f"sign must be +1 or -1, got {sign}")
    p = np.exp(-0.5j * sign * eta)
    return np.diag([p, np.conj(p)])


def preparation_scheme(eta: float, zeta: float, rate: float = 1.0) -> FeedbackScheme:
    """Projective z measurement with corrections rotating both outcomes onto
    the target state cos(eta/2)|0> + e^{i zeta} sin(eta/2)|1>.

    F_+ = Rz(zeta) Ry(eta); F_- = Rz(zeta) Ry(eta - pi).  Global phases are
    kept as produced by the rotation products.
    """
    if not 0.0 <= eta <= np.pi:
        raise SchemeError(f"eta must lie in [0, pi], got {eta}")
    if not 0.0 <= zeta <= 2 * np.pi:
        raise SchemeError(f"zeta must lie in [0, 2*pi], got {zeta}")
    f_plus = z_rotation(zeta) @ y_rotation(eta)
    f_minus = z_rotation(zeta) @ y_rotation(eta - np.pi)
    m_plus = np.outer(KET_0, KET_0.conj())
    m_minus = np.outer(KET_1, KET_1.conj())
    return FeedbackScheme(((m_plus, f_plus), (m_minus, f_minus)), rate)


def pair_protection_scheme(
    chi: float,
    eta: float,
    axis: str = "z",
    correction: str = "y",
    rate: float = 1.0,
) -> FeedbackScheme:
    """Weak measurement along `axis` with +-eta corrections about `correction`.

    Supported combinations: (z, y), (x, y), (x, z).  The (z, z) combination
    is rejected: a z rotation commutes with the z measurement record and is
    not a defined scheme here.
    """
    if axis not in ("z", "x"):
        raise SchemeError(f"axis must be 'z' or 'x', got {axis!r}")
    if correction not in ("y", "z"):
        raise SchemeError(f"correction must be 'y' or 'z', got {correction!r}")
    if axis == "z" and correction == "z":
        raise SchemeError("the (z measurement, z correction) scheme is not defined")
    pair = weak_z_measurement(chi) if axis == "z" else weak_x_measurement(chi)
    rot = y_rotation if correction == "y" else z_rotation
    return FeedbackScheme(
        ((pair.m_plus, rot(eta, +1)), (pair.m_minus, rot(eta, -1))), rate
    )


def nonorthogonal_pair(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """The pure states cos(theta/2)|+> +- sin(theta/2)|->, overlap cos(theta)."""
    if not 0.0 <= theta <= np.pi:
        raise SchemeError(f"theta must lie in [0, pi], got {theta}")
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return c * plus + s * minus, c * plus - s * minus


def _wrap_angle(a: float) -> float:
    # Wrap to (-pi, pi] for minimal-angle rotations.
    w = (a + np.pi) % (2 * np.pi) - np.pi
    return np.pi if w == -np.pi else w


def mixed_protection_scheme(
    theta: float, p_plus: float, rate: float = 1.0
) -> FeedbackScheme:
    """Protection scheme for the mixture p_plus rho_+ + p_minus rho_- of the
    nonorthogonal pair at angle theta.

    Solves for the orthogonal measurement basis {|+mu>, |-mu>} whose outcome
    probabilities on the initial mixture are exactly (p_plus, p_minus):
    <+mu| rho(0) |+mu> = p_plus with |+mu> = cos(mu/2)|0> + sin(mu/2)|1>,
    |-mu> = sin(mu/2)|0> - cos(mu/2)|1>.  mu comes from the quadratic in
    tan(mu/2) when well conditioned, with a bisection fallback on [-pi, pi].
    The corrections are the minimal-angle y rotations taking |+-mu> onto the
    respective pure states (everything lives in the real x-z plane).
    """
    if not 0.0 < theta < np.pi:
        raise SchemeError(f"theta must lie in (0, pi), got {theta}")
    if not 0.0 < p_plus < 1.0:
        raise SchemeError(f"p_plus must lie in (0, 1), got {p_plus}")

    delta = 2.0 * p_plus - 1.0
    ax = np.cos(theta)          # Bloch x of the mixture
    az = delta * np.sin(theta)  # Bloch z of the mixture

    # <+mu|rho0|+mu> = (1 + ax sin(mu) + az cos(mu)) / 2 = p_plus
    #   <=>  ax sin(mu) + az cos(mu) = delta
    disc = ax * ax + az * az - delta * delta
    if disc < -1e-10:
        raise SchemeError(
            "no measurement basis realizes the requested outcome "
            f"probabilities: p_plus={p_plus} is outside the eigenvalue "
            "range of the initial mixture"
        )
    disc = max(disc, 0.0)

    # Quadratic (az + delta) u^2 - 2 ax u + (delta - az) = 0 in u = tan(mu/2).
    qa = az + delta
    qb = -2.0 * ax
    qc = delta - az
    candidates = []
    if abs(qa) > 1e-12:
        root = np.sqrt(disc)
        candidates += [(-qb + 2 * root) / (2 * qa), (-qb - 2 * root) / (2 * qa)]
    elif abs(qb) > 1e-12:
        candidates.append(-qc / qb)
    mus = sorted((2.0 * np.arctan(u) for u in candidates), key=abs)

    def residual(mu):
        return ax * np.sin(mu) + az * np.cos(mu) - delta

    mu = next((m for m in mus if abs(residual(m)) <= 1e-10), None)
    if mu is None:
        mu = _bisect_root(residual)
    if mu is None or abs(residual(mu)) > 1e-10:
        raise SchemeError(
            "failed to solve for the measurement basis angle mu to 1e-10"
        )

    cm, sm = np.cos(mu / 2), np.sin(mu / 2)
    ket_p = np.array([cm, sm], dtype=complex)
    ket_m = np.array([sm, -cm], dtype=complex)
    m_plus = np.outer(ket_p, ket_p.conj())
    m_minus = np.outer(ket_m, ket_m.conj())

    # Bloch angles (about y, measured from +z toward +x) of sources and targets.
    corr_plus = y_rotation(_wrap_angle((np.pi / 2 - theta) - mu))
    corr_minus = y_rotation(_wrap_angle((np.pi / 2 + theta) - (np.pi + mu)))
    return FeedbackScheme(((m_plus, corr_plus), (m_minus, corr_minus)), rate)


def _bisect_root(f, lo: float = -np.pi, hi: float = np.pi, n_scan: int = 256):
    """First sign-change bisection of f on [lo, hi]; None when no bracket."""
    xs = np.linspace(lo, hi, n_scan + 1)
    fs = [f(x) for x in xs]
    for i in range(n_scan):
        if fs[i] == 0.0:
            return xs[i]
        if fs[i] * fs[i + 1] < 0.0:
            a, b, fa = xs[i], xs[i + 1], fs[i]
            for _ in range(200):
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0 or (b - a) < 1e-14:
                    return m
                if fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            return 0.5 * (a + b)
    return None


def do_nothing_scheme() -> FeedbackScheme:
    """Trivial scheme: identity measurement, identity correction, rate 0."""
    return FeedbackScheme(((IDENTITY, IDENTITY),), 0.0)


def lindblad_ops(scheme: FeedbackScheme) -> list[np.ndarray]:
    """Lindblad operators sqrt(R) F_j @ M_j in scheme order."""
    r = np.sqrt(scheme.rate)
    return [r * f @ m for m, f in scheme.pairs]
