"""Ohmic bath spectral density and memory-kernel functions.

The spectral density is J(w) = alpha * w * exp(-w / omega_c).  Two real
kernels enter the memory integral of the master equation:

    noise:       nu(tau)  = int_0^inf dw J(w) coth(beta w / 2) cos(w tau)
    dissipation: eta(tau) = int_0^inf dw J(w) sin(w tau)

At T = 0 the coth factor is 1 and both have closed forms, used by
default; a Gauss-Laguerre quadrature path (the natural rule for the
exponential cutoff) is kept as a cross-check and as the T > 0 route.

Units: omega_c sets the frequency scale (omega_c = 1 in all shipped
configurations), times are omega_c * t, and hbar = k_B = 1.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.laguerre import laggauss

__all__ = [
    "BathSpec",
    "QuadratureError",
    "spectral_density",
    "noise_kernel",
    "noise_kernel_quadrature",
    "dissipation_kernel",
    "dissipation_kernel_quadrature",
    "complex_kernel",
]


class QuadratureError(RuntimeError):
    """Frequency quadrature failed to converge."""


@dataclass(frozen=True)
class BathSpec:
    """Coupling strength, exponential cutoff, and inverse temperature.

    ``beta=None`` selects the exact zero-temperature limit (coth -> 1).
    """

    alpha: float
    omega_c: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if self.beta is not None and self.beta <= 0:
            raise ValueError(f"beta must be > 0 (or None for T=0), got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return self.beta is None


def spectral_density(omega, bath: BathSpec):
    """J(w) = alpha * w * exp(-w / omega_c); rejects negative frequencies."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    return bath.alpha * w * np.exp(-w / bath.omega_c)


def _coth(x):
    """coth(x) for x > 0, stable for both tiny and huge arguments."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-4
    # series: coth(x) = 1/x + x/3 - x^3/45 + ...
    out[small] = 1.0 / x[small] + x[small] / 3.0
    out[~small] = 1.0 / np.tanh(x[~small])
    return out


def _thermal_weight(x, bath: BathSpec):
    """x * coth(beta * omega_c * x / 2) on Laguerre abscissas x = w/omega_c.

    Finite as x -> 0 (limit 2 / (beta * omega_c)); no 0/0 is evaluated.
    """
    if bath.zero_temperature:
        return x
    return x * _coth(0.5 * bath.beta * bath.omega_c * x)


_LAGUERRE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _laguerre_nodes(n: int):
    if n not in _LAGUERRE_CACHE:
        _LAGUERRE_CACHE[n] = laggauss(n)
    return _LAGUERRE_CACHE[n]


def _ohmic_quadrature(tau: float, bath: BathSpec, osc, rtol: float = 1e-9):
    """int_0^inf J(w) [coth] osc(w tau) dw with w = omega_c x, weight e^-x.

    Doubles the Gauss-Laguerre order from 64 until two successive results
    agree to ``rtol`` relative to the kernel scale alpha * omega_c**2.
    """
    scale = max(bath.alpha * bath.omega_c**2, np.finfo(float).tiny)
    prev = None
    n = 64
    while n <= 8192:
        x, w = _laguerre_nodes(n)
        val = bath.alpha * bath.omega_c**2 * float(
            np.sum(w * _thermal_weight(x, bath) * osc(bath.omega_c * tau * x))
        )
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), scale):
            return val
        prev = val
        n *= 2
    raise QuadratureError(
        f"frequency quadrature did not converge at tau={tau} (order {n // 2})"
    )


def noise_kernel(tau, bath: BathSpec):
    """Thermal (noise) kernel nu(tau); accepts scalar or array tau.

    T = 0 closed form: alpha * omega_c^2 (1 - omega_c^2 tau^2) /
    (1 + omega_c^2 tau^2)^2.
    """
    if bath.zero_temperature:
        u2 = (bath.omega_c * np.asarray(tau, dtype=float)) ** 2
        out = bath.alpha * bath.omega_c**2 * (1.0 - u2) / (1.0 + u2) ** 2
        return out if np.ndim(tau) else float(out)
    if np.ndim(tau):
        return np.array([_ohmic_quadrature(float(t), bath, np.cos) for t in tau])
    return _ohmic_quadrature(float(tau), bath, np.cos)


def noise_kernel_quadrature(tau: float, bath: BathSpec, rtol: float = 1e-9) -> float:
    """Gauss-Laguerre evaluation of nu(tau); cross-check for the closed form."""
    return _ohmic_quadrature(tau, bath, np.cos, rtol)


def dissipation_kernel(tau, bath: BathSpec):
    """Dissipation kernel eta(tau) = 2 alpha omega_c^3 tau / (1 + omega_c^2 tau^2)^2.

    Temperature independent (no coth factor); accepts scalar or array tau.
    """
    t = np.asarray(tau, dtype=float)
    u2 = (bath.omega_c * t) ** 2
    out = 2.0 * bath.alpha * bath.omega_c**3 * t / (1.0 + u2) ** 2
    return out if np.ndim(tau) else float(out)


def dissipation_kernel_quadrature(
    tau: float, bath: BathSpec, rtol: float = 1e-9
) -> float:
    """Gauss-Laguerre evaluation of eta(tau); cross-check for the closed form."""
    cold = BathSpec(bath.alpha, bath.omega_c, None)  # eta carries no coth factor
    return _ohmic_quadrature(tau, cold, np.sin, rtol)


def complex_kernel(tau, bath: BathSpec, conjugate: bool = False):
    """nu(tau) + i eta(tau), or its complex conjugate when ``conjugate``."""
    c = noise_kernel(tau, bath) + 1j * dissipation_kernel(tau, bath)
    return np.conj(c) if conjugate else c
