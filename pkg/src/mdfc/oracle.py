"""Independent ground-truth computations used to validate the solver.

Two routes that share no code with the propagator:

* Monte-Carlo jump trajectories of the bath-free feedback process
  (Poisson-timed measurement + correction events, unitary drift in
  between), whose ensemble mean must agree with the closed Lindblad
  propagation.
* The exact pure-dephasing solution for the feedback-free qubit:
  populations constant, coherence damped by exp(-Gamma(t)) with
  Gamma(t) = 4 int_0^inf dw J(w) coth(beta w / 2) (1 - cos(w t)) / w^2,
  which at T = 0 for the Ohmic bath is 2 alpha ln(1 + omega_c^2 t^2).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bath import BathSpec, QuadratureError
from .evolve import SimConfig, _recorded_steps

__all__ = [
    "TrajectoryEstimate",
    "mc_trajectories",
    "exact_dephasing",
    "dephasing_exponent",
]


@dataclass(frozen=True)
class TrajectoryEstimate:
    """Ensemble mean over jump trajectories with entrywise standard errors.

    ``stderr`` holds the max-abs entrywise standard error per recorded
    time; ``entry_stderr`` the full per-entry values (combined real and
    imaginary parts).
    """

    times: np.ndarray
    mean_states: np.ndarray       # (n_times, 2, 2) complex
    stderr: np.ndarray            # (n_times,)
    entry_stderr: np.ndarray      # (n_times, 2, 2) real
    n_traj: int
    seed: int


class _KahanSum:
    """Compensated elementwise accumulation, order-insensitive to roundoff."""

    def __init__(self, shape, dtype):
        self.total = np.zeros(shape, dtype=dtype)
        self._comp = np.zeros(shape, dtype=dtype)

    def add(self, value):
        y = value - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


def _drift_unitary(omega0: float, delta_t: float) -> np.ndarray:
    # exp(-i omega0 sigma_z dt), diagonal in the computational basis
    p = np.exp(-1j * omega0 * delta_t)
    return np.diag([p, np.conj(p)])


def mc_trajectories(cfg: SimConfig, n_traj: int, seed: int) -> TrajectoryEstimate:
    """Jump-trajectory unravelling of the bath-free feedback process.

    Each trajectory draws event times from a Poisson process of rate R,
    evolves unitarily under omega0 * sigma_z between events, and at each
    event picks outcome j with probability Tr(M_j rho M_j^dag), updating
    rho -> F_j M_j rho M_j^dag F_j^dag / prob.  Deterministic given
    (seed, n_traj): trajectory substreams are spawned from the seed by
    index, so results do not depend on execution order.
    """
    if cfg.bath.alpha != 0.0:
        raise ValueError(
            f"mc_trajectories requires bath.alpha = 0, got {cfg.bath.alpha}"
        )
    if n_traj < 1:
        raise ValueError(f"n_traj must be >= 1, got {n_traj}")

    rate = cfg.scheme.rate
    measurements = [m for m, _ in cfg.scheme.pairs]
    corrections = [f for _, f in cfg.scheme.pairs]
    steps = _recorded_steps(cfg.n_steps, cfg.record_every)
    times = np.array([k * cfg.dt for k in steps])
    n_times = len(times)

    mean = _KahanSum((n_times, 2, 2), complex)
    sq_re = _KahanSum((n_times, 2, 2), float)
    sq_im = _KahanSum((n_times, 2, 2), float)

    children = np.random.SeedSequence(seed).spawn(n_traj)
    snapshots = np.empty((n_times, 2, 2), dtype=complex)
    for child in children:
        rng = np.random.default_rng(child)
        rho = cfg.initial.copy()
        t_now = 0.0
        if rate > 0.0:
            t_event = rng.exponential(1.0 / rate)
        else:
            t_event = np.inf
        for i, t_rec in enumerate(times):
            while t_event <= t_rec:
                if cfg.omega0 != 0.0 and t_event > t_now:
                    u = _drift_unitary(cfg.omega0, t_event - t_now)
                    rho = u @ rho @ u.conj().T
                t_now = t_event
                probs = [
                    max(0.0, float(np.real(np.trace(m @ rho @ m.conj().T))))
                    for m in measurements
                ]
                total = sum(probs)
                draw = rng.random() * total
                j = 0
                acc = probs[0]
                while draw > acc and j + 1 < len(probs):
                    j += 1
                    acc += probs[j]
                m, f = measurements[j], corrections[j]
                post = f @ (m @ rho @ m.conj().T) @ f.conj().T
                rho = post / np.real(np.trace(post))
                t_event += rng.exponential(1.0 / rate)
            if cfg.omega0 != 0.0 and t_rec > t_now:
                u = _drift_unitary(cfg.omega0, t_rec - t_now)
                rho = u @ rho @ u.conj().T
            t_now = t_rec
            snapshots[i] = rho
        mean.add(snapshots)
        sq_re.add(np.real(snapshots) ** 2)
        sq_im.add(np.imag(snapshots) ** 2)

    mean_states = mean.total / n_traj
    if n_traj > 1:
        var_re = (sq_re.total - n_traj * np.real(mean_states) ** 2) / (n_traj - 1)
        var_im = (sq_im.total - n_traj * np.imag(mean_states) ** 2) / (n_traj - 1)
        entry_se = np.sqrt(np.clip(var_re + var_im, 0.0, None) / n_traj)
    else:
        entry_se = np.zeros((n_times, 2, 2))
    return TrajectoryEstimate(
        times=times,
        mean_states=mean_states,
        stderr=entry_se.reshape(n_times, -1).max(axis=1),
        entry_stderr=entry_se,
        n_traj=n_traj,
        seed=seed,
    )


def dephasing_exponent(t: float, bath: BathSpec) -> float:
    """Gamma(t) for pure dephasing.

    T = 0 Ohmic closed form 2 alpha ln(1 + omega_c^2 t^2); finite
    temperature by adaptive quadrature of
    4 J(w) coth(beta w / 2) (1 - cos(w t)) / w^2 (regular at w = 0).
    """
    if bath.zero_temperature:
        return 2.0 * bath.alpha * np.log1p((bath.omega_c * t) ** 2)

    beta = bath.beta

    def integrand(w):
        if w <= 0.0:
            return 4.0 * bath.alpha * t * t / beta  # w -> 0 limit
        arg = 0.5 * beta * w
        coth = 1.0 / np.tanh(arg) if arg > 1e-4 else 1.0 / arg + arg / 3.0
        return (
            4.0
            * bath.alpha
            * np.exp(-w / bath.omega_c)
            * coth
            * (1.0 - np.cos(w * t))
            / w
        )

    val, err = quad(integrand, 0.0, np.inf, limit=400)
    if err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureError(
            f"dephasing exponent quadrature error {err:.2e} at t={t}"
        )
    return float(val)


def exact_dephasing(
    initial: np.ndarray, t: float, omega0: float, bath: BathSpec
) -> np.ndarray:
    """Exact feedback-free dephasing: populations fixed, coherence damped.

    rho_01(t) = rho_01(0) exp(-2 i omega0 t) exp(-Gamma(t)).
    """
    initial = np.asarray(initial, dtype=complex)
    factor = np.exp(-2j * omega0 * t) * np.exp(-dephasing_exponent(t, bath))
    return np.array(
        [
            [initial[0, 0], initial[0, 1] * factor],
            [initial[1, 0] * np.conj(factor), initial[1, 1]],
        ]
    )
