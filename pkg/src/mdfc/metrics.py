"""Fidelity and purity measures, Bloch-sphere averaging, and sweeps.

Sphere averages use Gauss-Legendre quadrature in cos(theta) crossed with
a uniform periodic rule in phi; every quadrature node spawns its own
propagation of the corresponding initial state.  The sweep harness
evaluates an objective on a rectangular grid, locates strict local
maxima (boundary points count, compared against their existing
neighbours), refines each by golden-section search, and reports every
optimum above (global max - 0.05) so multi-optimum structure survives.
"""

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bath import QuadratureError
from .evolve import HybridPropagator, SimConfig
from .qmat import bloch_to_density
from .scheme import FeedbackScheme

__all__ = [
    "fidelity_pure",
    "fidelity_uhlmann",
    "purity",
    "sphere_average_series",
    "average_fidelity_sphere",
    "pair_fidelity_series",
    "pair_average_fidelity",
    "unknown_state_average",
    "SweepAxis",
    "SweepResult",
    "sweep",
]


def fidelity_pure(psi: np.ndarray, rho: np.ndarray) -> float:
    """sqrt(<psi| rho |psi>) for a normalized pure reference."""
    psi = np.asarray(psi, dtype=complex)
    val = np.real(psi.conj() @ np.asarray(rho, dtype=complex) @ psi)
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


def _sqrt_psd_2x2(rho: np.ndarray) -> np.ndarray:
    # Closed form for PSD 2x2: sqrt(rho) = (rho + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
    det = max(np.real(np.linalg.det(rho)), 0.0)
    tr = np.real(np.trace(rho))
    denom = tr + 2.0 * np.sqrt(det)
    if denom <= 0.0:
        return np.zeros((2, 2), dtype=complex)
    return (rho + np.sqrt(det) * np.eye(2)) / np.sqrt(denom)


def _trace_sqrt_psd_2x2(m: np.ndarray) -> float:
    # sqrt(l1) + sqrt(l2) = sqrt(tr + 2 sqrt(det)) from the closed-form eigenvalues
    det = max(np.real(np.linalg.det(m)), 0.0)
    tr = max(np.real(np.trace(m)), 0.0)
    return float(np.sqrt(tr + 2.0 * np.sqrt(det)))


def fidelity_uhlmann(rho0: np.ndarray, rho_t: np.ndarray) -> float:
    """Tr sqrt(sqrt(rho0) rho_t sqrt(rho0)), via closed-form 2x2 square roots."""
    s0 = _sqrt_psd_2x2(np.asarray(rho0, dtype=complex))
    m = s0 @ np.asarray(rho_t, dtype=complex) @ s0
    return min(_trace_sqrt_psd_2x2(0.5 * (m + m.conj().T)), 1.0)


def purity(rho: np.ndarray) -> float:
    """Tr rho^2, between 1/2 (maximally mixed) and 1 (pure)."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


def _sphere_nodes(radius: float, nodes: tuple[int, int]):
    """(weight, bloch vector, pure direction ket) quadrature nodes.

    Gauss-Legendre in cos(theta) (weights halved to normalize the measure)
    times the n_phi-point periodic rule in phi.
    """
    n_theta, n_phi = nodes
    xs, ws = leggauss(n_theta)
    out = []
    for x, w in zip(xs, ws):
        sin_t = np.sqrt(max(0.0, 1.0 - x * x))
        half = np.sqrt(max((1.0 + x) / 2.0, 0.0)), np.sqrt(max((1.0 - x) / 2.0, 0.0))
        for j in range(n_phi):
            phi = 2.0 * np.pi * j / n_phi
            direction = np.array(
                [sin_t * np.cos(phi), sin_t * np.sin(phi), x]
            )
            ket = np.array(
                [half[0], np.exp(1j * phi) * half[1]], dtype=complex
            )
            out.append((0.5 * w / n_phi, radius * direction, ket))
    return out


def sphere_average_series(
    cfg: SimConfig,
    radius: float,
    nodes: tuple[int, int] = (16, 16),
    target: np.ndarray | None = None,
):
    """Sphere-averaged fidelity at every recorded time.

    ``target=None`` scores each node against its own initial direction
    ket (self-fidelity); otherwise against the fixed pure target.
    Returns (times, averages).
    """
    if not 0.0 < radius <= 1.0:
        raise ValueError(f"radius must lie in (0, 1], got {radius}")
    prop = HybridPropagator(cfg)
    total = np.zeros(len(prop.times))
    for weight, bloch, ket in _sphere_nodes(radius, nodes):
        series = prop.run(bloch_to_density(bloch))
        ref = ket if target is None else target
        total += weight * np.array(
            [fidelity_pure(ref, rho) for rho in series.states]
        )
    return prop.times, total


def average_fidelity_sphere(
    cfg: SimConfig,
    radius: float,
    t: float,
    target: np.ndarray,
    nodes: tuple[int, int] = (16, 16),
    check_convergence: bool = False,
) -> float:
    """Average of sqrt(<target| rho(a, t) |target>) over the radius-|a| sphere."""
    if t == 0.0:
        val = _sphere_average_initial(radius, target, nodes)
    else:
        run = dataclasses.replace(cfg, t_max=t)
        _, series = sphere_average_series(run, radius, nodes, target)
        val = float(series[-1])
    if check_convergence:
        doubled = (2 * nodes[0], 2 * nodes[1])
        if t == 0.0:
            ref = _sphere_average_initial(radius, target, doubled)
        else:
            run = dataclasses.replace(cfg, t_max=t)
            _, series = sphere_average_series(run, radius, doubled, target)
            ref = float(series[-1])
        if abs(ref - val) > 1e-4:
            raise QuadratureError(
                f"sphere quadrature shift {abs(ref - val):.2e} on doubling "
                f"{nodes} -> {doubled}"
            )
    return val


def _sphere_average_initial(radius, target, nodes):
    total = 0.0
    for weight, bloch, _ in _sphere_nodes(radius, nodes):
        total += weight * fidelity_pure(target, bloch_to_density(bloch))
    return float(total)


def pair_fidelity_series(theta: float, cfg: SimConfig):
    """Equal-weight average fidelity for the nonorthogonal pair at angle theta.

    Both members propagate under the identical scheme; returns
    (times, (f_plus + f_minus) / 2).
    """
    from .scheme import nonorthogonal_pair

    psi_plus, psi_minus = nonorthogonal_pair(theta)
    prop = HybridPropagator(cfg)
    total = np.zeros(len(prop.times))
    for psi in (psi_plus, psi_minus):
        series = prop.run(np.outer(psi, psi.conj()))
        total += 0.5 * np.array(
            [fidelity_pure(psi, rho) for rho in series.states]
        )
    return prop.times, total


def pair_average_fidelity(theta: float, cfg: SimConfig, t: float) -> float:
    """Pair-averaged fidelity at time t."""
    if t == 0.0:
        return 1.0
    run = dataclasses.replace(cfg, t_max=t)
    _, series = pair_fidelity_series(theta, run)
    return float(series[-1])


def unknown_state_average(
    scheme: FeedbackScheme,
    cfg: SimConfig,
    t: float,
    nodes: tuple[int, int] = (16, 16),
) -> float:
    """Sphere-averaged self-fidelity at radius 1 under the given scheme."""
    if t == 0.0:
        return 1.0
    run = dataclasses.replace(cfg, scheme=scheme, t_max=t)
    _, series = sphere_average_series(run, 1.0, nodes, target=None)
    return float(series[-1])


@dataclass(frozen=True)
class SweepAxis:
    """Named inclusive range; give exactly one of step or count."""

    name: str
    start: float
    stop: float
    step: float | None = None
    count: int | None = None

    def __post_init__(self):
        if (self.step is None) == (self.count is None):
            raise ValueError(f"axis {self.name!r}: give exactly one of step/count")
        if self.stop < self.start:
            raise ValueError(f"axis {self.name!r}: stop < start")
        if self.step is not None and self.step <= 0:
            raise ValueError(f"axis {self.name!r}: step must be > 0")
        if self.count is not None and self.count < 2:
            raise ValueError(f"axis {self.name!r}: count must be >= 2")

    def grid(self) -> np.ndarray:
        n = self.count
        if n is None:
            n = int(round((self.stop - self.start) / self.step)) + 1
        return np.linspace(self.start, self.stop, n)


@dataclass(frozen=True)
class SweepResult:
    """Grid evaluations plus refined local maxima above the reporting cut."""

    axes: tuple[str, ...]
    points: list[dict]
    values: np.ndarray
    optima: list[tuple[dict, float]]


REPORTING_MARGIN = 0.05


def _golden_max(f, lo: float, hi: float, tol: float):
    inv_phi = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def sweep(
    objective: Callable[..., float],
    axes: Sequence[SweepAxis],
    refine_tol: float = 1e-3,
) -> SweepResult:
    """Grid-evaluate the objective and refine every strict local maximum.

    The objective is called with one keyword per axis.  Interior grid
    points qualify when strictly greater than all neighbours along every
    axis; boundary points when strictly greater than their existing
    neighbours.  Ties (e.g. a constant objective) produce no optima.
    """
    axes = list(axes)
    if not axes:
        raise ValueError("sweep needs at least one axis")
    grids = [ax.grid() for ax in axes]
    shape = tuple(len(g) for g in grids)
    values = np.empty(shape)
    for idx in np.ndindex(shape):
        point = {ax.name: float(grids[d][idx[d]]) for d, ax in enumerate(axes)}
        values[idx] = objective(**point)
    if not np.all(np.isfinite(values)):
        raise ValueError("objective produced non-finite values on the grid")

    candidates = []
    for idx in np.ndindex(shape):
        is_max = True
        for d in range(len(axes)):
            for delta in (-1, +1):
                j = idx[d] + delta
                if 0 <= j < shape[d]:
                    nb = idx[:d] + (j,) + idx[d + 1 :]
                    if values[idx] <= values[nb]:
                        is_max = False
                        break
            if not is_max:
                break
        if is_max:
            candidates.append(idx)

    optima: list[tuple[dict, float]] = []
    for idx in candidates:
        point = {ax.name: float(grids[d][idx[d]]) for d, ax in enumerate(axes)}
        best = values[idx]
        passes = 2 if len(axes) > 1 else 1
        for _ in range(passes):
            for d, ax in enumerate(axes):
                g = grids[d]
                i = int(np.argmin(np.abs(g - point[ax.name])))
                lo = g[max(i - 1, 0)]
                hi = g[min(i + 1, len(g) - 1)]
                lo = min(lo, point[ax.name])
                hi = max(hi, point[ax.name])
                if hi - lo <= refine_tol:
                    continue

                def line(x, _d=d, _ax=ax):
                    trial = dict(point)
                    trial[_ax.name] = float(x)
                    return objective(**trial)

                x_best, f_best = _golden_max(line, lo, hi, refine_tol)
                if f_best >= best:
                    point[ax.name] = float(x_best)
                    best = float(f_best)
        optima.append((point, float(best)))

    # Merge refinements that collapsed onto the same point; report all
    # optima within the margin of the best one.
    merged: list[tuple[dict, float]] = []
    for point, val in sorted(optima, key=lambda pv: -pv[1]):
        dup = any(
            all(abs(point[k] - q[k]) <= max(refine_tol, 1e-12) for k in point)
            for q, _ in merged
        )
        if not dup:
            merged.append((point, val))
    if merged:
        cutoff = merged[0][1] - REPORTING_MARGIN
        merged = [(p, v) for p, v in merged if v >= cutoff]

    points = []
    for idx in np.ndindex(shape):
        points.append(
            {ax.name: float(grids[d][idx[d]]) for d, ax in enumerate(axes)}
        )
    return SweepResult(
        axes=tuple(ax.name for ax in axes),
        points=points,
        values=values,
        optima=merged,
    )
