"""Command-line interface: experiment commands, validation, CSV emission.

Usage: ``mdfc <command> --config <path> [--out <dir>] [--seed <n>]
[key=value ...]``.  Configuration is a strict JSON document (unknown keys
are errors); dotted key=value overrides take precedence over the file.
Every command writes one CSV (LF line endings, single header row, 15
significant digits) plus a JSON manifest holding the fully resolved
configuration, seed, version, and output paths, sufficient to reproduce
the CSV byte for byte.
"""

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bath import BathSpec, QuadratureError
from .evolve import (
    SimConfig,
    SolverError,
    lindblad_propagate,
    propagate_hybrid,
)
from .metrics import (
    SweepAxis,
    average_fidelity_sphere,
    fidelity_uhlmann,
    pair_average_fidelity,
    pair_fidelity_series,
    purity,
    sphere_average_series,
    sweep,
)
from .oracle import exact_dephasing, mc_trajectories
from .qmat import KET_0, KET_1, bloch_to_density
from .scheme import (
    FeedbackScheme,
    SchemeError,
    do_nothing_scheme,
    mixed_protection_scheme,
    nonorthogonal_pair,
    pair_protection_scheme,
    preparation_scheme,
    y_rotation,
)

COMMANDS = (
    "prepare",
    "purity",
    "protect-pair",
    "protect-unknown",
    "protect-mixed",
    "sweep",
    "validate",
)

SCHEME_KINDS = (
    "preparation",
    "pair_zy",
    "pair_xy",
    "pair_xz",
    "mixed",
    "do_nothing",
)


class ConfigError(ValueError):
    """Configuration file or override problem; message names the key."""


# ----------------------------------------------------------------------
# configuration parsing
# ----------------------------------------------------------------------

def _require_number(cfg: dict, path: str, default=None):
    block, _, key = path.rpartition(".")
    d = cfg[block] if block else cfg
    if key not in d or d[key] is None:
        if default is None:
            raise ConfigError(f"missing required key: {path}")
        return float(default)
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key {path} must be a number, got {v!r}")
    return float(v)


def _check_unknown(block: dict, allowed: set, prefix: str = "") -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key: {prefix}{key}")


def _load_raw(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {p}: {exc}") from exc


def parse_config(path, overrides=()) -> dict:
    """Load, override, strictly validate, and default-fill a configuration."""
    return resolve_config(apply_overrides(_load_raw(path), overrides))


def resolve_config(raw: dict) -> dict:
    """Validate a raw config dict and expand all defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_unknown(raw, {"model", "bath", "scheme", "solver", "sweep"})
    for block in ("bath", "scheme"):
        if block not in raw:
            raise ConfigError(f"missing required block: {block}")
        if not isinstance(raw[block], dict):
            raise ConfigError(f"block {block} must be a JSON object")
    for block in ("model", "solver", "sweep"):
        if block in raw and not isinstance(raw[block], dict):
            raise ConfigError(f"block {block} must be a JSON object")

    cfg = {
        "model": dict(raw.get("model", {})),
        "bath": dict(raw["bath"]),
        "scheme": dict(raw["scheme"]),
        "solver": dict(raw.get("solver", {})),
        "sweep": dict(raw.get("sweep", {})),
    }

    _check_unknown(cfg["model"], {"omega0"}, "model.")
    cfg["model"]["omega0"] = _require_number(cfg, "model.omega0", default=0.0)

    _check_unknown(cfg["bath"], {"alpha", "omega_c", "beta", "T0"}, "bath.")
    alpha = _require_number(cfg, "bath.alpha")
    if alpha < 0:
        raise ConfigError(f"bath.alpha must be >= 0, got {alpha}")
    omega_c = _require_number(cfg, "bath.omega_c", default=1.0)
    if omega_c <= 0:
        raise ConfigError(f"bath.omega_c must be > 0, got {omega_c}")
    t0_flag = cfg["bath"].get("T0", "beta" not in cfg["bath"])
    if not isinstance(t0_flag, bool):
        raise ConfigError(f"bath.T0 must be a boolean, got {t0_flag!r}")
    if t0_flag and "beta" in cfg["bath"]:
        raise ConfigError("give exactly one of bath.beta or bath.T0")
    beta = None
    if not t0_flag:
        beta = _require_number(cfg, "bath.beta")
        if beta <= 0:
            raise ConfigError(f"bath.beta must be > 0, got {beta}")
    cfg["bath"] = {"alpha": alpha, "omega_c": omega_c}
    if beta is None:
        cfg["bath"]["T0"] = True
    else:
        cfg["bath"]["beta"] = beta

    _check_unknown(
        cfg["scheme"],
        {"kind", "chi", "eta", "zeta", "theta", "p_plus", "R"},
        "scheme.",
    )
    kind = cfg["scheme"].get("kind")
    if kind not in SCHEME_KINDS:
        raise ConfigError(
            f"scheme.kind must be one of {SCHEME_KINDS}, got {kind!r}"
        )
    rate = _require_number(cfg, "scheme.R", default=0.0)
    if rate < 0:
        raise ConfigError(f"scheme.R must be >= 0, got {rate}")
    scheme = {"kind": kind, "R": rate}
    if kind == "preparation":
        scheme["eta"] = _require_number(cfg, "scheme.eta")
        scheme["zeta"] = _require_number(cfg, "scheme.zeta", default=0.0)
        if not 0.0 <= scheme["eta"] <= math.pi:
            raise ConfigError(
                f"scheme.eta must lie in [0, pi], got {scheme['eta']}"
            )
        if not 0.0 <= scheme["zeta"] <= 2 * math.pi:
            raise ConfigError(
                f"scheme.zeta must lie in [0, 2*pi], got {scheme['zeta']}"
            )
    elif kind.startswith("pair_"):
        scheme["chi"] = _require_number(cfg, "scheme.chi")
        if not 0.0 <= scheme["chi"] <= math.pi / 2:
            raise ConfigError(
                f"scheme.chi must lie in [0, pi/2], got {scheme['chi']}"
            )
        scheme["eta"] = _require_number(cfg, "scheme.eta")
        if "theta" in cfg["scheme"]:
            scheme["theta"] = _require_number(cfg, "scheme.theta")
            if not 0.0 <= scheme["theta"] <= math.pi:
                raise ConfigError(
                    f"scheme.theta must lie in [0, pi], got {scheme['theta']}"
                )
    elif kind == "mixed":
        scheme["theta"] = _require_number(cfg, "scheme.theta")
        if not 0.0 < scheme["theta"] < math.pi:
            raise ConfigError(
                f"scheme.theta must lie in (0, pi), got {scheme['theta']}"
            )
        scheme["p_plus"] = _require_number(cfg, "scheme.p_plus", default=0.5)
        if not 0.0 < scheme["p_plus"] < 1.0:
            raise ConfigError(
                f"scheme.p_plus must lie in (0, 1), got {scheme['p_plus']}"
            )
        if "eta" in cfg["scheme"]:
            scheme["eta"] = _require_number(cfg, "scheme.eta")
    elif kind == "do_nothing":
        scheme["R"] = 0.0
    cfg["scheme"] = scheme

    _check_unknown(
        cfg["solver"], {"t_max", "dt", "inner_nodes", "record_every"}, "solver."
    )
    solver = {
        "t_max": _require_number(cfg, "solver.t_max", default=1.0),
        "dt": _require_number(cfg, "solver.dt", default=0.01),
        "inner_nodes": int(
            _require_number(cfg, "solver.inner_nodes", default=32)
        ),
        "record_every": int(
            _require_number(cfg, "solver.record_every", default=10)
        ),
    }
    if solver["t_max"] <= 0:
        raise ConfigError(f"solver.t_max must be > 0, got {solver['t_max']}")
    if solver["dt"] <= 0:
        raise ConfigError(f"solver.dt must be > 0, got {solver['dt']}")
    if solver["inner_nodes"] < 4:
        raise ConfigError(
            f"solver.inner_nodes must be >= 4, got {solver['inner_nodes']}"
        )
    if solver["record_every"] < 1:
        raise ConfigError(
            f"solver.record_every must be >= 1, got {solver['record_every']}"
        )
    cfg["solver"] = solver

    _check_unknown(cfg["sweep"], {"axes", "refine_tol"}, "sweep.")
    axes_raw = cfg["sweep"].get("axes", {})
    if not isinstance(axes_raw, dict):
        raise ConfigError("sweep.axes must be a JSON object")
    axes = {}
    for name, spec in axes_raw.items():
        if not isinstance(spec, dict):
            raise ConfigError(f"sweep.axes.{name} must be a JSON object")
        _check_unknown(spec, {"start", "stop", "step", "count"},
                       f"sweep.axes.{name}.")
        axis = {
            "start": _require_number({"a": spec}, "a.start"),
            "stop": _require_number({"a": spec}, "a.stop"),
        }
        if ("step" in spec) == ("count" in spec):
            raise ConfigError(
                f"sweep.axes.{name}: give exactly one of step or count"
            )
        if "step" in spec:
            axis["step"] = _require_number({"a": spec}, "a.step")
            if axis["step"] <= 0:
                raise ConfigError(f"sweep.axes.{name}.step must be > 0")
        else:
            axis["count"] = int(_require_number({"a": spec}, "a.count"))
            if axis["count"] < 2:
                raise ConfigError(f"sweep.axes.{name}.count must be >= 2")
        axes[name] = axis
    refine_tol = _require_number(cfg, "sweep.refine_tol", default=1e-3)
    if refine_tol <= 0:
        raise ConfigError(f"sweep.refine_tol must be > 0, got {refine_tol}")
    cfg["sweep"] = {"axes": axes, "refine_tol": refine_tol}
    return cfg


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply dotted key=value pairs (JSON-parsed values) onto a raw config."""
    out = json.loads(json.dumps(raw))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            raise ConfigError(
                f"override value {text!r} for {dotted} is not valid JSON"
            ) from None
        node = out
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {dotted} crosses a scalar")
        node[parts[-1]] = value
    return out


# ----------------------------------------------------------------------
# builders
# ----------------------------------------------------------------------

def build_bath(cfg: dict) -> BathSpec:
    b = cfg["bath"]
    return BathSpec(b["alpha"], b["omega_c"], b.get("beta"))


def build_scheme(cfg: dict, **replacements) -> FeedbackScheme:
    s = dict(cfg["scheme"])
    s.update(replacements)
    kind = s["kind"]
    try:
        if kind == "preparation":
            return preparation_scheme(s["eta"], s["zeta"], rate=s["R"])
        if kind.startswith("pair_"):
            axis, correction = kind[len("pair_"):]
            return pair_protection_scheme(
                s["chi"], s["eta"], axis=axis, correction=correction, rate=s["R"]
            )
        if kind == "mixed":
            if "eta" in s:
                return mixed_sweep_scheme(
                    s["theta"], s["p_plus"], s["eta"], rate=s["R"]
                )
            return mixed_protection_scheme(s["theta"], s["p_plus"], rate=s["R"])
        return do_nothing_scheme()
    except KeyError as exc:
        raise ConfigError(f"scheme.kind {kind!r} needs scheme.{exc.args[0]}") from exc


def mixed_sweep_scheme(
    theta: float, p_plus: float, eta: float, rate: float
) -> FeedbackScheme:
    """Mixed-state scheme with the correction angle swept away from optimal.

    Measurement basis solved from (theta, p_plus); corrections are the
    +-eta rotations about y.
    """
    base = mixed_protection_scheme(theta, p_plus, rate=rate)
    (m_plus, _), (m_minus, _) = base.pairs
    return FeedbackScheme(
        ((m_plus, y_rotation(eta, +1)), (m_minus, y_rotation(eta, -1))), rate
    )


def build_simconfig(cfg: dict, initial, scheme=None, t_max=None) -> SimConfig:
    solver = cfg["solver"]
    return SimConfig(
        omega0=cfg["model"]["omega0"],
        initial=initial,
        scheme=scheme if scheme is not None else build_scheme(cfg),
        bath=build_bath(cfg),
        t_max=t_max if t_max is not None else solver["t_max"],
        dt=solver["dt"],
        inner_nodes=solver["inner_nodes"],
        record_every=solver["record_every"],
    )


def mixed_initial_state(theta: float, p_plus: float) -> np.ndarray:
    psi_plus, psi_minus = nonorthogonal_pair(theta)
    return p_plus * np.outer(psi_plus, psi_plus.conj()) + (
        1.0 - p_plus
    ) * np.outer(psi_minus, psi_minus.conj())


def preparation_target(eta: float, zeta: float) -> np.ndarray:
    return np.cos(eta / 2) * KET_0 + np.exp(1j * zeta) * np.sin(eta / 2) * KET_1


# ----------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return f"{value:.15g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(path: Path, manifest: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _eta_axis(cfg: dict, default_count: int = 61) -> SweepAxis:
    axes = cfg["sweep"]["axes"]
    if "eta" in axes:
        a = axes["eta"]
        return SweepAxis("eta", a["start"], a["stop"],
                         a.get("step"), a.get("count"))
    return SweepAxis("eta", 0.0, math.pi, count=default_count)


def _config_axes(cfg: dict) -> list[SweepAxis]:
    axes = cfg["sweep"]["axes"]
    if not axes:
        raise ConfigError("sweep.axes is required for this command")
    return [
        SweepAxis(name, a["start"], a["stop"], a.get("step"), a.get("count"))
        for name, a in axes.items()
    ]


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def cmd_prepare(cfg, out, seed, nodes, trajectories):
    if cfg["scheme"]["kind"] != "preparation":
        raise ConfigError("prepare requires scheme.kind = preparation")
    zeta = cfg["scheme"]["zeta"]
    t = cfg["solver"]["t_max"]
    template = build_simconfig(cfg, bloch_to_density([0, 0, 0.5]))
    rows = []
    for eta in _eta_axis(cfg).grid():
        scheme = build_scheme(cfg, eta=float(eta))
        run = dataclasses.replace(template, scheme=scheme)
        value = average_fidelity_sphere(
            run, 0.5, t, preparation_target(float(eta), zeta), nodes
        )
        rows.append((float(eta), value))
    return ("eta", "avg_fidelity"), rows, {}


FIG2_INITIAL_BLOCH = (0.5 * math.sin(math.pi / 3), 0.0, 0.5 * math.cos(math.pi / 3))


def cmd_purity(cfg, out, seed, nodes, trajectories):
    initial = bloch_to_density(FIG2_INITIAL_BLOCH)
    series = propagate_hybrid(build_simconfig(cfg, initial))
    rows = [(float(t), purity(rho)) for t, rho in zip(series.times, series.states)]
    return ("t", "purity"), rows, {"initial_bloch": list(FIG2_INITIAL_BLOCH)}


def cmd_protect_pair(cfg, out, seed, nodes, trajectories):
    theta = cfg["scheme"].get("theta")
    if theta is None:
        raise ConfigError("protect-pair requires scheme.theta")
    sim = build_simconfig(cfg, bloch_to_density([0, 0, 0]))
    times, values = pair_fidelity_series(theta, sim)
    rows = [(float(t), float(f)) for t, f in zip(times, values)]
    return ("t", "fidelity"), rows, {}


def cmd_protect_unknown(cfg, out, seed, nodes, trajectories):
    sim = build_simconfig(cfg, bloch_to_density([0, 0, 0]))
    times, values = sphere_average_series(sim, 1.0, nodes, target=None)
    rows = [(float(t), float(f)) for t, f in zip(times, values)]
    return ("t", "avg_fidelity"), rows, {"nodes": list(nodes)}


def cmd_protect_mixed(cfg, out, seed, nodes, trajectories):
    if cfg["scheme"]["kind"] != "mixed":
        raise ConfigError("protect-mixed requires scheme.kind = mixed")
    theta = cfg["scheme"]["theta"]
    p_plus = cfg["scheme"]["p_plus"]
    initial = mixed_initial_state(theta, p_plus)
    rows = []
    for eta in _eta_axis(cfg).grid():
        scheme = mixed_sweep_scheme(theta, p_plus, float(eta), cfg["scheme"]["R"])
        series = propagate_hybrid(build_simconfig(cfg, initial, scheme=scheme))
        for t, rho in zip(series.times, series.states):
            rows.append((float(eta), float(t), fidelity_uhlmann(initial, rho)))
    return ("eta", "t", "fidelity"), rows, {}


def _sweep_objective(cfg, nodes):
    kind = cfg["scheme"]["kind"]
    t = cfg["solver"]["t_max"]
    if kind == "preparation":
        template = build_simconfig(cfg, bloch_to_density([0, 0, 0.5]))

        def objective(**point):
            eta = point.get("eta", cfg["scheme"]["eta"])
            zeta = point.get("zeta", cfg["scheme"]["zeta"])
            run = dataclasses.replace(
                template, scheme=build_scheme(cfg, eta=eta, zeta=zeta)
            )
            return average_fidelity_sphere(
                run, 0.5, t, preparation_target(eta, zeta), nodes
            )

        return objective
    if kind.startswith("pair_"):
        theta = cfg["scheme"].get("theta")
        if theta is None:
            raise ConfigError("sweep over a pair scheme requires scheme.theta")
        template = build_simconfig(cfg, bloch_to_density([0, 0, 0]))

        def objective(**point):
            repl = {k: v for k, v in point.items() if k in ("chi", "eta")}
            run = dataclasses.replace(template, scheme=build_scheme(cfg, **repl))
            return pair_average_fidelity(theta, run, t)

        return objective
    if kind == "mixed":
        theta = cfg["scheme"]["theta"]
        p_plus = cfg["scheme"]["p_plus"]
        initial = mixed_initial_state(theta, p_plus)
        template = build_simconfig(cfg, initial)

        def objective(**point):
            scheme = mixed_sweep_scheme(
                theta, p_plus, point["eta"], cfg["scheme"]["R"]
            )
            run = dataclasses.replace(template, scheme=scheme)
            series = propagate_hybrid(run)
            return fidelity_uhlmann(initial, series.states[-1])

        return objective
    raise ConfigError(f"scheme.kind {kind!r} defines no sweep objective")


def cmd_sweep(cfg, out, seed, nodes, trajectories):
    axes = _config_axes(cfg)
    result = sweep(_sweep_objective(cfg, nodes), axes,
                   cfg["sweep"]["refine_tol"])
    rows = [
        tuple(point[name] for name in result.axes) + (float(value),)
        for point, value in zip(result.points, result.values.reshape(-1))
    ]
    extra = {
        "optima": [
            {"point": point, "value": value} for point, value in result.optima
        ]
    }
    return result.axes + ("value",), rows, extra


def cmd_validate(cfg, out, seed, nodes, trajectories):
    checks = []

    # Feedback-free bath dynamics against the exact dephasing solution.
    plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    deph_cfg = build_simconfig(cfg, plus, scheme=do_nothing_scheme())
    series = propagate_hybrid(deph_cfg)
    err = 0.0
    for t, rho in zip(series.times[1:], series.states[1:]):
        ref = exact_dephasing(plus, t, deph_cfg.omega0, deph_cfg.bath)
        err = max(err, abs(abs(rho[0, 1]) - abs(ref[0, 1])) / abs(ref[0, 1]))
    checks.append(("exact_dephasing", err, 1e-3))

    # Hybrid solver degenerates to the closed Lindblad propagation at alpha=0.
    closed = dataclasses.replace(
        build_simconfig(cfg, bloch_to_density([0.3, 0.1, 0.4])),
        bath=BathSpec(0.0, cfg["bath"]["omega_c"], cfg["bath"].get("beta")),
    )
    hyb = propagate_hybrid(closed)
    lin = lindblad_propagate(closed)
    checks.append(
        ("lindblad_consistency", float(np.max(np.abs(hyb.states - lin.states))),
         1e-9)
    )

    # Trajectory unravelling against the master equation (3 standard errors).
    est = mc_trajectories(closed, trajectories, seed)
    dev = np.abs(est.mean_states - lin.states)
    ratio = float(np.max(dev / (3.0 * est.entry_stderr + 1e-12)))
    checks.append(("mc_unravelling", ratio, 1.0))

    # Step-size convergence of the configured scheme-plus-bath run.
    full_cfg = build_simconfig(cfg, bloch_to_density([0.3, 0.1, 0.4]))
    coarse = propagate_hybrid(full_cfg)
    fine = propagate_hybrid(
        dataclasses.replace(
            full_cfg, dt=full_cfg.dt / 2, record_every=2 * full_cfg.record_every
        )
    )
    drift = float(np.max(np.abs(coarse.states - fine.states)))
    checks.append(("step_halving", drift, 1e-6))

    rows = [
        (name, err, tol, bool(err <= tol)) for name, err, tol in checks
    ]
    extra = {
        "trajectories": trajectories,
        "all_passed": all(r[3] for r in rows),
    }
    return ("check_name", "max_error", "tolerance", "pass"), rows, extra


HANDLERS = {
    "prepare": cmd_prepare,
    "purity": cmd_purity,
    "protect-pair": cmd_protect_pair,
    "protect-unknown": cmd_protect_unknown,
    "protect-mixed": cmd_protect_mixed,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def _parse_nodes(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(
            f"--nodes must be 'n_theta,n_phi', got {text!r}"
        ) from None
    if a < 2 or b < 2:
        raise ConfigError(f"--nodes must both be >= 2, got {text!r}")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdfc",
        description="Feedback-controlled dephasing-qubit simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument(
            "--nodes",
            default="16,16",
            help="sphere quadrature nodes as 'n_theta,n_phi'",
        )
        p.add_argument(
            "--trajectories",
            type=int,
            default=20000,
            help="Monte-Carlo trajectory count (validate)",
        )
        p.add_argument(
            "overrides",
            nargs="*",
            metavar="key=value",
            help="dotted config overrides, e.g. bath.alpha=0.1",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        nodes = _parse_nodes(args.nodes)
        cfg = parse_config(args.config, args.overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        handler = HANDLERS[args.command]
        header, rows, extra = handler(
            cfg, out_dir, args.seed, nodes, args.trajectories
        )
    except (ConfigError, SchemeError, ValueError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return 2
    except (SolverError, QuadratureError) as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return 2

    stem = args.command
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, header, rows)
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "nodes": list(nodes),
        "config": cfg,
        "overrides": list(args.overrides),
        "outputs": [csv_path.name],
    }
    manifest.update(extra)
    write_manifest(out_dir / f"{stem}_manifest.json", manifest)

    if args.command == "validate" and not extra["all_passed"]:
        failed = [r[0] for r in rows if not r[3]]
        print(f"error: validate: failed checks: {', '.join(failed)}",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
