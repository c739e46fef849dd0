"""Batch command-line front end.

Every run writes a CSV whose ``#`` header echoes the effective configuration
as ``# config: key = value`` lines; passing that CSV back through ``--config``
reproduces the run. Precedence: command-line flags > config file > defaults.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
3 resource cap exceeded. Failures print one line ``error: <kind>: <message>``
on stderr.
"""

from __future__ import annotations

import argparse
import io
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import adomian, impact_bounds
from .impact import impact_from_solution, peak_sweep, sqrt_law_volume_check
from .params import MacroParams, MicroParams, Schedule
from .reaction import ReactionFn
from .simulation import DEFAULT_EVENT_CAP, ResourceCapError, monte_carlo_rescaled_impact, write_event_dump
from .special import MLParams, mittag_leffler
from .volterra import VolterraGrid, solve_r_star

__all__ = ["main", "read_config"]


class UsageError(Exception):
    pass


# option table: key -> (flag, type, default, help)
OPTIONS = {
    "alpha": ("--alpha", float, 0.5, "tail exponent in (0, 1)"),
    "lambda": ("--lambda", float, 1.0, "criticality constant"),
    "mu_star": ("--mu-star", float, 1.0, "baseline limit"),
    "kappa": ("--kappa", float, 1.0, "permanent impact per order"),
    "gamma": ("--gamma", float, 0.3, "metaorder size ratio"),
    "gamma_list": ("--gamma-list", str, "", "comma-separated gamma values"),
    "reaction": ("--reaction", str, "power:c=1,beta=2", "power:c=..,beta=.. | linear:slope=.. | table:<path>"),
    "f": ("--f", str, "const", "const | const-extended | table:<path>"),
    "h": ("--h", float, 1.0 / 4096, "grid step"),
    "horizon": ("--horizon", float, 2.0, "rescaled horizon"),
    "T": ("--T", float, 2000.0, "microscopic horizon scale"),
    "paths": ("--paths", int, 2000, "Monte Carlo paths"),
    "seed": ("--seed", int, 12345, "master RNG seed"),
    "nodes": ("--nodes", int, 41, "output nodes for simulate"),
    "no_ab": ("--no-ab", bool, False, "skip the a/b Hawkes streams"),
    "event_cap": ("--event-cap", int, DEFAULT_EVENT_CAP, "per-stream event cap"),
    "order": ("--order", int, 2, "Adomian order J"),
    "t": ("--t", float, 0.25, "evaluation time"),
    "t_lo": ("--t-lo", float, 0.05, "fit window start"),
    "t_hi": ("--t-hi", float, 1.0, "fit window end"),
    "jobs": ("--jobs", int, 1, "worker threads"),
    "rho": ("--rho", float, 0.5, "Mittag-Leffler first index"),
    "beta": ("--beta", float, 1.0, "Mittag-Leffler second index"),
    "z": ("--z", float, 1.0, "Mittag-Leffler argument"),
    "dump_events": ("--dump-events", str, "", "directory for per-path event files"),
}

USES = {
    "solve": ["alpha", "lambda", "kappa", "gamma", "reaction", "f", "h", "horizon"],
    "simulate": ["alpha", "lambda", "mu_star", "kappa", "gamma", "reaction", "f", "horizon", "T",
                 "paths", "seed", "nodes", "no_ab", "event_cap", "jobs", "dump_events"],
    "bounds": ["alpha", "lambda", "kappa", "gamma", "reaction", "f", "h", "horizon", "order"],
    "fit-gamma": ["alpha", "lambda", "kappa", "gamma_list", "reaction", "f", "h", "horizon", "jobs"],
    "fit-volume": ["alpha", "lambda", "kappa", "gamma", "reaction", "f", "h", "t_lo", "t_hi"],
    "ml": ["rho", "beta", "z"],
    "check": ["seed"],
}

DEFAULT_GAMMAS = ",".join(repr(float(g)) for g in np.geomspace(0.05, 10.0, 12))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``# config: key = value`` header lines count too."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line.startswith("# config:"):
            line = line[len("# config:"):].strip()
        elif line.startswith("#") or not line:
            continue
        elif "=" not in line:
            continue  # data rows when reading a CSV back
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"unknown config key {key!r} in {path}")
        out[key] = value.strip()
    return out


def _coerce(key: str, value):
    typ = OPTIONS[key][1]
    try:
        if typ is bool:
            return value if isinstance(value, bool) else _parse_bool(value)
        return typ(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hawkes-impact",
        description="Hawkes market-impact model: Volterra limit and Monte Carlo simulation.",
        epilog="Precedence: command-line flags override --config values, which override defaults.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, keys in USES.items():
        sp = sub.add_parser(name, help=f"{name} pipeline")
        sp.add_argument("--config", help="key = value file (an output CSV works too)")
        sp.add_argument("--out", help="output CSV (default: stdout)")
        for key in keys:
            flag, typ, default, text = OPTIONS[key]
            if typ is bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None, help=text)
            else:
                sp.add_argument(flag, dest=key, type=str, default=None, help=f"{text} (default {default})")
    return parser


def effective_config(args: argparse.Namespace) -> dict:
    keys = USES[args.command]
    file_cfg = read_config(args.config) if args.config else {}
    cfg = {}
    for key in keys:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            cfg[key] = _coerce(key, flag_value)
        elif key in file_cfg:
            cfg[key] = _coerce(key, file_cfg[key])
        else:
            default = OPTIONS[key][2]
            if key == "gamma_list" and not default:
                default = DEFAULT_GAMMAS
            cfg[key] = default
    return cfg


def _schedule(text: str) -> Schedule:
    if text == "const":
        return Schedule.constant()
    if text == "const-extended":
        return Schedule.constant(extended=True)
    if text.startswith("table:"):
        return Schedule.from_table(text[len("table:"):])
    raise UsageError(f"unknown schedule {text!r}")


def _macro(cfg: dict, gamma: float | None = None) -> MacroParams:
    return MacroParams(
        alpha=cfg["alpha"],
        lam=cfg["lambda"],
        mu_star=cfg.get("mu_star", 1.0),
        kappa=cfg["kappa"],
        gamma=cfg.get("gamma", 0.0) if gamma is None else gamma,
    )


def _grid(cfg: dict) -> VolterraGrid:
    return VolterraGrid.from_horizon(cfg["horizon"], cfg["h"])


def _table(buf: io.StringIO, header: list[str], columns) -> None:
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


# subcommands ----------------------------------------------------------------


def run_solve(cfg, buf, meta):
    sol = solve_r_star(_macro(cfg), ReactionFn.parse(cfg["reaction"]), _schedule(cfg["f"]), _grid(cfg))
    curve = impact_from_solution(sol)
    t_peak, mi_peak = curve.peak()
    meta.append(f"peak_time = {t_peak!r}")
    meta.append(f"peak_mi = {mi_peak!r}")
    _table(buf, ["t", "forcing", "u", "r_star", "mi"], [sol.times, sol.forcing, sol.u, sol.r_star, curve.mi])


def run_simulate(cfg, buf, meta):
    macro = _macro(cfg)
    micro = MicroParams.from_macro(macro, cfg["T"], _schedule(cfg["f"]))
    phi = ReactionFn.parse(cfg["reaction"])
    nodes = np.linspace(0.0, cfg["horizon"], cfg["nodes"])
    on_path = None
    if cfg["dump_events"]:
        folder = Path(cfg["dump_events"])
        folder.mkdir(parents=True, exist_ok=True)

        def on_path(path):
            write_event_dump(path, folder / f"path_{path.index:06d}.txt")

    est = monte_carlo_rescaled_impact(
        micro, phi, cfg["paths"], nodes, cfg["seed"], n_jobs=cfg["jobs"],
        with_ab=not cfg["no_ab"], event_cap=cfg["event_cap"], on_path=on_path,
    )
    if est.price_mean is None:
        _table(buf, ["t", "mi_mean", "mi_stderr"], [nodes, est.mean, est.stderr])
    else:
        _table(buf, ["t", "mi_mean", "mi_stderr", "price_mean", "eprice_mean"],
               [nodes, est.mean, est.stderr, est.price_mean, est.eprice_mean])


def run_bounds(cfg, buf, meta):
    macro = _macro(cfg)
    phi = ReactionFn.parse(cfg["reaction"])
    sched = _schedule(cfg["f"])
    grid = _grid(cfg)
    lower, upper = impact_bounds(macro, phi, sched, grid)
    J = cfg["order"]
    series = adomian(macro, phi, sched, grid, J).impact()
    _table(buf, ["t", "mi_lower", "mi_upper", f"mi_adomian_{J}"], [grid.times, lower.mi, upper.mi, series.mi])


def run_fit_gamma(cfg, buf, meta):
    try:
        gammas = [float(g) for g in cfg["gamma_list"].split(",") if g.strip()]
    except ValueError as exc:
        raise UsageError(f"bad gamma list {cfg['gamma_list']!r}") from exc
    if len(gammas) < 2:
        raise UsageError("fit-gamma needs at least two gamma values")
    sweep = peak_sweep(
        _macro(cfg, gamma=gammas[0]), ReactionFn.parse(cfg["reaction"]), gammas,
        schedule=_schedule(cfg["f"]), h=cfg["h"], horizon=cfg["horizon"], n_jobs=cfg["jobs"],
    )
    meta.append(f"fit_prefactor = {sweep.fit.prefactor!r}")
    meta.append(f"fit_exponent = {sweep.fit.exponent!r}")
    meta.append(f"fit_r2 = {sweep.fit.r2!r}")
    _table(buf, ["gamma", "peak_time", "peak_mi"], [sweep.gammas, sweep.peak_times, sweep.peaks])


def run_fit_volume(cfg, buf, meta):
    grid = VolterraGrid.from_horizon(cfg["t_hi"], cfg["h"])
    sol = solve_r_star(_macro(cfg), ReactionFn.parse(cfg["reaction"]), _schedule(cfg["f"]), grid)
    curve = impact_from_solution(sol)
    rep = sqrt_law_volume_check(curve, cfg["t_lo"], cfg["t_hi"])
    meta.append(f"status = {rep.status}")
    if rep.fit is not None:
        meta.append(f"fit_prefactor = {rep.fit.prefactor!r}")
        meta.append(f"fit_exponent = {rep.fit.exponent!r}")
        meta.append(f"fit_r2 = {rep.fit.r2!r}")
    mask = (curve.times >= cfg["t_lo"]) & (curve.times <= cfg["t_hi"] + 1e-12)
    _table(buf, ["t", "mi"], [curve.times[mask], curve.mi[mask]])


def run_ml(cfg, buf, meta):
    value = mittag_leffler(MLParams(cfg["rho"], cfg["beta"]), cfg["z"])
    meta.append(f"value = {value!r}")
    _table(buf, ["rho", "beta", "z", "value"], [[cfg["rho"]], [cfg["beta"]], [cfg["z"]], [value]])


def run_check(cfg, buf, meta):
    from .checks import run_checks

    results = run_checks(seed=cfg["seed"])
    buf.write("name,status,detail\n")
    failed = 0
    for name, status, detail in results:
        buf.write(f"{name},{status},{detail}\n")
        failed += status == "FAIL"
    meta.append(f"failed = {failed}")
    return 1 if failed else 0


RUNNERS = {
    "solve": run_solve,
    "simulate": run_simulate,
    "bounds": run_bounds,
    "fit-gamma": run_fit_gamma,
    "fit-volume": run_fit_volume,
    "ml": run_ml,
    "check": run_check,
}


def _execute(argv) -> int:
    args = build_parser().parse_args(argv)
    cfg = effective_config(args)
    start = time.perf_counter()
    body = io.StringIO()
    meta: list[str] = []
    try:
        status = RUNNERS[args.command](cfg, body, meta) or 0
    except (ValueError, FileNotFoundError) as exc:
        raise UsageError(str(exc)) from exc
    elapsed = time.perf_counter() - start
    lines = [f"# tool: hawkes-impact {__version__}", f"# command: {args.command}"]
    lines += [f"# config: {k} = {_format(v)}" for k, v in cfg.items()]
    lines += [f"# seed: {cfg.get('seed', 'none')}", f"# wall_clock_s: {elapsed:.3f}"]
    lines += [f"# result: {m}" for m in meta]
    text = "\n".join(lines) + "\n" + body.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for m in meta:
        print(m, file=sys.stderr if not args.out else sys.stdout)
    return status


def main(argv=None) -> int:
    try:
        return _execute(argv)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"error: resource: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"error: runtime: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
