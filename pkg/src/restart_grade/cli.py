"""Command-line batch runner.

Every command writes a CSV report (fixed header per command, floats with 12
significant digits) and a JSON summary.  With ``--out PATH`` the CSV goes to
PATH and the summary to PATH.json; otherwise the CSV is printed and the
summary goes to stderr.  Failures print a JSON error object to stdout and
exit nonzero.  ``--config FILE`` supplies defaults for any flag; flags given
on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import platform
import sys
import time
from importlib import metadata

import numpy as np
import scipy

from .cache import TableCache
from .errors import ConfigError, RestartGradeError

log = logging.getLogger("restart_grade")

HEADERS = {
    "grade": ["d", "x", "L", "g_star", "bellman_residual", "sweeps", "c_out", "c_in", "restart_set_size"],
    "bounds": ["d", "x", "L", "h", "h_star", "lower", "upper", "floor_part", "C_plus", "C_minus", "g_star"],
    "mc": ["strategy", "mean", "stderr", "replicates", "censored", "seed", "diff_from_best", "diff_stderr"],
    "disk": ["R", "x0", "exact", "lower", "upper", "delta_bound", "delta", "mu_B", "mu_D",
             "resistance", "h1", "asymptotic"],
    "bm": ["d", "r0", "x", "h", "gradient_sq", "grade", "grade_quadrature"],
    "kernel": ["x", "value"],
    "verify": ["suite", "check", "measured", "threshold", "passed"],
}


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, "#.12g")
    if isinstance(v, tuple):
        return ";".join(str(int(c)) for c in v)
    return str(v)


def parse_point(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(c) for c in text)
    if isinstance(text, (int, np.integer)):
        return (int(text),)
    try:
        return tuple(int(c) for c in str(text).replace(";", ",").split(",") if c.strip())
    except ValueError:
        raise ConfigError(f"cannot parse lattice point {text!r}") from None


# -- commands -----------------------------------------------------------------------


def cmd_grade(cfg, cache):
    from .grade import RestartProblem, solve_grade, threshold_gap

    rows = []
    for x in cfg["x"]:
        p = RestartProblem(cfg["d"], x, L=cfg.get("L"))
        sol = solve_grade(p, backend=cfg.get("backend"))
        gap = threshold_gap(sol)
        rows.append([p.d, tuple(p.x0), p.L, sol.g_star, sol.residual, sol.iterations,
                     gap.c_out, gap.c_in, int(sol.restart_mask.sum())])
    return rows, {"g_star": [r[3] for r in rows]}


def _profile(d, L, cache):
    from .harmonic import build_profile, green_table, potential_kernel

    if d <= 2:
        return build_profile(potential_kernel(L, d=d, cache=cache))
    return build_profile(green_table(L, d=d, cache=cache))


def cmd_bounds(cfg, cache):
    from .bounds import fit_envelope, grade_bounds, h_star
    from .grade import RestartProblem, solve_grade

    d = cfg["d"]
    L = cfg.get("L") or {1: 64, 2: 64}.get(d, 14)
    prof = _profile(d, L, cache)
    env = fit_envelope(prof)
    rows = []
    for x in cfg["x"]:
        b = grade_bounds(prof, env, x)
        g = solve_grade(RestartProblem(d, x), backend=cfg.get("backend")).g_star if cfg.get("with_grade") else math.nan
        rows.append([d, tuple(x), L, prof.h[x], h_star(prof, x), b.lower, b.upper, b.floor_part,
                     env.C_plus, env.C_minus, g])
    return rows, {"C_plus": env.C_plus, "C_minus": env.C_minus, "floor": env.floor_value}


def cmd_mc(cfg, cache):
    from .grade import RestartProblem, solve_grade
    from .montecarlo import StrategySpec, compare_strategies, simulate_strategy

    if cfg.get("seed") is None:
        raise ConfigError("mc requires --seed")
    d = cfg["d"]
    x0 = cfg["x"][0]
    specs = []
    for name in cfg.get("strategy") or ["euclidean"]:
        if name == "euclidean":
            specs.append(StrategySpec.euclidean(x0, cfg.get("rho")))
        elif name == "never":
            specs.append(StrategySpec.never(x0))
        elif name == "h":
            L = cfg.get("L") or max(16, 2 * int(math.ceil(math.sqrt(sum(c * c for c in x0)))) + 4)
            specs.append(StrategySpec.h_threshold(x0, _profile(d, L, cache)))
        elif name == "optimal":
            specs.append(StrategySpec.from_solution(solve_grade(RestartProblem(d, x0, L=cfg.get("L")))))
        else:
            raise ConfigError(f"unknown strategy {name!r} (euclidean, h, never, optimal)")
    common = dict(replicates=cfg.get("replicates") or 10_000, cap=cfg.get("cap"), seed=cfg["seed"],
                  backend=cfg.get("backend"))
    if len(specs) == 1:
        est = simulate_strategy(d, (0,) * d, x0, specs[0], **common)
        table = [(specs[0].name, est, math.nan, math.nan)]
    else:
        table = compare_strategies(specs, d, x0, **common)
    rows = [[name, e.mean, e.stderr, e.replicates, e.censored, e.seed, df, dse] for name, e, df, dse in table]
    return rows, {"means": {r[0]: r[1] for r in rows}}


def cmd_disk(cfg, cache):
    from .bounds import fit_envelope
    from .disk import disk_report
    from .harmonic import build_profile, potential_kernel

    R = cfg.get("R")
    if R is None:
        raise ConfigError("disk requires --R")
    prof = build_profile(potential_kernel(max(int(math.ceil(R)) + 3, 8), cache=cache))
    env = fit_envelope(prof)
    rows = []
    for x0 in cfg["x"]:
        r = disk_report(R, x0, prof, env)
        rows.append([r.R, tuple(r.x0), r.exact, r.lower, r.upper, r.delta_bound, r.delta, r.mu_B, r.mu_D,
                     r.resistance, r.sets.h1, r.asymptotic])
    return rows, {"exact": [r[2] for r in rows]}


def cmd_bm(cfg, cache):
    from .continuum import BmProblem, bm_grade, bm_grade_quadrature, bm_gradient_sq, bm_h

    p = BmProblem(cfg["d"], cfg.get("r0", 1.0))
    rows = []
    for r in cfg.get("radius") or []:
        rows.append([p.d, p.r0, r, bm_h(r, p), bm_gradient_sq(r, p), bm_grade(r, p), bm_grade_quadrature(r, p)])
    return rows, {"grade": [r[5] for r in rows]}


def cmd_kernel(cfg, cache):
    from .harmonic import green_table, potential_kernel

    d = cfg["d"]
    L = cfg.get("L") or 16
    tab = potential_kernel(L, d=d, cache=cache) if d <= 2 else green_table(L, d=d, cache=cache)
    rows = [[tuple(int(c) for c in x), float(v)] for x, v in tab.field.items()]
    return rows, {"method": tab.method, "accuracy": tab.accuracy, "kind": tab.kind, "L": tab.L}


def cmd_verify(cfg, cache):
    from .verify import run_suite

    rows = []
    for suite in cfg["suite"]:
        for c in run_suite(suite, cache=cache):
            rows.append([c.suite, c.name, float(c.measured), float(c.threshold), bool(c.passed)])
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.suite}: {c.name}  measured={fmt(float(c.measured))}"
                  f"  threshold={fmt(float(c.threshold))}", file=sys.stderr)
    failed = sum(not r[-1] for r in rows)
    return rows, {"checks": len(rows), "failed": failed}


COMMANDS = {
    "grade": cmd_grade, "bounds": cmd_bounds, "mc": cmd_mc, "disk": cmd_disk,
    "bm": cmd_bm, "kernel": cmd_kernel, "verify": cmd_verify,
}


# -- argument handling ------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="restart-grade", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default parameters")
    common.add_argument("--out", help="CSV report path (summary goes to PATH.json)")
    common.add_argument("--cache", help="table cache directory")
    common.add_argument("--backend", choices=["compiled", "python"])
    common.add_argument("-v", "--verbose", action="store_true", default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("grade", "optimal-restart grade on a truncated box")
    p.add_argument("--d", type=int)
    p.add_argument("--x", action="append", help="start point, e.g. 3 or 8,0 (repeatable)")
    p.add_argument("--L", type=int)

    p = add("bounds", "harmonic-profile bounds on the grade")
    p.add_argument("--d", type=int)
    p.add_argument("--x", action="append")
    p.add_argument("--L", type=int, help="profile table radius")
    p.add_argument("--with-grade", action="store_true", default=None, dest="with_grade")

    p = add("mc", "Monte Carlo estimate of restart strategies")
    p.add_argument("--d", type=int)
    p.add_argument("--x", action="append")
    p.add_argument("--strategy", action="append", help="euclidean, h, never or optimal (repeatable)")
    p.add_argument("--rho", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int)

    p = add("disk", "exact hitting times on a lattice disk")
    p.add_argument("--R", type=float)
    p.add_argument("--x0", action="append", dest="x")

    p = add("bm", "Brownian closed forms")
    p.add_argument("--d", type=int)
    p.add_argument("--r0", type=float)
    p.add_argument("--x", action="append", type=float, dest="radius", help="start radius (repeatable)")

    p = add("kernel", "tabulate a(x) (d <= 2) or G(x) (d >= 3)")
    p.add_argument("--d", type=int)
    p.add_argument("--L", type=int)

    p = add("verify", "run verification suites")
    p.add_argument("suite", nargs="*")
    return ap


def _point_list(xs, d):
    """Config values may hold one point or a list of points."""
    if not isinstance(xs, list):
        return [xs]
    if xs and all(isinstance(c, int) for c in xs) and d != 1:
        return [xs]  # a single point given as a coordinate list
    return xs


def resolve_config(args):
    """Merge the JSON config (if any) with explicitly given flags."""
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        if "x0" in cfg and "x" not in cfg:
            cfg["x"] = cfg.pop("x0")
    for key, val in vars(args).items():
        if key in ("config", "command"):
            continue
        if val is not None and val != []:
            cfg[key] = val
    cmd = args.command
    if cmd in ("grade", "bounds", "mc", "disk"):
        xs = cfg.get("x")
        if xs is None:
            raise ConfigError(f"{cmd} requires at least one start point")
        cfg["x"] = [parse_point(x) for x in _point_list(xs, cfg.get("d"))]
        if cmd == "disk":
            cfg["d"] = 2
        if "d" not in cfg:
            cfg["d"] = len(cfg["x"][0])
        if any(len(x) != cfg["d"] for x in cfg["x"]):
            raise ConfigError(f"points must have {cfg['d']} coordinates")
    if cmd in ("bm", "kernel") and "d" not in cfg:
        raise ConfigError(f"{cmd} requires --d")
    if cmd == "bm":
        r = cfg.get("radius", cfg.get("x"))
        if r is None:
            raise ConfigError("bm requires --x (start radius)")
        cfg["radius"] = [float(v) for v in (r if isinstance(r, list) else [r])]
    if cmd == "verify":
        from .verify import SUITES

        cfg["suite"] = cfg.get("suite") or list(SUITES)
        unknown = [s for s in cfg["suite"] if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    if cmd == "mc" and cfg.get("seed") is None:
        raise ConfigError("mc requires --seed")
    return cfg


def _versions():
    out = {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        out["restart_grade"] = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        out["restart_grade"] = "unknown"
    from .kernels import compiled_available

    out["compiled_kernels"] = compiled_available()
    return out


def write_csv(command, rows, stream):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(HEADERS[command])
    for r in rows:
        w.writerow([fmt(v) for v in r])


def run(argv=None):
    """Parse ``argv``, run the command and return the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(args)
        cache = TableCache(cfg.get("cache"))
        rows, key = COMMANDS[args.command](cfg, cache)
    except (RestartGradeError, ValueError, KeyError) as exc:
        err = exc.to_dict() if isinstance(exc, RestartGradeError) else {
            "error": type(exc).__name__, "module": "cli", "message": str(exc)}
        print(json.dumps(err, sort_keys=True))
        return 2
    buf = io.StringIO()
    write_csv(args.command, rows, buf)
    inputs = {k: (v if not isinstance(v, list) else [list(t) if isinstance(t, tuple) else t for t in v])
              for k, v in cfg.items()}
    summary = {
        "command": args.command,
        "inputs": inputs,
        "outputs": key,
        "versions": _versions(),
        "timings": {"total_seconds": time.perf_counter() - t0},
    }
    text = json.dumps(summary, indent=2, sort_keys=True, default=float)
    out = cfg.get("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
        with open(out + ".json", "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(buf.getvalue())
        print(text, file=sys.stderr)
    if args.command == "verify" and key["failed"]:
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
