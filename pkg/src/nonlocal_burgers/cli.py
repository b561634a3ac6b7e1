"""Command-line entry point: ``nonlocal-burgers {run,rates,verify,eps-limit,cross-validate}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import (
    ExperimentConfig,
    apply_overrides,
    load_config_file,
    parse_config,
    shipped_config,
)
from .errors import ConfigParse, FanHitBoundary, NonlocalBurgersError, WrongKernel
from .field import write_snapshot_csv
from .metrics import (
    Correction,
    error_to_viscous,
    fit_rate,
    gn_diagnostic,
    norm_report,
    p_label,
    parse_p,
    rate_shape,
)
from .solver import integrate
from .verification import (
    CHECK_NAMES,
    MUTATIONS,
    check_eps_limit,
    cross_validation_discrepancy,
    eps_limit_study,
    run_suite,
)

OUT_ENV = "NONLOCAL_BURGERS_OUT"
SHIPPED_FOR = {
    "run": "default",
    "rates": "rates",
    "verify": "verify",
    "eps-limit": "eps_limit",
    "cross-validate": "cross_validate",
}

log = logging.getLogger("nonlocal_burgers")


def fmt(x) -> str:
    return f"{float(x):.17g}"


def _time_tag(t: float) -> str:
    return f"{t:g}".replace(".", "p")


def write_rows(path: Path, rows: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(rows[0]) if rows else []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([fmt(row[c]) if isinstance(row[c], (float, np.floating)) else row[c]
                        for c in cols])
    return path


def write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path


def load_experiment(args) -> tuple[ExperimentConfig, Path]:
    if args.config:
        data = load_config_file(args.config)
    else:
        data = shipped_config(SHIPPED_FOR[args.command])
    data = apply_overrides(data, args.set)
    cfg = parse_config(data, kind=args.command)
    out = args.out or os.environ.get(OUT_ENV) or cfg.out_dir
    cfg.out_dir = str(out)
    return cfg, Path(out)


# ---- subcommands ---------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig, out: Path, args) -> int:
    _, grid, op, state0 = cfg.build()
    log.info("run: %d nodes, h=%g, t_end=%g", grid.n, grid.h, cfg.solver.t_end)
    traj = integrate(state0, op, cfg.solver)
    files = []
    for s in traj.snapshots:
        files.append(write_snapshot_csv(s, out / f"snapshot_t{_time_tag(s.time)}.csv").name)
    sidecar = {"config": cfg.to_dict(), "diagnostics": traj.summary(),
               "grid": {"left": grid.left, "right": grid.right, "n": grid.n, "h": grid.h},
               "snapshots": files}
    write_json(out / "run.json", sidecar)
    print(f"wrote {len(files)} snapshots to {out}")
    return 0


def _rate_fits(times, errors, p, window) -> dict:
    t = np.asarray(times)
    e = np.asarray(errors)
    mask = (t >= window[0]) & (t <= window[1])
    t, e = t[mask], e[mask]
    out = {"p": p_label(p)}
    for corr in Correction:
        out[corr.value] = fit_rate(t, e, p, corr).to_dict()
    shape = rate_shape(t, p)
    c = e[0] / shape[0]
    out["calibrated_constant"] = float(c)
    out["calibrated_ratio_max"] = float(np.max(e[1:] / (c * shape[1:])))
    return out


def cmd_rates(cfg: ExperimentConfig, out: Path, args) -> int:
    section = cfg.section("rates")
    p_values = [parse_p(p) for p in section.get("p", [1, 2, "inf"])]
    if args.replay:
        return _replay(args.replay, out, section)
    r = cfg.riemann
    _, grid, op, state0 = cfg.build()
    log.info("rates: %d nodes, h=%g, t_end=%g", grid.n, grid.h, cfg.solver.t_end)
    traj = integrate(state0, op, cfg.solver)
    rows = []
    for s in traj.snapshots:
        if s.time <= 0:
            continue
        row = norm_report(s, r, p_values).row()
        row["l1_viscous_over_log"] = error_to_viscous(s, r, 1.0) / math.log(2.0 + s.time)
        row["gn_inf"] = gn_diagnostic(s, r, math.inf)
        rows.append(row)
    write_rows(out / "norms.csv", rows)
    lo, hi = section.get("window", [10.0, cfg.solver.t_end])
    times = [row["time"] for row in rows]
    for p in p_values:
        errs = [row[f"err_rarefaction_p{p_label(p)}"] for row in rows]
        fits = _rate_fits(times, errs, p, (float(lo), float(hi)))
        write_json(out / f"rate_fit_p{p_label(p)}.json", {"config": cfg.to_dict(), **fits})
        print(f"p={p_label(p)}: exponent {fits['sqrt_log']['exponent']:.4f} (sqrt_log), "
              f"{fits['none']['exponent']:.4f} (none)")
    return 0


def _replay(path, out: Path, section: dict) -> int:
    """Fit every error column of a ``time,...`` CSV; no simulation is run."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "time" not in rows[0]:
        raise ConfigParse(f"replay file {path} needs a 'time' column")
    times = np.array([float(row["time"]) for row in rows])
    corr = Correction(section.get("correction", "none"))
    for col in rows[0]:
        if col == "time":
            continue
        p = parse_p(col.rsplit("_p", 1)[1]) if "_p" in col else math.inf
        errs = np.array([float(row[col]) for row in rows])
        fit = fit_rate(times, errs, p, corr)
        write_json(out / f"replay_{col}.json", fit.to_dict())
        print(f"{col}: exponent {fit.exponent:.9f} residual {fit.residual:.3g}")
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Path, args) -> int:
    only = None
    if args.only:
        only = [name.strip() for item in args.only for name in item.split(",") if name.strip()]
    report = run_suite(cfg, only=only, mutation=args.breaks, log=log.info)
    report.write_csv(out / "suite.csv")
    print(report.summary())
    return 0 if report.passed else 1


def cmd_eps_limit(cfg: ExperimentConfig, out: Path, args) -> int:
    section = cfg.section("eps_limit")
    t = float(section.get("time", cfg.solver.t_end))
    _, grid, op, state0 = cfg.build()
    report = eps_limit_study(state0, op, cfg.solver,
                             section.get("eps", [0.1, 0.05, 0.025, 0.0125, 0.0]), t,
                             tuple(section.get("window", (-20.0, 20.0))))
    write_rows(out / "eps_limit.csv", report.rows())
    write_json(out / "eps_limit.json", {
        "config": cfg.to_dict(), "time": t, "window": list(report.window),
        "monotone": report.monotone, "min_ratio": report.min_ratio, "order": report.order,
    })
    print(check_eps_limit(report).line())
    return 0


def cmd_cross_validate(cfg: ExperimentConfig, out: Path, args) -> int:
    kernel, grid, op, state0 = cfg.build()
    if not (kernel.family.value == "exponential" and kernel.scale == 1.0):
        raise WrongKernel("cross-validation needs kernel.family=exponential with rate 1")
    threshold = float(cfg.section("cross_validate").get("threshold", 1e-3))
    traj = integrate(state0, op, cfg.solver)
    states = [traj.initial] + [s for s in traj.snapshots if s.time > 0]
    rows = [{"time": float(s.time), "discrepancy": cross_validation_discrepancy(op, [s])}
            for s in states]
    worst = max(row["discrepancy"] for row in rows)
    write_rows(out / "cross_validate.csv", rows)
    write_json(out / "cross_validate.json", {"config": cfg.to_dict(), "h": grid.h,
                                             "max_discrepancy": worst, "threshold": threshold,
                                             "passed": worst <= threshold})
    verdict = "PASS" if worst <= threshold else "FAIL"
    print(f"[{verdict}] cross_validation: max relative discrepancy {worst:.3e} (threshold {threshold:g})")
    return 0 if worst <= threshold else 1


COMMANDS = {
    "run": cmd_run,
    "rates": cmd_rates,
    "verify": cmd_verify,
    "eps-limit": cmd_eps_limit,
    "cross-validate": cmd_cross_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-burgers", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="YAML config (default: shipped config)")
        p.add_argument("--set", metavar="K=V", action="append", default=[],
                       help="override a dotted config key; repeatable")
        p.add_argument("--out", metavar="DIR", help=f"output directory (env {OUT_ENV} also works)")
        if name == "verify":
            p.add_argument("--only", metavar="NAME", action="append",
                           help=f"restrict to checks: {', '.join(CHECK_NAMES)}")
            p.add_argument("--break", dest="breaks", choices=MUTATIONS,
                           help="inject a mutation (testing only)")
        if name == "rates":
            p.add_argument("--replay", metavar="CSV",
                           help="fit a recorded time,error CSV instead of simulating")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg, out = load_experiment(args)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigParse as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FanHitBoundary as exc:
        lo, hi = exc.suggested_domain
        print(f"error: {exc}\nsuggested domain: grid.left={lo:g} grid.right={hi:g}", file=sys.stderr)
        return 3
    except NonlocalBurgersError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
