"""Named, tolerance-tagged checks over solver runs, and the suite driver.

Every check returns a :class:`CheckResult`.  Checks flagged ``informative``
test something stronger than the underlying theory guarantees; their
failure is reported but does not fail the suite.
"""

from __future__ import annotations

import csv
import math
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import MismatchedRuns, NonlocalBurgersError, WindowTooShort
from .field import FieldState, Grid1D, one_sided_differences, total_variation
from .kernels import DiscreteKernel, asymmetric_copy, compact_bump, discretize_kernel, kernel_asymmetry
from .metrics import (
    INF,
    Correction,
    derivative_norm,
    error_to_rarefaction,
    error_to_viscous,
    excess_mass,
    fit_rate,
    lp_norm,
    p_label,
    parse_p,
    rate_shape,
)
from .nonlocal_operator import (
    NonlocalOp,
    apply_L,
    apply_L_elliptic,
    convexity_inequality_check,
    kato_identity_check,
    negative_part_squared,
    smoothed_abs,
    square,
)
from .references import RiemannData
from .solver import SolverConfig, Trajectory, advective_upwind_div, flux_div, integrate

EXACT_TOL = 1e-8
IDENTITY_KERNEL_TOL = 1e-16
MUTATIONS = ("kernel", "data", "flux")


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    tolerance: float
    context: str = ""
    severity: str = "required"
    details: dict = field(default_factory=dict)

    def row(self) -> dict:
        d = asdict(self)
        d.pop("details")
        return d

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.severity == "informative" and not self.passed:
            tag = "INFO"
        return (f"[{tag}] {self.name}: measured={self.measured:.6g} bound={self.bound:.6g} "
                f"tol={self.tolerance:.3g} ({self.context})")


def _upper(name, measured, bound, tol, context="", **kw) -> CheckResult:
    measured = float(measured)
    ok = bool(np.isfinite(measured) and measured <= bound + tol)
    return CheckResult(name, ok, measured, float(bound), float(tol), context, **kw)


def _states(traj: Trajectory) -> list[FieldState]:
    return [traj.initial] + [s for s in traj.snapshots if s.time > 0]


def _jump(traj: Trajectory) -> float:
    return traj.initial.u_plus - traj.initial.u_minus


# ---- invariants of the regularized problem ----------------------------------


def check_comparison(traj: Trajectory, context: str = "") -> CheckResult:
    """Largest excursion of any snapshot outside ``[inf u0, sup u0]``."""
    s0 = traj.initial
    lo = min(float(s0.values.min()), s0.u_minus, s0.u_plus)
    hi = max(float(s0.values.max()), s0.u_minus, s0.u_plus)
    over = 0.0
    for s in traj.snapshots:
        over = max(over, float(s.values.max()) - hi, lo - float(s.values.min()))
    return _upper("comparison", over, 0.0, EXACT_TOL, context)


def check_monotonicity(traj: Trajectory, context: str = "") -> CheckResult:
    """Most negative one-sided difference over the initial state and snapshots."""
    worst = 0.0
    for s in _states(traj):
        worst = max(worst, -float(one_sided_differences(s).min()))
    h = traj.initial.grid.h
    return _upper("monotonicity", worst, 0.0, EXACT_TOL / h, context)


def check_conservation(traj: Trajectory, context: str = "", probes=()) -> CheckResult:
    """Total-variation identity and excess-mass drift, both relative to the jump.

    For monotone states the node total variation is ``u_plus - u_minus``.
    ``excess_mass`` is constant in time for conservative schemes.  ``probes``
    are extra runs whose mass drift is folded in; antisymmetric data can hide
    a non-conservative scheme because the defects of the two halves cancel.
    """
    jump = abs(_jump(traj))
    tv_defect = 0.0
    for s in traj.snapshots:
        tv_defect = max(tv_defect, abs(total_variation(s) - jump) / jump)
    drift = 0.0
    for run in (traj, *probes):
        m0 = excess_mass(run.initial)
        scale = abs(_jump(run))
        for s in run.snapshots:
            drift = max(drift, abs(excess_mass(s) - m0) / scale)
    res = _upper("conservation", max(tv_defect, drift), 0.0, 1e-6, context)
    res.details = {"tv_defect": tv_defect, "mass_drift": drift}
    res.context = f"{context} tv_defect={tv_defect:.3g} mass_drift={drift:.3g}".strip()
    return res


def check_derivative_decay(traj: Trajectory, p=INF, t_min: float = 1.0, t_max: float = math.inf,
                           context: str = "") -> CheckResult:
    """``max_t |u_x(t)|_p t^(1-1/p) / |u0_x|_1^(1/p)``; at most 1 up to 5%."""
    p = parse_p(p)
    base = derivative_norm(traj.initial, 1.0)
    scale = 1.0 if math.isinf(p) else base ** (1.0 / p)
    worst = 0.0
    for s in traj.snapshots:
        if t_min <= s.time <= t_max:
            worst = max(worst, derivative_norm(s, p) * s.time ** (1.0 - 1.0 / p) / scale)
    return _upper(f"derivative_decay_p{p_label(p)}", worst, 1.0, 0.05, context)


def _window(traj: Trajectory, window) -> list[FieldState]:
    lo, hi = window
    hi = traj.config.t_end if hi is None else hi
    states = [s for s in traj.snapshots if lo <= s.time <= hi and s.time > 0]
    if len(states) < 5 or states[-1].time / states[0].time < 10**1.5:
        raise WindowTooShort(
            f"rate checks need >= 5 snapshots spanning 1.5 decades inside [{lo}, {hi}]"
        )
    return states


def check_main_rate(traj: Trajectory, r: RiemannData, p=INF, window=(10.0, None),
                    context: str = "") -> CheckResult:
    """Calibrated-constant test of the convergence rate to the rarefaction wave.

    ``C`` is fixed at the first window time; the check measures the largest
    later ratio ``err / (C * shape)`` (at most 1 up to 10%) and requires the
    log-corrected fitted exponent to be at most ``-(1-1/p)/2 + 0.05``.
    """
    p = parse_p(p)
    states = _window(traj, window)
    t = np.array([s.time for s in states])
    err = np.array([error_to_rarefaction(s, r, p) for s in states])
    name = f"main_rate_p{p_label(p)}"
    if np.all(err == 0):
        return CheckResult(name, True, 0.0, 1.0, 0.1, context, details={"exponent": -math.inf})
    shape = rate_shape(t, p)
    c = err[0] / shape[0]
    ratio = float(np.max(err[1:] / (c * shape[1:])))
    fit = fit_rate(t, err, p, Correction.SQRT_LOG)
    target = -(1.0 - 1.0 / p) / 2.0 + 0.05
    res = _upper(name, ratio, 1.0, 0.1, context)
    res.passed = res.passed and fit.exponent <= target
    res.details = {"exponent": fit.exponent, "exponent_bound": target, "constant": c,
                   "residual": fit.residual}
    res.context = f"{context} fitted_exponent={fit.exponent:.4f}<= {target:.3f}".strip()
    return res


def check_l1_log_bound(traj: Trajectory, r: RiemannData, window=(10.0, None),
                       context: str = "") -> CheckResult:
    """``|u - w|_1 / log(2 + t)`` must not trend upward (10% slack).

    The trend is the least-squares slope of ``log ratio`` against ``log t``
    extrapolated over the window; every later ratio must also stay within
    10% of the first one.
    """
    states = _window(traj, window)
    t = np.array([s.time for s in states])
    ratio = np.array([error_to_viscous(s, r, 1.0) / math.log(2.0 + s.time) for s in states])
    if np.any(ratio <= 0):
        return CheckResult("l1_log_bound", True, 0.0, 1.0, 0.1, context)
    slope = np.polyfit(np.log(t), np.log(ratio), 1)[0]
    growth = math.exp(slope * math.log(t[-1] / t[0]))
    cap = float(np.max(ratio / ratio[0]))
    res = _upper("l1_log_bound", max(growth, cap), 1.0, 0.1, context)
    res.details = {"trend_growth": growth, "max_over_first": cap,
                   "ratios": ratio.tolist(), "times": t.tolist()}
    res.context = f"{context} trend={growth:.4f} cap={cap:.4f}".strip()
    return res


def check_contraction(run_a: Trajectory, run_b: Trajectory, context: str = "") -> CheckResult:
    """L1 distance between two runs never exceeds its initial value and never grows."""
    a0, b0 = run_a.initial, run_b.initial
    if (a0.grid != b0.grid or a0.u_minus != b0.u_minus or a0.u_plus != b0.u_plus
            or run_a.config.epsilon != run_b.config.epsilon):
        raise MismatchedRuns("contraction needs a shared grid, far field and epsilon")
    h = a0.grid.h
    d0 = lp_norm(a0.values - b0.values, h, 1)
    tol = EXACT_TOL * max(d0, 1e-300)
    times_b = {s.time: s for s in run_b.snapshots}
    dists = [d0]
    for s in run_a.snapshots:
        if s.time in times_b and s.time > 0:
            dists.append(lp_norm(s.values - times_b[s.time].values, h, 1))
    dists = np.array(dists)
    excess = float(np.max(dists - d0)) if dists.size else 0.0
    rise = float(np.max(np.diff(dists))) if dists.size > 1 else 0.0
    res = _upper("contraction", max(excess, rise), 0.0, tol, context)
    res.details = {"initial_distance": d0, "distances": dists.tolist()}
    res.context = f"{context} d0={d0:.6g} final={dists[-1]:.6g}".strip()
    return res


# ---- operator-level checks ---------------------------------------------------


def check_kernel_admissible(dk: DiscreteKernel, context: str = "") -> CheckResult:
    """Asymmetry, negativity and mass defect of the discrete kernel."""
    defect = (kernel_asymmetry(dk) + max(0.0, -float(dk.weights.min()))
              + abs(dk.total_mass() - 1.0))
    return _upper("kernel_admissible", defect, 0.0, 1e-15, context)


def check_initial_data(state: FieldState, context: str = "") -> CheckResult:
    worst = max(0.0, -float(one_sided_differences(state).min()))
    tol = 1e-14 * max(abs(state.u_plus - state.u_minus), 1.0)
    return _upper("admissible_data", worst, 0.0, tol, context)


def identity_operator(dk: DiscreteKernel | None = None, n: int = 512) -> NonlocalOp:
    """Operator on an ``n``-node grid; defaults to a compact bump kernel."""
    if dk is None:
        dk = discretize_kernel(compact_bump(1.0), 0.05)
    grid = Grid1D(0.0, (n - 1) * dk.h, n)
    return NonlocalOp(dk, grid)


def check_operator_identities(op: NonlocalOp, draws: int = 1000, seed: int = 0,
                              context: str = "") -> list[CheckResult]:
    """Kato sum, Kato signed sum and convexity defect over random fields."""
    rng = np.random.default_rng(seed)
    worst_sum = worst_signed = -math.inf
    worst_cvx = math.inf
    g_list = [square(), negative_part_squared(), smoothed_abs()]
    n = op.grid.n
    for _ in range(draws):
        phi = rng.uniform(-1.0, 1.0, n)
        total, signed = kato_identity_check(op, phi, method="direct")
        worst_sum = max(worst_sum, abs(total))
        worst_signed = max(worst_signed, signed)
        for g, dg in g_list:
            worst_cvx = min(worst_cvx, convexity_inequality_check(op, phi, g, dg, method="direct"))
    ctx = f"{context} draws={draws}".strip()
    return [
        _upper("kato_sum", worst_sum, 0.0, 1e-12, ctx),
        _upper("kato_signed_sum", worst_signed, 0.0, 1e-12, ctx),
        _upper("convexity_defect", -worst_cvx, 0.0, 1e-12, ctx),
    ]


def cross_validation_discrepancy(op: NonlocalOp, states) -> float:
    """Largest relative L-infinity gap between convolution and elliptic ``L``."""
    worst = 0.0
    for s in states:
        a = apply_L(op, s)
        b = apply_L_elliptic(s, op.spec)
        scale = float(np.max(np.abs(a)))
        if scale > 0:
            worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    return worst


def check_cross_validation(op: NonlocalOp, traj: Trajectory, threshold: float = 1e-3,
                           context: str = "") -> CheckResult:
    states = [traj.initial] + list(traj.snapshots)
    return _upper("cross_validation", cross_validation_discrepancy(op, states), threshold, 0.0, context)


# ---- vanishing viscosity -----------------------------------------------------


@dataclass
class EpsLimitReport:
    eps: list[float]
    distances: list[float]
    ratios: list[float]
    time: float
    window: tuple[float, float]
    monotone: bool
    min_ratio: float
    order: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.min_ratio >= 1.8

    def rows(self) -> list[dict]:
        out = []
        for i, (e, d) in enumerate(zip(self.eps, self.distances)):
            out.append({"epsilon": e, "l1_distance": d,
                        "ratio_to_next": self.ratios[i] if i < len(self.ratios) else math.nan})
        return out


def eps_limit_study(state0: FieldState, op: NonlocalOp | None, base: SolverConfig,
                    eps_list=(0.1, 0.05, 0.025, 0.0125, 0.0), time: float = 10.0,
                    window=(-20.0, 20.0), convection=flux_div) -> EpsLimitReport:
    """L1 distance on ``window`` between ``u^eps(time)`` and ``u^0(time)``."""
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or eps_list[-1] != 0.0:
        raise ValueError("eps_list must decrease strictly and end at 0")
    finals = {}
    for eps in eps_list:
        cfg = SolverConfig(eps, base.cfl, base.kernel_tol, time, (time,), base.integrator)
        finals[eps] = integrate(state0, op, cfg, convection).snapshots[-1]
    x = state0.grid.x
    mask = (x >= window[0]) & (x <= window[1])
    ref = finals[0.0].values[mask]
    dist = [lp_norm(finals[e].values[mask] - ref, state0.grid.h, 1) for e in eps_list]
    positive = [d for d in dist if d > 0]
    ratios = [a / b if b > 0 else math.inf for a, b in zip(positive, positive[1:])]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    min_ratio = min(ratios) if ratios else math.inf
    order = math.log2(min_ratio) if ratios and min_ratio > 0 else math.nan
    return EpsLimitReport(eps_list, dist, ratios, time, tuple(window), monotone, min_ratio, order)


def check_eps_limit(report: EpsLimitReport, context: str = "") -> CheckResult:
    res = CheckResult("eps_limit", report.passed, report.min_ratio, 1.8, 0.0,
                      f"{context} distances={['%.4g' % d for d in report.distances]}".strip(),
                      severity="informative")
    return res


# ---- suite -------------------------------------------------------------------


@dataclass
class SuiteReport:
    results: list[CheckResult]
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if r.severity != "informative")

    def failed(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = ["name", "passed", "measured", "bound", "tolerance", "context", "severity"]
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for r in self.results:
                row = r.row()
                for k in ("measured", "bound", "tolerance"):
                    row[k] = f"{row[k]:.17g}"
                w.writerow(row)
        return path

    def summary(self) -> str:
        lines = [r.line() for r in self.results]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"suite: {verdict} ({sum(r.passed for r in self.results)}/{len(self.results)} checks)")
        return "\n".join(lines)


CHECK_NAMES = (
    "kernel_admissible", "admissible_data", "comparison", "monotonicity", "conservation",
    "derivative_decay", "main_rate", "l1_log_bound", "contraction", "operator_identities",
    "cross_validation", "eps_limit",
)


def _non_monotone(state: FieldState) -> FieldState:
    x = state.grid.x
    dip = 0.3 * (state.u_plus - state.u_minus) * np.exp(-((x - 2.0) ** 2))
    return state.with_values(state.values - dip, 0.0)


def _mutate(op: NonlocalOp, state0: FieldState, mutation):
    if mutation == "kernel":
        op = NonlocalOp(asymmetric_copy(op.discrete_kernel), op.grid)
    elif mutation == "data":
        state0 = _non_monotone(state0)
    return op, state0


def _failed(name: str, exc: Exception, ctx: str) -> CheckResult:
    return CheckResult(name, False, math.nan, 0.0, 0.0, f"{ctx} {type(exc).__name__}: {exc}")


RUN_CHECKS = {"comparison", "monotonicity", "conservation", "derivative_decay", "main_rate",
              "l1_log_bound", "contraction", "cross_validation"}


def run_suite(cfg, only=None, mutation: str | None = None, log=print,
              workers: int = 4) -> SuiteReport:
    """Run every check for the experiment config ``cfg``.

    ``only`` restricts the suite to check families from :data:`CHECK_NAMES`;
    ``mutation`` injects one of :data:`MUTATIONS`.  Independent solver runs
    are integrated concurrently; checks only read the finished trajectories.
    """
    started = _time.perf_counter()
    if mutation is not None and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
    wanted = set(CHECK_NAMES) if not only else set(only)
    unknown = wanted - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {CHECK_NAMES}")
    vcfg = cfg.section("verify")
    kernel, grid, op, state0 = cfg.build()
    op, state0 = _mutate(op, state0, mutation)
    convection = advective_upwind_div if mutation == "flux" else flux_div
    r = cfg.riemann
    ctx = f"h={grid.h:g} eps={cfg.solver.epsilon:g}" + (f" mutation={mutation}" if mutation else "")

    results: list[CheckResult] = []
    if "kernel_admissible" in wanted:
        results.append(check_kernel_admissible(op.discrete_kernel, ctx))
    if "admissible_data" in wanted:
        results.append(check_initial_data(state0, ctx))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        main = partner = eps = None
        if wanted & RUN_CHECKS:
            log(f"integrating main run to t={cfg.solver.t_end:g} on {grid.n} nodes")
            main = pool.submit(integrate, state0, op, cfg.solver, convection)
        probe = None
        if "conservation" in wanted:
            probe = pool.submit(_probe_run, cfg, mutation, convection)
        if "contraction" in wanted:
            partner = pool.submit(_partner_run, cfg, vcfg, grid, op, state0, convection)
        if "eps_limit" in wanted:
            eps = pool.submit(_eps_report, cfg, mutation, convection)
        if "operator_identities" in wanted:
            results.extend(_identity_checks(kernel, grid, op, cfg, vcfg, mutation))

        traj = None
        if main is not None:
            try:
                traj = main.result()
            except NonlocalBurgersError as exc:
                results.extend(_failed(n, exc, ctx) for n in sorted(wanted & RUN_CHECKS))
        if traj is not None:
            probes = []
            if probe is not None:
                try:
                    probes.append(probe.result())
                except NonlocalBurgersError as exc:
                    log(f"conservation probe failed: {exc}")
            results.extend(_trajectory_checks(traj, r, kernel, op, vcfg, wanted, ctx, probes))
            if partner is not None:
                try:
                    run_b = partner.result()
                    results.append(check_contraction(_truncate(traj, run_b.config.t_end), run_b, ctx))
                except NonlocalBurgersError as exc:
                    results.append(_failed("contraction", exc, ctx))
        if eps is not None:
            try:
                results.append(check_eps_limit(eps.result(), ctx))
            except NonlocalBurgersError as exc:
                res = _failed("eps_limit", exc, ctx)
                res.severity = "informative"
                results.append(res)
    return SuiteReport(results, _time.perf_counter() - started)


def _trajectory_checks(traj, r, kernel, op, vcfg, wanted, ctx, probes=()) -> list[CheckResult]:
    out = []
    if "comparison" in wanted:
        out.append(check_comparison(traj, ctx))
    if "monotonicity" in wanted:
        out.append(check_monotonicity(traj, ctx))
    if "conservation" in wanted:
        out.append(check_conservation(traj, ctx, probes))
    if "derivative_decay" in wanted:
        t_min = float(vcfg.get("decay_t_min", 1.0))
        for p in (1.0, 2.0, INF):
            out.append(check_derivative_decay(traj, p, t_min, context=ctx))
    window = tuple(vcfg.get("rate_window", (10.0, None)))
    if "main_rate" in wanted:
        for p in vcfg.get("rate_p", ["inf"]):
            p = parse_p(p)
            try:
                out.append(check_main_rate(traj, r, p, window, ctx))
            except NonlocalBurgersError as exc:
                out.append(_failed(f"main_rate_p{p_label(p)}", exc, ctx))
    if "l1_log_bound" in wanted:
        try:
            out.append(check_l1_log_bound(traj, r, window, ctx))
        except NonlocalBurgersError as exc:
            out.append(_failed("l1_log_bound", exc, ctx))
    if ("cross_validation" in wanted and kernel.family.value == "exponential"
            and kernel.scale == 1.0):
        out.append(check_cross_validation(op, traj, float(vcfg.get("cross_threshold", 1e-3)), ctx))
    return out


def _identity_checks(kernel, grid, op, cfg, vcfg, mutation) -> list[CheckResult]:
    draws = int(vcfg.get("identity_draws", 1000))
    if mutation == "kernel":
        dk = asymmetric_copy(discretize_kernel(compact_bump(1.0), 0.05))
        return check_operator_identities(identity_operator(dk), draws, context="compact_bump n=512 mutation=kernel")
    out = check_operator_identities(identity_operator(), draws, context="compact_bump n=512")
    # tails below double rounding, so the lattice weights carry the full mass
    dk = discretize_kernel(kernel, grid.h, IDENTITY_KERNEL_TOL)
    extra = check_operator_identities(identity_operator(dk), max(draws // 10, 1), seed=1,
                                      context=f"{kernel.family.value} n=512")
    for res in extra:
        res.name += "_config_kernel"
    return out + extra


def _partner_run(cfg, vcfg, grid, op, state0, convection) -> Trajectory:
    """Second run for the contraction check: same setup, a different ramp width."""
    from .config import parse_config

    d = cfg.to_dict()
    width = float(cfg.initial.get("width", 1.0))
    d["initial"] = {**cfg.initial, "width": float(vcfg.get("partner_width", 2.0 * width))}
    profile = parse_config(d).build_profile()
    partner0 = state0.with_values(profile(grid.x), 0.0)
    t_end = float(vcfg.get("contraction_t_end", cfg.solver.t_end))
    s = cfg.solver
    times = tuple(t for t in s.snapshot_times if t <= t_end)
    return integrate(partner0, op, SolverConfig(s.epsilon, s.cfl, s.kernel_tol, t_end, times,
                                                s.integrator), convection)


def _probe_run(cfg, mutation, convection, t_end: float = 10.0) -> Trajectory:
    """Short run with the right state raised by half the jump, so the data has no symmetry."""
    from .config import parse_config

    d = cfg.to_dict()
    um, up = cfg.riemann.u_minus, cfg.riemann.u_plus
    d["riemann"] = {"u_minus": um, "u_plus": up + 0.5 * (up - um)}
    d["solver"]["t_end"] = t_end
    d["solver"]["snapshot_times"] = [1.0, t_end]
    d["grid"] = {k: v for k, v in d["grid"].items() if k not in ("left", "right", "n")}
    probe = parse_config(d)
    _, _, op, state0 = probe.build()
    op, state0 = _mutate(op, state0, mutation)
    return integrate(state0, op, probe.solver, convection)


def _truncate(traj: Trajectory, t_end: float) -> Trajectory:
    snaps = [s for s in traj.snapshots if s.time <= t_end]
    return Trajectory(traj.initial, snaps, traj.config, [])


def _eps_report(cfg, mutation, convection) -> EpsLimitReport:
    from .config import parse_config

    e = cfg.section("eps_limit")
    t_eps = float(e.get("time", 10.0))
    d = cfg.to_dict()
    d["solver"]["t_end"] = t_eps
    d["solver"]["snapshot_times"] = [t_eps]
    d["grid"] = {k: v for k, v in d["grid"].items() if k not in ("left", "right", "n")}
    if "h" in e:
        d["grid"]["h"] = e["h"]
    small = parse_config(d)
    _, _, op, state0 = small.build()
    op, state0 = _mutate(op, state0, mutation)
    return eps_limit_study(state0, op, small.solver, e.get("eps", [0.1, 0.05, 0.025, 0.0125, 0.0]),
                           t_eps, tuple(e.get("window", (-20.0, 20.0))), convection)
