r"""Explicit integration of :math:`u_t = \varepsilon u_{xx} + Lu - u u_x`.

The convection term uses the Engquist--Osher flux, diffusion the standard
three-point Laplacian, and :math:`L` the quadrature of
:mod:`nonlocal_burgers.nonlocal_operator`.  Each forward-Euler stage is a
monotone map under :func:`stable_dt`, and the strong-stability-preserving
Runge--Kutta combinations keep that property.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp, FanHitBoundary, GridMismatch
from .field import FieldState, one_sided_differences
from .kernels import DEFAULT_TOL
from .nonlocal_operator import NonlocalOp, apply_L

NONLOCAL_RATE_BOUND = 2.0


class Integrator(str, enum.Enum):
    SSPRK2 = "ssprk2"
    SSPRK3 = "ssprk3"


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.0
    cfl: float = 0.4
    kernel_tol: float = DEFAULT_TOL
    t_end: float = 100.0
    snapshot_times: tuple[float, ...] = (1.0, 10.0, 100.0)
    integrator: Integrator = Integrator.SSPRK3

    def __post_init__(self):
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        times = tuple(float(t) for t in self.snapshot_times)
        object.__setattr__(self, "snapshot_times", times)
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot_times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] > self.t_end):
            raise ValueError("snapshot_times must lie in [0, t_end]")


@dataclass
class StepRecord:
    time: float
    dt: float
    max_abs: float
    min_difference: float


@dataclass
class Trajectory:
    initial: FieldState
    snapshots: list[FieldState]
    config: SolverConfig
    diagnostics: list[StepRecord] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.snapshots]

    def at(self, t: float) -> FieldState:
        for s in self.snapshots:
            if s.time == t:
                return s
        raise KeyError(f"no snapshot at t={t}")

    def summary(self) -> dict:
        d = self.diagnostics
        return {
            "steps": len(d),
            "dt_min": min((r.dt for r in d), default=0.0),
            "dt_max": max((r.dt for r in d), default=0.0),
            "max_abs": max((r.max_abs for r in d), default=float(np.max(np.abs(self.initial.values)))),
            "min_difference": min((r.min_difference for r in d), default=0.0),
        }


def flux_div(state: FieldState) -> np.ndarray:
    """Engquist--Osher divergence of ``u**2 / 2`` with far-field ghost cells."""
    ext = state.extended()
    pos = np.maximum(ext, 0.0)
    neg = np.minimum(ext, 0.0)
    faces = 0.5 * pos[:-1] ** 2 + 0.5 * neg[1:] ** 2
    return np.diff(faces) / state.grid.h


def central_flux_div(state: FieldState) -> np.ndarray:
    """Non-conservative ``u * (central u_x)``; exists only as a mutation."""
    ext = state.extended()
    return state.values * (ext[2:] - ext[:-2]) / (2.0 * state.grid.h)


def advective_upwind_div(state: FieldState) -> np.ndarray:
    """Non-conservative ``u * (upwind u_x)``; exists only as a mutation."""
    ext = state.extended()
    u = ext[1:-1]
    back = (ext[1:-1] - ext[:-2]) / state.grid.h
    fwd = (ext[2:] - ext[1:-1]) / state.grid.h
    return u * np.where(u > 0, back, fwd)


def second_difference(state: FieldState) -> np.ndarray:
    ext = state.extended()
    return (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) / state.grid.h**2


def rhs(state: FieldState, op: NonlocalOp | None, epsilon: float, convection=flux_div) -> np.ndarray:
    """``eps * D2 u + L u - (u**2/2)_x``; ``op=None`` switches ``L`` off."""
    if op is not None and state.grid != op.grid:
        raise GridMismatch("state grid differs from operator grid")
    out = -convection(state)
    if op is not None:
        out = out + apply_L(op, state)
    if epsilon > 0:
        out = out + epsilon * second_difference(state)
    return out


def stable_dt(state: FieldState, config: SolverConfig, next_time: float | None = None) -> float:
    h = state.grid.h
    speed = max(float(np.max(np.abs(state.extended()))), 1e-12)
    bound = min(h / speed, 1.0 / NONLOCAL_RATE_BOUND)
    if config.epsilon > 0:
        bound = min(bound, h * h / (2.0 * config.epsilon))
    dt = config.cfl * bound
    if next_time is not None:
        dt = min(dt, next_time - state.time)
    return dt


def check_fan(state: FieldState, t_end: float) -> None:
    """Raise ``FanHitBoundary`` if the fan reaches within 5h of an edge by ``t_end``."""
    g = state.grid
    lo, hi = sorted((state.u_minus, state.u_plus))
    fan_left, fan_right = min(lo * t_end, 0.0), max(hi * t_end, 0.0)
    pad = 5.0 * g.h
    if fan_left < g.left + pad or fan_right > g.right - pad:
        suggested = (lo * t_end - 20.0, hi * t_end + 20.0)
        raise FanHitBoundary(
            f"rarefaction fan [{fan_left:g}, {fan_right:g}] at t={t_end:g} comes within 5h "
            f"of the grid [{g.left:g}, {g.right:g}]; use at least "
            f"[{suggested[0]:g}, {suggested[1]:g}]",
            suggested,
        )


def _step(u: FieldState, dt: float, f, integrator: Integrator) -> np.ndarray:
    def euler(s: FieldState) -> FieldState:
        new = s.values + dt * f(s)
        if not np.all(np.isfinite(new)):
            raise BlowUp(f"non-finite values in a stage at t={s.time + dt:g}")
        return s.with_values(new, s.time + dt)

    if integrator is Integrator.SSPRK2:
        u1 = euler(u)
        u2 = euler(u1)
        return 0.5 * (u.values + u2.values)
    u1 = euler(u)
    u2 = euler(u1)
    mid = u.with_values(0.75 * u.values + 0.25 * u2.values, u.time + 0.5 * dt)
    u3 = euler(mid)
    return u.values / 3.0 + 2.0 / 3.0 * u3.values


def integrate(state0: FieldState, op: NonlocalOp | None, config: SolverConfig,
              convection=flux_div, check_boundary: bool = True) -> Trajectory:
    """Advance ``state0`` to ``config.t_end``, landing exactly on snapshot times."""
    if check_boundary and state0.u_minus != state0.u_plus:
        check_fan(state0, config.t_end)
    keep = set(config.snapshot_times)
    snaps = [state0] if 0.0 in keep else []
    targets = sorted(t for t in keep | {config.t_end} if t > 0.0)

    def f(s: FieldState) -> np.ndarray:
        return rhs(s, op, config.epsilon, convection)

    u = state0
    records: list[StepRecord] = []
    for target in targets:
        while u.time < target:
            dt = stable_dt(u, config, target)
            if not dt > 0:
                break
            new = _step(u, dt, f, config.integrator)
            if not np.all(np.isfinite(new)):
                raise BlowUp(f"non-finite values at t={u.time + dt:g}")
            t_new = u.time + dt
            if math.isclose(t_new, target, rel_tol=1e-13, abs_tol=0.0):
                t_new = target
            u = FieldState(u.grid, new, u.u_minus, u.u_plus, t_new)
            records.append(StepRecord(t_new, dt, float(np.max(np.abs(new))),
                                      float(one_sided_differences(u).min())))
        u = FieldState(u.grid, u.values, u.u_minus, u.u_plus, target)
        if target in keep:
            snaps.append(u)
    return Trajectory(state0, snaps, config, records)
