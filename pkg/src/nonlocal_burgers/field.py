"""Uniform grids, field snapshots with constant far-field extension, and
admissible step-like initial data."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import BadDomain, NotMonotone, TailsTooFat
from .references import RiemannData

MIN_NODES = 16
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class Grid1D:
    left: float
    right: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise BadDomain("grid endpoints must be finite")
        if not self.left < self.right:
            raise BadDomain(f"need left < right, got [{self.left}, {self.right}]")
        if self.n < MIN_NODES:
            raise BadDomain(f"need at least {MIN_NODES} nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.right - self.left) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.left + self.h * np.arange(self.n)


def make_grid(left: float, right: float, n: int) -> Grid1D:
    return Grid1D(float(left), float(right), int(n))


def grid_with_spacing(left: float, right: float, h: float) -> Grid1D:
    """Grid starting at ``left`` with spacing exactly ``h`` covering ``right``."""
    if not h > 0:
        raise BadDomain(f"spacing must be positive, got {h}")
    n = int(math.ceil((right - left) / h - 1e-9)) + 1
    return Grid1D(float(left), float(left + (n - 1) * h), n)


def fan_domain(r: RiemannData, t_end: float, margin: float = 20.0) -> tuple[float, float]:
    """Smallest interval keeping the fan ``[u_minus t, u_plus t]`` ``margin`` away."""
    return r.u_minus * t_end - margin, r.u_plus * t_end + margin


@dataclass(frozen=True, eq=False)
class FieldState:
    """Values of ``u`` on ``grid`` at ``time``.

    Beyond the grid ``u`` is ``u_minus`` on the left and ``u_plus`` on the
    right; every nonlocal and flux evaluation relies on that extension.
    ``u_minus == u_plus`` is allowed (constant states).
    """

    grid: Grid1D
    values: np.ndarray
    u_minus: float
    u_plus: float
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def extended(self) -> np.ndarray:
        """Values with one ghost node of far-field constant at each end."""
        return np.concatenate(([self.u_minus], self.values, [self.u_plus]))

    def with_values(self, values, time: float) -> "FieldState":
        return replace(self, values=values, time=time)


def constant_state(grid: Grid1D, c: float, time: float = 0.0) -> FieldState:
    return FieldState(grid, np.full(grid.n, float(c)), c, c, time)


class ProfileKind(str, enum.Enum):
    TANH = "tanh"
    PIECEWISE_LINEAR = "piecewise_linear"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class InitialProfile:
    """Step-like initial datum joining ``riemann.u_minus`` to ``riemann.u_plus``.

    ``width`` is the tanh width or the half-width of the linear ramp.  A
    ``custom`` profile carries tabulated ``(abscissae, values)`` that are
    interpolated linearly and extended by their end values.
    """

    kind: ProfileKind
    riemann: RiemannData
    width: float = 1.0
    shift: float = 0.0
    abscissae: np.ndarray | None = field(default=None, repr=False)
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if self.kind is ProfileKind.CUSTOM:
            if self.abscissae is None or self.table is None:
                raise ValueError("custom profile needs abscissae and table")
        elif not self.width > 0:
            raise ValueError(f"profile width must be positive, got {self.width}")

    def __call__(self, x):
        r = self.riemann
        x = np.asarray(x, dtype=float) - self.shift
        if self.kind is ProfileKind.CUSTOM:
            return np.interp(x, self.abscissae, self.table)
        if self.kind is ProfileKind.TANH:
            lower = expit(2.0 * x / self.width)
            upper = expit(-2.0 * x / self.width)
        else:
            lower = np.clip(0.5 + 0.5 * x / self.width, 0.0, 1.0)
            upper = np.clip(0.5 - 0.5 * x / self.width, 0.0, 1.0)
        # each half measured from its own far field, so the tails are exact
        return np.where(x < 0, r.u_minus + r.jump * lower, r.u_plus - r.jump * upper)

    def tail_integrals(self, left: float, right: float) -> tuple[float, float]:
        """``int_{-inf}^{left} |u0 - u_minus|`` and ``int_{right}^{inf} |u0 - u_plus|``."""
        r = self.riemann
        if self.kind is ProfileKind.TANH:
            d, half = self.width, 0.5 * r.jump
            lo = half * d * math.log1p(math.exp(min(2.0 * (left - self.shift) / d, 700.0)))
            hi = half * d * math.log1p(math.exp(min(-2.0 * (right - self.shift) / d, 700.0)))
            return lo, hi
        if self.kind is ProfileKind.PIECEWISE_LINEAR:
            a, half = self.width, 0.5 * r.jump
            lo = half / (2 * a) * max(0.0, (left - self.shift) + a) ** 2
            hi = half / (2 * a) * max(0.0, a - (right - self.shift)) ** 2
            return lo, hi
        xs, vs = self.abscissae + self.shift, self.table
        if vs[0] != r.u_minus or vs[-1] != r.u_plus:
            return math.inf, math.inf
        lo_x = np.concatenate(([min(xs[0], left)], xs[xs < left], [left]))
        hi_x = np.concatenate(([right], xs[xs > right], [max(xs[-1], right)]))
        lo = float(np.trapezoid(np.abs(np.interp(lo_x, xs, vs) - r.u_minus), lo_x))
        hi = float(np.trapezoid(np.abs(np.interp(hi_x, xs, vs) - r.u_plus), hi_x))
        return lo, hi


def tanh_ramp(riemann: RiemannData, width: float = 1.0, shift: float = 0.0) -> InitialProfile:
    return InitialProfile(ProfileKind.TANH, riemann, width, shift)


def linear_ramp(riemann: RiemannData, half_width: float = 1.0) -> InitialProfile:
    return InitialProfile(ProfileKind.PIECEWISE_LINEAR, riemann, half_width)


def custom_profile(riemann: RiemannData, abscissae, values) -> InitialProfile:
    xs = np.asarray(abscissae, dtype=float)
    vs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or np.any(np.diff(xs) <= 0):
        raise ValueError("custom profile needs increasing abscissae matching values")
    if np.any(np.diff(vs) < 0):
        i = int(np.argmin(np.diff(vs)))
        raise NotMonotone(f"custom profile decreases between x={xs[i]} and x={xs[i + 1]}")
    return InitialProfile(ProfileKind.CUSTOM, riemann, abscissae=xs, table=vs)


def one_sided_differences(state: FieldState) -> np.ndarray:
    """Forward differences of the ghost-extended values (``n + 1`` entries)."""
    return np.diff(state.extended())


def total_variation(state: FieldState) -> float:
    """Discrete total variation of the node values."""
    return float(np.sum(np.abs(np.diff(state.values))))


def check_monotone(state: FieldState, tol: float | None = None) -> None:
    if tol is None:
        tol = 1e-14 * max(abs(state.u_plus - state.u_minus), 1.0)
    d = one_sided_differences(state)
    if d.min() < -tol:
        i = int(np.argmin(d))
        raise NotMonotone(f"one-sided difference {d[i]:.3e} < 0 at index {i}")


def sample_initial(grid: Grid1D, profile: InitialProfile, validate: bool = True) -> FieldState:
    """Sample ``profile`` on ``grid`` at time 0 and validate admissibility.

    ``validate=False`` exists for mutation tests that must build
    inadmissible data on purpose.
    """
    r = profile.riemann
    state = FieldState(grid, profile(grid.x), r.u_minus, r.u_plus, 0.0)
    if validate:
        check_monotone(state)
        lo, hi = profile.tail_integrals(grid.left, grid.right)
        if lo >= TAIL_TOL or hi >= TAIL_TOL:
            raise TailsTooFat(
                f"profile tails beyond [{grid.left}, {grid.right}] integrate to "
                f"{lo:.2e} (left) and {hi:.2e} (right); widen the grid"
            )
    return state


def derivative(state: FieldState) -> np.ndarray:
    """Central differences, with the far-field constants as ghost nodes."""
    ext = state.extended()
    return (ext[2:] - ext[:-2]) / (2.0 * state.grid.h)


def write_snapshot_csv(state: FieldState, path) -> Path:
    """Write ``x,u`` rows at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        fh.write("x,u\n")
        for xi, ui in zip(state.grid.x.tolist(), state.values.tolist()):
            fh.write(f"{xi:.17g},{ui:.17g}\n")
    return path


def read_snapshot_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
