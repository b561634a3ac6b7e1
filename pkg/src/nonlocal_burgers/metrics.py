"""Grid norms, distances to the reference waves and power-law rate fits."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BadP, NonpositiveError, NonpositiveTime, TooFewPoints
from .field import FieldState
from .references import (
    RiemannData,
    rarefaction,
    viscous_profile,
    viscous_profile_dx,
)

INF = math.inf


def parse_p(p) -> float:
    if isinstance(p, str):
        p = INF if p.strip().lower() in {"inf", "infinity", "oo"} else float(p)
    p = float(p)
    if not p >= 1:
        raise BadP(f"L^p norms need p >= 1, got {p}")
    return p


def p_label(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def lp_norm(f, h: float, p=2.0) -> float:
    """Discrete L^p norm; trapezoidal end weights for finite ``p``."""
    p = parse_p(p)
    a = np.abs(np.asarray(f, dtype=float))
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    w = np.ones_like(a)
    if a.size > 1:
        w[0] = w[-1] = 0.5
    if p == 1.0:
        return float(h * np.sum(w * a))
    return float((h * np.sum(w * a**p)) ** (1.0 / p))


def error_to_rarefaction(state: FieldState, r: RiemannData, p) -> float:
    if not state.time > 0:
        raise NonpositiveTime("distance to the rarefaction wave needs t > 0")
    diff = state.values - rarefaction(r, state.grid.x, state.time)
    return lp_norm(diff, state.grid.h, p)


def error_to_viscous(state: FieldState, r: RiemannData, p) -> float:
    if not state.time > 0:
        raise NonpositiveTime("distance to the viscous profile needs t > 0")
    diff = state.values - viscous_profile(r, state.grid.x, state.time)
    return lp_norm(diff, state.grid.h, p)


def derivative_norm(state: FieldState, p) -> float:
    """L^p norm of the forward differences ``(u[i+1] - u[i]) / h``, ghosts included."""
    d = np.diff(state.extended()) / state.grid.h
    p = parse_p(p)
    if math.isinf(p):
        return float(np.max(np.abs(d)))
    return float((state.grid.h * np.sum(np.abs(d) ** p)) ** (1.0 / p))


class Correction(str, enum.Enum):
    NONE = "none"
    SQRT_LOG = "sqrt_log"


def log_correction(t, p) -> np.ndarray:
    """``[log(2 + t)] ** ((1 + 1/p) / 2)``."""
    p = parse_p(p)
    return np.log(2.0 + np.asarray(t, dtype=float)) ** ((1.0 + 1.0 / p) / 2.0)


def rate_shape(t, p) -> np.ndarray:
    """Bound shape ``t**(-(1-1/p)/2) * [log(2+t)]**((1+1/p)/2)``."""
    p = parse_p(p)
    t = np.asarray(t, dtype=float)
    return t ** (-(1.0 - 1.0 / p) / 2.0) * log_correction(t, p)


@dataclass
class RateFit:
    exponent: float
    log_constant: float
    residual: float
    window: tuple[float, float]
    correction: Correction
    p: float
    samples: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["correction"] = self.correction.value
        d["p"] = p_label(self.p)
        d["window"] = list(self.window)
        return d


def fit_rate(times, errors, p=INF, correction=Correction.NONE) -> RateFit:
    """Least-squares line through ``(log t, log(err / correction(t)))``."""
    correction = Correction(correction)
    p = parse_p(p)
    t = np.asarray(times, dtype=float)
    e = np.asarray(errors, dtype=float)
    if t.size != e.size or t.size < 5:
        raise TooFewPoints(f"rate fits need >= 5 matching samples, got {t.size}")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ValueError("times must be positive and strictly increasing")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise NonpositiveError("rate fits need strictly positive finite errors")
    y = np.log(e)
    if correction is Correction.SQRT_LOG:
        y = y - np.log(log_correction(t, p))
    x = np.log(t)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return RateFit(float(slope), float(intercept), rms, (float(t[0]), float(t[-1])),
                   correction, p, int(t.size))


def gn_diagnostic(state: FieldState, r: RiemannData, p) -> float:
    """Interpolation ratio ``|u-w|_p / ((|u_x|_inf + |w_x|_inf)^a |u-w|_1^(1-a))``.

    ``a = (1 - 1/p) / 2``.  Returns 0 when ``u`` coincides with ``w``.
    """
    p = parse_p(p)
    if not state.time > 0:
        raise NonpositiveTime("the diagnostic needs t > 0")
    x, h, t = state.grid.x, state.grid.h, state.time
    diff = state.values - viscous_profile(r, x, t)
    num = lp_norm(diff, h, p)
    if num == 0.0:
        return 0.0
    a = 0.5 * (1.0 - 1.0 / p)
    slope = derivative_norm(state, INF) + float(np.max(viscous_profile_dx(r, x, t)))
    den = slope**a * lp_norm(diff, h, 1) ** (1.0 - a)
    return 0.0 if den == 0.0 else num / den


@dataclass
class NormReport:
    time: float
    p_values: list[float]
    err_to_rarefaction: dict[str, float] = field(default_factory=dict)
    err_to_viscous: dict[str, float] = field(default_factory=dict)
    deriv_norms: dict[str, float] = field(default_factory=dict)

    def row(self) -> dict[str, float]:
        out = {"time": self.time}
        for name, table in (("err_rarefaction", self.err_to_rarefaction),
                            ("err_viscous", self.err_to_viscous),
                            ("deriv", self.deriv_norms)):
            for key, val in table.items():
                out[f"{name}_p{key}"] = val
        return out


def norm_report(state: FieldState, r: RiemannData, p_values=(1.0, 2.0, INF)) -> NormReport:
    ps = [parse_p(p) for p in p_values]
    rep = NormReport(state.time, ps)
    for p in ps:
        key = p_label(p)
        rep.err_to_rarefaction[key] = error_to_rarefaction(state, r, p)
        rep.err_to_viscous[key] = error_to_viscous(state, r, p)
        rep.deriv_norms[key] = derivative_norm(state, p)
    return rep


def excess_mass(state: FieldState) -> float:
    """Cell sum of ``u`` minus the exact integral of the rarefaction wave.

    Both sides obey the same conservation law with the same far-field
    fluxes, so this quantity is constant in time for a conservative scheme.
    """
    g = state.grid
    a, b = g.left - 0.5 * g.h, g.right + 0.5 * g.h
    um, up, t = state.u_minus, state.u_plus, state.time
    lo, hi = min(um, up), max(um, up)

    def antiderivative(x):
        if t == 0.0:
            return lo * x if x < 0 else hi * x
        if x <= lo * t:
            return lo * x - 0.5 * lo * lo * t
        if x >= hi * t:
            return hi * x - 0.5 * hi * hi * t
        return 0.5 * x * x / t

    return g.h * math.fsum(state.values.tolist()) - (antiderivative(b) - antiderivative(a))
