r"""Reference solutions for Riemann data :math:`u_- < u_+`.

``rarefaction`` is the entropy fan of inviscid Burgers.  ``viscous_profile``
solves :math:`w_t - w_{xx} + w w_x = 0` from the same step.  Through the
Hopf--Cole substitution the heat-equation solution splits into a left and a
right contribution,

.. math::

    A = e^{a}\,\tfrac12\operatorname{erfc}\alpha, \qquad
    B = e^{b}\,\tfrac12\operatorname{erfc}(-\beta),

and the profile is the convex combination
:math:`w = (u_- A + u_+ B)/(A + B) = u_- + (u_+ - u_-)\,\mathrm{expit}(\log B - \log A)`.
Working with :math:`\log B - \log A` keeps every evaluation finite for any
:math:`(x, t)`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, sparse, special

from .errors import DegenerateRiemann, NonpositiveTime

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class RiemannData:
    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (math.isfinite(self.u_minus) and math.isfinite(self.u_plus)):
            raise DegenerateRiemann("far-field states must be finite")
        if not self.u_minus < self.u_plus:
            raise DegenerateRiemann(
                f"rarefaction regime needs u_minus < u_plus, got "
                f"{self.u_minus} >= {self.u_plus}"
            )

    @property
    def jump(self) -> float:
        return self.u_plus - self.u_minus


def _check_time(t):
    if not np.all(np.asarray(t) > 0):
        raise NonpositiveTime(f"reference solutions need t > 0, got {t}")


def rarefaction(r: RiemannData, x, t):
    """Entropy solution ``clip(x/t, u_minus, u_plus)``."""
    _check_time(t)
    out = np.clip(np.asarray(x, dtype=float) / t, r.u_minus, r.u_plus)
    return out if out.ndim else float(out)


def _log_odds(r: RiemannData, x, t):
    # log B - log A, plus the normal-cdf arguments of A and B
    x = np.asarray(x, dtype=float)
    c = 1.0 / np.sqrt(2.0 * t)
    z_left = -(x - r.u_minus * t) * c
    z_right = (x - r.u_plus * t) * c
    lin = -0.5 * r.jump * x + 0.25 * (r.u_plus**2 - r.u_minus**2) * t
    d = lin + special.log_ndtr(z_right) - special.log_ndtr(z_left)
    return d, z_left, z_right


def _mills(z):
    # phi(z) / Phi(z), stable for large negative z
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI - special.log_ndtr(z))


def viscous_profile(r: RiemannData, x, t):
    """Smooth approximation ``w(x, t)`` of the rarefaction wave."""
    _check_time(t)
    d, _, _ = _log_odds(r, x, t)
    out = r.u_minus + r.jump * special.expit(d)
    return out if np.ndim(out) else float(out)


def _dlog_odds(r, x, t):
    d, z_left, z_right = _log_odds(r, x, t)
    c = 1.0 / np.sqrt(2.0 * t)
    m_r, m_l = _mills(z_right), _mills(z_left)
    d_x = -0.5 * r.jump + c * (m_r + m_l)
    dm_r = -m_r * (z_right + m_r)
    dm_l = -m_l * (z_left + m_l)
    d_xx = c * c * (dm_r - dm_l)
    return d, d_x, d_xx


def viscous_profile_dx(r: RiemannData, x, t):
    _check_time(t)
    d, d_x, _ = _dlog_odds(r, x, t)
    s, sc = special.expit(d), special.expit(-d)
    out = r.jump * s * sc * d_x
    return out if np.ndim(out) else float(out)


def viscous_profile_dxx(r: RiemannData, x, t):
    _check_time(t)
    d, d_x, d_xx = _dlog_odds(r, x, t)
    s, sc = special.expit(d), special.expit(-d)
    out = r.jump * s * sc * ((sc - s) * d_x * d_x + d_xx)
    return out if np.ndim(out) else float(out)


def solve_viscous_burgers_fd(r: RiemannData, t: float, h: float = 0.02, margin: float | None = None,
                             rtol: float = 1e-10):
    """Finite-difference solution of ``w_t - w_xx + w w_x = 0`` from the step.

    Independent of the closed form: conservative central differences in
    space, implicit adaptive integration in time, boundary values frozen at
    the far-field states.  Returns ``(x, w)``.
    """
    _check_time(t)
    if margin is None:
        margin = 12.0 + 12.0 * math.sqrt(t)
    left = math.floor((r.u_minus * t - margin) / h) * h
    right = math.ceil((r.u_plus * t + margin) / h) * h
    n = int(round((right - left) / h)) + 1
    x = left + h * np.arange(n)
    w0 = np.where(x < 0, r.u_minus, r.u_plus).astype(float)
    w0[np.abs(x) < 0.5 * h] = 0.5 * (r.u_minus + r.u_plus)
    um, up = r.u_minus, r.u_plus
    inv_h2 = 1.0 / (h * h)
    inv_2h = 1.0 / (2.0 * h)

    def rhs(_t, w):
        ext = np.concatenate(([um], w, [up]))
        f = 0.5 * ext * ext
        return (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) * inv_h2 - (f[2:] - f[:-2]) * inv_2h

    def jac(_t, w):
        lower = inv_h2 + w[:-1] * inv_2h
        upper = inv_h2 - w[1:] * inv_2h
        main = np.full(n, -2.0 * inv_h2)
        return sparse.diags([lower, main, upper], [-1, 0, 1], format="csc")

    sol = integrate.solve_ivp(rhs, (0.0, t), w0, method="Radau", jac=jac,
                              rtol=rtol, atol=rtol * 1e-2, t_eval=[t])
    if not sol.success:
        raise RuntimeError(f"viscous Burgers oracle failed: {sol.message}")
    return x, sol.y[:, -1]


def viscous_profile_numeric(r: RiemannData, x, t: float, h: float = 0.02):
    """Richardson-extrapolated finite-difference value of ``w`` at ``x``."""
    xs, coarse = solve_viscous_burgers_fd(r, t, h)
    xf, fine = solve_viscous_burgers_fd(r, t, h / 2)
    c = np.interp(x, xs, coarse)
    f = np.interp(x, xf, fine)
    return (4.0 * f - c) / 3.0
