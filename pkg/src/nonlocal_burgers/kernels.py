r"""Dispersal kernels :math:`J` and their quadrature on uniform grids.

Every kernel is a symmetric, nonnegative probability density with a finite
second moment.  Four families are supported:

* ``exponential``: :math:`J(x) = \tfrac{\lambda}{2} e^{-\lambda |x|}`
* ``gaussian``: centred normal density of standard deviation :math:`\sigma`
* ``compact_bump``: biweight :math:`\tfrac{15}{16a}(1 - (x/a)^2)^2` on :math:`|x| \le a`
* ``tabulated``: piecewise-linear interpolation of user samples

Discretisation uses exact cell integrals of :math:`J` (every family has a
closed-form survival function), so the weights are nonnegative by
construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .errors import (
    InfiniteSecondMoment,
    NegativeKernel,
    NonSymmetricKernel,
    NonUnitMass,
    SpacingTooCoarse,
)

DEFAULT_TOL = 1e-12
MASS_TOL = 1e-12


class KernelFamily(str, enum.Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    COMPACT_BUMP = "compact_bump"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A validated dispersal kernel.

    ``scale`` is the family parameter: decay rate for ``exponential``, width
    for ``gaussian``, half-width for ``compact_bump`` and support radius for
    ``tabulated``.
    """

    family: KernelFamily
    scale: float
    mass: float
    second_moment: float
    abscissae: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        if self.family is KernelFamily.EXPONENTIAL:
            lam = self.scale
            return 0.5 * lam * np.exp(-lam * x)
        if self.family is KernelFamily.GAUSSIAN:
            s = self.scale
            return np.exp(-0.5 * (x / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        if self.family is KernelFamily.COMPACT_BUMP:
            a = self.scale
            s = np.minimum(x / a, 1.0)
            return 15.0 / (16.0 * a) * (1.0 - s * s) ** 2
        return np.interp(x, self.abscissae, self.values, left=0.0, right=0.0)

    def sf(self, x):
        """Survival function ``int_x^inf J`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if self.family is KernelFamily.EXPONENTIAL:
            return 0.5 * np.exp(-self.scale * x)
        if self.family is KernelFamily.GAUSSIAN:
            return 0.5 * special.erfc(x / (self.scale * math.sqrt(2.0)))
        if self.family is KernelFamily.COMPACT_BUMP:
            s = np.minimum(x / self.scale, 1.0)
            return 0.5 - 15.0 / 16.0 * (s - 2.0 * s**3 / 3.0 + s**5 / 5.0)
        return _tabulated_sf(self.abscissae, self.values, x)

    def tail_mass(self, radius: float) -> float:
        """Mass of ``J`` outside ``[-radius, radius]``."""
        return float(2.0 * self.sf(radius))

    def truncation_radius(self, tol: float) -> float:
        """Smallest radius whose two-sided tail mass is at most ``tol``."""
        if self.family is KernelFamily.EXPONENTIAL:
            return math.log(1.0 / tol) / self.scale
        if self.family is KernelFamily.GAUSSIAN:
            return self.scale * math.sqrt(2.0) * float(special.erfcinv(tol))
        return self.scale


def _tabulated_sf(xs, vs, x):
    # exact right-tail integral of the piecewise-linear interpolant
    seg = 0.5 * (vs[1:] + vs[:-1]) * np.diff(xs)
    right_cum = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    for n, xi in enumerate(flat):
        if xi >= xs[-1]:
            out[n] = 0.0
            continue
        if xi <= xs[0]:
            out[n] = right_cum[0]
            continue
        j = int(np.searchsorted(xs, xi, side="right")) - 1
        a, b = xs[j], xs[j + 1]
        va, vb = vs[j], vs[j + 1]
        vx = va + (vb - va) * (xi - a) / (b - a)
        out[n] = 0.5 * (vx + vb) * (b - xi) + right_cum[j + 1]
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def _tabulated_second_moment(xs, vs):
    a, b = xs[:-1], xs[1:]
    fa, fb = vs[:-1], vs[1:]
    length = b - a
    const = fa * (b**3 - a**3) / 3.0
    slope = (fb - fa) / length
    lin = slope * ((b**4 - a**4) / 4.0 - a * (b**3 - a**3) / 3.0)
    return float(np.sum(const + lin))


def exponential(rate: float = 1.0) -> KernelSpec:
    return make_kernel("exponential", rate=rate)


def gaussian(width: float = 1.0) -> KernelSpec:
    return make_kernel("gaussian", width=width)


def compact_bump(half_width: float = 1.0) -> KernelSpec:
    return make_kernel("compact_bump", half_width=half_width)


def tabulated(abscissae, values) -> KernelSpec:
    return make_kernel("tabulated", abscissae=abscissae, values=values)


def load_tabulated(path) -> KernelSpec:
    """Read a two-column ``abscissa value`` text file (``#`` comments)."""
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    return tabulated(data[:, 0], data[:, 1])


def make_kernel(family, **params) -> KernelSpec:
    """Build and validate a kernel from its family name and parameters.

    >>> make_kernel("exponential", rate=1.0).second_moment
    2.0
    """
    family = KernelFamily(family)
    if family is KernelFamily.TABULATED:
        return _make_tabulated(params["abscissae"], params["values"])

    key = {
        KernelFamily.EXPONENTIAL: "rate",
        KernelFamily.GAUSSIAN: "width",
        KernelFamily.COMPACT_BUMP: "half_width",
    }[family]
    scale = float(params[key])
    if not (math.isfinite(scale) and scale > 0):
        raise ValueError(f"{family.value} kernel needs {key} > 0, got {scale}")
    m2 = {
        KernelFamily.EXPONENTIAL: 2.0 / scale**2,
        KernelFamily.GAUSSIAN: scale**2,
        KernelFamily.COMPACT_BUMP: scale**2 / 7.0,
    }[family]
    return KernelSpec(family, scale, 1.0, m2)


def _make_tabulated(abscissae, values) -> KernelSpec:
    xs = np.asarray(abscissae, dtype=float)
    vs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 3:
        raise ValueError("tabulated kernel needs matching 1-D arrays of >= 3 samples")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
        raise InfiniteSecondMoment("tabulated kernel has non-finite samples")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("tabulated abscissae must be strictly increasing")
    if np.any(vs < 0):
        raise NegativeKernel(f"tabulated kernel has negative value {vs.min():g}")
    scale_x = np.max(np.abs(xs))
    if not np.allclose(xs, -xs[::-1], rtol=0, atol=1e-12 * scale_x):
        raise NonSymmetricKernel("tabulated abscissae are not symmetric about 0")
    if not np.allclose(vs, vs[::-1], rtol=0, atol=1e-12 * max(vs.max(), 1e-300)):
        raise NonSymmetricKernel("tabulated values violate J(x) = J(-x)")
    # enforce bitwise symmetry so evaluation at +-x is identical
    xs = 0.5 * (xs - xs[::-1])
    vs = 0.5 * (vs + vs[::-1])

    mass = float(np.trapezoid(vs, xs))
    if not (math.isfinite(mass) and mass > 0):
        raise NonUnitMass(f"tabulated kernel mass {mass} cannot be renormalized")
    vs = vs / mass
    mass = float(np.trapezoid(vs, xs))
    if abs(mass - 1.0) > MASS_TOL:
        raise NonUnitMass(f"mass {mass!r} after renormalization")
    m2 = _tabulated_second_moment(xs, vs)
    if not (math.isfinite(m2) and m2 > 0):
        raise InfiniteSecondMoment(f"second moment {m2} is not finite and positive")
    xs.setflags(write=False)
    vs.setflags(write=False)
    return KernelSpec(KernelFamily.TABULATED, float(xs[-1]), 1.0, m2, xs, vs)


def kernel_moment(spec: KernelSpec, order: int) -> float:
    """Moment ``int x**order J(x) dx`` for ``order`` in {0, 1, 2}."""
    if order == 0:
        return 1.0
    if order == 1:
        return 0.0
    if order == 2:
        return spec.second_moment
    raise ValueError(f"moment order must be 0, 1 or 2, got {order}")


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Quadrature weights for offsets ``-K..K`` on spacing ``h``.

    ``tail_mass_left`` is the mass that falls beyond the truncation window on
    the left of the evaluation point (it samples ``u_minus``), and likewise
    for the right.
    """

    weights: np.ndarray
    tail_mass_left: float
    tail_mass_right: float
    h: float
    truncation_radius: float
    spec: KernelSpec | None = None

    @property
    def half_width(self) -> int:
        return (self.weights.size - 1) // 2

    @property
    def offsets(self) -> np.ndarray:
        k = self.half_width
        return np.arange(-k, k + 1)

    def total_mass(self) -> float:
        return math.fsum([*self.weights.tolist(), self.tail_mass_left, self.tail_mass_right])

    def second_moment(self) -> float:
        return math.fsum((self.weights * (self.offsets * self.h) ** 2).tolist())


def discretize_kernel(spec: KernelSpec, h: float, tol: float = DEFAULT_TOL) -> DiscreteKernel:
    """Cell-integral weights with truncation tail below ``tol``."""
    if not h > 0:
        raise ValueError(f"spacing must be positive, got {h}")
    if not 0 < tol < 1e-6:
        raise ValueError(f"tolerance must lie in (0, 1e-6), got {tol}")

    radius = spec.truncation_radius(tol)
    k_max = max(int(math.ceil(radius / h - 0.5)), 0)
    edges = (np.arange(k_max + 1) + 0.5) * h
    sf = np.asarray(spec.sf(edges), dtype=float)
    half = np.empty(k_max + 1)
    half[0] = 1.0 - 2.0 * sf[0]
    half[1:] = sf[:-1] - sf[1:]
    half = np.maximum(half, 0.0)
    tail = max(float(sf[-1]), 0.0)

    if np.count_nonzero(half[1:]) == 0:
        raise SpacingTooCoarse(
            f"spacing {h} resolves fewer than 3 nonzero weights for this kernel"
        )

    body = half[0] + 2.0 * math.fsum(half[1:].tolist())
    half = half * ((1.0 - 2.0 * tail) / body)
    half[0] = _close_center(half, tail)

    weights = np.concatenate([half[:0:-1], half])
    weights.setflags(write=False)
    return DiscreteKernel(weights, tail, tail, h, (k_max + 0.5) * h, spec)


def _close_center(half: np.ndarray, tail: float) -> float:
    # choose the centre weight so the correctly rounded total is exactly 1
    rest = [*half[1:].tolist(), *half[1:].tolist(), tail, tail]
    w0 = 1.0 - math.fsum(rest)
    for _ in range(64):
        total = math.fsum([w0, *rest])
        if total == 1.0:
            return w0
        w0 = math.nextafter(w0, -math.inf if total > 1.0 else math.inf)
    raise NonUnitMass("could not close the discrete mass to 1")


def asymmetric_copy(dk: DiscreteKernel, skew: float = 0.2) -> DiscreteKernel:
    """Unit-mass but lopsided copy of ``dk`` (mutation testing only)."""
    k = dk.offsets
    w = dk.weights * (1.0 + skew * np.sign(k))
    w = w * (math.fsum(dk.weights.tolist()) / math.fsum(w.tolist()))
    w.setflags(write=False)
    return DiscreteKernel(w, dk.tail_mass_left, dk.tail_mass_right, dk.h, dk.truncation_radius, None)


def kernel_asymmetry(dk: DiscreteKernel) -> float:
    """Largest ``|w[k] - w[-k]|``; zero for admissible kernels."""
    return float(np.max(np.abs(dk.weights - dk.weights[::-1])))
