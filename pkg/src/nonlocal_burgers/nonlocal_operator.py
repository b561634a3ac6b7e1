r"""The dispersal operator :math:`Lu = J * u - u` on a uniform grid.

Both evaluation paths work with the shifted field :math:`v = u - u_-`, whose
far-field values are :math:`0` and :math:`u_+ - u_-`.  Since the weights and
the two tails sum to one,

.. math::

    (Lu)_i = \sum_k w_k v_{i-k} - v_i + m_{\mathrm{right}}\,(u_+ - u_-),

where :math:`m_{\mathrm{right}}` is the truncated kernel mass that samples
the right far field.  Constant states therefore give exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft
from scipy.linalg import solve_banded

from .errors import GridMismatch, SingularSolve, WrongKernel
from .field import FieldState, Grid1D
from .kernels import DiscreteKernel, KernelFamily, KernelSpec, discretize_kernel, DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class NonlocalOp:
    discrete_kernel: DiscreteKernel
    grid: Grid1D
    _spectrum: tuple = field(default=(), init=False, repr=False)

    def __post_init__(self):
        if not math.isclose(self.discrete_kernel.h, self.grid.h, rel_tol=1e-12):
            raise GridMismatch(
                f"kernel spacing {self.discrete_kernel.h} != grid spacing {self.grid.h}"
            )
        k = self.discrete_kernel.half_width
        size = scipy.fft.next_fast_len(self.grid.n + 4 * k, real=True)
        spec = scipy.fft.rfft(self.discrete_kernel.weights, size)
        spec.setflags(write=False)
        object.__setattr__(self, "_spectrum", (size, spec))

    @property
    def spec(self) -> KernelSpec | None:
        return self.discrete_kernel.spec


def make_operator(kernel: KernelSpec, grid: Grid1D, tol: float = DEFAULT_TOL) -> NonlocalOp:
    return NonlocalOp(discretize_kernel(kernel, grid.h, tol), grid)


def _padded_shift(state: FieldState, k: int) -> np.ndarray:
    v = state.values - state.u_minus
    jump = state.u_plus - state.u_minus
    return np.concatenate((np.zeros(k), v, np.full(k, jump)))


def apply_L(op: NonlocalOp, state: FieldState, method: str = "fft") -> np.ndarray:
    """Evaluate ``J * u - u`` at the grid nodes.

    ``method`` is ``"fft"`` (zero-padded real transform, the default) or
    ``"direct"`` (explicit weighted sum over offsets).
    """
    if state.grid != op.grid:
        raise GridMismatch("state grid differs from operator grid")
    dk = op.discrete_kernel
    k = dk.half_width
    n = op.grid.n
    vext = _padded_shift(state, k)
    if method == "fft":
        size, spec = op._spectrum
        full = scipy.fft.irfft(scipy.fft.rfft(vext, size) * spec, size)
        conv = full[2 * k:2 * k + n]
    elif method == "direct":
        conv = np.zeros(n)
        for j, w in enumerate(dk.weights):
            # offset = j - k; u(x_i - offset h) sits at vext[i + k - offset]
            start = 2 * k - j
            conv += w * vext[start:start + n]
    else:
        raise ValueError(f"unknown method {method!r}")
    v = vext[k:k + n]
    return conv - v + dk.tail_mass_right * (state.u_plus - state.u_minus)


def apply_L_elliptic(state: FieldState, kernel: KernelSpec | None = None) -> np.ndarray:
    r"""``L u`` for ``J = exp(-|x|)/2`` through the radiating-gas reduction.

    Solves ``-q'' + q = -u'`` with ``q = 0`` beyond both ends and returns
    ``-q'``.  ``u'`` and ``q`` sit on the cell faces, so every derivative is
    a compact centred difference.
    """
    if kernel is not None and not (
        kernel.family is KernelFamily.EXPONENTIAL and kernel.scale == 1.0
    ):
        raise WrongKernel("the elliptic reduction needs the exponential kernel with rate 1")
    h = state.grid.h
    m = state.grid.n + 1
    # q lives on the n + 1 cell faces between ghost-extended nodes
    ux = np.diff(state.extended()) / h
    ab = np.empty((3, m))
    ab[0, :] = -1.0 / h**2
    ab[1, :] = 2.0 / h**2 + 1.0
    ab[2, :] = -1.0 / h**2
    try:
        q = solve_banded((1, 1), ab, -ux, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSolve(str(exc)) from exc
    if not np.all(np.isfinite(q)):
        raise SingularSolve("tridiagonal solve produced non-finite values")
    return -np.diff(q) / h


def _embed(op: NonlocalOp, phi) -> tuple[FieldState, slice]:
    # zero-padded copy of phi on a grid extended by K nodes per side
    phi = np.asarray(phi, dtype=float)
    k = op.discrete_kernel.half_width
    g = op.grid
    h = g.h
    big = Grid1D(g.left - k * h, g.left + (g.n - 1 + k) * h, g.n + 2 * k)
    vals = np.concatenate((np.zeros(k), phi, np.zeros(k)))
    return FieldState(big, vals, 0.0, 0.0), slice(k, k + g.n)


def _apply_on(op: NonlocalOp, state: FieldState, method: str) -> np.ndarray:
    big_op = op if state.grid == op.grid else NonlocalOp(op.discrete_kernel, state.grid)
    return apply_L(big_op, state, method)


def kato_identity_check(op: NonlocalOp, phi, method: str = "direct") -> tuple[float, float]:
    """``(h sum L phi, h sum L phi sgn phi)`` over the whole line.

    ``phi`` is taken as an integrable field that vanishes off the grid, so
    ``L phi`` is summed over the grid extended by the kernel radius.
    """
    state, _ = _embed(op, phi)
    lphi = _apply_on(op, state, method)
    h = op.grid.h
    total = h * math.fsum(lphi.tolist())
    signed = h * math.fsum((lphi * np.sign(state.values)).tolist())
    return total, signed


def convexity_inequality_check(
    op: NonlocalOp,
    phi,
    g: Callable,
    g_prime: Callable,
    method: str = "direct",
) -> float:
    """``min_i [(L g(phi))_i - g'(phi_i) (L phi)_i]`` over the grid nodes."""
    phi = np.asarray(phi, dtype=float)
    state, inner = _embed(op, phi)
    g0 = float(g(np.zeros(1))[0])
    gstate = FieldState(state.grid, g(state.values), g0, g0)
    lg = _apply_on(op, gstate, method)[inner]
    lphi = _apply_on(op, state, method)[inner]
    return float(np.min(lg - g_prime(phi) * lphi))


def square():
    return (lambda s: s * s), (lambda s: 2.0 * s)


def negative_part_squared():
    # one-sided convention: g'(0) = 0
    return (lambda s: np.minimum(s, 0.0) ** 2), (lambda s: 2.0 * np.minimum(s, 0.0))


def smoothed_abs(delta: float = 1e-3):
    return (
        lambda s: np.sqrt(s * s + delta * delta) - delta,
        lambda s: s / np.sqrt(s * s + delta * delta),
    )
