import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nonlocal_burgers.errors import (
    InfiniteSecondMoment,
    NegativeKernel,
    NonSymmetricKernel,
    SpacingTooCoarse,
)
from nonlocal_burgers.kernels import (
    KernelFamily,
    asymmetric_copy,
    compact_bump,
    discretize_kernel,
    exponential,
    gaussian,
    kernel_asymmetry,
    kernel_moment,
    load_tabulated,
    make_kernel,
    tabulated,
)

CLOSED = [exponential(1.0), exponential(2.5), gaussian(1.0), gaussian(0.5), compact_bump(1.0),
          compact_bump(2.0)]


def _quad(f, spec):
    support = spec.scale if spec.family is KernelFamily.COMPACT_BUMP else np.inf
    val, _ = quad(f, -support, support, points=None if np.isinf(support) else [0.0],
                  epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def test_exponential_is_the_radiating_gas_kernel():
    k = exponential(1.0)
    x = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
    np.testing.assert_allclose(k(x), 0.5 * np.exp(-np.abs(x)), rtol=1e-15)
    assert abs(_quad(k, k) - 1.0) < 1e-12


@pytest.mark.parametrize("spec", CLOSED, ids=lambda s: f"{s.family.value}-{s.scale}")
def test_closed_families_unit_mass_and_symmetry(spec):
    assert abs(_quad(spec, spec) - 1.0) < 1e-12
    x = np.linspace(0.0, 5.0, 101)
    assert np.array_equal(spec(x), spec(-x))
    assert np.all(spec(x) >= 0)


def test_compact_bump_mass_by_adaptive_quadrature():
    assert abs(_quad(compact_bump(2.0), compact_bump(2.0)) - 1.0) < 1e-12


@pytest.mark.parametrize("spec", CLOSED, ids=lambda s: f"{s.family.value}-{s.scale}")
def test_second_moment_matches_quadrature(spec):
    m2 = _quad(lambda x: x * x * spec(x), spec)
    assert kernel_moment(spec, 2) == pytest.approx(m2, rel=1e-10)


def test_moment_examples():
    assert kernel_moment(exponential(1.0), 1) == 0.0
    assert kernel_moment(exponential(1.0), 2) == 2.0
    assert kernel_moment(gaussian(0.5), 2) == pytest.approx(0.25, rel=1e-15)
    assert kernel_moment(gaussian(0.5), 0) == 1.0


@pytest.mark.parametrize("spec", CLOSED, ids=lambda s: f"{s.family.value}-{s.scale}")
def test_survival_function_matches_quadrature(spec):
    for x in (0.0, 0.3, 1.1):
        tail, _ = quad(spec, x, spec.scale if spec.family is KernelFamily.COMPACT_BUMP else np.inf,
                       epsabs=1e-15, epsrel=1e-13)
        assert float(spec.sf(x)) == pytest.approx(tail, abs=1e-13)


def test_shifted_gaussian_table_is_not_symmetric():
    x = np.linspace(-6, 6, 121)
    with pytest.raises(NonSymmetricKernel):
        tabulated(x, np.exp(-0.5 * (x - 0.1) ** 2))


def test_tabulated_validation():
    x = np.linspace(-2, 2, 41)
    with pytest.raises(NegativeKernel):
        tabulated(x, np.cos(x))
    with pytest.raises(InfiniteSecondMoment):
        tabulated(x, np.where(x == 0, np.inf, 1.0))
    with pytest.raises(ValueError):
        make_kernel("exponential", rate=-1.0)
    with pytest.raises(ValueError):
        make_kernel("no_such_family")


def test_tabulated_renormalizes_and_loads(tmp_path):
    x = np.linspace(-3, 3, 61)
    v = 7.0 * np.maximum(1 - np.abs(x) / 3, 0)
    k = tabulated(x, v)
    assert np.trapezoid(k.values, k.abscissae) == pytest.approx(1.0, abs=1e-12)
    # tent of half-width 3: second moment a^2 / 6
    assert k.second_moment == pytest.approx(1.5, rel=1e-12)
    path = tmp_path / "tent.txt"
    path.write_text("# tent\n" + "\n".join(f"{a} {b}" for a, b in zip(x, v)))
    k2 = load_tabulated(path)
    assert np.array_equal(k2.values, k.values)
    dk = discretize_kernel(k2, 0.1)
    assert dk.total_mass() == 1.0


def test_exponential_truncation_radius():
    dk = discretize_kernel(exponential(1.0), 0.1, 1e-12)
    assert dk.truncation_radius >= -math.log(1e-12)
    assert dk.tail_mass_left == dk.tail_mass_right <= 1e-12


def test_compact_bump_has_zero_tails():
    dk = discretize_kernel(compact_bump(1.0), 0.25)
    assert dk.tail_mass_left == 0.0 and dk.tail_mass_right == 0.0
    assert dk.total_mass() == 1.0


def test_spacing_too_coarse():
    with pytest.raises(SpacingTooCoarse):
        discretize_kernel(compact_bump(1.0), 5.0)
    with pytest.raises(ValueError):
        discretize_kernel(exponential(1.0), 0.1, 1e-3)


@settings(max_examples=60, deadline=None)
@given(
    family=st.sampled_from(["exponential", "gaussian", "compact_bump"]),
    scale=st.floats(0.3, 3.0),
    h=st.floats(0.01, 0.2),
)
def test_discrete_kernel_invariants(family, scale, h):
    key = {"exponential": "rate", "gaussian": "width", "compact_bump": "half_width"}[family]
    spec = make_kernel(family, **{key: scale})
    try:
        dk = discretize_kernel(spec, h)
    except SpacingTooCoarse:
        return
    w = dk.weights
    assert np.all(w >= 0)
    assert np.array_equal(w, w[::-1])
    assert math.fsum([*w.tolist(), dk.tail_mass_left, dk.tail_mass_right]) == 1.0


@pytest.mark.parametrize("spec", [exponential(1.0), gaussian(1.0), compact_bump(2.0)],
                         ids=["exp", "gauss", "bump"])
def test_discrete_second_moment_converges(spec):
    gaps = [abs(discretize_kernel(spec, h).second_moment() - spec.second_moment)
            for h in (0.2, 0.1, 0.05)]
    assert gaps[1] <= 0.5 * gaps[0] and gaps[2] <= 0.5 * gaps[1]


def test_asymmetric_copy_is_detected():
    dk = discretize_kernel(exponential(1.0), 0.1)
    bad = asymmetric_copy(dk)
    assert kernel_asymmetry(dk) == 0.0
    assert kernel_asymmetry(bad) > 1e-3
    assert bad.total_mass() == pytest.approx(1.0, abs=1e-15)
