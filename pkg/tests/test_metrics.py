import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_burgers.errors import BadP, NonpositiveError, NonpositiveTime, TooFewPoints
from nonlocal_burgers.field import FieldState, grid_with_spacing, make_grid
from nonlocal_burgers.metrics import (
    Correction,
    derivative_norm,
    error_to_rarefaction,
    error_to_viscous,
    excess_mass,
    fit_rate,
    gn_diagnostic,
    lp_norm,
    norm_report,
    parse_p,
    rate_shape,
)
from nonlocal_burgers.references import RiemannData, rarefaction, viscous_profile

STD = RiemannData(-1.0, 1.0)


def wr_state(t, h=0.05, half=None, r=STD):
    half = half or 3 * t + 20
    g = grid_with_spacing(-half, half, h)
    return FieldState(g, rarefaction(r, g.x, t), r.u_minus, r.u_plus, t)


def test_lp_norm_examples():
    h = 0.01
    x = np.arange(-1.0, 2.0 + h / 2, h)
    box = ((x >= 0) & (x <= 1)).astype(float)
    assert abs(lp_norm(box, h, 1) - 1.0) <= h
    assert lp_norm([3.0, -4.0], 1.0, np.inf) == 4.0
    h = 1e-3
    x = np.arange(-1.0, 1.0 + h / 2, h)
    assert lp_norm(1 - np.abs(x), h, 2) == pytest.approx(math.sqrt(2 / 3), abs=1e-3)
    with pytest.raises(BadP):
        lp_norm([1.0], 1.0, 0.5)
    assert parse_p("inf") == math.inf and parse_p("2") == 2.0


@settings(max_examples=50, deadline=None)
@given(vals=st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=60), split=st.integers(1, 3))
def test_exact_norm_facts(vals, split):
    f = np.array(vals)
    assert lp_norm(f, 0.3, np.inf) == np.max(np.abs(f))
    # disjoint supports away from the trapezoid end nodes
    f = np.concatenate(([0.0], f, [0.0]))
    k = min(split, f.size - 2)
    a = np.where(np.arange(f.size) <= k, f, 0.0)
    b = f - a
    assert lp_norm(f, 0.3, 1) == pytest.approx(lp_norm(a, 0.3, 1) + lp_norm(b, 0.3, 1), rel=1e-13, abs=1e-300)


def test_error_to_rarefaction_examples():
    s = wr_state(10.0)
    for p in (1, 2, np.inf):
        assert error_to_rarefaction(s, STD, p) == 0.0
    bump = np.exp(-s.grid.x**2) / math.sqrt(math.pi)
    pert = s.with_values(s.values + 0.1 * bump, 10.0)
    assert error_to_rarefaction(pert, STD, 1) == pytest.approx(0.1, abs=1e-10)
    with pytest.raises(NonpositiveTime):
        error_to_rarefaction(s.with_values(s.values, 0.0), STD, 1)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_rarefaction_error_rescaling(lam):
    s = wr_state(5.0 * lam, h=0.05 * lam)
    assert error_to_rarefaction(s, STD, np.inf) == 0.0
    assert error_to_rarefaction(s, STD, 1) == 0.0


def test_fit_rate_planted_exponents():
    t = np.geomspace(10, 1000, 11)
    fit = fit_rate(t, 3 * t**-0.5, np.inf, Correction.NONE)
    assert fit.exponent == pytest.approx(-0.5, abs=1e-9)
    assert fit.log_constant == pytest.approx(math.log(3), abs=1e-9)
    assert fit.residual < 1e-12 and fit.window == (10.0, 1000.0) and fit.samples == 11
    fit = fit_rate(t, 3 * t**-0.5 * np.sqrt(np.log(2 + t)), np.inf, Correction.SQRT_LOG)
    assert fit.exponent == pytest.approx(-0.5, abs=1e-9)
    d = fit.to_dict()
    assert d["correction"] == "sqrt_log" and d["p"] == "inf"


@settings(max_examples=50, deadline=None)
@given(k=st.floats(-2, 0), c=st.floats(0.01, 100), p=st.sampled_from([1.0, 2.0, math.inf]))
def test_fit_rate_recovers_planted(k, c, p):
    t = np.geomspace(10, 1000, 9)
    for corr in Correction:
        shape = rate_shape(t, p) / t ** (-(1 - 1 / p) / 2) if corr is Correction.SQRT_LOG else 1.0
        assert fit_rate(t, c * t**k * shape, p, corr).exponent == pytest.approx(k, abs=1e-6)


def test_fit_rate_errors():
    with pytest.raises(TooFewPoints):
        fit_rate([1, 2, 3, 4], [1, 1, 1, 1])
    with pytest.raises(NonpositiveError):
        fit_rate([1, 2, 3, 4, 5], [1, 1, 0, 1, 1])
    with pytest.raises(ValueError):
        fit_rate([1, 3, 2, 4, 5], [1, 1, 1, 1, 1])


def test_gn_diagnostic_examples():
    g = grid_with_spacing(-60, 60, 0.05)
    w = FieldState(g, viscous_profile(STD, g.x, 10.0), -1.0, 1.0, 10.0)
    assert gn_diagnostic(w, STD, np.inf) == 0.0
    u = w.with_values(rarefaction(STD, g.x, 10.0), 10.0)
    assert gn_diagnostic(u, STD, 1) == pytest.approx(1.0, rel=1e-14)
    assert 0 < gn_diagnostic(u, STD, np.inf) < np.inf


def test_gn_diagnostic_bounded_on_run(long_run):
    vals = [gn_diagnostic(s, STD, np.inf) for s in long_run.snapshots if s.time >= 10]
    assert max(vals) / min(vals) <= 10


def test_rate_bound_shape_on_run(short_run):
    e10 = error_to_rarefaction(short_run.at(10.0), STD, np.inf)
    c = e10 / rate_shape(10.0, np.inf)
    e100 = error_to_rarefaction(short_run.at(100.0), STD, np.inf)
    assert e100 <= 1.1 * c * rate_shape(100.0, np.inf)


def test_norm_report_row(short_run):
    rep = norm_report(short_run.at(10.0), STD)
    row = rep.row()
    assert row["time"] == 10.0
    assert set(row) >= {"err_rarefaction_pinf", "err_viscous_p1", "deriv_p2"}
    assert all(np.isfinite(v) and v >= 0 for v in row.values())
    assert rep.deriv_norms["1"] == pytest.approx(2.0, rel=1e-9)
    assert row["err_viscous_p1"] == error_to_viscous(short_run.at(10.0), STD, 1)


def test_derivative_norm_of_ramp():
    g = make_grid(-2.0, 2.0, 401)
    s = FieldState(g, np.clip(g.x, -1, 1), -1.0, 1.0)
    assert derivative_norm(s, 1) == pytest.approx(2.0, rel=1e-12)
    assert derivative_norm(s, np.inf) == pytest.approx(1.0, rel=1e-12)


def test_excess_mass_of_reference_and_run(short_run):
    s = wr_state(10.0, h=0.05)
    assert abs(excess_mass(s)) < 1e-10
    m0 = excess_mass(short_run.initial)
    for snap in short_run.snapshots:
        assert excess_mass(snap) == pytest.approx(m0, abs=1e-9)
