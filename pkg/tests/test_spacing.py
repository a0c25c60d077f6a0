import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacsim import (BandedWeighting, ChainConfig, Constant, ExpGaps, Impulse,
                    MeasurementField, NeedsMoreSensorsError, SpacingDraw, SpacingModel,
                    TableField, UniformGaps, ValidationError, ZeroHalo, k_poisson,
                    k_uniform, monte_carlo_spacing, run, sample_spacings, spacing_moments,
                    table_from_draw, weighted_target)
from lacsim import oracle


def test_sampler_deterministic():
    model = SpacingModel(ExpGaps(), seed=5)
    a = sample_spacings(model, 50)
    b = sample_spacings(model, 50)
    assert np.array_equal(a.gaps, b.gaps)
    c = sample_spacings(model, 50, seed=6)
    assert not np.array_equal(a.gaps, c.gaps)


def test_sampler_law_ranges():
    uni = sample_spacings(SpacingModel(UniformGaps(0.3), seed=1), 2000)
    assert np.all(uni.gaps >= 0.7) and np.all(uni.gaps <= 1.3)
    assert uni.gaps.mean() == pytest.approx(1.0, rel=0.02)
    # eta -> 0 degenerates to unit spacing
    tight = sample_spacings(SpacingModel(UniformGaps(1e-12), seed=1), 100)
    assert np.allclose(tight.gaps, 1.0, atol=1e-11)
    exp = sample_spacings(SpacingModel(ExpGaps(), seed=2), 10 ** 5)
    assert np.all(exp.gaps > 0)
    assert exp.gaps.mean() == pytest.approx(1.0, rel=0.01)


def test_sampler_validation():
    with pytest.raises(ValidationError):
        UniformGaps(0.0)
    with pytest.raises(ValidationError):
        UniformGaps(1.0)
    with pytest.raises(ValidationError):
        sample_spacings(SpacingModel(ExpGaps(), 0), 0)


def test_draw_distances_telescope():
    draw = SpacingDraw(np.array([1.0, 2.0, 0.5]))
    assert draw.sensors == 4
    assert draw.distance(0, 3) == pytest.approx(3.5)
    assert draw.distance(2, 1) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        draw.distance(0, 4)
    with pytest.raises(ValidationError):
        SpacingDraw(np.array([1.0, -0.5]))


def test_k_poisson_values():
    assert k_poisson(math.exp(-1.0)) == pytest.approx(1 / 3, abs=1e-15)
    for rho in (0.2, 0.5, 0.9):
        assert 0.0 < k_poisson(rho) < 1.0
    # rho -> 1 collapses the constant
    assert k_poisson(1 - 1e-9) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(ValidationError):
        k_poisson(1.0)


def test_small_one_minus_rho_approximation():
    for one_minus in (0.01, 0.05):
        rho = 1.0 - one_minus
        target = one_minus / 2
        assert abs(k_poisson(rho) - target) / target <= 0.05
        assert abs(k_uniform(rho, 0.4) - target) / target <= 0.05


def test_k_uniform_limits():
    # eta -> 0 recovers the deterministic unit-spacing constant
    for rho in (0.3, 0.7, 0.95):
        want = (1 - rho) / (1 + rho)
        assert k_uniform(rho, 1e-6) == pytest.approx(want, rel=1e-6)
    with pytest.raises(ValidationError):
        k_uniform(0.5, 1.5)


def test_k_uniform_matches_direct_expectation():
    # K = (1-E)/(1+E) with E = E[rho^d] from quadrature
    rho, eta = 0.9, 0.5
    d = np.linspace(1 - eta, 1 + eta, 200001)
    e_direct = np.trapezoid(rho ** d, d) / (2 * eta)
    want = (1 - e_direct) / (1 + e_direct)
    assert k_uniform(rho, eta) == pytest.approx(want, abs=1e-9)


def test_k_uniform_monte_carlo_agreement():
    rho, eta = 0.9, 0.5
    rng = np.random.default_rng(99)
    xi = rho ** rng.uniform(1 - eta, 1 + eta, 10 ** 6)
    e_mc = xi.mean()
    se = xi.std(ddof=1) / math.sqrt(xi.size)
    e_analytic = 2 * rho * math.sinh(eta * math.log(rho)) / (2 * eta * math.log(rho))
    assert abs(e_mc - e_analytic) <= 3 * se
    k_mc = (1 - e_mc) / (1 + e_mc)
    assert abs(k_mc - k_uniform(rho, eta)) <= 3 * se


def test_moment_chain_at_inverse_e():
    m = spacing_moments(math.exp(-1.0))
    assert m.e_xi == pytest.approx(0.5, abs=1e-15)
    assert m.e_xi2 == pytest.approx(1 / 3, abs=1e-15)
    assert m.var_xi == pytest.approx(1 / 12, abs=1e-15)
    assert m.var_u == pytest.approx(0.5, abs=1e-15)
    assert m.var_y == pytest.approx(1 / 9, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 0.98))
def test_variance_identity_everywhere(rho):
    m = spacing_moments(rho)
    k = k_poisson(rho)
    assert abs(m.var_y - 2 * k * k * m.var_u) <= 1e-14


def test_variance_vanishes_as_rho_to_one():
    assert spacing_moments(1 - 1e-9).var_y == pytest.approx(0.0, abs=1e-8)


def test_weighted_target_unit_spacing_reduction():
    # degenerate unit gaps with the deterministic constant reproduce the
    # exponential target exactly
    n, rho = 161, 0.6
    draw = SpacingDraw(np.ones(n - 1))
    field = MeasurementField(TableField(np.sin(np.arange(n))))
    i = n // 2
    got = weighted_target(draw, field, i, rho, (1 - rho) / (1 + rho), tail_eps=1e-13)
    want = oracle.exp_target(field, i, rho, n=n, boundary=ZeroHalo(), eps=1e-15)
    assert got == pytest.approx(want, abs=1e-10)


def test_weighted_target_single_spike():
    gaps = np.array([45.0, 2.0, 0.25, 45.0, 45.0])
    draw = SpacingDraw(gaps)
    rho, k_norm = 0.5, 0.37
    field = MeasurementField(Impulse(center=3))
    got = weighted_target(draw, field, 1, rho, k_norm)
    assert got == pytest.approx(k_norm * rho ** 2.25, abs=1e-15)


def test_weighted_target_needs_longer_draw():
    draw = SpacingDraw(np.full(4, 0.1))
    with pytest.raises(NeedsMoreSensorsError) as err:
        weighted_target(draw, MeasurementField(Constant(1.0)), 2, 0.9, 0.05)
    assert err.value.required > 4


def test_monte_carlo_spacing_exp_gaps():
    rho = math.exp(-1.0)
    rep = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 3), 2000)
    assert abs(rep.mean - 1.0) <= 4 * rep.mean_se
    assert rep.var_sampled == pytest.approx(1 / 9, rel=0.2)
    assert rep.var_analytic == pytest.approx(1 / 9, abs=1e-15)
    assert rep.k_analytic == pytest.approx(1 / 3, abs=1e-15)


def test_monte_carlo_spacing_uniform_gaps():
    rep = monte_carlo_spacing(0.9, SpacingModel(UniformGaps(0.3), 4), 2000)
    assert abs(rep.mean - 1.0) <= 4 * rep.mean_se
    assert rep.var_analytic is None
    assert rep.law == "uniform(eta=0.3)"


def test_monte_carlo_spacing_variance_across_rho():
    for rho in (0.5, math.exp(-1.0), 0.9):
        rep = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 101), 4000)
        want = spacing_moments(rho).var_y
        assert abs(rep.var_sampled - want) <= 3 * rep.var_se


def test_monte_carlo_spacing_se_shrinks():
    rho = math.exp(-1.0)
    small = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 5), 1000)
    large = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 5), 16000)
    ratio = small.mean_se / large.mean_se
    assert ratio == pytest.approx(4.0, rel=0.35)


def test_monte_carlo_spacing_deterministic():
    rho = 0.5
    a = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 8), 1000)
    b = monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 8), 1000)
    assert a.mean == b.mean and a.var_sampled == b.var_sampled
    with pytest.raises(ValidationError):
        monte_carlo_spacing(rho, SpacingModel(ExpGaps(), 8), 99)


def test_spacing_report_round_trips_to_dict():
    rep = monte_carlo_spacing(0.5, SpacingModel(ExpGaps(), 8), 1000)
    d = rep.to_dict()
    assert set(d) == {"rho", "law", "K_analytic", "mean", "mean_se", "var_analytic",
                      "var_sampled", "var_se", "replicates"}


def test_distributed_run_on_spacing_weights():
    # rho^{d(i,j)} weights with unit normalization run as raw weighted sums;
    # normalizing by the law constant reproduces the direct target, and
    # per-row normalization makes a constant field exactly one
    rho, radius = math.exp(-1.0), 25
    model = SpacingModel(ExpGaps(), seed=21)
    draw = sample_spacings(model, 140)
    n = draw.sensors
    table = table_from_draw(draw, rho, radius)
    field = MeasurementField(TableField(np.cos(0.3 * np.arange(n))))
    cfg = ChainConfig(n=n, boundary=ZeroHalo(), rounds=radius)
    trace = run(cfg, field, BandedWeighting(table))
    i = n // 2
    raw = trace.y[i, radius]
    # law-constant normalization vs the tail-truncated direct sum
    direct = weighted_target(draw, field, i, rho, k_poisson(rho), tail_eps=1e-13)
    assert k_poisson(rho) * raw == pytest.approx(direct, abs=1e-8)
    # per-row normalization: constant field lands exactly on 1
    ones = MeasurementField(Constant(1.0))
    trace_ones = run(cfg, ones, BandedWeighting(table))
    interior_rows = range(radius, n - radius)
    row_sums = table.row_totals()
    for s in (i - 1, i, i + 1):
        assert s in interior_rows
        assert trace_ones.y[s, radius] / row_sums[s] == pytest.approx(1.0, abs=1e-10)
