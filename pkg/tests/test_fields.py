import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacsim import (Constant, Impulse, MeasurementField, Noise, OutOfDomainError,
                    SpatialCosine, SumField, TableField, TemporalCosine, ValidationError,
                    evaluate_field)


def test_constant_field():
    f = MeasurementField(Constant(3.5))
    assert evaluate_field(f, 7, 12) == 3.5
    assert f.bound_m() == 3.5


def test_impulse_field():
    f = MeasurementField(Impulse(center=0))
    assert evaluate_field(f, 0, 0) == 1.0
    assert evaluate_field(f, 1, 0) == 0.0
    assert evaluate_field(f, 0, 9) == 1.0  # constant in time


def test_spatial_cosine_quarter_turn():
    # cos(pi/4 * 4) = cos(pi) = -1 at any step
    f = MeasurementField(SpatialCosine(1.0, math.pi / 4, 0.0))
    assert evaluate_field(f, 4, 0) == pytest.approx(-1.0, abs=1e-15)
    assert evaluate_field(f, 4, 33) == pytest.approx(-1.0, abs=1e-15)


def test_temporal_cosine_uniform_in_space():
    f = MeasurementField(TemporalCosine(2.0, 0.3, 0.1))
    assert evaluate_field(f, 0, 5) == evaluate_field(f, 17, 5)
    assert evaluate_field(f, 0, 5) == pytest.approx(2.0 * math.cos(0.3 * 5 + 0.1))


def test_table_field_out_of_domain():
    f = MeasurementField(TableField(np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])))
    assert evaluate_field(f, 1, 1) == 4.0
    with pytest.raises(OutOfDomainError):
        evaluate_field(f, 3, 0)
    with pytest.raises(OutOfDomainError):
        evaluate_field(f, 0, 2)


def test_static_table_ignores_step():
    f = MeasurementField(TableField(np.array([1.0, 2.0])))
    assert evaluate_field(f, 1, 0) == evaluate_field(f, 1, 99) == 2.0


def test_sum_field_adds_parts():
    f = MeasurementField(SumField((Constant(1.0), Impulse(center=2))))
    assert evaluate_field(f, 2, 0) == 2.0
    assert evaluate_field(f, 3, 0) == 1.0
    assert f.bound_m() == 2.0


def test_non_finite_parameters_rejected():
    with pytest.raises(ValidationError):
        Constant(float("nan"))
    with pytest.raises(ValidationError):
        SpatialCosine(float("inf"), 0.1)
    with pytest.raises(ValidationError):
        TableField(np.array([1.0, float("inf")]))
    with pytest.raises(ValidationError):
        Noise(-1.0)
    with pytest.raises(ValidationError):
        Noise(1.0, distribution="cauchy")


def test_negative_step_rejected():
    with pytest.raises(ValidationError):
        evaluate_field(MeasurementField(Constant(1.0)), 0, -1)


def test_noise_is_reproducible_per_point():
    f = MeasurementField(Constant(0.0), noise=Noise(1.0, seed=9))
    a = evaluate_field(f, 3, 5)
    b = evaluate_field(f, 3, 5)
    assert a == b
    assert evaluate_field(f, 3, 6) != a
    assert evaluate_field(f, 4, 5) != a


def test_noise_seed_changes_stream():
    f1 = MeasurementField(Constant(0.0), noise=Noise(1.0, seed=1))
    f2 = MeasurementField(Constant(0.0), noise=Noise(1.0, seed=2))
    assert evaluate_field(f1, 0, 0) != evaluate_field(f2, 0, 0)


def test_uniform_noise_stays_in_range():
    sigma = 0.5
    f = MeasurementField(Constant(0.0), noise=Noise(sigma, distribution="uniform", seed=4))
    half = math.sqrt(3.0) * sigma
    vals = [evaluate_field(f, i, k) for i in range(20) for k in range(20)]
    assert all(-half <= v <= half for v in vals)
    assert np.std(vals) == pytest.approx(sigma, rel=0.15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 500), st.integers(0, 500))
def test_noise_pure_in_point_and_seed(seed, i, k):
    f = MeasurementField(Constant(0.0), noise=Noise(1.0, seed=seed))
    assert evaluate_field(f, i, k) == evaluate_field(f, i, k)


def test_declared_bound_overrides_derived():
    f = MeasurementField(Constant(1.0), noise=Noise(2.0, seed=0), bound=10.0)
    assert f.bound_m() == 10.0
    g = MeasurementField(Constant(1.0), noise=Noise(2.0, seed=0))
    assert g.bound_m() == 1.0 + 12.0  # 6 sigma allowance
