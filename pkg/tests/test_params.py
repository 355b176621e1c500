import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracchoquard.errors import DimensionTooSmall, NonPositiveOmegaForPOmega, OutOfRange
from fracchoquard.params import RegimeTag, classify_regime, validate_params


def test_valid_example():
    pr = validate_params(3, 0.5, 2, 2, 1)
    assert (pr.dim, pr.s, pr.alpha, pr.p, pr.omega) == (3, 0.5, 2.0, 2.0, 1.0)


@pytest.mark.parametrize(
    "raw, name",
    [
        ((3, 1.2, 2, 2, 1), "s"),
        ((3, 0.0, 2, 2, 1), "s"),
        ((3, 0.5, 3.5, 2, 1), "alpha"),
        ((3, 0.5, 0.0, 2, 1), "alpha"),
        ((3, 0.5, 2, 1.0, 1), "p"),
        ((0, 0.5, 0.5, 2, 1), "dim"),
        ((2.5, 0.5, 0.5, 2, 1), "dim"),
        ((3, 0.5, 2, 2, -1), "omega"),
        ((3, math.nan, 2, 2, 1), "s"),
    ],
)
def test_out_of_range_names_the_bound(raw, name):
    with pytest.raises(OutOfRange) as exc:
        validate_params(*raw)
    assert exc.value.name == name


def test_zero_omega_needs_zero_mass_request():
    with pytest.raises(NonPositiveOmegaForPOmega):
        validate_params(3, 0.5, 2, 2, 0)
    assert validate_params(3, 0.5, 2, 2, 0, zero_mass=True).omega == 0.0


@pytest.mark.parametrize(
    "raw, tag",
    [
        ((3, 0.5, 2, 2, 1), RegimeTag.MASS_CRITICAL),
        ((3, 0.6, 2, 2, 1), RegimeTag.MASS_SUBCRITICAL),
        ((3, 0.5, 2, 2.5, 1), RegimeTag.NONEXISTENCE_HIGH),
        ((3, 0.5, 2, 5 / 3, 1), RegimeTag.NONEXISTENCE_LOW),
        ((3, 0.5, 2, 2.2, 1), RegimeTag.MASS_SUPERCRITICAL),
    ],
)
def test_classify_examples(raw, tag):
    assert classify_regime(validate_params(*raw)).tag == tag


def test_thresholds_example():
    lo, mid, hi = classify_regime(validate_params(3, 0.5, 2, 2, 1)).thresholds
    assert lo == pytest.approx(5 / 3, abs=1e-15)
    assert mid == pytest.approx(2.0, abs=1e-15)
    assert hi == pytest.approx(2.5, abs=1e-15)
    pr = validate_params(3, 0.6, 2, 2, 1)
    assert pr.p_mass == pytest.approx(1 + 3.2 / 3, rel=1e-15)


def test_energy_critical_only_at_zero_mass():
    pr = validate_params(1, 0.2, 0.2, 2.0, 0.0, zero_mass=True)
    assert classify_regime(pr).tag == RegimeTag.ENERGY_CRITICAL
    assert classify_regime(pr.replace(omega=1.0)).tag == RegimeTag.NONEXISTENCE_HIGH


def test_dimension_too_small():
    with pytest.raises(DimensionTooSmall):
        classify_regime(validate_params(1, 0.6, 0.5, 2, 1))


@pytest.mark.parametrize("which", ["p_low", "p_mass", "p_high"])
def test_tiny_perturbation_flips_tag(which):
    base = validate_params(3, 0.5, 2, 2, 1)
    t = getattr(base, which)
    at = classify_regime(base.replace(p=t)).tag
    below = classify_regime(base.replace(p=t - 1e-15)).tag
    above = classify_regime(base.replace(p=t + 1e-15)).tag
    assert below != at or above != at
    assert below != above


def test_threshold_ordering_random_draws():
    rng = np.random.default_rng(0)
    count = 0
    while count < 10_000:
        dim = int(rng.integers(1, 7))
        s = rng.uniform(1e-6, 1.0)
        if dim <= 2 * s:
            continue
        alpha = rng.uniform(1e-6, dim)
        pr = validate_params(dim, s, alpha, 1.5, 1.0)
        assert pr.p_low < pr.p_mass < pr.p_high
        count += 1


@settings(max_examples=300, deadline=None)
@given(
    dim=st.integers(1, 6),
    s=st.floats(0.01, 0.99),
    frac=st.floats(0.01, 0.99),
    p=st.floats(1.0001, 20.0),
)
def test_classify_is_consistent_with_thresholds(dim, s, frac, p):
    if dim <= 2 * s:
        return
    pr = validate_params(dim, s, frac * dim, p, 1.0)
    tag = classify_regime(pr).tag
    assert tag.in_window == (pr.p_low < p < pr.p_high)
