import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deabias.bias import (GRAVITY, BiasClass, ExponentialBias, ExtrapolationWarning, LinearSpring,
                          Mass, NonlinearSpring, PmMre, PmPm, admissible_interval, bias_force,
                          classify_bias)
from deabias.config import PAPER_MAGNET, paper_bias
from deabias.errors import ContactError, DomainError, ValidationError
from deabias import magnetics

EXAMPLES = {
    "mass": Mass(27.1e-3),
    "linear": LinearSpring(100.0, 1.0),
    "cubic": NonlinearSpring(0.0, 1e5, 0.25),
    "pm_mre": paper_bias("MRE30", 15e-3),
    "pm_pm": PmPm(PAPER_MAGNET, PAPER_MAGNET, 60e-3),
    "fit": ExponentialBias(2.0, 240.0, 0.0, 15e-3),
}


def test_mass_force_constant():
    d = np.linspace(0, 20e-3, 11)
    np.testing.assert_array_equal(bias_force(EXAMPLES["mass"], d), np.full(11, 0.0271 * GRAVITY))


def test_linear_spring_arithmetic():
    assert bias_force(EXAMPLES["linear"], 5e-3) == pytest.approx(0.5)
    assert bias_force(EXAMPLES["linear"], 15e-3) == 0.0


def test_cubic_spring():
    b = NonlinearSpring(2.0, 1e5, 0.1)
    assert bias_force(b, 0.01) == pytest.approx(0.1 - 0.02 + 0.1)


def test_pm_mre_uses_gap():
    b = EXAMPLES["pm_mre"]
    assert b.force(3e-3) == pytest.approx(magnetics.pm_mre_force(b.magnet, b.disc, 12e-3, b.scale))
    assert b.max_deflection == pytest.approx(15e-3 - magnetics.force_peak_gap(b.magnet, b.disc))


@given(st.floats(0.0, 9.5e-3), st.floats(1e-6, 1e-3))
def test_pm_mre_increasing_with_deflection(d1, dd):
    b = EXAMPLES["pm_mre"]
    assert b.force(d1 + dd) > b.force(d1)


def test_domain_and_contact():
    for b in EXAMPLES.values():
        with pytest.raises(DomainError):
            b.force(-1e-6)
        with pytest.raises(ContactError):
            b.force(b.max_deflection + 1e-6)
    assert admissible_interval(EXAMPLES["pm_pm"]) == (0.0, pytest.approx(59e-3))
    assert admissible_interval(EXAMPLES["mass"]) == (0.0, 25e-3)


def test_invalid_biases():
    with pytest.raises(ValidationError):
        Mass(0.0)
    with pytest.raises(ValidationError):
        LinearSpring(-1.0, 1.0)
    with pytest.raises(ValidationError):
        PmMre(PAPER_MAGNET, EXAMPLES["pm_mre"].disc, 0.5e-3)
    with pytest.raises(ValidationError):
        ExponentialBias(1.0, -1.0, 0.0, 10e-3)


def test_exponential_bias_warns_outside_fit_range():
    b = ExponentialBias(2.0, 240.0, 0.01, 20e-3, gap_range=(5e-3, 50e-3))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert b.force(0.0) == pytest.approx(2.0 * math.exp(-240.0 * 0.02) + 0.01)
    with pytest.warns(ExtrapolationWarning):
        b.force(16e-3)


@pytest.mark.parametrize("key, expected", [
    ("mass", BiasClass.CONSTANT), ("linear", BiasClass.DECREASING),
    ("cubic", BiasClass.INCREASING), ("pm_mre", BiasClass.INCREASING),
    ("pm_pm", BiasClass.INCREASING), ("fit", BiasClass.INCREASING),
])
def test_classification(key, expected):
    assert classify_bias(EXAMPLES[key]) is expected


def test_mixed_classification():
    # softening-then-stiffening cubic
    assert classify_bias(NonlinearSpring(100.0, 1e6, 1.0)) is BiasClass.MIXED


@pytest.mark.parametrize("name", ["MRE15", "MRE30", "MRE40"])
@pytest.mark.parametrize("offset", [6e-3, 12e-3, 13.5e-3, 15e-3, 20e-3, 30e-3])
def test_paper_discs_increasing_at_working_offsets(name, offset):
    b = paper_bias(name, offset)
    assert classify_bias(b) is BiasClass.INCREASING
    if offset > 5e-3:
        assert classify_bias(b, (0.0, offset - 5e-3)) is BiasClass.INCREASING


@given(st.floats(0.01, 100.0))
def test_classification_invariant_under_scaling(k):
    b = EXAMPLES["pm_mre"]
    assert classify_bias(replace(b, scale=b.scale * k)) is classify_bias(b)
    assert classify_bias(Mass(0.0271 * k)) is BiasClass.CONSTANT
    assert classify_bias(LinearSpring(100.0 * k, 1.0 * k)) is BiasClass.DECREASING


@pytest.mark.parametrize("key", sorted(EXAMPLES))
def test_continuity_on_micrometre_grid(key):
    b = EXAMPLES[key]
    d = np.arange(0.0, b.max_deflection, 1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        f = np.asarray(b.force(d), dtype=float)
    assert np.all(np.isfinite(f))
    # no jump between neighbouring grid points above 0.1% of the force scale
    assert np.max(np.abs(np.diff(f))) <= 1e-3 * np.max(np.abs(f))
