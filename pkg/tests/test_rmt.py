import numpy as np
import pytest

from freetails import MarchenkoPasturLaw, RmtConfig, compare_to_theory, delta, pareto, sample_product_spectrum
from freetails.exceptions import ValidationError
from freetails.rmt import ks_distance


def test_config_validation():
    with pytest.raises(ValidationError):
        RmtConfig(N=5000, rho=delta(1.0))
    with pytest.raises(ValidationError):
        RmtConfig(rho=None)


def test_seeded_runs_are_identical():
    cfg = RmtConfig(60, 60, 3, delta(1.0), seed=5)
    a = sample_product_spectrum(cfg).sample.values
    b = sample_product_spectrum(cfg).sample.values
    assert np.array_equal(a, b)


def test_trials_are_independent_of_count():
    # trial k always uses child k of the seed sequence
    a = sample_product_spectrum(RmtConfig(40, 40, 2, pareto(2.5), seed=1)).per_trial_max
    b = sample_product_spectrum(RmtConfig(40, 40, 4, pareto(2.5), seed=1)).per_trial_max
    assert np.array_equal(a, b[:2])


def test_wishart_close_to_mp():
    spectrum = sample_product_spectrum(RmtConfig(200, 200, 5, delta(1.0), seed=0))
    cmp = compare_to_theory(spectrum.sample, MarchenkoPasturLaw())
    assert cmp.ks < 0.03
    assert spectrum.clipped == 0


def test_ks_distance_exact_uniform():
    v = (np.arange(10) + 0.5) / 10
    assert ks_distance(v, lambda x: x) == pytest.approx(0.05)
