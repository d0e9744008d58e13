"""Property-based invariants on random atomic and Pareto measures."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freetails import (
    AtomicMeasure,
    FreeRegularRep,
    InversionConfig,
    SemicircleLaw,
    free_add,
    free_cumulants_to_moments,
    invert_F,
    moments_to_free_cumulants,
    pareto,
    reciprocal_cauchy,
    stieltjes_invert,
    voiculescu,
)
from freetails.transforms import certified_cone, nc_block_types, nc_partitions_bruteforce

SETTINGS = settings(max_examples=25, deadline=None)


@st.composite
def atomic(draw, max_atoms=4):
    n = draw(st.integers(1, max_atoms))
    loc = draw(st.lists(st.floats(0.0, 5.0), min_size=n, max_size=n))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    return AtomicMeasure(loc, w / w.sum())


measures = st.one_of(atomic(), st.floats(0.6, 3.5).map(pareto))
upper = st.builds(complex, st.floats(-20, 20), st.floats(1e-3, 20))


@SETTINGS
@given(measures, st.lists(upper, min_size=1, max_size=10))
def test_nevanlinna(mu, zs):
    z = np.array(zs)
    g = mu.cauchy(z)
    assert np.all(g.imag <= 0)
    assert np.all(np.abs(g) <= 1 / z.imag * (1 + 1e-9))
    f = reciprocal_cauchy(mu, z)
    assert np.all(f.imag >= z.imag * (1 - 1e-9))


@SETTINGS
@given(measures)
def test_F_inversion_round_trip(mu):
    cone = certified_cone(mu)
    w = cone.points(12)
    z = invert_F(mu, w, cone=cone)
    assert np.max(np.abs(reciprocal_cauchy(mu, z) - w) / np.abs(w)) < 1e-9


@SETTINGS
@given(atomic(3), atomic(3))
def test_phi_additivity(mu1, mu2):
    w = certified_cone(AtomicMeasure([10.0])).points(8) * 2
    z = w + voiculescu(mu1, w) + voiculescu(mu2, w)
    # F of the sum maps w + phi1(w) + phi2(w) back to w
    g = free_add(mu1, mu2, z)
    assert np.max(np.abs(1 / g - w) / np.abs(w)) < 1e-7


@SETTINGS
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=8))
def test_moment_cumulant_round_trip(kappa):
    kappa = np.array(kappa)
    m = free_cumulants_to_moments(kappa)
    back = moments_to_free_cumulants(np.concatenate([[1.0], m])).values
    assert np.allclose(back, kappa, atol=1e-8 * (1 + np.abs(m).max()))


@pytest.mark.parametrize("n", range(1, 8))
def test_nc_bruteforce_block_types(n):
    from collections import Counter

    brute = Counter(tuple(sorted(len(b) for b in part)) for part in nc_partitions_bruteforce(n))
    assert brute == nc_block_types(n)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.5, 3.0))
def test_stieltjes_round_trip_semicircle(var):
    law = SemicircleLaw(var)
    r = law.radius
    cfg = InversionConfig(support="real", body_max=r + 1, tail_max=r + 1, fit_tail=False)
    rec = stieltjes_invert(law.cauchy, cfg)
    x = np.linspace(-r - 1, r + 1, 40001)
    assert np.trapezoid(np.abs(rec.density_at(x) - law.density(x)), x) < 2e-3


@settings(max_examples=5, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.5, 2.0))
def test_free_regular_law_is_nevanlinna(eta_prime, loc):
    rep = FreeRegularRep.from_nu(AtomicMeasure([loc], [1.0]), eta_prime)
    z = np.array([0.5 + 0.01j, 3 + 0.1j, -1 + 1j, 10j])
    g = rep.law().cauchy(z)
    assert np.all(g.imag < 0)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sampling_deterministic(seed):
    mu = pareto(1.5)
    assert np.array_equal(mu.sample(50, seed=seed), mu.sample(50, seed=seed))
