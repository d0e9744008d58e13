import json

import numpy as np
import pytest
from scipy import integrate

from freetails import (
    AtomicMeasure,
    EmpiricalMeasure,
    GriddedDensity,
    ParetoMeasure,
    delta,
    dilate,
    measure_from_dict,
    pareto,
    pushforward_square,
    uniform_grid,
)
from freetails.exceptions import MomentDiverges, ValidationError


def test_delta_cauchy():
    z = np.array([2j, 1 + 1j])
    assert np.allclose(delta(1.0).cauchy(z), 1 / (z - 1))


def test_atomic_tail_and_moments():
    m = AtomicMeasure([1.0, 3.0], [0.25, 0.75])
    assert m.tail(2.0) == pytest.approx(0.75)
    assert m.tail(3.0) == pytest.approx(0.0)
    assert np.allclose(m.moments(2).values, [1.0, 2.5, 7.0])


def test_atomic_rejects_negative_weight():
    with pytest.raises(ValidationError):
        AtomicMeasure([1.0], [-1.0])


def test_pareto_tail_and_mean():
    mu = pareto(2.5)
    x = np.array([1.0, 2.0, 10.0])
    assert np.allclose(mu.tail(x), x ** -2.5)
    assert mu.moments(2).values[1] == pytest.approx(2.5 / 1.5)
    with pytest.raises(MomentDiverges):
        mu.moments(3)


@pytest.mark.parametrize("alpha", [0.7, 1.5, 2.5])
def test_pareto_cauchy_against_quad(alpha):
    mu = pareto(alpha)
    z = 3.0 + 2.0j
    f = lambda t, part: part(alpha * t ** (-alpha - 1) / (z - t))
    re = integrate.quad(f, 1, np.inf, args=(np.real,), limit=400)[0]
    im = integrate.quad(f, 1, np.inf, args=(np.imag,), limit=400)[0]
    assert abs(mu.cauchy(z) - (re + 1j * im)) < 1e-8


def test_kernel_shift():
    # int t^k/(z-t) dmu = z^k G - sum_{j<k} z^{k-1-j} m_j
    mu = pareto(2.5)
    z = np.array([5j, 2 + 7j])
    m = mu.moments(2).values
    lhs = mu.kernel(z, 2)
    rhs = z ** 2 * mu.cauchy(z) - z * m[0] - m[1]
    assert np.allclose(lhs, rhs, rtol=1e-9)


def test_uniform_grid_mass_and_moments():
    u = uniform_grid(0.0, 2.0)
    assert u.total_mass == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(u.moments(2).values, [1.0, 1.0, 4.0 / 3.0], atol=1e-6)


def test_gridded_density_cauchy_against_quad():
    u = uniform_grid(0.0, 2.0)
    z = 1.0 + 0.5j
    re = integrate.quad(lambda t: np.real(0.5 / (z - t)), 0, 2)[0]
    im = integrate.quad(lambda t: np.imag(0.5 / (z - t)), 0, 2)[0]
    assert abs(u.cauchy(z) - (re + 1j * im)) < 1e-6


def test_sampling_is_deterministic():
    mu = pareto(1.5)
    a = mu.sample(1000, seed=3)
    b = mu.sample(1000, seed=3)
    assert np.array_equal(a, b)
    assert a.min() >= 1.0


def test_pareto_sample_tail():
    s = pareto(1.5).sample(200_000, seed=1)
    assert np.mean(s > 10) == pytest.approx(10 ** -1.5, rel=0.05)


def test_empirical_measure():
    e = EmpiricalMeasure([1.0, 2.0, 3.0, 4.0], "nonneg")
    assert e.tail(2.5) == pytest.approx(0.5)
    assert e.cauchy(1j) == pytest.approx(np.mean(1 / (1j - np.arange(1, 5))))


def test_dilate_and_square():
    # D_a mu(S) = mu(a S) moves an atom at 6 to 2
    d = dilate(delta(6.0), 3.0)
    assert d.cauchy(1j) == pytest.approx(1 / (1j - 2))
    s = pushforward_square(AtomicMeasure([1.0, 3.0], [0.5, 0.5]))
    assert s.tail(5.0) == pytest.approx(0.5)


@pytest.mark.parametrize("mu", [delta(1.0), pareto(1.5, 2.0), uniform_grid(0, 2)])
def test_dict_round_trip(mu):
    back = measure_from_dict(json.loads(json.dumps(mu.to_dict())))
    z = np.array([1 + 1j, 4j])
    assert np.allclose(back.cauchy(z), mu.cauchy(z))


def test_pareto_class_params():
    mu = ParetoMeasure(2.0, 1.5, 2.0 ** 1.5)
    assert mu.x0 == 2.0 and mu.alpha == 1.5
    assert mu.tail(4.0) == pytest.approx(2 ** -1.5)
    assert mu.total_mass == pytest.approx(1.0)
    assert isinstance(uniform_grid(0, 1), GriddedDensity)
