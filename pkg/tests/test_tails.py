import math

import numpy as np
import pytest
from scipy import integrate

from freetails import (
    EmpiricalMeasure,
    RemainderCheckConfig,
    check_remainder_asymptotics,
    classify_Mp,
    estimate_tail_index,
    hill_estimator,
    pareto,
    tail_ratio,
    uniform_grid,
)
from freetails.tails import hill_k, karamata_constants, population_hill, stated_constants


def karamata_by_quad(p, alpha):
    """alpha * int_0^inf s^(p-alpha) / (i - s) ds by quadrature."""
    f = lambda s, part: part(alpha * s ** (p - alpha) / (1j - s))
    re = sum(integrate.quad(f, a, b, args=(np.real,), limit=500)[0] for a, b in [(0, 1), (1, np.inf)])
    im = sum(integrate.quad(f, a, b, args=(np.imag,), limit=500)[0] for a, b in [(0, 1), (1, np.inf)])
    return re, im


@pytest.mark.parametrize("p,alpha", [(0, 0.7), (1, 1.5), (2, 2.5), (1, 1.2)])
def test_karamata_constants_against_quadrature(p, alpha):
    re, im = karamata_by_quad(p, alpha)
    k = karamata_constants(p, alpha)
    assert k["im"] == pytest.approx(im, rel=1e-6)
    assert k["re"] == pytest.approx(re, rel=1e-6)


def test_stated_constants_values():
    c = stated_constants(1, 1.5)
    assert c["im"] == pytest.approx(-(np.pi * 0.5 / 2) / np.cos(np.pi / 4))
    assert stated_constants(1, 2.0)["re"] == pytest.approx(-np.pi / 2)


def test_hill_k_rule():
    assert hill_k(10 ** 6) == 1000
    assert hill_k(5) == 2


def test_hill_on_pareto_sample():
    s = pareto(1.5).sample(10 ** 6, seed=2)
    a, thr, k = hill_estimator(s)
    assert k == 1000
    assert a == pytest.approx(1.5, abs=0.1)
    assert np.mean(s > thr) == pytest.approx(k / len(s), rel=0.01)


def test_population_hill_exact_for_pareto():
    assert population_hill(pareto(1.5), 20.0) == pytest.approx(1.5, rel=1e-6)


def test_estimate_tail_index_pareto():
    rep = estimate_tail_index(pareto(2.5))
    assert rep.alpha_hat == pytest.approx(2.5, abs=1e-6)


def test_estimate_tail_index_empirical_has_hill():
    e = EmpiricalMeasure(pareto(1.5).sample(100_000, seed=3), "nonneg")
    rep = estimate_tail_index(e, window=(5.0, 200.0))
    assert rep.hill["k"] == math.isqrt(100_000)
    assert rep.alpha_hat == pytest.approx(1.5, abs=0.15)


def test_tail_ratio_identity():
    x = np.geomspace(10, 100, 11)
    rep = tail_ratio(pareto(1.5), pareto(1.5, 2.0), x)
    assert np.allclose(rep.ratio, 2 ** -1.5)
    assert rep.terminal_ratio == pytest.approx(2 ** -1.5)


def test_classify():
    assert classify_Mp(pareto(1.5))[:2] == (1, 1.5)
    p, a, flags = classify_Mp(pareto(2.0))
    assert (p, a) == (1, 2.0) and "integer_alpha_boundary" in flags
    assert classify_Mp(uniform_grid(0, 1))[0] == math.inf


def test_remainder_truncated_normalisation():
    # with truncated-moment normalisation the stated constants are the limits
    cfg = RemainderCheckConfig(1, 1.5, y=np.geomspace(1e2, 1e4, 5))
    rep = check_remainder_asymptotics(pareto(1.5), cfg, with_phi=False)
    assert rep.truncated["im"][-1] == pytest.approx(rep.stated["im"], rel=0.01)
    assert rep.truncated["re"][-1] == pytest.approx(rep.stated["re"], rel=0.01)
    assert rep.measured["re"][-1] == pytest.approx(rep.karamata["re"], rel=0.01)


def test_report_serialises(tmp_path):
    cfg = RemainderCheckConfig(0, 0.7)
    rep = check_remainder_asymptotics(pareto(0.7), cfg)
    d = rep.to_dict()
    assert set(d["measured"]) >= {"im", "re", "im_phi"}
