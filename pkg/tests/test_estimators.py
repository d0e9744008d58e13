import numpy as np
import pytest
from sklearn.base import clone

from freetails import InversionConfig, MarchenkoPasturLaw, delta, pareto
from freetails.estimators import FreeCumulantTransformer, FreeRegularDensity, HillTailEstimator


def test_hill_estimator_api():
    x = pareto(1.5).sample(40_000, seed=0)
    est = HillTailEstimator().fit(x)
    assert est.k_ == 200
    assert est.alpha_ == pytest.approx(1.5, abs=0.2)
    assert est.predict([est.threshold_])[0] == pytest.approx(est.k_ / len(x))
    assert clone(est).get_params() == {"k": None}


def test_free_regular_density_is_mp():
    cfg = InversionConfig(body_max=6, tail_max=6, fit_tail=False)
    est = FreeRegularDensity(nu=delta(1.0), config=cfg).fit()
    x = np.array([0.5, 1.0, 2.0, 3.0])
    assert np.allclose(est.predict(x), MarchenkoPasturLaw().density(x), rtol=1e-3)


def test_cumulant_transformer_round_trip():
    m = np.vstack([MarchenkoPasturLaw().moments(6).values, MarchenkoPasturLaw(2.0).moments(6).values])
    k = FreeCumulantTransformer().fit_transform(m)
    assert np.allclose(k[0], 1.0)
    assert np.allclose(k[1], 2.0)
    back = FreeCumulantTransformer(inverse=True).fit_transform(k)
    assert np.allclose(back, m)
