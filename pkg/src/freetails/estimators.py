"""scikit-learn style wrappers around the numerical core."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .freeid import FreeRegularRep
from .inversion import InversionConfig, stieltjes_invert
from .measures import EmpiricalMeasure
from .tails import estimate_tail_index, hill_estimator
from .transforms import free_cumulants_to_moments, moments_to_free_cumulants


class HillTailEstimator(BaseEstimator):
    """Tail index of a 1-d sample; ``k=None`` uses floor(sqrt(n))."""

    def __init__(self, k=None):
        self.k = k

    def fit(self, X, y=None):
        X = check_array(np.asarray(X, float).reshape(-1, 1), ensure_min_samples=3)
        self.alpha_, self.threshold_, self.k_ = hill_estimator(X[:, 0], self.k)
        self.n_samples_in_ = X.shape[0]
        return self

    def predict(self, X):
        """Tail probabilities ``(k/n) (x/threshold)**-alpha`` above the threshold."""
        check_is_fitted(self, "alpha_")
        x = np.asarray(X, float).ravel()
        return self.k_ / self.n_samples_in_ * (x / self.threshold_) ** (-self.alpha_)

    def score(self, X, y=None):
        return -abs(estimate_tail_index(EmpiricalMeasure(np.ravel(X), "nonneg")).alpha_hat - self.alpha_)


class FreeRegularDensity(BaseEstimator):
    """Density of the free regular law with data ``(gamma, sigma)``.

    ``fit`` ignores its input and runs the Stieltjes inversion; ``predict``
    evaluates the recovered density.
    """

    def __init__(self, gamma=None, sigma=None, nu=None, eta_prime=0.0, config=None):
        self.gamma = gamma
        self.sigma = sigma
        self.nu = nu
        self.eta_prime = eta_prime
        self.config = config

    def fit(self, X=None, y=None):
        if self.nu is not None:
            self.rep_ = FreeRegularRep.from_nu(self.nu, self.eta_prime)
        else:
            self.rep_ = FreeRegularRep.from_sigma(self.gamma, self.sigma)
        self.law_ = self.rep_.law()
        self.measure_ = stieltjes_invert(self.law_.cauchy, self.config or InversionConfig())
        return self

    def predict(self, X):
        check_is_fitted(self, "measure_")
        return self.measure_.density_at(np.asarray(X, float).ravel())

    def tail(self, X):
        check_is_fitted(self, "measure_")
        return self.measure_.tail(np.asarray(X, float).ravel())


class FreeCumulantTransformer(BaseEstimator, TransformerMixin):
    """Rows of moments ``(m_0, ..., m_p)`` to free cumulants and back."""

    def __init__(self, inverse=False):
        self.inverse = inverse

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if self.inverse:
            return np.array([np.concatenate([[1.0], free_cumulants_to_moments(row)]) for row in X])
        return np.array([moments_to_free_cumulants(row).values for row in X])
