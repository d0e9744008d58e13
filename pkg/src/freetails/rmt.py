"""Monte Carlo spectra of Wishart-times-diagonal products.

``W = X^* X / M`` with ``X`` an ``M x N`` complex Gaussian matrix
(``E|x_ij|^2 = 1``) and ``Y = diag(y_1..y_N)`` with i.i.d. draws from
``rho``.  The spectrum of ``W Y`` equals that of the Hermitian matrix
``Y^{1/2} W Y^{1/2} = (X D)^* (X D) / M`` with ``D = diag(sqrt y)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ._validation import check_int
from .exceptions import EigFailure, ValidationError
from .measures import EmpiricalMeasure, measure_from_dict
from .tails import TailReport, tail_ratio

N_MAX = 2000


@dataclass
class RmtConfig:
    N: int = 500
    M: int = 500
    trials: int = 50
    rho: object = None
    seed: int = 0
    ensemble: str = "complex-gaussian"

    def __post_init__(self):
        check_int(self.N, "N", minimum=1)
        check_int(self.M, "M", minimum=1)
        check_int(self.trials, "trials", minimum=1)
        if self.N > N_MAX:
            raise ValidationError(f"N is capped at {N_MAX}")
        if self.ensemble != "complex-gaussian":
            raise ValidationError("only the complex-gaussian ensemble is implemented")
        if self.rho is None:
            raise ValidationError("rho is required")
        if isinstance(self.rho, dict):
            self.rho = measure_from_dict(self.rho)

    @property
    def ratio(self):
        return self.N / self.M


@dataclass
class SpectrumSample:
    sample: EmpiricalMeasure
    clipped: int
    per_trial_max: np.ndarray


def _trial(cfg, rng):
    X = (rng.standard_normal((cfg.M, cfg.N)) + 1j * rng.standard_normal((cfg.M, cfg.N))) / np.sqrt(2.0)
    y = cfg.rho.sample(cfg.N, rng)
    XD = X * np.sqrt(y)[None, :]
    H = XD.conj().T @ XD / cfg.M
    return linalg.eigvalsh(H)


def sample_product_spectrum(config):
    """Pooled eigenvalues of ``Y^{1/2} W Y^{1/2}`` over ``config.trials`` runs.

    Trial ``k`` uses the generator spawned as child ``k`` of ``config.seed``,
    so results do not depend on execution order.
    """
    children = np.random.SeedSequence(config.seed).spawn(config.trials)
    eigs = []
    peaks = np.empty(config.trials)
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        try:
            ev = _trial(config, rng)
        except (linalg.LinAlgError, ValueError) as exc:
            raise EigFailure(f"eigenvalue computation failed: {exc}", trial=k) from exc
        eigs.append(ev)
        peaks[k] = ev[-1]
    ev = np.concatenate(eigs)
    clipped = int(np.sum(ev < -1e-10))
    ev = np.maximum(ev, 0.0)
    return SpectrumSample(EmpiricalMeasure(ev, "nonneg"), clipped, peaks)


def ks_distance(sample, cdf):
    """Two-sided Kolmogorov–Smirnov distance of a sample to a CDF callable."""
    v = np.sort(np.asarray(getattr(sample, "values", sample), float))
    n = len(v)
    F = np.asarray(cdf(v), float)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass
class TheoryComparison:
    ks: float
    tail: TailReport

    def to_dict(self):
        return {"ks": self.ks, "tail": self.tail.to_dict()}


def compare_to_theory(sample, theory, x=None):
    """KS distance on the body and tail ratio on the tail region.

    ``theory`` needs ``tail``; ``cdf`` is used when present, otherwise
    ``1 - tail``.
    """
    if isinstance(sample, SpectrumSample):
        sample = sample.sample
    cdf = getattr(theory, "cdf", None)
    if cdf is None:
        total = getattr(theory, "total_mass", 1.0)

        def cdf(v):
            return total - np.asarray(theory.tail(v), float)

    ks = ks_distance(sample, cdf)
    if x is None:
        v = np.sort(sample.values)
        n = len(v)
        lo = v[int(0.99 * n)]
        hi = v[int(0.999 * n)]
        x = np.geomspace(max(lo, 1e-12), max(hi, lo * 1.01), 20)
    return TheoryComparison(ks, tail_ratio(sample, theory, x))
