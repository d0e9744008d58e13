"""Closed-form reference laws used as oracles and as convolution factors.

These expose the same evaluation surface as :class:`~freetails.measures.Measure`
(``cauchy``, ``cauchy_deriv``, ``tail``, ``moments``, ``mean``) but compute
everything from explicit formulas.
"""

import numpy as np

from ._validation import check_positive
from .exceptions import ValidationError
from .measures import MomentVector


def _sqrt_pair(z, a, b):
    """Branch of sqrt((z-a)(z-b)) behaving like z at infinity, z in C+."""
    return np.sqrt(z - a) * np.sqrt(z - b)


class SemicircleLaw:
    """Semicircle law of the given variance, centred at 0."""

    support = "real"
    total_mass = 1.0

    def __init__(self, variance=1.0):
        self.variance = check_positive(variance, "variance")
        self.radius = 2.0 * np.sqrt(self.variance)

    def cauchy(self, z):
        z = np.asarray(z, complex)
        r = self.radius
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        g = (zu - _sqrt_pair(zu, -r, r)) / (2.0 * self.variance)
        return np.where(lower, np.conj(g), g)

    def cauchy_deriv(self, z):
        z = np.asarray(z, complex)
        r = self.radius
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        d = (1.0 - zu / _sqrt_pair(zu, -r, r)) / (2.0 * self.variance)
        return np.where(lower, np.conj(d), d)

    def density(self, x):
        x = np.asarray(x, float)
        r = self.radius
        return np.sqrt(np.maximum(r * r - x * x, 0.0)) / (2.0 * np.pi * self.variance)

    def cdf(self, x):
        s = np.clip(np.asarray(x, float) / self.radius, -1.0, 1.0)
        return 0.5 + (s * np.sqrt(1.0 - s * s) + np.arcsin(s)) / np.pi

    def tail(self, x):
        return 1.0 - self.cdf(x)

    def moments(self, p):
        from math import comb

        m = np.zeros(p + 1)
        for j in range(0, p + 1, 2):
            k = j // 2
            m[j] = comb(2 * k, k) / (k + 1) * self.variance ** k
        return MomentVector(m)

    @property
    def mean(self):
        return 0.0

    def upper_bound(self):
        return self.radius

    def voiculescu(self, z):
        return self.variance / np.asarray(z, complex)


class MarchenkoPasturLaw:
    """Free Poisson law with rate ``rate`` and jump size ``jump``.

    For ``rate < 1`` there is an atom of mass ``1 - rate`` at 0.
    """

    support = "nonneg"
    total_mass = 1.0

    def __init__(self, rate=1.0, jump=1.0):
        self.rate = check_positive(rate, "rate")
        self.jump = check_positive(jump, "jump")
        self.lower = jump * (1.0 - np.sqrt(rate)) ** 2
        self.upper = jump * (1.0 + np.sqrt(rate)) ** 2

    def cauchy(self, z):
        z = np.asarray(z, complex)
        lam, a = self.rate, self.jump
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        s = _sqrt_pair(zu, self.lower, self.upper)
        g = (zu + a * (1.0 - lam) - s) / (2.0 * a * zu)
        return np.where(lower, np.conj(g), g)

    def cauchy_deriv(self, z):
        z = np.asarray(z, complex)
        lam, a = self.rate, self.jump
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        s = _sqrt_pair(zu, self.lower, self.upper)
        ds = (zu - 0.5 * (self.lower + self.upper)) / s
        num = zu + a * (1.0 - lam) - s
        d = ((1.0 - ds) * zu - num) / (2.0 * a * zu * zu)
        return np.where(lower, np.conj(d), d)

    def density(self, x):
        x = np.asarray(x, float)
        lo, hi = self.lower, self.upper
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.sqrt(np.maximum((hi - x) * (x - lo), 0.0)) / (2.0 * np.pi * self.jump * x)
        return np.where((x > lo) & (x < hi), f, 0.0)

    def cdf(self, x):
        """Closed form for rate 1; numerical quadrature otherwise."""
        x = np.asarray(x, float)
        if self.rate == 1.0:
            s = np.clip(x / self.upper, 0.0, 1.0)
            th = np.arcsin(np.sqrt(s))
            return (2.0 * th + np.sin(2.0 * th)) / np.pi
        from scipy.integrate import quad

        atom = max(0.0, 1.0 - self.rate)
        out = np.empty(x.shape)
        for idx, xv in np.ndenumerate(x):
            if xv < 0:
                out[idx] = 0.0
                continue
            top = min(max(xv, self.lower), self.upper)
            out[idx] = atom + quad(lambda t: float(self.density(t)), self.lower, top, limit=200)[0]
        return out

    def tail(self, x):
        return 1.0 - self.cdf(x)

    def moments(self, p):
        # free cumulants are rate * jump**n
        from .transforms import free_cumulants_to_moments

        kappa = self.rate * self.jump ** np.arange(1, p + 1)
        m = free_cumulants_to_moments(kappa) if p else np.zeros(0)
        return MomentVector(np.concatenate([[1.0], np.asarray(m, float)]))

    @property
    def mean(self):
        return self.rate * self.jump

    def upper_bound(self):
        return self.upper

    def kernel(self, z, k=0, deriv=0):
        """``int t^k/(z-t)^(1+deriv) dmu`` for ``k, deriv`` in {0, 1}.

        ``k = 1`` uses ``z G - 1 = 2 a lam / (z - a(1+lam) + s)``, which does
        not cancel at large ``|z|``.
        """
        if k not in (0, 1) or deriv not in (0, 1):
            raise ValidationError("closed-form kernel is available for k, deriv in {0, 1}")
        z = np.asarray(z, complex)
        if k == 0:
            return self.cauchy(z) if deriv == 0 else -self.cauchy_deriv(z)
        lam, a = self.rate, self.jump
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        c = a * (1.0 + lam)
        s = _sqrt_pair(zu, self.lower, self.upper)
        den = zu - c + s
        if deriv == 0:
            out = 2.0 * a * lam / den
        else:
            out = 2.0 * a * lam * (1.0 + (zu - c) / s) / den / den
        return np.where(lower, np.conj(out), out)

    def free_cumulant_transform(self, z):
        z = np.asarray(z, complex)
        return self.rate * self.jump * z / (1.0 - self.jump * z)

    def s_transform(self, u):
        return 1.0 / (self.jump * (self.rate + np.asarray(u, complex)))
