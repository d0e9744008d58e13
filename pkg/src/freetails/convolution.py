"""Free additive and multiplicative convolution.

``free_add`` uses the analytic subordination fixed point.  ``free_multiply``
solves the S-transform relations pointwise in the complex plane: writing
``f(b) = b G(b) - 1`` (so that ``psi(1/b) = f(b)``), the product law at
``zeta`` satisfies

    f1(b1) = f2(b2) = u,    u b1 b2 = zeta (1 + u),    G(zeta) = (1 + u)/zeta,

which is ``chi_1(u) chi_2(u) (1 + u)/u = 1/zeta`` with ``chi_j(u) = 1/b_j``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_upper, check_int, check_positive
from .exceptions import (
    ContinuationStuck,
    InversionFailure,
    MeanZero,
    MomentDiverges,
    NoConvergence,
    ValidationError,
)
from .freeid import FreeRegularRep
from .measures import measure_from_dict, scale_mass
from .transforms import cauchy_deriv


# ---------------------------------------------------------------------------
# additive


@dataclass
class SubordinationState:
    z: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    residual: np.ndarray
    iterations: int


def _F(measure, w):
    return 1.0 / measure.cauchy(w)


def subordination(mu1, mu2, z, tol=1e-12, max_iter=500):
    """Fixed point ``omega1 = z + h2(z + h1(omega1))``, ``h = F - id``."""
    z = as_upper(np.atleast_1d(z))
    om1 = z.copy()
    prev_res = np.full(z.shape, np.inf)
    res = prev_res
    it = 0
    for it in range(1, max_iter + 1):
        f1 = _F(mu1, om1)
        om2 = z + f1 - om1
        f2 = _F(mu2, om2)
        new = z + f2 - om2
        res = np.abs(new - om1)
        # average with the previous iterate where the residual went up
        worse = res > prev_res
        new = np.where(worse, 0.5 * (new + om1), new)
        if np.any(new.imag < z.imag * (1 - 1e-12)) or np.any(om2.imag <= 0):
            raise NoConvergence("subordination iterate left the upper half-plane", it, float(res.max()))
        om1 = new
        prev_res = res
        if np.all(res <= tol * np.maximum(np.abs(z), 1.0)):
            break
    else:
        raise NoConvergence("subordination did not converge", max_iter, float(res.max()))
    f1 = _F(mu1, om1)
    om2 = z + f1 - om1
    resid = np.maximum(np.abs(f1 - _F(mu2, om2)), np.abs(om1 + om2 - z - f1))
    return SubordinationState(z, om1, om2, resid, it)


def free_add(mu1, mu2, z, tol=1e-12, max_iter=500):
    """Cauchy transform of ``mu1 boxplus mu2`` at ``z``."""
    z = np.asarray(z, complex)
    st = subordination(mu1, mu2, z.ravel(), tol, max_iter)
    return (1.0 / _F(mu1, st.omega1)).reshape(z.shape)


class FreeSum:
    """Lazy ``mu1 boxplus mu2`` exposing ``cauchy``."""

    total_mass = 1.0

    def __init__(self, mu1, mu2, tol=1e-12):
        self.mu1, self.mu2, self.tol = mu1, mu2, tol
        s1, s2 = getattr(mu1, "support", "real"), getattr(mu2, "support", "real")
        self.support = "nonneg" if s1 == s2 == "nonneg" else "real"

    def cauchy(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        g = free_add(self.mu1, self.mu2, zu, self.tol)
        return np.where(lower, np.conj(g), g)


# ---------------------------------------------------------------------------
# multiplicative


def _mean(measure):
    try:
        m = float(measure.mean)
    except MomentDiverges:
        raise ValidationError("the S-transform solver needs factors with a finite mean") from None
    if m == 0:
        raise MeanZero("S-transform is undefined for a factor with mean 0")
    return m


def _f_and_deriv(measure, b):
    """``f(b) = b G(b) - 1 = int t/(b - t)`` and ``f'(b)``."""
    if hasattr(measure, "kernel"):
        # direct form; b G(b) - 1 cancels badly once |b| is large
        return measure.kernel(b, 1), -measure.kernel(b, 1, 1)
    g = measure.cauchy(b)
    return b * g - 1.0, g + b * cauchy_deriv(measure, b)


def _mul_newton(mu1, mu2, zeta, b1, b2, tol, max_iter):
    b1, b2 = b1.copy(), b2.copy()
    ok = np.zeros(len(zeta), bool)
    active = np.ones(len(zeta), bool)
    scale = np.maximum(np.abs(zeta), 1.0)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        x1, x2, zt = b1[idx], b2[idx], zeta[idx]
        u, d1 = _f_and_deriv(mu1, x1)
        v, d2 = _f_and_deriv(mu2, x2)
        e1 = u - v
        e2 = u * x1 * x2 - zt * (1.0 + u)
        j11, j12 = d1, -d2
        j21 = d1 * x1 * x2 + u * x2 - zt * d1
        j22 = u * x1
        det = j11 * j22 - j12 * j21
        s1 = (e1 * j22 - j12 * e2) / det
        s2 = (j11 * e2 - j21 * e1) / det
        n1, n2 = x1 - s1, x2 - s2
        for _ in range(50):
            bad = (n1.imag <= 0) | (n2.imag <= 0)
            if not bad.any():
                break
            s1 = np.where(bad, 0.5 * s1, s1)
            s2 = np.where(bad, 0.5 * s2, s2)
            n1, n2 = x1 - s1, x2 - s2
        good = np.isfinite(n1) & np.isfinite(n2)
        b1[idx[good]] = n1[good]
        b2[idx[good]] = n2[good]
        step = np.maximum(np.abs(s1), np.abs(s2))
        res = np.maximum(np.abs(e1), np.abs(e2) / scale[idx])
        done = (step <= tol * np.maximum(np.abs(x1) + np.abs(x2), 1.0)) | (res <= 1e-12)
        ok[idx[done & good]] = True
        active[idx[done | ~good]] = False
    idx = np.flatnonzero(ok)
    if len(idx):
        u, _ = _f_and_deriv(mu1, b1[idx])
        v, _ = _f_and_deriv(mu2, b2[idx])
        r = np.maximum(np.abs(u - v), np.abs(u * b1[idx] * b2[idx] - zeta[idx] * (1 + u)) / scale[idx])
        # b -> 0 with u -> -1 solves both equations in the limit but is not a
        # branch of the subordination functions: 1 + u = zeta G(zeta) != 0
        degenerate = np.abs(1.0 + u) < 1e-6
        ok[idx[(r > 1e-8) | degenerate]] = False
    return b1, b2, ok


def free_multiply(mu1, mu2, z, tol=1e-12, max_iter=60, return_subordination=False):
    """Cauchy transform of ``mu1 boxtimes mu2`` at ``z`` (both factors on [0, inf)).

    Each point is continued from ``Im z = 10 (1 + |Re z|) m1 m2`` downward.
    """
    z = as_upper(np.atleast_1d(np.asarray(z, complex)))
    shape = z.shape
    zeta = z.ravel()
    m1, m2 = _mean(mu1), _mean(mu2)
    x = zeta.real
    y_target = zeta.imag
    y = np.maximum(10.0 * (1.0 + np.abs(x) + m1 * m2), y_target)
    q = np.full(len(zeta), 0.1)
    z0 = x + 1j * y
    b1, b2, ok = _mul_newton(mu1, mu2, z0, z0 / m2, z0 / m1, tol, max_iter)
    if not np.all(ok):
        raise InversionFailure("S-transform Newton failed in the asymptotic regime")
    done = y <= y_target
    for _ in range(400):
        idx = np.flatnonzero(~done)
        if len(idx) == 0:
            break
        y_next = np.maximum(y_target[idx], y[idx] * q[idx])
        zt = x[idx] + 1j * y_next
        n1, n2, ok = _mul_newton(mu1, mu2, zt, b1[idx], b2[idx], tol, max_iter)
        acc = idx[ok]
        b1[acc], b2[acc] = n1[ok], n2[ok]
        y[acc] = y_next[ok]
        q[acc] = np.maximum(q[acc] ** 1.5, 1e-3)
        rej = idx[~ok]
        q[rej] = np.sqrt(q[rej])
        if np.any(q[rej] > 0.9999):
            raise ContinuationStuck("S-transform continuation stalled")
        done = y <= y_target
    u, _ = _f_and_deriv(mu1, b1)
    g = ((1.0 + u) / zeta).reshape(shape)
    if return_subordination:
        return g, b1.reshape(shape), b2.reshape(shape)
    return g


class FreeProduct:
    """Lazy ``mu1 boxtimes mu2`` exposing ``cauchy``."""

    support = "nonneg"
    total_mass = 1.0

    def __init__(self, mu1, mu2, tol=1e-12):
        self.mu1, self.mu2, self.tol = mu1, mu2, tol

    def cauchy(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        g = free_multiply(self.mu1, self.mu2, zu, self.tol)
        return np.where(lower, np.conj(g), g)

    @property
    def mean(self):
        return _mean(self.mu1) * _mean(self.mu2)


@dataclass
class STransformTable:
    """Real-interval tables of ``psi``, ``chi = psi^{-1}`` and ``S``.

    For a compactly supported nonneg measure ``psi`` increases on
    ``(0, 1/sup)``; the table covers ``u`` in ``(0, psi(z_max))``.
    """

    u: np.ndarray
    psi: np.ndarray
    chi: np.ndarray
    S: np.ndarray

    @classmethod
    def build(cls, measure, n=200, frac=0.9):
        sup = float(measure.upper_bound())
        if not np.isfinite(sup) or sup <= 0:
            raise ValidationError("STransformTable needs a compactly supported measure with sup > 0")
        _mean(measure)
        z_max = frac / sup

        # G is real analytic on (sup, inf), so psi(z) = G(1/z)/z - 1 is real there
        def psi(zr):
            b = 1.0 / np.asarray(zr, float)
            return (b * measure.cauchy(b + 0j)).real - 1.0

        def dpsi(zr):
            zr = np.asarray(zr, float)
            b = 1.0 / zr
            d = measure.cauchy(b + 0j) + b * cauchy_deriv(measure, b + 0j)
            return (-d / zr ** 2).real

        u_max = float(psi(z_max))
        u = np.linspace(0.0, u_max, n + 1)[1:]
        lo = np.zeros(n)
        hi = np.full(n, z_max)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = psi(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        chi = 0.5 * (lo + hi)
        for _ in range(3):
            chi = chi - (psi(chi) - u) / dpsi(chi)
        if np.max(np.abs(psi(chi) - u)) > 1e-9:
            raise InversionFailure("chi table failed the psi(chi(u)) = u check")
        S = chi * (1.0 + u) / u
        return cls(u, psi(chi), chi, S)

    def S_at(self, u):
        return np.interp(u, self.u, self.S)

    def max_residual(self):
        return float(np.max(np.abs(self.psi - self.u)))


# ---------------------------------------------------------------------------
# compound free Poisson and the Wigner product


def compound_free_poisson(rate, rho):
    """``pi(rate, rho)``: free regular law with ``nu = rate * rho`` and ``eta' = 0``."""
    rate = check_positive(rate, "rate")
    rho = measure_from_dict(rho)
    if rho.support != "nonneg":
        raise ValidationError("jump distribution must live on [0, inf)")
    return FreeRegularRep.from_nu(scale_mass(rho, rate), 0.0)


class WignerProductSquare:
    """Cauchy transforms of ``mu = w boxtimes rho`` and of ``mu^2``.

    ``mu^2 = m boxtimes rho boxtimes rho``; with ``f(b) = b G_rho(b) - 1`` the
    S-transform relations collapse to ``b^2 f(b) = xi`` and
    ``G_{mu^2}(xi) = b G_rho(b) / xi``.  The symmetric law ``mu`` has
    ``G_mu(zeta) = zeta G_{mu^2}(zeta^2)``.
    """

    support = "symmetric"
    total_mass = 1.0

    def __init__(self, rho, tol=1e-12, max_iter=60):
        self.rho = measure_from_dict(rho) if isinstance(rho, dict) else rho
        self.m1 = _mean(self.rho)
        self.tol = tol
        self.max_iter = max_iter

    def _newton(self, xi, b):
        b = b.copy()
        ok = np.zeros(len(xi), bool)
        active = np.ones(len(xi), bool)
        for _ in range(self.max_iter):
            idx = np.flatnonzero(active)
            if len(idx) == 0:
                break
            bb = b[idx]
            f, df = _f_and_deriv(self.rho, bb)
            e = bb * bb * f - xi[idx]
            de = 2.0 * bb * f + bb * bb * df
            s = e / de
            new = bb - s
            for _ in range(50):
                bad = new.imag <= 0
                if not bad.any():
                    break
                s = np.where(bad, 0.5 * s, s)
                new = bb - s
            good = np.isfinite(new)
            b[idx[good]] = new[good]
            # the residual has a floor near 1e-11 relative at large |xi|
            done = (np.abs(s) <= self.tol * np.maximum(np.abs(bb), 1.0)) | (
                np.abs(e) <= 1e-10 * np.maximum(np.abs(xi[idx]), 1.0)
            )
            ok[idx[done & good]] = True
            active[idx[done | ~good]] = False
        idx = np.flatnonzero(ok)
        if len(idx):
            f, _ = _f_and_deriv(self.rho, b[idx])
            r = np.abs(b[idx] ** 2 * f - xi[idx]) / np.maximum(np.abs(xi[idx]), 1.0)
            ok[idx[r > 1e-9]] = False
        return b, ok

    def _solve(self, xi):
        x, y_target = xi.real, xi.imag
        y = np.maximum(10.0 * (1.0 + np.abs(x) + self.m1 ** 2), y_target)
        b, ok = self._newton(x + 1j * y, (x + 1j * y) / self.m1)
        if not np.all(ok):
            raise InversionFailure("Wigner-product Newton failed in the asymptotic regime")
        q = np.full(len(xi), 0.1)
        done = y <= y_target
        for _ in range(400):
            idx = np.flatnonzero(~done)
            if len(idx) == 0:
                break
            y_next = np.maximum(y_target[idx], y[idx] * q[idx])
            nb, ok = self._newton(x[idx] + 1j * y_next, b[idx])
            acc = idx[ok]
            b[acc] = nb[ok]
            y[acc] = y_next[ok]
            q[acc] = np.maximum(q[acc] ** 1.5, 1e-3)
            rej = idx[~ok]
            q[rej] = np.sqrt(q[rej])
            if np.any(q[rej] > 0.9999):
                raise ContinuationStuck("Wigner-product continuation stalled")
            done = y <= y_target
        return b

    def cauchy_square(self, xi):
        """``G_{mu^2}(xi)`` for xi off [0, inf)."""
        xi = np.asarray(xi, complex)
        shape = xi.shape
        flat = xi.ravel()
        lower = flat.imag < 0
        xu = np.where(lower, np.conj(flat), flat)
        b = self._solve(xu)
        g = b * self.rho.cauchy(b) / xu
        return np.where(lower, np.conj(g), g).reshape(shape)

    def cauchy(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        g = zu * self.cauchy_square(zu * zu)
        return np.where(lower, np.conj(g), g)


def wigner_product_square(rho, config=None):
    """Recovered symmetric measure ``mu = w boxtimes rho`` (see WignerProductSquare)."""
    from .inversion import InversionConfig, stieltjes_invert

    law = WignerProductSquare(rho)
    cfg = config or InversionConfig(symmetric=True)
    return stieltjes_invert(law.cauchy, cfg)


def free_multiply_power(rho, n=2):
    """``rho boxtimes ... boxtimes rho`` (n factors) as a lazy law.

    Inner factors are evaluated at Newton iterates near the real axis, so
    nesting purely atomic factors can stall the continuation.
    """
    n = check_int(n, "n", minimum=1)
    out = rho
    for _ in range(n - 1):
        out = FreeProduct(out, rho)
    return out
