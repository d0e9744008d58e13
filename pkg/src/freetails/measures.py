"""Finite measures on the line in four storage variants.

Heavy tails are never truncated: a :class:`PowerTail` carries the part of a
measure beyond a cutoff analytically, and every functional (tail, moments,
Cauchy-type kernels) splits into a numeric body plus a closed-form or
log-space quadrature tail.

Symmetric measures keep only their restriction to ``[0, inf)`` (the "half",
whose mass equals the full mass) and reflect on demand.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from . import _quad
from ._validation import as_1d_float, check_int, check_positive
from .exceptions import MomentDiverges, NotNonneg, ValidationError

SUPPORTS = ("nonneg", "symmetric", "real")
MASS_ATOL = 1e-12

# beyond this point the weighted power-tail density is expanded in t**-2
_SERIES_FROM = 10.0


@dataclass(frozen=True)
class MomentVector:
    """Moments ``m_0..m_p``; ``m_minus1`` only carries the drift of a sigma."""

    values: np.ndarray
    m_minus1: float = None

    @property
    def order(self):
        return len(self.values) - 1

    def __getitem__(self, j):
        if j == -1:
            return self.m_minus1
        return self.values[j]


@dataclass(frozen=True)
class CumulantVector:
    """Free cumulants; ``values[0]`` is kappa_1."""

    values: np.ndarray

    @property
    def order(self):
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j - 1]


# ---------------------------------------------------------------------------
# power tails


@dataclass(frozen=True)
class PowerTail:
    """Density ``scale*alpha*t**(-alpha-1) * (t**2/(1+t**2))**wpow`` on [x0, inf).

    With ``wpow == 0`` the tail function is exactly ``scale * x**-alpha``.
    ``wpow = 1`` is the image of a Lévy-measure tail in the finite-measure
    parametrisation, ``wpow = -1`` the inverse map.
    """

    x0: float
    alpha: float
    scale: float = 1.0
    wpow: int = 0

    def __post_init__(self):
        check_positive(self.x0, "x0")
        check_positive(self.alpha, "alpha")
        check_positive(self.scale, "scale")
        check_int(self.wpow, "wpow", minimum=-8)

    def density(self, t):
        t = np.asarray(t, float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            base = self.scale * self.alpha * t ** (-self.alpha - 1.0)
            if self.wpow:
                base = base * (t * t / (1.0 + t * t)) ** self.wpow
        return np.where(t >= self.x0, base, 0.0)

    def _series(self):
        """Density as ``sum(coef * t**-b)``, valid for t > 1."""
        a = self.scale * self.alpha
        n = self.wpow
        if n <= 0:
            terms = [(a * comb(-n, j), self.alpha + 1.0 + 2 * j) for j in range(-n + 1)]
        else:
            terms = [((-1) ** j * a * comb(n + j - 1, j), self.alpha + 1.0 + 2 * j) for j in range(40)]
        return terms

    def _series_start(self):
        return self.x0 if self.wpow <= 0 else max(self.x0, _SERIES_FROM)

    def _gl_integral(self, a, b, power):
        """int_a^b t**power * density(t) dt for scalar a < b (log space)."""
        if b <= a:
            return 0.0
        u, w = _quad.fixed_panels(np.log(a), np.log(b))
        t = np.exp(u)
        return float(np.sum(w * t ** (power + 1.0) * self.density(t)))

    def _series_integral(self, a, power):
        """int_a^inf t**power * density(t) dt using the series (a >= start)."""
        total = 0.0
        for coef, b in self._series():
            e = b - power - 1.0
            if e <= 0:
                raise MomentDiverges(power)
            total += coef * a ** (-e) / e
        return total

    def tail(self, x):
        x = np.asarray(x, float)
        xs = np.maximum(x, self.x0)
        if self.wpow == 0:
            return self.scale * xs ** (-self.alpha)
        start = self._series_start()
        out = np.empty(xs.shape)
        for idx, xv in np.ndenumerate(xs):
            if xv >= start:
                out[idx] = self._series_integral(xv, 0.0)
            else:
                out[idx] = self._gl_integral(xv, start, 0.0) + self._series_integral(start, 0.0)
        return out

    @property
    def mass(self):
        return float(self.tail(self.x0))

    def moment(self, j):
        if j >= self.alpha:
            raise MomentDiverges(j)
        start = self._series_start()
        return self._gl_integral(self.x0, start, j) + self._series_integral(start, float(j))

    def kernel(self, z, k=0, deriv=0):
        """``int t**k density(t) / (z - t)**(1+deriv) dt`` for z off [x0, inf)."""
        z = np.asarray(z, complex)
        flat = z.ravel()
        out = np.empty(flat.shape, complex)
        lower = flat.imag < 0
        zz = np.where(lower, np.conj(flat), flat)
        for sl in _chunks(len(zz), 256):
            out[sl] = self._kernel_upper(zz[sl], k, deriv)
        out = np.where(lower, np.conj(out), out)
        return out.reshape(z.shape)

    def _kernel_upper(self, z, k, deriv):
        m = 1 + deriv
        if k >= self.alpha + m:
            raise MomentDiverges(k)
        absz = np.abs(z)
        top = np.maximum.reduce([50.0 * absz, np.full(absz.shape, 10.0 * self.x0), np.full(absz.shape, 10.0)])
        top = np.maximum(top, self._series_start())
        lo = np.full(z.shape, np.log(self.x0))
        hi = np.log(top)
        center = np.log(np.maximum(absz, 1e-300))
        dist = np.angle(z)
        dist = np.where(dist > 0, dist, 1.0)
        edges = _quad.graded_edges(lo, hi, center, dist)
        u, w = _quad.panel_nodes(edges)
        t = np.exp(u)
        f = self.density(t) * t ** (k + 1.0)
        vals = np.sum(w * f / (z[:, None] - t) ** m, axis=1)

        # analytic remainder beyond ``top``: expand (z - t)**-m in z/t
        sign = (-1.0) ** m
        for coef, b in self._series():
            for j in range(16):
                e = b + j + m - k - 1.0
                vals += sign * coef * comb(j + m - 1, j) * z ** j * top ** (-e) / e
        return vals

    def sample(self, n, rng):
        v = rng.random(n)
        if self.wpow == 0:
            return self.x0 * v ** (-1.0 / self.alpha)
        # invert the tail function by bisection in log space
        target = v * self.mass
        lo = np.full(n, np.log(self.x0))
        hi = lo + 60.0 / self.alpha
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = self.tail(np.exp(mid)) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.exp(0.5 * (lo + hi))

    def to_dict(self):
        return {"x0": self.x0, "alpha": self.alpha, "scale": self.scale, "wpow": self.wpow}


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


# ---------------------------------------------------------------------------
# measures


class Measure:
    """Base class: a finite measure on the real line.

    Subclasses implement the ``_h*`` hooks on the stored measure (the half
    measure for ``support == "symmetric"``); the public methods below handle
    reflection.
    """

    variant = None
    support = "nonneg"

    # -- hooks -------------------------------------------------------------
    def _htail(self, x, closed=False):
        raise NotImplementedError

    def _hmoments(self, p):
        raise NotImplementedError

    def _hkernel(self, z, k, deriv):
        raise NotImplementedError

    def _hsample(self, n, rng):
        raise NotImplementedError

    def _hmap(self, fn, jac, kind):
        raise NotImplementedError

    # -- public ------------------------------------------------------------
    @property
    def total_mass(self):
        raise NotImplementedError

    def tail(self, x):
        """Mass of ``(x, inf)``; right-continuous, atoms at ``x`` excluded."""
        x = np.asarray(x, float)
        if self.support == "nonneg" and np.any(x < 0):
            out = np.where(x < 0, self.total_mass, self._htail(np.abs(x)))
            return out if out.ndim else float(out)
        if self.support != "symmetric":
            out = self._htail(x)
            return out if np.ndim(out) else float(out)
        ax = np.abs(x)
        pos = 0.5 * self._htail(ax)
        neg = self.total_mass - 0.5 * self._htail(ax, closed=True)
        out = np.where(x >= 0, pos, neg)
        return out if out.ndim else float(out)

    def moments(self, p):
        p = check_int(p, "p")
        m = np.asarray(self._hmoments(p), float)
        if self.support == "symmetric":
            m = m.copy()
            m[1::2] = 0.0
        return MomentVector(m)

    def kernel(self, z, k=0, deriv=0):
        """``int t**k / (z - t)**(1+deriv) dmu(t)``, z off the real axis."""
        z = np.asarray(z, complex)
        if self.support != "symmetric":
            return self._hkernel(z, k, deriv)
        # reflected half: int (-t)**k / (z + t)**m dh = (-1)**(k+m) K(-z)
        m = 1 + deriv
        refl = (-1.0) ** (k + m) * self._hkernel(-z, k, deriv)
        return 0.5 * (self._hkernel(z, k, deriv) + refl)

    def cauchy(self, z):
        return self.kernel(z, 0, 0)

    def cauchy_deriv(self, z):
        return -self.kernel(z, 0, 1)

    @property
    def mean(self):
        return float(self.moments(1).values[1])

    def sample(self, n, seed=None):
        rng = np.random.default_rng(seed)
        n = check_int(n, "n", minimum=0)
        draws = self._hsample(n, rng)
        if self.support == "symmetric":
            draws = draws * rng.choice([-1.0, 1.0], size=n)
        return draws

    def upper_bound(self):
        """Right end of the support (inf for heavy tails)."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


def _check_support(support, lowest):
    if support not in SUPPORTS:
        raise ValidationError(f"support must be one of {SUPPORTS}, got {support!r}")
    if support in ("nonneg", "symmetric") and lowest < 0:
        raise NotNonneg(f"{support} measure has mass below 0 (lowest point {lowest})")


class AtomicMeasure(Measure):
    """Finite sum of point masses."""

    variant = "atoms"

    def __init__(self, locations, weights=None, support="nonneg"):
        loc = as_1d_float(locations, "locations")
        if weights is None:
            weights = np.full(loc.shape, 1.0 / max(len(loc), 1))
        wts = as_1d_float(weights, "weights")
        if loc.shape != wts.shape or len(loc) == 0:
            raise ValidationError("locations and weights must be non-empty and equally long")
        if np.any(wts <= 0):
            raise ValidationError("atom weights must be positive")
        _check_support(support, loc.min())
        order = np.argsort(loc, kind="stable")
        self.locations = loc[order]
        self.weights = wts[order]
        self.support = support

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    def _htail(self, x, closed=False):
        x = np.asarray(x, float)
        loc, w = self.locations, self.weights
        cum = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
        side = "left" if closed else "right"
        return cum[np.searchsorted(loc, x, side=side)]

    def _hmoments(self, p):
        return np.array([np.sum(self.weights * self.locations ** j) for j in range(p + 1)])

    def _hkernel(self, z, k, deriv):
        z = np.asarray(z, complex)
        t = self.locations
        num = self.weights * t ** k
        m = 1 + deriv
        return np.sum(num / (z[..., None] - t) ** m, axis=-1)

    def _hsample(self, n, rng):
        idx = rng.choice(len(self.locations), size=n, p=self.weights / self.total_mass)
        return self.locations[idx]

    def _hmap(self, fn, jac, kind):
        return AtomicMeasure(fn(self.locations), self.weights, kind)

    def upper_bound(self):
        return float(np.max(np.abs(self.locations)))

    def to_dict(self):
        return {
            "variant": "atoms",
            "locations": self.locations.tolist(),
            "weights": self.weights.tolist(),
            "support": self.support,
        }

    def __repr__(self):
        return f"AtomicMeasure(n={len(self.locations)}, mass={self.total_mass:.6g}, support={self.support!r})"


def _log1p_series(q):
    """log(1+q) and (1+q)log(1+q) - q, accurate for small complex q."""
    small = np.abs(q) < 0.1
    qs = np.where(small, q, 0.0)
    ql = np.where(small, 0.0, q)
    L_big = np.log1p(ql)
    g_big = (1.0 + ql) * L_big - ql
    L_small = np.zeros_like(qs)
    g_small = np.zeros_like(qs)
    power = qs.copy()
    for n in range(1, 26):
        L_small += (-1) ** (n + 1) * power / n
        if n >= 2:
            g_small += (-1) ** n * power / (n * (n - 1))
        power = power * qs
    return np.where(small, L_small, L_big), np.where(small, g_small, g_big)


class GriddedDensity(Measure):
    """Piecewise-linear density on a grid, optionally continued by a PowerTail.

    All functionals are exact for the piecewise-linear interpolant, so the
    total mass is the trapezoid sum (plus the tail mass).
    """

    variant = "grid"

    def __init__(self, grid, density, support="nonneg", tail=None):
        x = as_1d_float(grid, "grid")
        f = as_1d_float(density, "density")
        if x.shape != f.shape or len(x) < 2:
            raise ValidationError("grid and density must have equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("grid must be strictly increasing")
        if np.any(f < 0):
            raise ValidationError("density values must be nonnegative")
        _check_support(support, x[0])
        if tail is not None:
            if not isinstance(tail, PowerTail):
                tail = PowerTail(**tail)
            if not np.isclose(tail.x0, x[-1], rtol=1e-12):
                raise ValidationError("tail continuation must start at the last grid point")
        self.grid = x
        self.density = f
        self.support = support
        self.power_tail = tail
        self._seg_mass = 0.5 * np.diff(x) * (f[1:] + f[:-1])

    @property
    def body_mass(self):
        return float(np.sum(self._seg_mass))

    @property
    def total_mass(self):
        extra = self.power_tail.mass if self.power_tail is not None else 0.0
        return self.body_mass + extra

    def density_at(self, t):
        t = np.asarray(t, float)
        body = np.interp(t, self.grid, self.density, left=0.0, right=0.0)
        if self.power_tail is not None:
            body = np.where(t > self.grid[-1], self.power_tail.density(t), body)
        return body

    def _htail(self, x, closed=False):
        x = np.asarray(x, float)
        g, f = self.grid, self.density
        right_cum = np.concatenate([np.cumsum(self._seg_mass[::-1])[::-1], [0.0]])
        i = np.clip(np.searchsorted(g, x, side="right") - 1, 0, len(g) - 2)
        xc = np.clip(x, g[0], g[-1])
        fx = np.interp(xc, g, f)
        partial = 0.5 * (g[i + 1] - xc) * (fx + f[i + 1])
        out = partial + right_cum[i + 1]
        out = np.where(x < g[0], self.body_mass, out)
        out = np.where(x >= g[-1], 0.0, out)
        if self.power_tail is not None:
            out = out + self.power_tail.tail(np.maximum(x, g[-1]))
        return out

    def _pl_moments(self, p):
        a, b = self.grid[:-1], self.grid[1:]
        fa, fb = self.density[:-1], self.density[1:]
        k = (fb - fa) / (b - a)
        c0 = fa - k * a
        return np.array([
            np.sum(c0 * (b ** (j + 1) - a ** (j + 1)) / (j + 1) + k * (b ** (j + 2) - a ** (j + 2)) / (j + 2))
            for j in range(p + 1)
        ])

    def _hmoments(self, p):
        out = self._pl_moments(p)
        if self.power_tail is not None:
            out = out + np.array([self.power_tail.moment(j) for j in range(p + 1)])
        return out

    def _pl_kernel0(self, z):
        """int f/(z-t) and int f/(z-t)**2 for the piecewise-linear body."""
        z = np.asarray(z, complex)
        flat = z.ravel()
        a, b = self.grid[:-1], self.grid[1:]
        fa = self.density[:-1]
        slope = (self.density[1:] - fa) / (b - a)
        g0 = np.empty(flat.shape, complex)
        d0 = np.empty(flat.shape, complex)
        for sl in _chunks(len(flat), 256):
            zc = flat[sl][:, None]
            q = (b - a) / (zc - b)
            L, g = _log1p_series(q)
            g0[sl] = np.sum(fa * L + slope * (zc - b) * g, axis=1)
            ends = self.density[-1] / (zc[:, 0] - self.grid[-1]) - self.density[0] / (zc[:, 0] - self.grid[0])
            d0[sl] = ends - np.sum(slope * L, axis=1)
        return g0.reshape(z.shape), d0.reshape(z.shape)

    def _hkernel(self, z, k, deriv):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        g0, d0 = self._pl_kernel0(zu)
        if k:
            body_m = self._pl_moments(k)
        kk, dd = g0, d0
        for j in range(1, k + 1):
            dd = zu * dd - kk
            kk = zu * kk - body_m[j - 1]
        val = kk if deriv == 0 else dd
        if self.power_tail is not None:
            val = val + self.power_tail.kernel(zu, k, deriv)
        return np.where(lower, np.conj(val), val)

    def _hsample(self, n, rng):
        v = rng.random(n) * self.total_mass
        out = np.empty(n)
        body = v < self.body_mass
        if self.power_tail is not None and np.any(~body):
            out[~body] = self.power_tail.sample(int(np.sum(~body)), rng)
        cum = np.concatenate([[0.0], np.cumsum(self._seg_mass)])
        vb = v[body]
        i = np.clip(np.searchsorted(cum, vb, side="right") - 1, 0, len(self._seg_mass) - 1)
        r = vb - cum[i]
        a = self.grid[i]
        h = self.grid[i + 1] - a
        fa = self.density[i]
        slope = (self.density[i + 1] - fa) / h
        # solve fa*s + slope*s^2/2 = r for s in [0, h]
        disc = np.sqrt(np.maximum(fa * fa + 2.0 * slope * r, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(np.abs(slope) > 1e-14 * (fa + 1e-300), 2.0 * r / (fa + disc), r / np.maximum(fa, 1e-300))
        out[body] = a + np.clip(s, 0.0, h)
        return out

    def _hmap(self, fn, jac, kind):
        if self.power_tail is not None:
            raise ValidationError("map the tail separately")
        x = fn(self.grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            jv = jac(self.grid)
        fx = self.density / jv
        bad = ~np.isfinite(fx)
        if np.any(bad):
            # endpoint where the Jacobian degenerates: copy the neighbour
            good = np.flatnonzero(~bad)
            fx[bad] = np.interp(np.flatnonzero(bad), good, fx[good])
        new = GriddedDensity(x, fx, kind)
        scale = self.body_mass / new.body_mass
        return GriddedDensity(x, fx * scale, kind)

    def upper_bound(self):
        return np.inf if self.power_tail is not None else float(self.grid[-1])

    def to_dict(self):
        return {
            "variant": "grid",
            "grid": self.grid.tolist(),
            "density": self.density.tolist(),
            "support": self.support,
            "tail": None if self.power_tail is None else self.power_tail.to_dict(),
        }

    def __repr__(self):
        return (
            f"GriddedDensity(n={len(self.grid)}, range=[{self.grid[0]:.4g}, {self.grid[-1]:.4g}], "
            f"tail={self.power_tail}, support={self.support!r})"
        )


class ParetoMeasure(Measure):
    """Power-law tail beyond ``x0`` on top of an optional body on [0, x0]."""

    variant = "pareto"

    def __init__(self, x0=1.0, alpha=1.0, scale=1.0, body=None, support="nonneg", wpow=0):
        self.power_tail = PowerTail(float(x0), float(alpha), float(scale), int(wpow))
        if support not in SUPPORTS:
            raise ValidationError(f"support must be one of {SUPPORTS}")
        if body is not None:
            if not isinstance(body, Measure):
                body = measure_from_dict(body)
            if body.support == "symmetric":
                raise ValidationError("body must be stored as a one-sided measure")
            if body.upper_bound() > x0 * (1 + 1e-12):
                raise ValidationError("body must live on [0, x0]")
            _check_support(support, _lowest_point(body))
        self.body = body
        self.support = support

    @property
    def x0(self):
        return self.power_tail.x0

    @property
    def alpha(self):
        return self.power_tail.alpha

    @property
    def scale(self):
        return self.power_tail.scale

    @property
    def wpow(self):
        return self.power_tail.wpow

    @property
    def total_mass(self):
        body = self.body.total_mass if self.body is not None else 0.0
        return body + self.power_tail.mass

    def density_tail(self, t):
        return self.power_tail.density(t)

    def _htail(self, x, closed=False):
        x = np.asarray(x, float)
        out = self.power_tail.tail(x)
        if self.body is not None:
            out = out + self.body._htail(x, closed)
        return out

    def _hmoments(self, p):
        out = np.array([self.power_tail.moment(j) for j in range(p + 1)])
        if self.body is not None:
            out = out + self.body._hmoments(p)
        return out

    def _hkernel(self, z, k, deriv):
        out = self.power_tail.kernel(z, k, deriv)
        if self.body is not None:
            out = out + self.body._hkernel(z, k, deriv)
        return out

    def _hsample(self, n, rng):
        if self.body is None:
            return self.power_tail.sample(n, rng)
        from_tail = rng.random(n) * self.total_mass < self.power_tail.mass
        out = np.empty(n)
        out[from_tail] = self.power_tail.sample(int(from_tail.sum()), rng)
        out[~from_tail] = self.body._hsample(int((~from_tail).sum()), rng)
        return out

    def upper_bound(self):
        return np.inf

    def to_dict(self):
        d = {"variant": "pareto", **self.power_tail.to_dict(), "support": self.support}
        d["body"] = None if self.body is None else self.body.to_dict()
        return d

    def __repr__(self):
        return (
            f"ParetoMeasure(x0={self.x0:g}, alpha={self.alpha:g}, scale={self.scale:g}, "
            f"wpow={self.wpow}, body={self.body!r}, support={self.support!r})"
        )


class EmpiricalMeasure(Measure):
    """Equal-weight atoms at sample points (kept sorted)."""

    variant = "sample"

    def __init__(self, values, support="real", total_mass=1.0):
        v = np.sort(as_1d_float(values, "values"))
        if len(v) == 0:
            raise ValidationError("empty sample")
        _check_support(support, v[0])
        self.values = v
        self.support = support
        self._mass = check_positive(total_mass, "total_mass")

    @property
    def total_mass(self):
        return self._mass

    def _htail(self, x, closed=False):
        side = "left" if closed else "right"
        n = len(self.values)
        return self._mass * (n - np.searchsorted(self.values, x, side=side)) / n

    def _hmoments(self, p):
        return np.array([self._mass * np.mean(self.values ** j) for j in range(p + 1)])

    def _hkernel(self, z, k, deriv):
        z = np.asarray(z, complex)
        flat = z.ravel()
        out = np.empty(flat.shape, complex)
        t = self.values
        for sl in _chunks(len(flat), 64):
            out[sl] = np.mean(t ** k / (flat[sl][:, None] - t) ** (1 + deriv), axis=1)
        return self._mass * out.reshape(z.shape)

    def _hsample(self, n, rng):
        return rng.choice(self.values, size=n)

    def _hmap(self, fn, jac, kind):
        return EmpiricalMeasure(fn(self.values), kind, self._mass)

    def upper_bound(self):
        return float(np.max(np.abs(self.values)))

    def to_dict(self):
        return {"variant": "sample", "values": self.values.tolist(), "support": self.support, "total_mass": self._mass}

    def __repr__(self):
        return f"EmpiricalMeasure(n={len(self.values)}, support={self.support!r})"


def _lowest_point(measure):
    if isinstance(measure, AtomicMeasure):
        return float(measure.locations[0])
    if isinstance(measure, GriddedDensity):
        return float(measure.grid[0])
    if isinstance(measure, EmpiricalMeasure):
        return float(measure.values[0])
    if isinstance(measure, ParetoMeasure):
        return _lowest_point(measure.body) if measure.body is not None else measure.x0
    return 0.0


# ---------------------------------------------------------------------------
# operations


def tail(measure, x):
    return measure.tail(x)


def moments(measure, p):
    return measure.moments(p)


def pushforward_square(measure):
    """Image of ``measure`` under ``t -> t**2`` (a nonneg measure)."""
    if isinstance(measure, ParetoMeasure):
        if measure.wpow:
            raise ValidationError("pushforward of a weighted power tail is not supported")
        body = None
        if measure.body is not None:
            body = measure.body._hmap(np.square, lambda t: 2.0 * t, "nonneg")
        if measure.support == "real" and measure.body is not None and _lowest_point(measure.body) < 0:
            raise ValidationError("real-support Pareto bodies with negative mass cannot be squared")
        return ParetoMeasure(measure.x0 ** 2, measure.alpha / 2.0, measure.scale, body, "nonneg")
    if isinstance(measure, GriddedDensity) and measure.power_tail is not None:
        pt = measure.power_tail
        if pt.wpow:
            raise ValidationError("pushforward of a weighted power tail is not supported")
        body = GriddedDensity(measure.grid, measure.density, measure.support)
        sq = pushforward_square(body)
        return GriddedDensity(sq.grid, sq.density, "nonneg", PowerTail(pt.x0 ** 2, pt.alpha / 2.0, pt.scale))
    if measure.support == "real":
        if isinstance(measure, AtomicMeasure):
            return _merge_atoms(measure.locations ** 2, measure.weights)
        if isinstance(measure, EmpiricalMeasure):
            return EmpiricalMeasure(measure.values ** 2, "nonneg", measure.total_mass)
        if isinstance(measure, GriddedDensity):
            return _square_real_grid(measure)
    return measure._hmap(np.square, lambda t: 2.0 * t, "nonneg")


def _merge_atoms(locations, weights):
    loc, inv = np.unique(locations, return_inverse=True)
    w = np.zeros(len(loc))
    np.add.at(w, inv, weights)
    return AtomicMeasure(loc, w, "nonneg")


def _square_real_grid(measure):
    g = measure.grid
    pos = np.unique(np.abs(g))
    f = measure.density_at(pos) + measure.density_at(-pos)
    half = GriddedDensity(pos, f, "nonneg")
    scale = measure.total_mass / half.total_mass
    half = GriddedDensity(pos, f * scale, "nonneg")
    return half._hmap(np.square, lambda t: 2.0 * t, "nonneg")


def pushforward_sqrt_symmetric(measure):
    """Symmetric measure whose square-pushforward is ``measure``."""
    if measure.support != "nonneg":
        raise NotNonneg("pushforward_sqrt_symmetric needs a measure on [0, inf)")
    if isinstance(measure, ParetoMeasure):
        if measure.wpow:
            raise ValidationError("pushforward of a weighted power tail is not supported")
        body = None
        if measure.body is not None:
            body = measure.body._hmap(np.sqrt, lambda t: 0.5 / np.sqrt(t), "nonneg")
        return ParetoMeasure(np.sqrt(measure.x0), 2.0 * measure.alpha, measure.scale, body, "symmetric")
    if isinstance(measure, GriddedDensity) and measure.power_tail is not None:
        pt = measure.power_tail
        body = GriddedDensity(measure.grid, measure.density, "nonneg")
        half = body._hmap(np.sqrt, lambda t: 0.5 / np.sqrt(t), "nonneg")
        return GriddedDensity(half.grid, half.density, "symmetric", PowerTail(np.sqrt(pt.x0), 2.0 * pt.alpha, pt.scale))
    return measure._hmap(np.sqrt, lambda t: 0.5 / np.sqrt(t), "symmetric")


def dilate(measure, a):
    """``D_a mu(S) = mu(a S)``: locations divided by ``a``."""
    a = check_positive(a, "a")
    if a == 1.0:
        return measure
    if isinstance(measure, ParetoMeasure):
        if measure.wpow:
            raise ValidationError("dilation of a weighted power tail is not supported")
        body = None if measure.body is None else dilate(measure.body, a)
        return ParetoMeasure(measure.x0 / a, measure.alpha, measure.scale * a ** (-measure.alpha), body, measure.support)
    if isinstance(measure, GriddedDensity):
        tail_ = None
        if measure.power_tail is not None:
            pt = measure.power_tail
            if pt.wpow:
                raise ValidationError("dilation of a weighted power tail is not supported")
            tail_ = PowerTail(pt.x0 / a, pt.alpha, pt.scale * a ** (-pt.alpha))
        return GriddedDensity(measure.grid / a, measure.density * a, measure.support, tail_)
    if isinstance(measure, AtomicMeasure):
        return AtomicMeasure(measure.locations / a, measure.weights, measure.support)
    if isinstance(measure, EmpiricalMeasure):
        return EmpiricalMeasure(measure.values / a, measure.support, measure.total_mass)
    raise ValidationError(f"cannot dilate {type(measure).__name__}")


def scale_mass(measure, factor):
    """Multiply a measure by a positive constant."""
    factor = check_positive(factor, "factor")
    if isinstance(measure, AtomicMeasure):
        return AtomicMeasure(measure.locations, measure.weights * factor, measure.support)
    if isinstance(measure, GriddedDensity):
        tail_ = measure.power_tail
        if tail_ is not None:
            tail_ = PowerTail(tail_.x0, tail_.alpha, tail_.scale * factor, tail_.wpow)
        return GriddedDensity(measure.grid, measure.density * factor, measure.support, tail_)
    if isinstance(measure, ParetoMeasure):
        body = None if measure.body is None else scale_mass(measure.body, factor)
        return ParetoMeasure(measure.x0, measure.alpha, measure.scale * factor, body, measure.support, measure.wpow)
    if isinstance(measure, EmpiricalMeasure):
        return EmpiricalMeasure(measure.values, measure.support, measure.total_mass * factor)
    raise ValidationError(f"cannot scale {type(measure).__name__}")


# ---------------------------------------------------------------------------
# JSON and reference constructors


def measure_from_dict(d):
    if isinstance(d, Measure):
        return d
    try:
        variant = d["variant"]
    except (KeyError, TypeError):
        raise ValidationError("measure dict needs a 'variant' field") from None
    support = d.get("support", "nonneg")
    if variant == "atoms":
        return AtomicMeasure(d["locations"], d.get("weights"), support)
    if variant == "grid":
        return GriddedDensity(d["grid"], d["density"], support, d.get("tail"))
    if variant == "pareto":
        return ParetoMeasure(
            d.get("x0", 1.0), d["alpha"], d.get("scale", 1.0), d.get("body"), support, d.get("wpow", 0)
        )
    if variant == "sample":
        return EmpiricalMeasure(d["values"], d.get("support", "real"), d.get("total_mass", 1.0))
    raise ValidationError(f"unknown measure variant {variant!r}")


def delta(a=0.0, weight=1.0):
    support = "nonneg" if a >= 0 else "real"
    return AtomicMeasure([a], [weight], support)


def pareto(alpha, x0=1.0, scale=None, support="nonneg"):
    """Probability measure with tail ``(x/x0)**-alpha`` beyond ``x0`` (no body)."""
    if scale is None:
        scale = x0 ** alpha
    return ParetoMeasure(x0, alpha, scale, None, support)


def semicircle_grid(n=4001, radius=2.0, support="real"):
    """Standard semicircle density on a uniform grid."""
    if support == "symmetric":
        x = np.linspace(0.0, radius, n)
        f = 2.0 * 2.0 * np.sqrt(np.maximum(radius ** 2 - x ** 2, 0.0)) / (np.pi * radius ** 2)
    else:
        x = np.linspace(-radius, radius, n)
        f = 2.0 * np.sqrt(np.maximum(radius ** 2 - x ** 2, 0.0)) / (np.pi * radius ** 2)
    g = GriddedDensity(x, f, support)
    return scale_mass(g, 1.0 / g.total_mass)


def uniform_grid(a, b, mass=1.0, n=2):
    x = np.linspace(a, b, n)
    return GriddedDensity(x, np.full(n, mass / (b - a)), "nonneg" if a >= 0 else "real")
