"""Analytic transforms of measures on the upper half-plane.

Any object with ``cauchy(z)`` (and, for the Newton-based routines,
``cauchy_deriv(z)``) can be passed where a measure is expected: this covers
:class:`~freetails.measures.Measure`, the closed-form laws and the laws
built from Lévy–Khintchine data.
"""

import csv
import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import as_upper, check_int, check_positive
from .exceptions import (
    ConeViolation,
    DomainError,
    MomentDiverges,
    NoConvergence,
    NumericalZero,
    OrderTooLarge,
)
from .measures import CumulantVector, MomentVector

NC_MAX_ORDER = 12


@dataclass(frozen=True)
class ConeRegion:
    """``{z : |Re z| < eta * Im z, |z| > M}``."""

    eta: float = 1.0
    M: float = 1.0

    def __post_init__(self):
        check_positive(self.eta, "eta")
        check_positive(self.M, "M", allow_zero=True)

    def contains(self, z):
        z = np.asarray(z, complex)
        return (np.abs(z.real) < self.eta * z.imag) & (np.abs(z) > self.M)

    def points(self, n, spread=10.0):
        """Deterministic sample of ``n`` points inside the cone."""
        n = check_int(n, "n", minimum=1)
        k = np.arange(n)
        golden = (np.sqrt(5.0) - 1.0) / 2.0
        frac = (k * golden) % 1.0
        radius = self.M * (1.05 + (spread - 1.05) * (k + 0.5) / n)
        slope = self.eta * (2.0 * frac - 1.0) * 0.95
        y = radius / np.sqrt(1.0 + slope ** 2)
        return slope * y + 1j * y


def certified_cone(measure, eta=1.0):
    """Default cone on which F is treated as invertible."""
    try:
        m = measure.moments(2).values
        M = 4.0 * (1.0 + abs(m[1]) + np.sqrt(abs(m[2])))
    except (MomentDiverges, AttributeError):
        try:
            m1 = abs(measure.mean)
        except (MomentDiverges, AttributeError):
            m1 = 1.0
        M = 16.0 * (1.0 + m1)
    return ConeRegion(eta, M)


# ---------------------------------------------------------------------------
# G, F, F^{-1}, phi, C


def cauchy(measure, z):
    z = as_upper(z)
    return measure.cauchy(z)


def cauchy_deriv(measure, z):
    z = np.asarray(z, complex)
    deriv = getattr(measure, "cauchy_deriv", None)
    if deriv is not None:
        return deriv(z)
    h = 1e-6 * np.maximum(np.abs(z), 1.0)
    return (measure.cauchy(z + h) - measure.cauchy(z - h)) / (2.0 * h)


def reciprocal_cauchy(measure, z):
    g = cauchy(measure, z)
    if np.any(np.abs(g) < 1e-300):
        raise NumericalZero("Cauchy transform vanished numerically")
    return 1.0 / g


def invert_F(measure, w, cone=None, tol=1e-10, max_iter=200):
    """Solve ``F(z) = w`` for z in the upper half-plane by damped Newton.

    Starts at ``z = w``; points that stall are restarted by continuation
    from ``w + 2i|w|`` downward.
    """
    w = as_upper(w, "w")
    if cone is not None and not np.all(cone.contains(w)):
        raise ConeViolation("w lies outside the requested cone")
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    z, ok = _newton_F(measure, w, w.copy(), tol, max_iter)
    if not np.all(ok):
        bad = ~ok
        z_bad = _continued_F(measure, w[bad], tol, max_iter)
        z[bad] = z_bad
    return z[0] if scalar else z


def _newton_F(measure, w, z0, tol, max_iter):
    z = z0.copy()
    active = np.ones(len(w), bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        g = measure.cauchy(za)
        dg = cauchy_deriv(measure, za)
        res = 1.0 / g - w[active]
        conv = np.abs(res) <= tol * np.abs(w[active])
        dF = -dg / (g * g)
        step = res / dF
        new = za - step
        # keep iterates in C+; halve the step otherwise
        for _ in range(60):
            bad = new.imag <= 0
            if not bad.any():
                break
            step = np.where(bad, 0.5 * step, step)
            new = za - step
        idx = np.flatnonzero(active)
        z[idx] = new
        active[idx[conv]] = False
    # final residual check
    res = np.abs(1.0 / measure.cauchy(z) - w)
    return z, res <= 10 * tol * np.abs(w)


def _continued_F(measure, w, tol, max_iter):
    out = np.empty_like(w)
    for i, wi in enumerate(w):
        start = wi + 2j * abs(wi)
        z = np.array([start])
        ok = False
        for s in np.linspace(1.0, 0.0, 41)[1:]:
            target = np.array([wi + 2j * abs(wi) * s])
            z, ok_arr = _newton_F(measure, target, z, tol, max_iter)
            ok = bool(ok_arr[0])
            if not ok:
                break
        if not ok:
            raise NoConvergence(f"F-inversion failed at w={wi}", iterations=max_iter)
        out[i] = z[0]
    return out


def voiculescu(measure, z, **kwargs):
    """``phi(z) = F^{-1}(z) - z``."""
    z = as_upper(z)
    return invert_F(measure, z, **kwargs) - z


def free_cumulant_transform(measure, z_minus, **kwargs):
    """``C(z) = z * phi(1/z)`` on the lower half-plane chart."""
    zm = np.asarray(z_minus, complex)
    if np.any(zm.imag >= 0):
        raise DomainError("free cumulant transform is evaluated on the lower half-plane")
    return zm * voiculescu(measure, 1.0 / zm, **kwargs)


# ---------------------------------------------------------------------------
# remainders


def remainder_G(measure, p, z, method="direct"):
    """``z**(p+1) * (G(z) - sum_{j=1}^{p+1} m_{j-1} z**-j)``.

    ``method="direct"`` evaluates the algebraically identical integral
    ``int t**(p+1) / (z - t) dmu`` (no cancellation); ``"series"`` subtracts
    the moment expansion literally.
    """
    p = check_int(p, "p")
    z = as_upper(z)
    if method == "direct" and hasattr(measure, "kernel"):
        measure.moments(p)  # raises MomentDiverges when p moments are missing
        return measure.kernel(z, p + 1)
    m = measure.moments(p).values
    g = measure.cauchy(z)
    series = sum(m[j - 1] * z ** (-j) for j in range(1, p + 2))
    return z ** (p + 1) * (g - series)


def remainder_phi(measure, p, z, cumulants=None, phi=None):
    """``z**(p-1) * (phi(z) - sum_{j=0}^{p-1} kappa_{j+1} z**-j)``."""
    p = check_int(p, "p")
    z = as_upper(z)
    if cumulants is None:
        m = measure.moments(p)
        cumulants = moments_to_free_cumulants(m).values if p else np.zeros(0)
    kappa = np.asarray(cumulants, float)
    if phi is None:
        phi = voiculescu(measure, z)
    series = sum(kappa[j] * z ** (-j) for j in range(p))
    return z ** (p - 1) * (phi - series)


# ---------------------------------------------------------------------------
# non-crossing partitions


@lru_cache(maxsize=None)
def nc_block_types(n):
    """Counter of sorted block-size tuples over NC(n)."""
    if n == 0:
        return Counter({(): 1})
    out = Counter()
    for k in range(1, n + 1):
        # block containing 1 has size k; the n-k others fill k gaps
        for gaps in _compositions(n - k, k):
            combined = Counter({(k,): 1})
            for g in gaps:
                nxt = Counter()
                for t1, c1 in combined.items():
                    for t2, c2 in nc_block_types(g).items():
                        nxt[tuple(sorted(t1 + t2))] += c1 * c2
                combined = nxt
            out.update(combined)
    return out


def _compositions(total, parts):
    """Ordered tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def nc_partitions_bruteforce(n):
    """All non-crossing partitions of {0..n-1} (slow; for checking)."""
    result = []
    for part in _set_partitions(list(range(n))):
        if _is_noncrossing(part):
            result.append(part)
    return result


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in _set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller


def _is_noncrossing(blocks):
    label = {}
    for b, block in enumerate(blocks):
        for x in block:
            label[x] = b
    n = len(label)
    for a, b, c, d in itertools.combinations(range(n), 4):
        if label[a] == label[c] and label[b] == label[d] and label[a] != label[b]:
            return False
    return True


def _check_order(p):
    if p > NC_MAX_ORDER:
        raise OrderTooLarge(f"order {p} exceeds the NC enumeration bound {NC_MAX_ORDER}")


def free_cumulants_to_moments(kappa):
    """Moments ``m_1..m_p`` from free cumulants ``kappa_1..kappa_p``."""
    kappa = np.asarray(getattr(kappa, "values", kappa), float)
    p = len(kappa)
    _check_order(p)
    out = np.zeros(p)
    for n in range(1, p + 1):
        out[n - 1] = sum(c * np.prod([kappa[s - 1] for s in t]) for t, c in nc_block_types(n).items())
    return out


def moments_to_free_cumulants(m):
    """Free cumulants ``kappa_1..kappa_p`` from moments (triangular solve).

    Accepts a :class:`MomentVector` (``m_0..m_p``, normalised by ``m_0``) or
    a plain sequence ``m_0..m_p``.
    """
    values = np.asarray(getattr(m, "values", m), float)
    p = len(values) - 1
    _check_order(p)
    mom = values[1:] / values[0]
    kappa = np.zeros(p)
    for n in range(1, p + 1):
        rest = 0.0
        for t, c in nc_block_types(n).items():
            if t == (n,):
                continue
            rest += c * np.prod([kappa[s - 1] for s in t])
        kappa[n - 1] = mom[n - 1] - rest
    return CumulantVector(kappa)


# ---------------------------------------------------------------------------
# grids of transform values


_GRID_KEYS = ("G", "F", "phi", "C", "r_G", "r_phi")


@dataclass
class TransformGrid:
    """Transform values on a set of cone points; ``C`` is stored at ``1/z``."""

    points: np.ndarray
    values: dict = field(default_factory=dict)
    source: str = ""

    def check_signs(self):
        g = self.values.get("G")
        f = self.values.get("F")
        ok = True
        if g is not None:
            ok &= bool(np.all(g.imag < 0))
        if f is not None:
            ok &= bool(np.all(f.imag > 0))
        return ok

    def to_csv(self, path):
        cols = ["re_z", "im_z"]
        for key in _GRID_KEYS:
            if key in self.values:
                cols += [f"re_{key}", f"im_{key}"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for i, z in enumerate(self.points):
                row = [repr(float(z.real)), repr(float(z.imag))]
                for key in _GRID_KEYS:
                    if key in self.values:
                        v = self.values[key][i]
                        row += [repr(float(v.real)), repr(float(v.imag))]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            rows = list(csv.reader(fh))
        header, data = rows[0], np.array(rows[1:], float)
        points = data[:, 0] + 1j * data[:, 1]
        values = {}
        for key in _GRID_KEYS:
            if f"re_{key}" in header:
                i = header.index(f"re_{key}")
                values[key] = data[:, i] + 1j * data[:, i + 1]
        return cls(points, values)


def transform_grid(measure, points, p=None, source=""):
    """Evaluate G, F, phi, C (at 1/z) and, when ``p`` is given, remainders."""
    z = as_upper(np.atleast_1d(points))
    g = measure.cauchy(z)
    f = 1.0 / g
    phi = voiculescu(measure, z)
    values = {"G": g, "F": f, "phi": phi, "C": phi / z}
    if p is not None:
        values["r_G"] = remainder_G(measure, p, z)
        values["r_phi"] = remainder_phi(measure, p, z, phi=phi)
    return TransformGrid(z, values, source)


def moment_vector(measure, p, m_minus1=None):
    m = measure.moments(p)
    return MomentVector(m.values, m_minus1)
