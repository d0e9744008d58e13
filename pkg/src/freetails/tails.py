"""Regular-variation diagnostics: tail indices, tail ratios, remainders."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import _quad
from ._validation import check_int, check_positive
from .exceptions import MomentDiverges, TailVanishes, ValidationError, WindowTooShort
from .measures import EmpiricalMeasure
from .transforms import remainder_G, remainder_phi

SLOPE_VAR_MAX = 0.01


# ---------------------------------------------------------------------------
# reports


@dataclass
class TailReport:
    x: np.ndarray
    tail: np.ndarray
    alpha_hat: float = None
    band: float = None
    window: tuple = None
    ratio: np.ndarray = None
    hill: dict = None
    flags: list = field(default_factory=list)

    @property
    def terminal_ratio(self):
        """Mean ratio over the last half-decade of the grid."""
        if self.ratio is None:
            return None
        sel = self.x >= self.x[-1] / np.sqrt(10.0)
        return float(np.mean(self.ratio[sel]))

    def to_dict(self):
        d = {
            "x": np.asarray(self.x).tolist(),
            "tail": np.asarray(self.tail).tolist(),
            "alpha_hat": self.alpha_hat,
            "band": self.band,
            "window": None if self.window is None else list(self.window),
            "ratio": None if self.ratio is None else np.asarray(self.ratio).tolist(),
            "terminal_ratio": self.terminal_ratio,
            "hill": self.hill,
            "flags": list(self.flags),
        }
        return d

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path):
        col = self.ratio if self.ratio is not None else self.tail
        name = "ratio" if self.ratio is not None else "tail"
        with open(path, "w") as fh:
            fh.write(f"x,{name}\n")
            for a, b in zip(self.x, col):
                fh.write(f"{float(a)!r},{float(b)!r}\n")


# ---------------------------------------------------------------------------
# estimators


def hill_k(n):
    """Number of upper order statistics used by the Hill estimator: floor(sqrt n)."""
    return max(2, int(math.isqrt(int(n))))


def hill_estimator(values, k=None):
    """Hill estimate of the tail index from the ``k`` largest positive values."""
    v = np.sort(np.asarray(values, float))
    v = v[v > 0]
    if len(v) < 3:
        raise WindowTooShort("need at least 3 positive values for the Hill estimator")
    k = hill_k(len(v)) if k is None else check_int(k, "k", minimum=1)
    k = min(k, len(v) - 1)
    top = v[-k:]
    threshold = v[-k - 1]
    gamma = float(np.mean(np.log(top / threshold)))
    if gamma <= 0:
        raise TailVanishes("degenerate upper order statistics")
    return 1.0 / gamma, float(threshold), k


def population_hill(measure, u, upper_factor=1e8):
    """``tail(u) / int_u^inf tail(x)/x dx``, the Hill functional of a law.

    Equals alpha exactly for a pure power tail; it is the quantity the
    sample Hill estimator converges to at threshold ``u``.
    """
    u = check_positive(u, "u")
    tu = float(measure.tail(u))
    if tu <= 0:
        raise TailVanishes(f"tail vanishes at {u}")
    lo, hi = np.log(u), np.log(u * upper_factor)
    s, w = _quad.fixed_panels(lo, hi, 0.1)
    t = np.asarray(measure.tail(np.exp(s)), float)
    integral = float(np.sum(w * t))
    # power-law continuation beyond the cut, slope from the last decade
    t_end = float(measure.tail(np.exp(hi)))
    t_dec = float(measure.tail(np.exp(hi) / 10.0))
    if t_end > 0 and t_dec > t_end:
        a_end = np.log10(t_dec / t_end)
        integral += t_end / a_end
    return tu / integral


def _local_slopes(lx, lt):
    return np.diff(lt) / np.diff(lx)


def _auto_window(lx, lt):
    """Widest contiguous run (>= one decade) with local-slope variance < 0.01."""
    s = _local_slopes(lx, lt)
    n = len(s)
    best = None
    for i in range(n):
        for j in range(n, i + 1, -1):
            if best is not None and (lx[j] - lx[i]) <= (lx[best[1]] - lx[best[0]]):
                break
            if np.var(s[i:j]) < SLOPE_VAR_MAX and lx[j] - lx[i] >= np.log(10.0):
                best = (i, j)
                break
    return best


def _regress(lx, lt):
    res = stats.linregress(lx, lt)
    dof = max(len(lx) - 2, 1)
    band = float(stats.t.ppf(0.975, dof) * res.stderr) if len(lx) > 2 else 0.0
    return -float(res.slope), band


def estimate_tail_index(measure, window=None, x=None, n=200):
    """Tail index by log-log regression of ``tail`` against ``x``.

    ``window`` is ``(lo, hi)``; when omitted it is chosen automatically as
    the widest run of at least one decade with stable local slope.  For
    samples the Hill estimate (``k = floor(sqrt n)``) is also reported.
    """
    hill = None
    if isinstance(measure, EmpiricalMeasure):
        vals = measure.values
        a_h, thr, k = hill_estimator(vals)
        hill = {"alpha": a_h, "threshold": thr, "k": k}
        pos = vals[vals > 0]
        if x is None:
            lo = np.quantile(pos, 0.5) if window is None else window[0]
            hi = np.sort(pos)[-10] if window is None else window[1]
            x = np.geomspace(lo, hi, n)
    elif x is None:
        lo, hi = (1.0, 1e4) if window is None else window
        x = np.geomspace(lo, hi, n)
    x = np.asarray(x, float)
    t = np.asarray(measure.tail(x), float)
    keep = t > 1e-300
    if keep.sum() < 10:
        raise TailVanishes("tail vanishes on the requested grid")
    xk, tk = x[keep], t[keep]
    lx, lt = np.log(xk), np.log(tk)
    flags = []
    if window is None:
        win = _auto_window(lx, lt)
        if win is None:
            flags.append("no_stable_window")
            i, j = 0, len(lx) - 1
        else:
            i, j = win
        sel = slice(i, j + 1)
    else:
        sel = (xk >= window[0]) & (xk <= window[1])
    if np.sum(np.ones_like(lx)[sel]) < 10:
        raise WindowTooShort("fewer than 10 grid points in the regression window")
    alpha, band = _regress(lx[sel], lt[sel])
    wx = xk[sel]
    return TailReport(x, t, alpha, band, (float(wx[0]), float(wx[-1])), None, hill, flags)


def tail_ratio(A, B, x):
    """Ratio series ``tail_A(x)/tail_B(x)``."""
    x = np.asarray(x, float)
    ta = np.asarray(A.tail(x), float)
    tb = np.asarray(B.tail(x), float)
    ok = (ta > 1e-12) & (tb > 1e-12)
    if not np.any(ok):
        raise TailVanishes("both tails vanish on the grid")
    ratio = np.where(ok, ta / np.where(ok, tb, 1.0), np.nan)
    flags = [] if np.all(ok) else ["tail_below_1e-12"]
    return TailReport(x, ta, ratio=ratio, window=(float(x[0]), float(x[-1])), flags=flags)


# ---------------------------------------------------------------------------
# remainder asymptotics


@dataclass
class RemainderCheckConfig:
    p: int
    alpha: float
    beta: float = 0.25
    y: np.ndarray = None

    def __post_init__(self):
        check_int(self.p, "p")
        check_positive(self.alpha, "alpha", allow_zero=True)
        if not self.p <= self.alpha <= self.p + 1:
            raise ValidationError("need p <= alpha <= p + 1")
        if not 0 < self.beta < 0.5:
            raise ValidationError("beta must lie in (0, 1/2)")
        if self.y is None:
            self.y = np.geomspace(1e2, 1e3, 9)
        self.y = np.asarray(self.y, float)

    @property
    def boundary(self):
        return self.alpha == self.p + 1


def stated_constants(p, alpha):
    """Constants multiplying ``y^p mu(y, inf)`` in the literature statement."""
    d = alpha - p
    out = {}
    if alpha < p + 1:
        out["im"] = -(np.pi * (p + 1 - alpha) / 2.0) / np.cos(np.pi * d / 2.0)
    if alpha > p and alpha < p + 1:
        out["re"] = -(np.pi * (p + 2 - alpha) / 2.0) / np.sin(np.pi * d / 2.0)
    if alpha == p == 0:
        out["re"] = -1.0
    if alpha == p + 1:
        out["re"] = -np.pi / 2.0
    return out


def karamata_constants(p, alpha):
    """Exact limits of ``r_G(iy)/(y^p mu(y, inf))`` for a pure power tail.

    With ``mu(y, inf) = y**-alpha``, ``r_G(iy) = int t^{p+1}/(iy - t) dmu``
    rescales to ``alpha int s^{p-alpha} / (i - s) ds``.
    """
    d = alpha - p
    out = {}
    if alpha < p + 1:
        out["im"] = -alpha * np.pi / (2.0 * np.cos(np.pi * d / 2.0))
    if alpha > p:
        out["re"] = -alpha * np.pi / (2.0 * np.sin(np.pi * d / 2.0))
    if alpha == p == 0:
        out["re"] = -1.0
    return out


def _truncated_moment(measure, k, y):
    """``int_0^y t^k dmu`` = ``m_k - int_y^inf t^k dmu`` where finite, else direct."""
    from scipy import integrate

    def integrand(s):
        return float(k * s ** (k - 1) * (measure.tail(s) - measure.tail(y)))

    # int_0^y t^k dmu = int_0^y k s^{k-1} mu((s, y]) ds
    val, _ = integrate.quad(integrand, 0.0, y, limit=400, points=[1.0] if y > 1 else None)
    return val


@dataclass
class RemainderReport:
    p: int
    alpha: float
    y: np.ndarray
    r_G: np.ndarray
    r_phi: np.ndarray
    tail: np.ndarray
    stated: dict
    karamata: dict
    measured: dict
    truncated: dict
    boundary: bool

    def deviation(self, which="stated", part="im"):
        """Relative deviation at the largest y of measured vs the reference."""
        ref = self.stated if which == "stated" else self.karamata
        if which == "truncated":
            meas = self.truncated.get(part)
            ref = self.stated
        else:
            meas = self.measured.get(part)
        if part not in ref or meas is None:
            return None
        return float(abs(meas[-1] / ref[part] - 1.0))

    def to_dict(self):
        def conv(v):
            if isinstance(v, np.ndarray):
                if np.iscomplexobj(v):
                    return {"re": v.real.tolist(), "im": v.imag.tolist()}
                return v.tolist()
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            return v

        return {k: conv(v) for k, v in asdict(self).items()}


def check_remainder_asymptotics(measure, config, with_phi=True):
    """Measure ``r_G(iy)`` (and ``r_phi``) against the asymptotic constants.

    Three normalisations are reported:

    * ``measured``: ``r_G(iy) / (y^p mu(y, inf))``, to compare with both
      the stated and the Karamata constants;
    * ``truncated``: ``Im r_G / (y^{-1} int_0^y t^{p+1} dmu)`` and
      ``Re r_G / (y^{-2} int_0^y t^{p+2} dmu)``, which by Karamata's
      theorem have limits equal to the stated constants.
    """
    p, alpha = config.p, config.alpha
    y = config.y
    z = 1j * y
    rg = remainder_G(measure, p, z)
    rphi = remainder_phi(measure, p, z) if with_phi else None
    tail = np.asarray(measure.tail(y), float)
    if np.any(tail <= 0):
        raise TailVanishes("tail vanishes on the y-grid")
    norm = y ** p * tail
    measured = {"im": rg.imag / norm, "re": rg.real / norm}
    if rphi is not None:
        measured["im_phi"] = rphi.imag / norm
        measured["re_phi"] = rphi.real / norm
        measured["phi_over_G_im"] = rphi.imag / rg.imag
    trunc_im = np.array([_truncated_moment(measure, p + 1, yy) / yy for yy in y])
    trunc_re = np.array([_truncated_moment(measure, p + 2, yy) / yy ** 2 for yy in y])
    truncated = {"im": rg.imag / trunc_im, "re": rg.real / trunc_re}
    return RemainderReport(
        p, alpha, y, rg, rphi, tail,
        stated_constants(p, alpha), karamata_constants(p, alpha),
        measured, truncated, config.boundary,
    )


# ---------------------------------------------------------------------------
# classification


def classify_Mp(measure, max_order=12):
    """``(p, alpha, flags)``: number of finite integer moments and tail index.

    ``p`` is ``math.inf`` for compactly supported measures (alpha None).
    """
    flags = []
    bound = measure.upper_bound() if hasattr(measure, "upper_bound") else np.inf
    tail_obj = getattr(measure, "power_tail", None)
    if np.isfinite(bound):
        return math.inf, None, flags
    if tail_obj is not None:
        a = tail_obj.alpha
        p = int(math.ceil(a)) - 1
        if float(a).is_integer():
            flags.append("integer_alpha_boundary")
        if isinstance(measure, EmpiricalMeasure):
            return p, a, flags
        try:
            rep = estimate_tail_index(measure)
            alpha = rep.alpha_hat
        except (WindowTooShort, TailVanishes):
            alpha = a
        if abs(alpha - a) < 1e-8:
            alpha = a
        return p, alpha, flags
    p = 0
    for j in range(1, max_order + 1):
        try:
            measure.moments(j)
            p = j
        except MomentDiverges:
            break
    try:
        alpha = estimate_tail_index(measure).alpha_hat
    except (WindowTooShort, TailVanishes):
        alpha = None
    return p, alpha, flags
