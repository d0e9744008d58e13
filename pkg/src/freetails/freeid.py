"""Free regular infinitely divisible laws from Lévy–Khintchine data.

Two parametrisations are carried side by side:

* ``(gamma, sigma)``: ``phi(z) = gamma + int (1 + t z)/(z - t) dsigma(t)``
  with ``sigma`` finite on ``[0, inf)``;
* ``(eta_prime, nu)``: ``C(z) = eta_prime z + int (1/(1 - z t) - 1) dnu(t)``,

related by ``dsigma = t^2/(1+t^2) dnu`` and
``gamma = eta_prime + int t/(1+t^2) dnu``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._phisolve import solve_phi
from ._validation import as_upper, check_int, check_positive
from .exceptions import (
    BranchCut,
    GaussianPartPresent,
    NegativeDrift,
    NotFreeRegular,
    NotLevyMeasure,
    NotRegularImage,
    ValidationError,
)
from .measures import (
    AtomicMeasure,
    EmpiricalMeasure,
    GriddedDensity,
    Measure,
    MomentVector,
    ParetoMeasure,
    PowerTail,
    measure_from_dict,
)
from .transforms import free_cumulants_to_moments, moments_to_free_cumulants


# ---------------------------------------------------------------------------
# reweighting between nu and sigma


def _levy_weight(t, power):
    t = np.asarray(t, float)
    with np.errstate(divide="ignore"):
        return (t * t / (1.0 + t * t)) ** power


def _reweight(measure, power, err):
    """Multiply a nonneg measure by ``(t^2/(1+t^2))**power`` (power = +-1)."""
    if measure.support != "nonneg":
        raise err("Lévy data must live on [0, inf)")
    if isinstance(measure, AtomicMeasure):
        if power < 0 and np.any((measure.locations == 0) & (measure.weights > 0)):
            raise err("an atom at 0 has no Lévy-measure preimage")
        keep = measure.locations > 0
        loc, w = measure.locations[keep], measure.weights[keep]
        if len(loc) == 0:
            return AtomicMeasure([1.0], [0.0])
        return AtomicMeasure(loc, w * _levy_weight(loc, power))
    if isinstance(measure, GriddedDensity):
        g, f = measure.grid, measure.density
        if power < 0 and g[0] == 0 and f[0] > 0:
            raise err("density does not vanish at 0; the reweighted measure is infinite")
        wt = _levy_weight(g, power)
        f_new = np.where(g > 0, f * wt, 0.0)
        tail_ = measure.power_tail
        if tail_ is not None:
            tail_ = PowerTail(tail_.x0, tail_.alpha, tail_.scale, tail_.wpow + power)
        return GriddedDensity(g, f_new, "nonneg", tail_)
    if isinstance(measure, ParetoMeasure):
        body = None if measure.body is None else _reweight(measure.body, power, err)
        return ParetoMeasure(measure.x0, measure.alpha, measure.scale, body, "nonneg", measure.wpow + power)
    raise ValidationError(f"cannot reweight {type(measure).__name__}")


def _int_t_over_1pt2(measure):
    """``int t/(1+t^2) dmeasure`` via the Cauchy transform at ``i``."""
    if isinstance(measure, AtomicMeasure):
        t = measure.locations
        return float(np.sum(measure.weights * t / (1.0 + t * t)))
    return float(-measure.cauchy(1j).real)


def _partial_first_moment(measure, b=1.0):
    """``int_(0, b] t dmeasure``."""
    if isinstance(measure, (AtomicMeasure, EmpiricalMeasure)):
        t = measure.locations if isinstance(measure, AtomicMeasure) else measure.values
        w = measure.weights if isinstance(measure, AtomicMeasure) else np.full(len(t), measure.total_mass / len(t))
        sel = (t > 0) & (t <= b)
        return float(np.sum(w[sel] * t[sel]))
    tb = float(measure.tail(b))
    val, _ = integrate.quad(lambda s: float(measure.tail(s)) - tb, 0.0, b, limit=200)
    return val


def sigma_from_nu(nu, eta_prime):
    """``(gamma, sigma)`` from ``(eta_prime, nu)``."""
    nu = measure_from_dict(nu)
    if not np.isfinite(eta_prime):
        raise NegativeDrift("eta_prime must be finite")
    if eta_prime < 0:
        raise NegativeDrift(f"eta_prime must be >= 0, got {eta_prime}")
    sigma = _reweight(nu, 1, NotLevyMeasure)
    gamma = float(eta_prime) + _int_t_over_1pt2(nu)
    return gamma, sigma


def nu_from_sigma(gamma, sigma):
    """``(eta_prime, nu)`` from ``(gamma, sigma)``; NotFreeRegular if eta' < 0."""
    sigma = measure_from_dict(sigma)
    nu = _reweight(sigma, -1, NotFreeRegular)
    eta_prime = float(gamma) - _int_t_over_1pt2(nu)
    if eta_prime < -1e-12 * max(1.0, abs(gamma)):
        raise NotFreeRegular(f"recovered eta_prime = {eta_prime:.6g} < 0")
    return max(eta_prime, 0.0), nu


def minimal_gamma(sigma):
    """Smallest ``gamma`` keeping ``(gamma, sigma)`` free regular (``eta' = 0``)."""
    nu = _reweight(measure_from_dict(sigma), -1, NotFreeRegular)
    return _int_t_over_1pt2(nu)


# ---------------------------------------------------------------------------
# data types


@dataclass
class FreeRegularRep:
    """Both Lévy–Khintchine parametrisations of one law.

    ``nu`` and ``eta_prime`` are ``None`` for the (non-regular) laws built
    with ``from_sigma(..., regular=False)``.  ``sigma=None`` stands for the
    zero measure.
    """

    gamma: float
    sigma: Measure = None
    eta_prime: float = None
    nu: Measure = None
    flags: list = field(default_factory=list)

    @classmethod
    def from_nu(cls, nu, eta_prime=0.0):
        gamma, sigma = sigma_from_nu(nu, eta_prime)
        rep = cls(gamma, sigma, float(eta_prime), measure_from_dict(nu))
        if eta_prime == 0:
            rep.flags.append("eta_prime_zero")
        return rep

    @classmethod
    def from_sigma(cls, gamma, sigma, regular=True):
        sigma = None if sigma is None else measure_from_dict(sigma)
        if sigma is not None and sigma.support != "nonneg":
            raise NotLevyMeasure("sigma must live on [0, inf)")
        if not regular or sigma is None:
            rep = cls(float(gamma), sigma)
            if sigma is None:
                rep.eta_prime = float(gamma)
                if gamma < 0:
                    raise NotFreeRegular("a point mass at a negative location is not free regular")
            else:
                rep.flags.append("regularity_not_checked")
            return rep
        eta_prime, nu = nu_from_sigma(gamma, sigma)
        rep = cls(float(gamma), sigma, eta_prime, nu)
        if eta_prime == 0:
            rep.flags.append("eta_prime_zero")
        return rep

    @classmethod
    def from_dict(cls, d):
        if d.get("sigma") is not None or "gamma" in d:
            sigma = d.get("sigma")
            return cls.from_sigma(d["gamma"], sigma, regular=d.get("regular", True))
        return cls.from_nu(d["nu"], d.get("eta_prime", 0.0))

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "sigma": None if self.sigma is None else self.sigma.to_dict(),
            "eta_prime": self.eta_prime,
            "nu": None if self.nu is None else self.nu.to_dict(),
            "flags": list(self.flags),
        }

    @property
    def sigma_mass(self):
        return 0.0 if self.sigma is None else float(self.sigma.total_mass)

    def law(self):
        return FreeRegularLaw(self)


@dataclass(frozen=True)
class ClassicalTriplet:
    """Classical triplet ``(eta, a, nu)`` with truncation ``1_[-1,1]``."""

    eta: float
    a: float = 0.0
    nu: Measure = None

    def __post_init__(self):
        check_positive(self.a, "a", allow_zero=True)
        if self.nu is not None:
            nu = measure_from_dict(self.nu)
            object.__setattr__(self, "nu", nu)
            if isinstance(nu, AtomicMeasure) and np.any((nu.locations == 0) & (nu.weights > 0)):
                raise NotLevyMeasure("a Lévy measure has no atom at 0")

    @classmethod
    def compound_poisson(cls, rate, jump):
        """Compound Poisson with ``rate`` and jump law ``jump`` (no extra drift)."""
        rate = check_positive(rate, "rate", allow_zero=True)
        jump = measure_from_dict(jump)
        if rate == 0:
            return cls(0.0, 0.0, None)
        from .measures import scale_mass

        nu = scale_mass(jump, rate)
        return cls(_partial_first_moment(nu), 0.0, nu)


@dataclass(frozen=True)
class FreeStableParams:
    """Free stable law with ``phi(z) = -exp(i alpha rho pi) z**(1 - alpha)``."""

    alpha: float
    rho_asym: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if not 0 <= self.rho_asym <= 1:
            raise ValidationError("rho_asym must lie in [0, 1]")


# ---------------------------------------------------------------------------
# transforms of free regular laws


def _sigma_phi(rep, z, with_deriv=False):
    """phi in the cancellation-free form ``gamma + m0/z + K1(z)(z + 1/z)``."""
    z = np.asarray(z, complex)
    if rep.sigma is None or rep.sigma_mass == 0:
        phi = np.full(z.shape, rep.gamma, complex)
        return (phi, np.zeros(z.shape, complex)) if with_deriv else phi
    m0 = rep.sigma_mass
    k1 = rep.sigma.kernel(z, 1)
    phi = rep.gamma + m0 / z + k1 * (z + 1.0 / z)
    if not with_deriv:
        return phi
    dk1 = -rep.sigma.kernel(z, 1, 1)
    dphi = -m0 / z ** 2 + dk1 * (z + 1.0 / z) + k1 * (1.0 - 1.0 / z ** 2)
    return phi, dphi


def voiculescu_from_sigma(rep, z, check=False, rtol=1e-9):
    """``phi(z)``; with ``check=True`` also evaluates the Cauchy-transform form.

    The second form is ``gamma - m0 z + (1 + z^2) int dsigma/(z - t)``.
    Returns ``phi`` or ``(phi, max relative gap)``.
    """
    z = as_upper(z)
    phi = _sigma_phi(rep, z)
    if not check:
        return phi
    if rep.sigma is None or rep.sigma_mass == 0:
        alt = np.full(z.shape, rep.gamma, complex)
    else:
        m0 = rep.sigma_mass
        alt = rep.gamma - m0 * z + (1.0 + z * z) * rep.sigma.cauchy(z)
    gap = float(np.max(np.abs(phi - alt) / np.maximum(np.abs(phi), 1e-300)))
    return phi, gap


def cumulant_from_nu(rep, z_minus):
    """``C(z) = eta' z + int t/(1/z - t) dnu`` for z in the lower half-plane."""
    z = np.asarray(z_minus, complex)
    if np.any(z.imag >= 0):
        raise ValidationError("cumulant_from_nu is evaluated on the lower half-plane")
    if rep.nu is None:
        raise NotFreeRegular("no Lévy measure stored (law built without the regularity check)")
    return rep.eta_prime * z + rep.nu.kernel(1.0 / z, 1)


class FreeRegularLaw:
    """Evaluation surface (``cauchy`` etc.) of the law encoded by ``rep``."""

    support = "nonneg"
    total_mass = 1.0

    def __init__(self, rep, tol=1e-11):
        self.rep = rep
        self.tol = tol
        s = rep.sigma
        self._scale = abs(rep.gamma) + rep.sigma_mass
        if s is not None and np.isfinite(s.upper_bound()):
            self._scale += s.upper_bound()

    def voiculescu(self, z):
        return _sigma_phi(self.rep, z)

    def reciprocal(self, z):
        """``F(z)`` on the closed-by-conjugation plane."""
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        w = solve_phi(lambda v: _sigma_phi(self.rep, v, True), zu, self._scale, self.tol)
        return np.where(lower, np.conj(w), w)

    def cauchy(self, z):
        return 1.0 / self.reciprocal(z)

    def cauchy_deriv(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        w = solve_phi(lambda v: _sigma_phi(self.rep, v, True), zu, self._scale, self.tol)
        _, dphi = _sigma_phi(self.rep, w, True)
        d = -1.0 / (w * w * (1.0 + dphi))
        return np.where(lower, np.conj(d), d)

    def free_cumulants(self, p):
        return cumulants_from_sigma(self.rep, p)

    def moments(self, p):
        p = check_int(p, "p")
        m = free_cumulants_to_moments(self.free_cumulants(p).values) if p else np.zeros(0)
        return MomentVector(np.concatenate([[1.0], m]))

    @property
    def mean(self):
        return float(self.free_cumulants(1).values[0])


def cumulants_from_sigma(rep, p):
    """``kappa_j = m_{j-2}(sigma) + m_j(sigma)`` with ``m_{-1} = gamma``."""
    from .measures import CumulantVector

    p = check_int(p, "p")
    if rep.sigma is None:
        ms = np.zeros(p + 1)
    else:
        ms = rep.sigma.moments(p).values
    kappa = np.zeros(p)
    for j in range(1, p + 1):
        lower = rep.gamma if j == 1 else ms[j - 2]
        kappa[j - 1] = lower + ms[j]
    return CumulantVector(kappa)


# ---------------------------------------------------------------------------
# cumulant identity check


def contour_moments(cauchy, p, radius, n=512):
    """``m_0..m_p`` from ``(1/2 pi i) oint z^k G(z) dz`` on ``|z| = radius``.

    Uses the trapezoid rule on the half circle in C+ and conjugate symmetry
    (G of a real measure satisfies ``G(conj z) = conj G(z)``).
    """
    theta = (np.arange(n // 2) + 0.5) * 2.0 * np.pi / n
    z = radius * np.exp(1j * theta)
    g = cauchy(z)
    out = np.empty(p + 1)
    for k in range(p + 1):
        half = z ** (k + 1) * g
        # the lower half contributes the conjugates
        out[k] = 2.0 * np.sum(half.real) / n
    return MomentVector(out)


@dataclass
class CumulantIdentityReport:
    p: int
    kappa_identity: np.ndarray
    kappa_recovered: np.ndarray
    radius: float

    @property
    def rel_gap(self):
        scale = np.maximum(np.abs(self.kappa_identity), 1e-12)
        return np.abs(self.kappa_recovered - self.kappa_identity) / scale

    @property
    def max_rel_gap(self):
        return float(np.max(self.rel_gap)) if self.p else 0.0

    def to_dict(self):
        return {
            "p": self.p,
            "kappa_identity": self.kappa_identity.tolist(),
            "kappa_recovered": self.kappa_recovered.tolist(),
            "rel_gap": self.rel_gap.tolist(),
            "radius": self.radius,
        }


def cumulant_moment_identity_check(rep, p, radius=None, n=512):
    """Compare ``kappa_p`` from the sigma-moment identity with ``kappa_p``
    read off the law itself (contour moments of G, then NC conversion)."""
    p = check_int(p, "p", minimum=1)
    ident = cumulants_from_sigma(rep, p).values
    if radius is None:
        # |support| is bounded by a multiple of the moment growth; any circle
        # outside the support gives the same contour integral
        m = free_cumulants_to_moments(cumulants_from_sigma(rep, 12).values)
        growth = max(abs(m[k - 1]) ** (1.0 / k) for k in range(2, 13, 2))
        radius = 3.0 * growth + 1.0
    law = FreeRegularLaw(rep)
    mom = contour_moments(law.cauchy, p, radius, n)
    rec = moments_to_free_cumulants(mom).values
    return CumulantIdentityReport(p, ident, rec, float(radius))


# ---------------------------------------------------------------------------
# Bercovici–Pata


@dataclass
class BercoviciPataReport:
    eta: float
    eta_prime: float
    drift_shift: float
    nu_kind: str
    flags: list

    def to_dict(self):
        return dict(self.__dict__)


def bercovici_pata(classical, report=False):
    """Free regular law with the same triplet as ``classical``.

    The classical drift ``eta`` (truncation ``1_[-1,1]``) becomes
    ``eta' = eta - int_(0,1] t dnu``.
    """
    if classical.a != 0:
        raise GaussianPartPresent("the image of a law with a Gaussian part is not free regular")
    nu = classical.nu
    if nu is None:
        if classical.eta < 0:
            raise NotRegularImage("negative point mass is not free regular")
        rep = FreeRegularRep.from_sigma(classical.eta, None)
        rpt = BercoviciPataReport(classical.eta, classical.eta, 0.0, "zero", [])
        return (rep, rpt) if report else rep
    if nu.support != "nonneg":
        raise NotRegularImage("Lévy measure charges (-inf, 0)")
    shift = _partial_first_moment(nu)
    eta_prime = classical.eta - shift
    if eta_prime < -1e-12:
        raise NotRegularImage(f"free drift eta' = {eta_prime:.6g} < 0")
    eta_prime = max(eta_prime, 0.0)
    rep = FreeRegularRep.from_nu(nu, eta_prime)
    kind = "probability" if abs(nu.total_mass - 1.0) < 1e-12 else "finite"
    rpt = BercoviciPataReport(classical.eta, eta_prime, shift, kind, list(rep.flags))
    return (rep, rpt) if report else rep


def classical_compound_poisson_sample(rate, jump, n, seed=None):
    """``n`` draws of ``sum_{k <= N} J_k`` with ``N ~ Poisson(rate)``."""
    rate = check_positive(rate, "rate", allow_zero=True)
    n = check_int(n, "n", minimum=1)
    jump = measure_from_dict(jump)
    rng = np.random.default_rng(seed)
    counts = rng.poisson(rate, size=n)
    total = int(counts.sum())
    out = np.zeros(n)
    if total:
        draws = jump.sample(total, rng)
        owner = np.repeat(np.arange(n), counts)
        np.add.at(out, owner, draws)
    return EmpiricalMeasure(out, "nonneg")


# ---------------------------------------------------------------------------
# free stable laws


def free_stable_voiculescu(params, z):
    """``-exp(i alpha rho pi) z**(1-alpha)`` on the principal branch."""
    z = np.asarray(z, complex)
    if np.any(z.imag <= 0):
        raise BranchCut("free stable phi is evaluated on the upper half-plane only")
    a = params.alpha
    return -np.exp(1j * a * params.rho_asym * np.pi) * z ** (1.0 - a)


class FreeStableLaw:
    """Law whose Voiculescu transform is ``free_stable_voiculescu``."""

    total_mass = 1.0

    def __init__(self, params, tol=1e-11):
        self.params = params
        self.tol = tol
        self.support = "nonneg" if params.rho_asym == 1 else "real"

    def _phid(self, w):
        a = self.params.alpha
        c = -np.exp(1j * a * self.params.rho_asym * np.pi)
        p = c * w ** (1.0 - a)
        return p, (1.0 - a) * p / w

    def voiculescu(self, z):
        return free_stable_voiculescu(self.params, z)

    def cauchy(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        w = solve_phi(self._phid, zu, 1.0, self.tol)
        return np.where(lower, np.conj(1.0 / w), 1.0 / w)

    def cauchy_deriv(self, z):
        z = np.asarray(z, complex)
        lower = z.imag < 0
        zu = np.where(lower, np.conj(z), z)
        w = solve_phi(self._phid, zu, 1.0, self.tol)
        _, dphi = self._phid(w)
        d = -1.0 / (w * w * (1.0 + dphi))
        return np.where(lower, np.conj(d), d)
