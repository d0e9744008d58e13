"""Density and tail recovery from Cauchy transforms.

The density is ``-Im G(x + i eps)/pi`` extrapolated to ``eps -> 0`` by
Richardson's method over a halving ladder, with ``eps`` scaled by
``max(floor, |x|)`` so that the far tail is sampled at a fixed relative
resolution.  Beyond the grid a power tail fitted on the last decade is
attached.
"""

import csv
from dataclasses import dataclass

import numpy as np

from ._phisolve import numeric_derivative, solve_phi
from ._validation import as_upper, check_int, check_positive
from .exceptions import MassDeficit, NegativeDensity, ValidationError
from .measures import GriddedDensity, PowerTail

_SUPPORTS = ("nonneg", "real")


@dataclass
class InversionConfig:
    epsilons: tuple = (1e-2, 5e-3, 2.5e-3)
    order: int = 2
    body_max: float = 10.0
    body_step: float = 5e-3
    eps_floor: float = 0.05
    edge_refine: bool = True
    tail_max: float = 1e4
    n_log: int = 400
    support: str = "nonneg"
    symmetric: bool = False
    fit_tail: bool = True
    min_mass: float = 0.99
    max_clipped: float = 1e-4
    clip_tol: float = 1e-8

    def __post_init__(self):
        eps = np.asarray(self.epsilons, float)
        if eps.ndim != 1 or len(eps) < 1 or np.any(eps <= 0):
            raise ValidationError("epsilon ladder must contain positive values")
        if np.any(np.diff(eps) >= 0):
            raise ValidationError("epsilon ladder must be strictly decreasing")
        self.epsilons = tuple(float(e) for e in eps)
        check_int(self.order, "order")
        if self.order > len(eps) - 1:
            raise ValidationError("extrapolation order needs order + 1 ladder points")
        check_positive(self.body_max, "body_max")
        check_positive(self.body_step, "body_step")
        if self.tail_max < self.body_max:
            raise ValidationError("tail_max must be >= body_max")
        if self.support not in _SUPPORTS:
            raise ValidationError(f"support must be one of {_SUPPORTS}")

    def grid(self):
        lo = 0.0 if (self.symmetric or self.support == "nonneg") else -self.body_max
        n = int(round((self.body_max - lo) / self.body_step)) + 1
        body = np.linspace(lo, self.body_max, n)
        if self.edge_refine and lo == 0.0:
            # resolve edge singularities such as x**-0.5 at the origin
            body = np.concatenate([[0.0], np.geomspace(1e-7, self.body_step, 40)[:-1], body[1:]])
        if self.tail_max > self.body_max and self.n_log > 0:
            far = np.geomspace(self.body_max, self.tail_max, self.n_log + 1)[1:]
            body = np.concatenate([body, far])
        return body


def richardson_weights(epsilons, order):
    """Weights ``w`` with ``sum w_i eps_i**j = [j == 0]`` for j <= order."""
    eps = np.asarray(epsilons[-(order + 1):], float)
    V = np.vander(eps, order + 1, increasing=True).T
    rhs = np.zeros(order + 1)
    rhs[0] = 1.0
    return eps, np.linalg.solve(V, rhs)


class RecoveredMeasure(GriddedDensity):
    """Gridded density produced by :func:`stieltjes_invert` plus diagnostics."""

    def __init__(self, grid, density, support, tail, info):
        super().__init__(grid, density, support, tail)
        self.info = info

    @property
    def fitted_alpha(self):
        return self.info.get("fitted_alpha")

    @property
    def fitted_scale(self):
        return self.info.get("fitted_scale")


def _fit_tail(x, f, decade_from):
    """Log-log fit of ``f = c alpha x**(-alpha-1)`` on ``x >= decade_from``."""
    sel = (x >= decade_from) & (f > 0)
    if sel.sum() < 8:
        return None
    lx, lf = np.log(x[sel]), np.log(f[sel])
    slope, icpt = np.polyfit(lx, lf, 1)
    local = np.diff(lf) / np.diff(lx)
    alpha = -slope - 1.0
    if alpha <= 0 or np.var(local) >= 0.01:
        return None
    scale = np.exp(icpt) / alpha
    return float(alpha), float(scale), float(np.var(local))


def _atom_candidates(x, f, eps_eff, min_mass=0.01):
    out = []
    if len(x) < 3:
        return out
    peak = np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:])) + 1
    for i in peak:
        w = 3.0 * eps_eff[i]
        sel = np.abs(x - x[i]) <= w
        if sel.sum() < 2:
            continue
        mass = float(np.trapezoid(f[sel], x[sel]))
        # a spike: most of its local mass sits inside +-3 eps
        wide = np.abs(x - x[i]) <= 10.0 * w
        wide_mass = float(np.trapezoid(f[wide], x[wide]))
        if mass >= min_mass and mass >= 0.8 * wide_mass:
            out.append({"location": float(x[i]), "mass": mass})
    return out


def density_on_grid(cauchy, x, config):
    """Richardson-extrapolated ``-Im G(x + i eps)/pi`` on the points ``x``."""
    x = np.asarray(x, float)
    eps, w = richardson_weights(config.epsilons, config.order)
    scale = np.maximum(config.eps_floor, np.abs(x))
    dens = np.zeros(len(x))
    for e, wi in zip(eps, w):
        g = cauchy(x + 1j * e * scale)
        dens += wi * (-np.asarray(g).imag / np.pi)
    return dens


def stieltjes_invert(cauchy, config=None):
    """Recover a measure from its Cauchy transform.

    ``cauchy`` is a vectorised callable on the upper half-plane.  Returns a
    :class:`RecoveredMeasure`.
    """
    cfg = config or InversionConfig()
    x = cfg.grid()
    raw = density_on_grid(cauchy, x, cfg)

    # negative parts beyond the tolerance are clipped and accounted for
    neg = np.minimum(raw, 0.0)
    clipped = float(np.trapezoid(-np.where(raw < -cfg.clip_tol, neg, 0.0), x))
    dens = np.maximum(raw, 0.0)
    half = 2.0 * dens if cfg.symmetric else dens
    eps_eff = cfg.epsilons[-1] * np.maximum(cfg.eps_floor, np.abs(x))
    atoms = _atom_candidates(x, dens, eps_eff)

    info = {
        "clipped_mass": clipped,
        "atom_candidates": atoms,
        "fitted_alpha": None,
        "fitted_scale": None,
        "slope_variance": None,
    }
    tail = None
    if cfg.fit_tail and cfg.tail_max > cfg.body_max and x[-1] > 0:
        fit = _fit_tail(x, half, x[-1] / 10.0)
        if fit is not None and half[-1] > 0:
            alpha, scale, var = fit
            # pin the fitted law to the last grid value so the density is continuous
            scale = half[-1] / (alpha * x[-1] ** (-alpha - 1.0))
            tail = PowerTail(float(x[-1]), alpha, scale)
            info.update(fitted_alpha=alpha, fitted_scale=scale, slope_variance=var)
    support = "symmetric" if cfg.symmetric else cfg.support
    if support == "nonneg" and x[0] < 0:
        support = "real"
    rec = RecoveredMeasure(x, half, support, tail, info)
    info["mass"] = float(rec.total_mass)
    if clipped > cfg.max_clipped and not atoms:
        raise NegativeDensity(f"clipped negative density mass {clipped:.3g} exceeds {cfg.max_clipped:g}")
    if rec.total_mass < cfg.min_mass:
        raise MassDeficit(f"recovered mass {rec.total_mass:.6f} < {cfg.min_mass}", rec.total_mass)
    return rec


def G_from_phi(phi, z, dphi=None, scale=1.0, tol=1e-11):
    """``G(z) = 1/w`` with ``w + phi(w) = z`` solved by continuation."""
    z = as_upper(z)
    if dphi is None:
        phid = numeric_derivative(phi)
    else:

        def phid(w):
            return phi(w), dphi(w)

    w = solve_phi(phid, z, scale, tol)
    return 1.0 / w


def tail_from_inversion(measure, x):
    """Tail function of a recovered measure (grid part plus fitted tail)."""
    return measure.tail(x)


def write_density_csv(measure, path):
    alpha = getattr(measure, "fitted_alpha", None)
    scale = getattr(measure, "fitted_scale", None)
    x = measure.grid
    f = measure.density
    if measure.support == "symmetric":
        f = 0.5 * f
    tails = measure.tail(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "density", "tail", "fitted_alpha", "fitted_c"])
        for xi, fi, ti in zip(x, f, tails):
            w.writerow([repr(float(xi)), repr(float(fi)), repr(float(ti)),
                        "" if alpha is None else repr(alpha), "" if scale is None else repr(scale)])
