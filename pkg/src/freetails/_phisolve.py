"""Solve ``w + phi(w) = z`` for ``w`` in the upper half-plane.

The solution is ``w = F(z)``, so ``G(z) = 1/w``.  Each point is followed
down a vertical line from ``Im z = 10 (1 + |Re z| + scale)``, where
``w ~ z``, to the requested height.  Steps shrink on Newton failure and
grow again after successes.
"""

import numpy as np

from .exceptions import ContinuationStuck, NonNevanlinna


def numeric_derivative(phi):
    def phid(w):
        h = 1e-6 * np.maximum(np.abs(w), 1.0)
        return phi(w), (phi(w + h) - phi(w - h)) / (2.0 * h)

    return phid


def _newton(phid, w, z, tol, max_iter):
    w = w.copy()
    scale = np.maximum(np.abs(z), 1.0)
    ok = np.zeros(len(w), bool)
    active = np.ones(len(w), bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        wa = w[idx]
        ph, dph = phid(wa)
        res = wa + ph - z[idx]
        step = res / (1.0 + dph)
        new = wa - step
        for _ in range(50):
            bad = new.imag <= 0
            if not bad.any():
                break
            step = np.where(bad, 0.5 * step, step)
            new = wa - step
        good = np.isfinite(new)
        w[idx[good]] = new[good]
        done = np.abs(step) <= tol * scale[idx]
        ok[idx[done & good]] = True
        active[idx[done | ~good]] = False
    # verify the residual at the final iterate
    idx = np.flatnonzero(ok)
    if len(idx):
        ph, _ = phid(w[idx])
        res = np.abs(w[idx] + ph - z[idx])
        ok[idx[res > 10 * tol * scale[idx]]] = False
    return w, ok


def solve_phi(phid, z, scale=1.0, tol=1e-11, max_iter=40, max_rounds=400):
    """Return ``w`` with ``w + phi(w) = z``; ``phid(w)`` gives (phi, phi')."""
    z = np.asarray(z, complex)
    shape = z.shape
    z = z.ravel()
    x, y_target = z.real, z.imag
    y = np.maximum(10.0 * (1.0 + np.abs(x) + scale), y_target)
    w = x + 1j * y
    w, _ = _newton(phid, w, x + 1j * y, tol, max_iter)
    q = np.full(len(z), 0.1)
    done = y <= y_target
    for _ in range(max_rounds):
        idx = np.flatnonzero(~done)
        if len(idx) == 0:
            break
        y_next = np.maximum(y_target[idx], y[idx] * q[idx])
        z_try = x[idx] + 1j * y_next
        w_try, ok = _newton(phid, w[idx], z_try, tol, max_iter)
        # F(z) has Im F >= Im z; anything else is the wrong branch
        ok &= w_try.imag >= y_next * (1.0 - 1e-8)
        acc = idx[ok]
        w[acc] = w_try[ok]
        y[acc] = y_next[ok]
        q[acc] = np.maximum(q[acc] ** 1.5, 1e-3)
        rej = idx[~ok]
        q[rej] = np.sqrt(q[rej])
        if np.any(q[rej] > 0.9999):
            bad = rej[q[rej] > 0.9999][0]
            raise ContinuationStuck(f"continuation stalled at z={z[bad]} (Im reached {y[bad]:.3g})")
        done = y <= y_target
    if not np.all(done):
        raise ContinuationStuck("continuation did not reach the requested heights")
    if np.any(w.imag <= 0):
        raise NonNevanlinna("converged to a point with Im w <= 0; phi is not a valid Voiculescu transform")
    return w.reshape(shape)
