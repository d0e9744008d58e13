"""Composite Gauss-Legendre rules used for Cauchy-type integrals.

Integrals of the form ``int f(t) / (z - t)**m dt`` over ``[x0, T]`` are done
in the variable ``u = log t``.  The pole sits at ``log z``, a distance
``arg z`` above the real u-axis, so panels are graded geometrically towards
``log |z|``.  Every z gets the same number of panels (clipping produces
zero-width panels), which keeps the whole batch in one numpy expression.
"""

import numpy as np

GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)

# widest panel allowed in log space; keeps exp(-alpha*u) well resolved
MAX_PANEL = 0.5


def graded_edges(lo, hi, center, dist):
    """Panel edges per row, graded towards ``center`` at scale ``dist``.

    All arguments are 1-d arrays of equal length.  Returns an array of
    shape (n, n_edges), sorted along axis 1, with every row spanning
    ``[lo, hi]``.
    """
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    center = np.clip(np.asarray(center, float), lo, hi)
    dist = np.clip(np.asarray(dist, float), 1e-15, MAX_PANEL)

    n_geo = int(np.ceil(np.log2(MAX_PANEL / dist.min()))) + 1
    geo = dist[:, None] * 2.0 ** np.arange(n_geo)[None, :]
    geo = np.minimum(geo, MAX_PANEL)
    span = float(np.max(hi - lo)) + MAX_PANEL
    n_uni = int(np.ceil(span / MAX_PANEL)) + 1
    uni = MAX_PANEL * (1.0 + np.arange(1, n_uni + 1))[None, :] * np.ones_like(dist)[:, None]
    offsets = np.concatenate([np.zeros_like(dist)[:, None], geo, uni], axis=1)
    edges = np.concatenate(
        [lo[:, None], hi[:, None], center[:, None] + offsets, center[:, None] - offsets],
        axis=1,
    )
    edges = np.clip(edges, lo[:, None], hi[:, None])
    return np.sort(edges, axis=1)


def panel_nodes(edges):
    """Nodes and weights of the composite rule for rows of panel edges.

    Returns ``(nodes, weights)`` of shape (n, n_panels * GL_ORDER).
    """
    a = edges[:, :-1, None]
    b = edges[:, 1:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * _GL_X[None, None, :]
    weights = half * _GL_W[None, None, :]
    n = edges.shape[0]
    return nodes.reshape(n, -1), weights.reshape(n, -1)


def fixed_panels(lo, hi, width=0.25):
    """Uniform panels on a single interval, returned as 1-d nodes/weights."""
    n = max(1, int(np.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)[None, :]
    nodes, weights = panel_nodes(edges)
    return nodes[0], weights[0]
