"""Central-difference stencils used throughout the library.

Everything numeric here is a plain central difference of order 2 or 4.
The order-4 variants cost two extra evaluations per direction but cut the
truncation error enough to survive nesting (metric -> Christoffel ->
curvature -> covariant derivative of curvature).
"""

from __future__ import annotations

import numpy as np

# antisymmetric pairs (k, c) contributing c * (f(x + k*h) - f(x - k*h)) / h;
# pairing keeps derivatives of constant functions exactly zero
_CENTRAL_PAIRS = {
    2: ((1, 0.5),),
    4: ((1, 8.0 / 12.0), (2, -1.0 / 12.0)),
}

# one-sided forward stencil of order 4 (used at the t = 0 boundary)
_FORWARD4 = ((0, -25.0 / 12.0), (1, 4.0), (2, -3.0), (3, 4.0 / 3.0), (4, -0.25))


def directional(f, x, v, h, order=2):
    """Derivative of ``f`` at ``x`` along the straight line x + s*v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = None
    for k, c in _CENTRAL_PAIRS[order]:
        step = (k * h) * v
        term = c * (np.asarray(f(x + step), dtype=float) - np.asarray(f(x - step), dtype=float))
        acc = term if acc is None else acc + term
    return acc / h


def partial(f, x, i, h, order=2):
    """Partial derivative of ``f`` with respect to coordinate ``i``."""
    e = np.zeros(len(x))
    e[i] = 1.0
    return directional(f, x, e, h, order)


def deriv(f, t, h=1e-3, order=4, lower=None):
    """Derivative of a function of one real variable.

    When ``lower`` is given and the central stencil would cross it, a
    one-sided forward stencil of the same order is used instead, so
    functions defined only on [lower, inf) stay inside their domain.
    """
    t = float(t)
    reach = (order // 2) * h
    if lower is not None and t - reach < lower:
        base = max(t, lower)
        acc = None
        for k, c in _FORWARD4:
            term = c * np.asarray(f(base + k * h), dtype=float)
            acc = term if acc is None else acc + term
    else:
        acc = None
        for k, c in _CENTRAL_PAIRS[order]:
            term = c * (np.asarray(f(t + k * h), dtype=float)
                        - np.asarray(f(t - k * h), dtype=float))
            acc = term if acc is None else acc + term
    out = acc / h
    return float(out) if out.ndim == 0 else out


def stencil_reach(h, order):
    """Largest coordinate displacement a central stencil of this order makes."""
    return (order // 2) * h
