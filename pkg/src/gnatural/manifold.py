"""Single-chart Riemannian base manifolds.

A manifold is given by its dimension, a metric evaluator ``x -> g(x)`` and a
chart-domain predicate.  Christoffel symbols, the curvature tensor and its
covariant derivative are derived by nested central differences: the manifold
only ever *evaluates* the metric, so any smooth user-supplied ``metric_fn``
works.

Index conventions (all arrays row-major):

    christoffel_at(x)[l, j, k]            Gamma^l_{jk}
    riemann_tensor_at(x)[l, i, j, k]      R^l_{ijk}, i.e. R(e_i, e_j)e_k = R^l_{ijk} e_l
    nabla_riemann_tensor_at(x)[w, l, i, j, k]   (nabla_w R)^l_{ijk}

with the sign convention R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; on the
unit sphere this gives g(R(X,Y)Y, X) = g(X,X)g(Y,Y) - g(X,Y)^2.

Chart points are plain 1-D float arrays.  Operations that differentiate probe
``domain_check`` over the full stencil reach and raise ``OutOfChart`` when a
point sits too close to the chart boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .errors import NotPositiveDefinite, OutOfChart, SingularMetric, UnknownManifold

MANIFOLD_NAMES = ("flat2", "flat3", "sphere2", "halfplane2")


@dataclass(frozen=True, eq=False)
class ChartedManifold:
    """A Riemannian manifold represented in a single coordinate chart.

    ``fd_step`` drives first derivatives of the metric (Christoffel symbols),
    ``fd_step2`` the derivatives of the Christoffel symbols (curvature) and
    ``fd_step3`` the derivatives of the curvature tensor.  ``fd_order`` is the
    central-difference order (2 or 4) used for all three.
    """

    dim: int
    metric_fn: Callable[[np.ndarray], np.ndarray]
    domain_check: Optional[Callable[[np.ndarray], bool]] = None
    fd_step: float = 1e-5
    fd_step2: float = 1e-4
    fd_step3: float = 1e-3
    fd_order: int = 2
    name: str = "custom"
    sample_box: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("manifolds of dimension < 2 are not supported")
        if min(self.fd_step, self.fd_step2, self.fd_step3) <= 0.0:
            raise ValueError("finite-difference steps must be positive")
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")

    # -- chart bookkeeping -------------------------------------------------

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        return True if self.domain_check is None else bool(self.domain_check(x))

    def _require_point(self, x, reach=0.0):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise OutOfChart(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        if not self.contains(x):
            raise OutOfChart(f"point {x!r} outside the chart of {self.name}")
        if reach > 0.0 and self.domain_check is not None:
            for i in range(self.dim):
                for s in (-reach, reach):
                    probe = x.copy()
                    probe[i] += s
                    if not self.domain_check(probe):
                        raise OutOfChart(
                            f"point {x!r} closer than {reach:.3g} to the chart "
                            f"boundary of {self.name}"
                        )
        return x

    def _reach1(self):
        return numdiff.stencil_reach(self.fd_step, self.fd_order)

    def _reach2(self):
        return self._reach1() + numdiff.stencil_reach(self.fd_step2, self.fd_order)

    def _reach3(self):
        return self._reach2() + numdiff.stencil_reach(self.fd_step3, self.fd_order)

    # -- metric ------------------------------------------------------------

    def _metric(self, x):
        """Metric evaluation without validation (internal fast path)."""
        return np.asarray(self.metric_fn(np.asarray(x, dtype=float)), dtype=float)

    def metric_at(self, x):
        """Validated metric matrix at ``x``: symmetric and positive definite."""
        x = self._require_point(x)
        g = self._metric(x)
        if g.shape != (self.dim, self.dim):
            raise SingularMetric(f"metric_fn returned shape {g.shape}")
        scale = max(1.0, float(np.abs(g).max()))
        if float(np.abs(g - g.T).max()) > 1e-14 * scale:
            raise NotPositiveDefinite(f"metric at {x!r} is not symmetric")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(f"metric at {x!r} is not positive definite") from None
        return g

    def inverse_metric_at(self, x):
        g = self._metric(self._require_point(x))
        try:
            return np.linalg.inv(g)
        except np.linalg.LinAlgError:
            raise SingularMetric(f"metric at {x!r} is singular") from None

    # -- connection and curvature -------------------------------------------

    def _christoffel(self, x):
        g = self._metric(x)
        try:
            ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError:
            raise SingularMetric(f"metric at {x!r} is singular") from None
        dg = np.stack(
            [numdiff.partial(self._metric, x, j, self.fd_step, self.fd_order)
             for j in range(self.dim)]
        )  # dg[j, a, b] = d_j g_ab
        # Gamma^l_{jk} = 0.5 g^{li} (d_j g_ik + d_k g_ij - d_i g_jk)
        term = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
        return 0.5 * np.einsum("li,ijk->ljk", ginv, term)

    def christoffel_at(self, x):
        """Christoffel symbols Gamma^l_{jk}, symmetric in (j, k)."""
        x = self._require_point(x, reach=self._reach1())
        return self._christoffel(x)

    def _riemann_tensor(self, x):
        gamma = self._christoffel(x)
        dG = np.stack(
            [numdiff.partial(self._christoffel, x, i, self.fd_step2, self.fd_order)
             for i in range(self.dim)]
        )  # dG[i, l, j, k] = d_i Gamma^l_{jk}
        R = dG.transpose(1, 0, 2, 3) - dG.transpose(1, 2, 0, 3)
        R += np.einsum("lis,sjk->lijk", gamma, gamma)
        R -= np.einsum("ljs,sik->lijk", gamma, gamma)
        return R

    def riemann_tensor_at(self, x):
        """Full curvature tensor R^l_{ijk} at ``x``."""
        x = self._require_point(x, reach=self._reach2())
        return self._riemann_tensor(x)

    def riemann_at(self, x, X, Y, Z):
        """R(X, Y)Z at ``x``."""
        R = self.riemann_tensor_at(x)
        return np.einsum("lijk,i,j,k->l", R, X, Y, Z)

    def _nabla_riemann_tensor(self, x):
        gamma = self._christoffel(x)
        R = self._riemann_tensor(x)
        dR = np.stack(
            [numdiff.partial(self._riemann_tensor, x, w, self.fd_step3, self.fd_order)
             for w in range(self.dim)]
        )  # dR[w, l, i, j, k]
        NR = dR + np.einsum("lws,sijk->wlijk", gamma, R)
        NR -= np.einsum("swi,lsjk->wlijk", gamma, R)
        NR -= np.einsum("swj,lisk->wlijk", gamma, R)
        NR -= np.einsum("swk,lijs->wlijk", gamma, R)
        return NR

    def nabla_riemann_tensor_at(self, x):
        """Covariant derivative (nabla_w R)^l_{ijk} at ``x``."""
        x = self._require_point(x, reach=self._reach3())
        return self._nabla_riemann_tensor(x)

    def nabla_riemann_at(self, x, W, X, Y, Z):
        """(nabla_W R)(X, Y)Z at ``x``."""
        NR = self.nabla_riemann_tensor_at(x)
        return np.einsum("wlijk,w,i,j,k->l", NR, W, X, Y, Z)


# -- built-in manifolds ------------------------------------------------------

def _flat(m):
    eye = np.eye(m)
    return lambda x: eye


def _sphere_metric(x):
    theta = x[0]
    return np.array([[1.0, 0.0], [0.0, np.sin(theta) ** 2]])


def _halfplane_metric(x):
    y = x[1]
    return np.eye(2) / y**2


# Built-ins use 4th-order stencils with larger steps than the (2nd-order)
# defaults: the nested oracles (curvature of the bundle metric, covariant
# derivative of R) need the base-level noise floor well below 1e-9.
_BUILTIN_FD = dict(fd_step=1e-3, fd_step2=2e-3, fd_step3=1e-2, fd_order=4)


def make_manifold(name: str) -> ChartedManifold:
    """Built-in manifolds addressable by name: flat2, flat3, sphere2, halfplane2."""
    if name == "flat2" or name == "flat3":
        m = 2 if name == "flat2" else 3
        box = (np.full(m, -1.5), np.full(m, 1.5))
        return ChartedManifold(m, _flat(m), None, name=name, sample_box=box, **_BUILTIN_FD)
    if name == "sphere2":
        # unit sphere in spherical coordinates (theta, phi), away from the poles
        lo, hi = 0.2, np.pi - 0.2
        box = (np.array([0.5, -1.5]), np.array([np.pi - 0.5, 1.5]))
        return ChartedManifold(
            2, _sphere_metric, lambda x: lo < x[0] < hi,
            name=name, sample_box=box, **_BUILTIN_FD,
        )
    if name == "halfplane2":
        # hyperbolic half-plane, g = (dx^2 + dy^2) / y^2
        box = (np.array([-1.5, 0.6]), np.array([1.5, 2.5]))
        return ChartedManifold(
            2, _halfplane_metric, lambda x: x[1] > 0.1,
            name=name, sample_box=box, **_BUILTIN_FD,
        )
    raise UnknownManifold(f"unknown manifold {name!r}; choose one of {MANIFOLD_NAMES}")
