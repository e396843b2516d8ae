"""Bundle metric assembly and its closed-form inverse.

At a tangent point (x, u) the bundle metric acts on horizontal/vertical
decompositions ("lift vectors") through six scalar coefficients evaluated at
t = g_x(u, u):

    <X^h, Y^h> = (alpha1+alpha3) g(X,Y) + (beta1+beta3) g(X,u) g(Y,u)
    <X^h, Y^v> = alpha2 g(X,Y) + beta2 g(X,u) g(Y,u)          (= <X^v, Y^h>)
    <X^v, Y^v> = alpha1 g(X,Y) + beta1 g(X,u) g(Y,u)

In the frame (d/dx_i lifted horizontally, then vertically) this is the block
matrix [[M1+M3, M2], [M2, M1]] with M_l = alpha_l g + beta_l (gu)(gu)^T, and
its inverse has blocks [[Lambda, Theta], [Theta, Omega]] given in closed form
by the psi coefficients of :mod:`gnatural.profile`.  ``inverse_block`` is the
closed form; tests check it against direct numerical inversion and against
the Schur-complement route.

Two squared norms appear and are deliberately kept distinct: ``rank_one_inverse``
uses the Euclidean |u|^2 of the raw components, while all profile evaluations
use t = g_x(u, u).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateAt, SideConditionFailed, SingularMetric, SingularMu
from .profile import DEGENERACY_TOL, MetricProfile, profile_at, psi_from_values


@dataclass(frozen=True, eq=False)
class TangentPoint:
    """A chart point x, a tangent vector u, the metric g(x) and t = g_x(u,u)."""

    x: np.ndarray
    u: np.ndarray
    gx: np.ndarray
    t: float

    @classmethod
    def at(cls, M, x, u) -> "TangentPoint":
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        gx = M.metric_at(x)
        if u.shape != (M.dim,):
            raise ValueError(f"tangent vector must have shape ({M.dim},)")
        return cls(x=x, u=u, gx=gx, t=float(u @ gx @ u))

    @property
    def dim(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True, eq=False)
class LiftVector:
    """Horizontal part h and vertical part v of a tangent vector to the bundle."""

    h: np.ndarray
    v: np.ndarray
    base: Optional[TangentPoint] = None

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.h, float), np.asarray(self.v, float)])

    @staticmethod
    def from_array(arr, base: Optional[TangentPoint] = None) -> "LiftVector":
        arr = np.asarray(arr, dtype=float)
        m = arr.shape[0] // 2
        return LiftVector(h=arr[:m], v=arr[m:], base=base)

    def __add__(self, other):
        return LiftVector(self.h + other.h, self.v + other.v, base=self.base or other.base)

    def __sub__(self, other):
        return LiftVector(self.h - other.h, self.v - other.v, base=self.base or other.base)

    def __rmul__(self, c):
        return LiftVector(c * self.h, c * self.v, base=self.base)


def geodesic_flow_lift(P: TangentPoint) -> LiftVector:
    """The lift with (h, v) = (u, 0)."""
    return LiftVector(h=P.u.copy(), v=np.zeros_like(P.u), base=P)


def canonical_vertical_lift(P: TangentPoint) -> LiftVector:
    """The lift with (h, v) = (0, u)."""
    return LiftVector(h=np.zeros_like(P.u), v=P.u.copy(), base=P)


@dataclass(frozen=True, eq=False)
class BlockMetric:
    """A symmetric 2m x 2m matrix stored as blocks (hh, hv; hv, vv)."""

    hh: np.ndarray
    hv: np.ndarray
    vv: np.ndarray

    @property
    def vh(self) -> np.ndarray:
        return self.hv.T

    def full(self) -> np.ndarray:
        return np.block([[self.hh, self.hv], [self.vh, self.vv]])

    def inner(self, A: LiftVector, B: LiftVector) -> float:
        return float(A.as_array() @ self.full() @ B.as_array())


def g_natural_on_lifts(p: MetricProfile, P: TangentPoint, A: LiftVector, B: LiftVector) -> float:
    """The bundle metric of two lift vectors at P (bilinear, symmetric)."""
    v = profile_at(p, P.t)
    g, gu = P.gx, P.gx @ P.u
    ah, av, bh, bv = A.h, A.v, B.h, B.v
    out = (v.a1 + v.a3) * (ah @ g @ bh) + (v.b1 + v.b3) * (ah @ gu) * (bh @ gu)
    out += v.a2 * ((ah @ g @ bv) + (av @ g @ bh))
    out += v.b2 * ((ah @ gu) * (bv @ gu) + (av @ gu) * (bh @ gu))
    out += v.a1 * (av @ g @ bv) + v.b1 * (av @ gu) * (bv @ gu)
    return float(out)


def assemble_block(p: MetricProfile, P: TangentPoint) -> BlockMetric:
    """The bundle metric at P as a block matrix in the lift frame."""
    v = profile_at(p, P.t)
    g, gu = P.gx, P.gx @ P.u
    W = np.outer(gu, gu)
    M1 = v.a1 * g + v.b1 * W
    M2 = v.a2 * g + v.b2 * W
    M3 = v.a3 * g + v.b3 * W
    return BlockMetric(hh=M1 + M3, hv=M2, vv=M1)


def rank_one_inverse(a: float, b: float, u) -> np.ndarray:
    """Closed-form inverse of a*I + b*u*u^T (|u|^2 Euclidean):

        (a*I + b*u*u^T)^{-1} = I/a - b/(a*(a + b*|u|^2)) * u*u^T
    """
    u = np.asarray(u, dtype=float)
    n2 = float(u @ u)
    den = a * (a + b * n2)
    if abs(den) < 1e-12:
        raise SingularMu(f"a*(a + b*|u|^2) = {den:.3g} is (nearly) zero")
    m = u.shape[0]
    return np.eye(m) / a - (b / den) * np.outer(u, u)


def check_side_conditions(p: MetricProfile, t: float) -> None:
    """Raise unless alpha1*(alpha1+alpha3) and phi1*(phi1+phi3) are nonzero at t.

    The closed-form inverse is derived through intermediate matrices whose
    invertibility needs these two products; they are checked separately from
    nondegeneracy so the failure modes stay distinguishable.
    """
    v = profile_at(p, t)
    if abs(v.a1 * v.aa) < DEGENERACY_TOL or abs(v.phi1 * v.phi13) < DEGENERACY_TOL:
        raise SideConditionFailed(
            f"alpha1*(alpha1+alpha3)={v.a1 * v.aa:.3g}, "
            f"phi1*(phi1+phi3)={v.phi1 * v.phi13:.3g} at t={t:.6g}"
        )


def inverse_block(p: MetricProfile, P: TangentPoint) -> BlockMetric:
    """Closed-form inverse of the bundle metric at P, as blocks
    (Lambda, Theta; Theta, Omega):

        Lambda = (alpha1/alpha) g^{-1}          - psi_lambda u u^T
        Theta  = -(alpha2/alpha) g^{-1}         - psi_theta  u u^T
        Omega  = ((alpha1+alpha3)/alpha) g^{-1} - psi_omega  u u^T
    """
    v = profile_at(p, P.t)
    if abs(v.alpha * v.phi) < DEGENERACY_TOL:
        raise DegenerateAt(P.t)
    check_side_conditions(p, P.t)
    try:
        ginv = np.linalg.inv(P.gx)
    except np.linalg.LinAlgError:
        raise SingularMetric(f"base metric at {P.x!r} is singular") from None
    psi_l, psi_t, psi_w = psi_from_values(v)
    W = np.outer(P.u, P.u)
    return BlockMetric(
        hh=(v.a1 / v.alpha) * ginv - psi_l * W,
        hv=-(v.a2 / v.alpha) * ginv - psi_t * W,
        vv=(v.aa / v.alpha) * ginv - psi_w * W,
    )


def schur_coefficients(p: MetricProfile, t: float):
    """The scalar pairs describing both Schur complements of the block metric
    at the centre of normal coordinates:

        (M1+M3) - M2 M1^{-1} M2 = lam1*I + lam2*u*u^T     with lam1 = alpha/alpha1
        M1 - M2 (M1+M3)^{-1} M2 = om1*I + om2*u*u^T       with om1 = alpha/(alpha1+alpha3)

    They satisfy lam1 + t*lam2 = phi/phi1 and om1 + t*om2 = phi/(phi1+phi3),
    which the tests check.
    """
    v = profile_at(p, t)
    lam1 = v.alpha / v.a1
    lam2 = (v.phi1 * (v.a1 * v.bb - v.a2 * v.b2 - v.phi2 * v.b2)
            + v.b1 * v.phi2**2) / (v.a1 * v.phi1)
    om1 = v.alpha / v.aa
    om2 = (v.phi13 * (v.b1 * v.aa - v.a2 * v.b2 - v.b2 * v.phi2)
           + v.phi2**2 * v.bb) / (v.aa * v.phi13)
    return lam1, lam2, om1, om2
