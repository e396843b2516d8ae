"""Levi-Civita connection of the bundle metric.

The connection on pairs of lifts is a base-connection term plus corrections
that are linear combinations of eight basis tensors built from the base
curvature R and the base metric g:

    T1 = R(X,u)Y     T2 = R(Y,u)X     T3 = R(X,Y)u     T4 = g(R(X,u)Y,u) u
    T5 = g(X,u)Y     T6 = g(Y,u)X     T7 = g(X,Y)u     T8 = g(X,u)g(Y,u) u

Six coefficient tables (labelled A..F), each giving the eight weights as
functions of t = g(u,u), define the corrections:

    nabla_{X^h} Y^h = (nabla_X Y)^h + h{A(u;X,Y)} + v{B(u;X,Y)}
    nabla_{X^h} Y^v = (nabla_X Y)^v + h{C(u;X,Y)} + v{D(u;X,Y)}
    nabla_{X^v} Y^h =                 h{C(u;Y,X)} + v{D(u;Y,X)}
    nabla_{X^v} Y^v =                 h{E(u;Y,X)} + v{F(u;Y,X)}

(the mixed tables always take the horizontal argument first).

``koszul_connection`` recomputes the same values with no reference to the
tables: it evaluates the Koszul formula with directional derivatives of the
metric taken by finite differences in the bundle chart coordinates (x_i, u^i),
then solves for the components with the closed-form inverse metric.  Closed
form and oracle agreeing on random inputs is the main defence against
transcription errors in the tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numdiff
from .bundle import LiftVector, TangentPoint, inverse_block
from .errors import DegenerateAt
from .profile import DEGENERACY_TOL, MetricProfile, profile_at, psi_from_values

TABLE_LABELS = ("A", "B", "C", "D", "E", "F")
CONNECTION_KINDS = ("hh", "hv", "vh", "vv")

#: step for directional derivatives in the Koszul oracle
KOSZUL_STEP = 1e-5

#: step for differentiating table coefficients in t
TABLE_DERIV_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class FTensorTable:
    """Eight coefficient values of one table at a fixed t."""

    label: str
    t: float
    f: np.ndarray  # shape (8,); f[i-1] weights basis tensor Ti


def coeff_table(label: str, p: MetricProfile, t: float) -> FTensorTable:
    """Evaluate the eight coefficients of table ``label`` at t."""
    if label not in TABLE_LABELS:
        raise ValueError(f"unknown table {label!r}; expected one of {TABLE_LABELS}")
    v = profile_at(p, t)
    al, ph = v.alpha, v.phi
    if abs(al * ph) < DEGENERACY_TOL:
        raise DegenerateAt(t)
    psi_l, psi_t, psi_w = psi_from_values(v)
    mix = 2.0 * v.da2 - v.b2  # vanishes exactly on flat-bundle profiles

    if label == "A":
        f = (-v.a1 * v.a2 / (2 * al),
             -v.a1 * v.a2 / (2 * al),
             0.0,
             v.a2 * psi_l,
             v.a2 * v.bb / (2 * al),
             v.a2 * v.bb / (2 * al),
             v.daa * v.phi2 / ph,
             v.dbb * v.phi2 / ph + v.bb * psi_t)
    elif label == "B":
        f = (v.a2**2 / al,
             0.0,
             -v.a1 * v.aa / (2 * al),
             v.a2 * psi_t,
             -v.aa * v.bb / (2 * al),
             -v.aa * v.bb / (2 * al),
             -v.daa * v.phi13 / ph,
             -v.dbb * v.phi13 / ph + v.bb * psi_w)
    elif label == "C":
        f = (0.0,
             -v.a1**2 / (2 * al),
             0.0,
             v.a1 * psi_l / 2,
             v.a1 * v.bb / (2 * al),
             v.daa * v.a1 / al - v.a2 * mix / (2 * al),
             v.bb * v.phi1 / (2 * ph) + 0.5 * mix * v.phi2 / ph,
             v.dbb * v.phi1 / ph - psi_l * (v.daa + v.bb / 2) - 0.5 * mix * psi_t)
    elif label == "D":
        f = (0.0,
             v.a1 * v.a2 / (2 * al),
             0.0,
             v.a1 * psi_t / 2,
             -v.a2 * v.bb / (2 * al),
             -v.daa * v.a2 / al + mix * v.aa / (2 * al),
             -v.bb * v.phi2 / (2 * ph) - 0.5 * mix * v.phi13 / ph,
             -v.dbb * v.phi2 / ph - (v.daa + v.bb / 2) * psi_t - 0.5 * mix * psi_w)
    elif label == "E":
        f56 = (v.da2 + v.b2 / 2) * v.a1 / al - v.da1 * v.a2 / al
        f = (0.0, 0.0, 0.0, 0.0,
             f56,
             f56,
             v.b2 * v.phi1 / ph - (v.b1 - v.da1) * v.phi2 / ph,
             2 * v.db2 * v.phi1 / ph - v.db1 * v.phi2 / ph
             - (2 * v.da2 + v.b2) * psi_l - 2 * v.da1 * psi_t)
    else:  # F
        f56 = -(v.da2 + v.b2 / 2) * v.a2 / al + v.da1 * v.aa / al
        f = (0.0, 0.0, 0.0, 0.0,
             f56,
             f56,
             (v.b1 - v.da1) * v.phi13 / ph - v.b2 * v.phi2 / ph,
             v.db1 * v.phi13 / ph - 2 * v.db2 * v.phi2 / ph
             - (2 * v.da2 + v.b2) * psi_t - 2 * v.da1 * psi_w)
    return FTensorTable(label=label, t=float(t), f=np.asarray(f, dtype=float))


def coeff_table_derivative(label: str, p: MetricProfile, t: float,
                           step: float = TABLE_DERIV_STEP) -> np.ndarray:
    """d/dt of the eight coefficients of ``label`` at t (4th-order stencil;
    one-sided near t = 0 so profiles are never evaluated at negative t)."""
    return numdiff.deriv(lambda s: coeff_table(label, p, s).f, t, h=step, order=4, lower=0.0)


def basis_values(Rt, g, u, gu, X, Y) -> np.ndarray:
    """All eight basis tensors at once, stacked as rows of an (8, m) array."""
    T1 = np.einsum("lijk,i,j,k->l", Rt, X, u, Y)
    T2 = np.einsum("lijk,i,j,k->l", Rt, Y, u, X)
    T3 = np.einsum("lijk,i,j,k->l", Rt, X, Y, u)
    T4 = (T1 @ gu) * u
    xu, yu, xy = X @ gu, Y @ gu, X @ g @ Y
    return np.stack([T1, T2, T3, T4, xu * Y, yu * X, xy * u, xu * yu * u])


def basis_tensor(i: int, M, x, u, X, Y) -> np.ndarray:
    """The i-th basis tensor (1..8) at (x, u) applied to (X, Y)."""
    if not 1 <= i <= 8:
        raise ValueError("basis tensor index must be in 1..8")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    g = M.metric_at(x)
    gu = g @ u
    if i <= 4:
        Rt = M.riemann_tensor_at(x)
    else:
        Rt = np.zeros((M.dim,) * 4)
    return basis_values(Rt, g, u, gu, np.asarray(X, float), np.asarray(Y, float))[i - 1]


class SiteFrame:
    """Per-site cache: base tensors, profile values, coefficient tables.

    Everything downstream (connection, curvature, scans) evaluates many
    table/basis combinations at one (x, u); this object computes each
    ingredient once and lazily.
    """

    def __init__(self, p: MetricProfile, M, P: TangentPoint):
        self.p, self.M, self.P = p, M, P
        self.x, self.u, self.t = P.x, P.u, P.t
        self.g = P.gx
        self.gu = P.gx @ P.u
        self.values = profile_at(p, P.t)
        if abs(self.values.alpha * self.values.phi) < DEGENERACY_TOL:
            raise DegenerateAt(P.t)
        self._ginv = None
        self._gamma = None
        self._R = None
        self._NR = None
        self._tables = {}
        self._dtables = {}
        self._inverse = None

    @property
    def dim(self):
        return self.M.dim

    @property
    def ginv(self):
        if self._ginv is None:
            self._ginv = np.linalg.inv(self.g)
        return self._ginv

    @property
    def gamma(self):
        if self._gamma is None:
            self._gamma = self.M.christoffel_at(self.x)
        return self._gamma

    @property
    def R(self):
        if self._R is None:
            self._R = self.M.riemann_tensor_at(self.x)
        return self._R

    @property
    def NR(self):
        if self._NR is None:
            self._NR = self.M.nabla_riemann_tensor_at(self.x)
        return self._NR

    @property
    def inverse(self):
        if self._inverse is None:
            self._inverse = inverse_block(self.p, self.P)
        return self._inverse

    def table(self, label: str) -> np.ndarray:
        tab = self._tables.get(label)
        if tab is None:
            tab = coeff_table(label, self.p, self.t).f
            self._tables[label] = tab
        return tab

    def dtable(self, label: str) -> np.ndarray:
        dt = self._dtables.get(label)
        if dt is None:
            dt = coeff_table_derivative(label, self.p, self.t)
            self._dtables[label] = dt
        return dt

    def basis(self, X, Y) -> np.ndarray:
        return basis_values(self.R, self.g, self.u, self.gu, X, Y)

    def apply(self, label: str, X, Y) -> np.ndarray:
        """Sum_i f_i(t) Ti(u; X, Y) for the given table."""
        return self.table(label) @ self.basis(X, Y)

    def ru(self, X, Y) -> np.ndarray:
        """R(X, Y)u."""
        return np.einsum("lijk,i,j,k->l", self.R, X, Y, self.u)

    def base_nabla(self, X, Y) -> np.ndarray:
        """nabla_X Y for constant-coefficient fields: Gamma(x)(X, Y)."""
        return np.einsum("ljk,j,k->l", self.gamma, X, Y)


def _connection_from_frame(frame: SiteFrame, kind: str, X, Y) -> LiftVector:
    if kind == "hh":
        h = frame.base_nabla(X, Y) + frame.apply("A", X, Y)
        v = frame.apply("B", X, Y)
    elif kind == "hv":
        h = frame.apply("C", X, Y)
        v = frame.base_nabla(X, Y) + frame.apply("D", X, Y)
    elif kind == "vh":
        h = frame.apply("C", Y, X)
        v = frame.apply("D", Y, X)
    elif kind == "vv":
        h = frame.apply("E", Y, X)
        v = frame.apply("F", Y, X)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {CONNECTION_KINDS}")
    return LiftVector(h=h, v=v, base=frame.P)


def bundle_connection(p: MetricProfile, M, P: TangentPoint, kind: str, X, Y) -> LiftVector:
    """Closed-form covariant derivative of one lift field along another.

    ``kind`` names the lift types of (direction, field): "hh", "hv", "vh" or
    "vv".  X and Y are base vectors, extended as constant-coefficient fields.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return _connection_from_frame(SiteFrame(p, M, P), kind, X, Y)


# -- Koszul-formula oracle -----------------------------------------------------
#
# Lift fields of constant-coefficient base vectors have constant components in
# the lift frame, so the metric pairing of two of them is a smooth scalar on
# the bundle chart that we can difference numerically.  In chart coordinates
# the horizontal lift of X at (x, u) moves with velocity
# (X, -Gamma(x)(u, X)); the vertical lift with velocity (0, X).


def _g_scalar(p: MetricProfile, M, x, u, bh, bv, ch, cv) -> float:
    g = M._metric(x)
    gu = g @ u
    v = profile_at(p, float(u @ gu))
    out = (v.a1 + v.a3) * (bh @ g @ ch) + (v.b1 + v.b3) * (bh @ gu) * (ch @ gu)
    out += v.a2 * ((bh @ g @ cv) + (bv @ g @ ch))
    out += v.b2 * ((bh @ gu) * (cv @ gu) + (bv @ gu) * (ch @ gu))
    out += v.a1 * (bv @ g @ cv) + v.b1 * (bv @ gu) * (cv @ gu)
    return float(out)


def _coordinate_velocity(frame: SiteFrame, lift_type: str, V):
    if lift_type == "h":
        return V, -np.einsum("ljk,j,k->l", frame.gamma, frame.u, V)
    return np.zeros_like(V), V


def _lift_components(m, lift_type, V):
    z = np.zeros(m)
    return (V, z) if lift_type == "h" else (z, V)


def _bracket_vertical(frame: SiteFrame, ta: str, Va, tb: str, Vb) -> np.ndarray:
    """Vertical part of the bracket of two constant lift fields (the
    horizontal part always vanishes for constant-coefficient base fields)."""
    if ta == "h" and tb == "h":
        return -frame.ru(Va, Vb)
    if ta == "h" and tb == "v":
        return frame.base_nabla(Va, Vb)
    if ta == "v" and tb == "h":
        return -frame.base_nabla(Vb, Va)
    return np.zeros(frame.dim)


def _koszul_from_frame(frame: SiteFrame, kind: str, X, Y, step: float = KOSZUL_STEP) -> LiftVector:
    p, M, m = frame.p, frame.M, frame.dim
    x0, u0 = frame.x, frame.u
    ta, tb = kind[0], kind[1]
    velA = _coordinate_velocity(frame, ta, X)
    velB = _coordinate_velocity(frame, tb, Y)
    compA = _lift_components(m, ta, X)
    compB = _lift_components(m, tb, Y)

    def ddir(vel, c1, c2):
        dx, du = vel
        fp = _g_scalar(p, M, x0 + step * dx, u0 + step * du, *c1, *c2)
        fm = _g_scalar(p, M, x0 - step * dx, u0 - step * du, *c1, *c2)
        return (fp - fm) / (2.0 * step)

    def g_vert(w, comp) -> float:
        # pairing of a purely vertical vector w with a constant lift
        zero = np.zeros(m)
        return _g_scalar(p, M, x0, u0, zero, w, *comp)

    ab = _bracket_vertical(frame, ta, X, tb, Y)
    s = np.empty(2 * m)
    for k in range(2 * m):
        te = "h" if k < m else "v"
        e = np.zeros(m)
        e[k % m] = 1.0
        velE = _coordinate_velocity(frame, te, e)
        compE = _lift_components(m, te, e)
        ae = _bracket_vertical(frame, ta, X, te, e)
        be = _bracket_vertical(frame, tb, Y, te, e)
        s[k] = 0.5 * (
            ddir(velA, compB, compE)
            + ddir(velB, compA, compE)
            - ddir(velE, compA, compB)
            + g_vert(ab, compE)
            - g_vert(ae, compB)
            - g_vert(be, compA)
        )
    d = frame.inverse.full() @ s
    return LiftVector(h=d[:m], v=d[m:], base=frame.P)


def koszul_connection(p: MetricProfile, M, P: TangentPoint, kind: str, X, Y,
                      step: float = KOSZUL_STEP) -> LiftVector:
    """Numerical oracle for ``bundle_connection``: the Koszul formula evaluated
    with finite differences on the bundle chart, independent of the
    coefficient tables."""
    if kind not in CONNECTION_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {CONNECTION_KINDS}")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return _koszul_from_frame(SiteFrame(p, M, P), kind, X, Y, step=step)
