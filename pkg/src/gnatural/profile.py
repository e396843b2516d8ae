"""Profiles: the six scalar coefficient functions of a bundle metric.

A profile is a sextuple (alpha1, alpha2, alpha3, beta1, beta2, beta3) of real
functions of t >= 0, together with their first derivatives.  Everything about
a bundle metric downstream of the base metric is a rational expression in
these twelve values, so this module also houses the derived quantities

    phi_i(t)  = alpha_i(t) + t*beta_i(t)
    alpha(t)  = alpha1*(alpha1 + alpha3) - alpha2^2
    phi(t)    = phi1*(phi1 + phi3) - phi2^2

the degenerate/pseudo/Riemannian classifier, and the three coefficients
(psi_lambda, psi_theta, psi_omega) of the closed-form inverse metric.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import numdiff
from .errors import DegenerateAt, ProfileFormatError, UnknownPreset

FUNCTION_NAMES = ("alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3")
PRESET_NAMES = ("sasaki", "flat-family", "scaled-sasaki")

#: |alpha*phi| below this counts as degenerate (double-precision noise floor
#: with headroom).
DEGENERACY_TOL = 1e-12

_FD_FALLBACK_STEP = 1e-6


def _fd_derivative(fn):
    return lambda t: numdiff.deriv(fn, t, h=_FD_FALLBACK_STEP, order=2, lower=0.0)


@dataclass(frozen=True, eq=False)
class MetricProfile:
    """Six coefficient functions of t plus their first derivatives.

    Derivatives may be omitted; a central-difference fallback (h = 1e-6) is
    then installed and a warning is emitted, since downstream coefficient
    tables depend on the derivatives being accurate.
    """

    alpha1: Callable[[float], float]
    alpha2: Callable[[float], float]
    alpha3: Callable[[float], float]
    beta1: Callable[[float], float]
    beta2: Callable[[float], float]
    beta3: Callable[[float], float]
    d_alpha1: Optional[Callable[[float], float]] = None
    d_alpha2: Optional[Callable[[float], float]] = None
    d_alpha3: Optional[Callable[[float], float]] = None
    d_beta1: Optional[Callable[[float], float]] = None
    d_beta2: Optional[Callable[[float], float]] = None
    d_beta3: Optional[Callable[[float], float]] = None
    name: str = "custom"
    polynomials: Optional[dict] = None

    def __post_init__(self):
        missing = [n for n in FUNCTION_NAMES if getattr(self, "d_" + n) is None]
        if missing:
            warnings.warn(
                f"profile {self.name!r}: derivatives of {', '.join(missing)} not "
                "supplied; falling back to central differences",
                stacklevel=3,
            )
            for n in missing:
                object.__setattr__(self, "d_" + n, _fd_derivative(getattr(self, n)))

    @classmethod
    def from_polynomials(cls, coeffs: dict, name: str = "custom") -> "MetricProfile":
        """Build a profile from ascending-order polynomial coefficient lists.

        ``coeffs`` maps each function name to its coefficient list; omitted
        functions are identically zero.
        """
        unknown = set(coeffs) - set(FUNCTION_NAMES)
        if unknown:
            raise ProfileFormatError(f"unknown profile functions {sorted(unknown)}")
        fns, stored = {}, {}
        for n in FUNCTION_NAMES:
            c = np.atleast_1d(np.asarray(coeffs.get(n, [0.0]), dtype=float))
            if c.ndim != 1 or c.size == 0:
                raise ProfileFormatError(f"{n}: expected a non-empty coefficient list")
            poly = np.polynomial.Polynomial(c)
            fns[n] = poly
            fns["d_" + n] = poly.deriv()
            stored[n] = [float(v) for v in c]
        return cls(name=name, polynomials=stored, **fns)


class Classification(Enum):
    DEGENERATE = "degenerate"
    NONDEGENERATE_PSEUDO = "nondegenerate-pseudo"
    RIEMANNIAN = "riemannian"


class InverseCoefficients(NamedTuple):
    psi_lambda: float
    psi_theta: float
    psi_omega: float


@dataclass(frozen=True)
class ProfileAt:
    """All profile-derived scalars at a single t (evaluated once, reused)."""

    t: float
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    da1: float
    da2: float
    da3: float
    db1: float
    db2: float
    db3: float
    phi1: float
    phi2: float
    phi3: float
    alpha: float
    phi: float

    @property
    def aa(self):  # alpha1 + alpha3
        return self.a1 + self.a3

    @property
    def bb(self):  # beta1 + beta3
        return self.b1 + self.b3

    @property
    def daa(self):
        return self.da1 + self.da3

    @property
    def dbb(self):
        return self.db1 + self.db3

    @property
    def phi13(self):  # phi1 + phi3
        return self.phi1 + self.phi3


def profile_at(p: MetricProfile, t: float) -> ProfileAt:
    t = float(t)
    a1, a2, a3 = float(p.alpha1(t)), float(p.alpha2(t)), float(p.alpha3(t))
    b1, b2, b3 = float(p.beta1(t)), float(p.beta2(t)), float(p.beta3(t))
    phi1, phi2, phi3 = a1 + t * b1, a2 + t * b2, a3 + t * b3
    return ProfileAt(
        t=t, a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, b3=b3,
        da1=float(p.d_alpha1(t)), da2=float(p.d_alpha2(t)), da3=float(p.d_alpha3(t)),
        db1=float(p.d_beta1(t)), db2=float(p.d_beta2(t)), db3=float(p.d_beta3(t)),
        phi1=phi1, phi2=phi2, phi3=phi3,
        alpha=a1 * (a1 + a3) - a2 * a2,
        phi=phi1 * (phi1 + phi3) - phi2 * phi2,
    )


@dataclass(frozen=True)
class DerivedProfile:
    """phi_i, alpha, phi and their derivatives, as functions of t."""

    phi1: Callable[[float], float]
    phi2: Callable[[float], float]
    phi3: Callable[[float], float]
    alpha_det: Callable[[float], float]
    phi_det: Callable[[float], float]
    d_phi1: Callable[[float], float]
    d_phi2: Callable[[float], float]
    d_phi3: Callable[[float], float]
    d_alpha_det: Callable[[float], float]
    d_phi_det: Callable[[float], float]


def derive(p: MetricProfile) -> DerivedProfile:
    def d_phi(i):
        da = ("da1", "da2", "da3")[i - 1]
        b = ("b1", "b2", "b3")[i - 1]
        db = ("db1", "db2", "db3")[i - 1]
        def fn(t):
            v = profile_at(p, t)
            return getattr(v, da) + getattr(v, b) + t * getattr(v, db)
        return fn

    def d_alpha(t):
        v = profile_at(p, t)
        return v.da1 * v.aa + v.a1 * v.daa - 2.0 * v.a2 * v.da2

    def d_phi_det(t):
        v = profile_at(p, t)
        dp1 = v.da1 + v.b1 + t * v.db1
        dp2 = v.da2 + v.b2 + t * v.db2
        dp3 = v.da3 + v.b3 + t * v.db3
        return dp1 * v.phi13 + v.phi1 * (dp1 + dp3) - 2.0 * v.phi2 * dp2

    return DerivedProfile(
        phi1=lambda t: profile_at(p, t).phi1,
        phi2=lambda t: profile_at(p, t).phi2,
        phi3=lambda t: profile_at(p, t).phi3,
        alpha_det=lambda t: profile_at(p, t).alpha,
        phi_det=lambda t: profile_at(p, t).phi,
        d_phi1=d_phi(1), d_phi2=d_phi(2), d_phi3=d_phi(3),
        d_alpha_det=d_alpha, d_phi_det=d_phi_det,
    )


def default_grid(t_max: float = 10.0, n: int = 64) -> np.ndarray:
    """The sample grid used when classifying/checking over "all t >= 0"."""
    return np.linspace(0.0, float(t_max), int(n))


def classify(p: MetricProfile, t_samples=None) -> Classification:
    """Classify a profile on a finite sample grid.

    Degeneracy (|alpha*phi| < 1e-12 at some sample) is decided first, then
    Riemannian (alpha1, phi1, alpha, phi all strictly positive at every
    sample); everything else is nondegenerate of mixed signature.
    """
    if t_samples is None:
        t_samples = default_grid()
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    if t_samples.size == 0:
        raise ValueError("t_samples must be nonempty")
    if (t_samples < 0).any():
        raise ValueError("t_samples must all be >= 0")
    vals = [profile_at(p, t) for t in t_samples]
    if any(abs(v.alpha * v.phi) < DEGENERACY_TOL for v in vals):
        return Classification.DEGENERATE
    if all(v.a1 > 0 and v.phi1 > 0 and v.alpha > 0 and v.phi > 0 for v in vals):
        return Classification.RIEMANNIAN
    return Classification.NONDEGENERATE_PSEUDO


def psi_from_values(v: ProfileAt) -> InverseCoefficients:
    den = v.alpha * v.phi
    if abs(den) < DEGENERACY_TOL:
        raise DegenerateAt(v.t)
    horiz = v.bb * v.phi1 - v.b2 * v.phi2        # (beta1+beta3)*phi1 - beta2*phi2
    cross = v.a1 * v.b2 - v.a2 * v.b1            # alpha1*beta2 - alpha2*beta1
    psi_l = (v.a1 * horiz - v.a2 * cross) / den
    psi_t = (-v.a2 * horiz + v.aa * cross) / den
    psi_w = (v.aa * (v.b1 * v.phi13 - v.b2 * v.phi2)
             + v.a2 * (v.a2 * v.bb - v.b2 * v.aa)) / den
    return InverseCoefficients(psi_l, psi_t, psi_w)


def psi_coeffs(p: MetricProfile, t: float) -> InverseCoefficients:
    """The three inverse-metric coefficients at t.  Raises DegenerateAt when
    alpha*phi vanishes (within 1e-12)."""
    return psi_from_values(profile_at(p, t))


def psi_identity_residuals(p: MetricProfile, t: float) -> np.ndarray:
    """Residuals of the four linear identities tying the psi coefficients to
    the profile; all four vanish identically for any nondegenerate profile,
    so nonzero values expose an implementation (or transcription) error."""
    v = profile_at(p, t)
    psi_l, psi_t, psi_w = psi_from_values(v)
    return np.array([
        v.phi2 * psi_l + v.phi1 * psi_t - (v.a1 * v.b2 - v.a2 * v.b1) / v.alpha,
        v.phi13 * psi_l + v.phi2 * psi_t - (v.a1 * v.bb - v.a2 * v.b2) / v.alpha,
        v.phi2 * psi_t + v.phi1 * psi_w - (v.aa * v.b1 - v.a2 * v.b2) / v.alpha,
        v.phi13 * psi_t + v.phi2 * psi_w - (v.aa * v.b2 - v.a2 * v.bb) / v.alpha,
    ])


# -- presets and serialization ------------------------------------------------

def preset(name: str) -> MetricProfile:
    """Built-in profiles.

    sasaki         alpha1 = 1, everything else 0.
    flat-family    alpha1 = 1+t^2, alpha2 = t, alpha3 = -t^2,
                   beta1 = 8t, beta2 = 2, beta3 = -8t; a non-trivial profile
                   whose bundle metric over a flat base is itself flat.
    scaled-sasaki  alpha1 = 2, alpha3 = 1, everything else 0.
    """
    if name == "sasaki":
        coeffs = {"alpha1": [1.0]}
    elif name == "flat-family":
        coeffs = {
            "alpha1": [1.0, 0.0, 1.0],
            "alpha2": [0.0, 1.0],
            "alpha3": [0.0, 0.0, -1.0],
            "beta1": [0.0, 8.0],
            "beta2": [2.0],
            "beta3": [0.0, -8.0],
        }
    elif name == "scaled-sasaki":
        coeffs = {"alpha1": [2.0], "alpha3": [1.0]}
    else:
        raise UnknownPreset(f"unknown preset {name!r}; choose one of {PRESET_NAMES}")
    return MetricProfile.from_polynomials(coeffs, name=name)


def profile_to_dict(p: MetricProfile) -> dict:
    if p.polynomials is None:
        raise ProfileFormatError(
            "only polynomial-backed profiles can be serialized; build the "
            "profile with MetricProfile.from_polynomials or a preset"
        )
    return {"schema": 1, "name": p.name, "polynomials": dict(p.polynomials)}


def load_profile(source) -> MetricProfile:
    """Load a profile from a dict, a JSON string, or a path to a JSON file.

    The document carries either ``{"preset": <name>}`` or ``{"polynomials":
    {<function>: [c0, c1, ...], ...}}`` (ascending coefficients in t).
    """
    if isinstance(source, MetricProfile):
        return source
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        try:
            path = Path(source)
            if path.exists():
                text = path.read_text()
        except OSError:
            pass
        if text is None:
            text = str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProfileFormatError(f"profile document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProfileFormatError("profile document must be a JSON object")
    if ("preset" in doc) == ("polynomials" in doc):
        raise ProfileFormatError("profile document needs exactly one of 'preset'/'polynomials'")
    if "preset" in doc:
        return preset(doc["preset"])
    polys = doc["polynomials"]
    if not isinstance(polys, dict):
        raise ProfileFormatError("'polynomials' must map function names to coefficient lists")
    return MetricProfile.from_polynomials(polys, name=str(doc.get("name", "custom")))


def validate_derivatives(p: MetricProfile, t_samples=None, step=1e-5) -> float:
    """Largest relative mismatch between the supplied derivatives and a
    central-difference estimate over the sample grid."""
    if t_samples is None:
        t_samples = default_grid()
    worst = 0.0
    for n in FUNCTION_NAMES:
        fn, dfn = getattr(p, n), getattr(p, "d_" + n)
        for t in np.atleast_1d(t_samples):
            fd = numdiff.deriv(fn, float(t), h=step, order=4, lower=0.0)
            err = abs(float(dfn(float(t))) - fd) / max(1.0, abs(fd))
            worst = max(worst, err)
    return worst


def random_riemannian_profile(rng, t_max: float = 10.0, max_tries: int = 200) -> MetricProfile:
    """Draw a random polynomial profile that classifies as Riemannian and is
    well conditioned (alpha1, phi1, alpha, phi all >= 0.05) on [0, 1.2*t_max]."""
    grid = np.linspace(0.0, 1.2 * t_max, 97)
    for _ in range(max_tries):
        coeffs = {
            "alpha1": [rng.uniform(0.6, 1.8), rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.04)],
            "alpha2": [rng.uniform(-0.3, 0.3), rng.uniform(-0.04, 0.04)],
            "alpha3": [rng.uniform(-0.2, 0.8), rng.uniform(-0.05, 0.05)],
            "beta1": [rng.uniform(-0.08, 0.08), rng.uniform(-0.02, 0.02)],
            "beta2": [rng.uniform(-0.08, 0.08), rng.uniform(-0.02, 0.02)],
            "beta3": [rng.uniform(-0.08, 0.08), rng.uniform(-0.02, 0.02)],
        }
        p = MetricProfile.from_polynomials(coeffs, name="random")
        vals = [profile_at(p, t) for t in grid]
        if all(min(v.a1, v.phi1, v.alpha, v.phi) >= 0.05 for v in vals):
            return p
    raise RuntimeError("failed to draw a Riemannian profile")
