"""Geometry of g-natural metrics on tangent bundles.

The package assembles the bundle metric defined by a six-function profile over
a single-chart base manifold, evaluates its closed-form inverse, Levi-Civita
connection and curvature tensor, and ships the finite-difference oracles
(Koszul formula, coordinate-chart curvature) that every closed form is tested
against.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateAt, DegeneratePlane, GnaturalError,
                     NotPositiveDefinite, OutOfChart, ProfileFormatError,
                     SideConditionFailed, SingularMetric, SingularMu,
                     UnknownManifold, UnknownPreset)
from .manifold import MANIFOLD_NAMES, ChartedManifold, make_manifold
from .profile import (Classification, DerivedProfile, InverseCoefficients,
                      MetricProfile, PRESET_NAMES, classify, default_grid,
                      derive, load_profile, preset, profile_at, profile_to_dict,
                      psi_coeffs, psi_identity_residuals,
                      random_riemannian_profile, validate_derivatives)
from .bundle import (BlockMetric, LiftVector, TangentPoint, assemble_block,
                     canonical_vertical_lift, check_side_conditions,
                     g_natural_on_lifts, geodesic_flow_lift, inverse_block,
                     rank_one_inverse, schur_coefficients)
from .connection import (CONNECTION_KINDS, FTensorTable, TABLE_LABELS,
                         basis_tensor, bundle_connection, coeff_table,
                         coeff_table_derivative, koszul_connection)
from .curvature import (CURVATURE_CASES, Combinators, CurvatureRequest,
                        FlatnessReport, ScanReport, bundle_curvature,
                        bundle_curvature_lifts, combinators,
                        constant_curvature_scan, coordinate_curvature_operator,
                        coordinate_curvature_oracle, d_f_tensor_u,
                        flatness_check, flatness_necessary_residuals,
                        nabla_f_tensor, sectional_curvature)
