import json

import numpy as np
import pytest

from gnatural import (Classification, MetricProfile, classify, derive,
                      load_profile, preset, profile_at, profile_to_dict,
                      psi_coeffs, psi_identity_residuals,
                      random_riemannian_profile, validate_derivatives)
from gnatural.errors import DegenerateAt, ProfileFormatError, UnknownPreset


def test_derive_sasaki_values():
    d = derive(preset("sasaki"))
    t = 5.0
    assert d.phi1(t) == 1.0
    assert d.phi2(t) == 0.0
    assert d.phi3(t) == 0.0
    assert d.alpha_det(t) == 1.0
    assert d.phi_det(t) == 1.0


def test_derive_substitution():
    # alpha2(t) = t, beta2 = 2  ->  phi2(1) = 1 + 1*2 = 3
    p = MetricProfile.from_polynomials({"alpha1": [1.0], "alpha2": [0.0, 1.0],
                                        "beta2": [2.0]})
    assert derive(p).phi2(1.0) == 3.0


def test_flat_family_determinants_are_one():
    d = derive(preset("flat-family"))
    for t in np.linspace(0.0, 10.0, 33):
        assert abs(d.alpha_det(t) - 1.0) <= 1e-12
        assert abs(d.phi_det(t) - 1.0) <= 1e-12


def test_phi_two_evaluation_paths():
    # phi assembled from phi_i must match the expansion in the raw functions
    rng = np.random.default_rng(0)
    p = random_riemannian_profile(rng)
    for t in np.linspace(0.0, 10.0, 21):
        v = profile_at(p, t)
        expanded = (v.alpha
                    + t * (v.a1 * v.bb + v.b1 * v.aa - 2.0 * v.a2 * v.b2)
                    + t * t * (v.b1 * v.bb - v.b2 * v.b2))
        assert abs(v.phi - expanded) <= 1e-12


def test_derived_profile_derivatives():
    p = preset("flat-family")
    d = derive(p)
    # flat-family: phi1 = 1 + 9 t^2, alpha = phi = 1
    for t in (0.0, 0.7, 3.1):
        assert abs(d.d_phi1(t) - 18.0 * t) <= 1e-12
        assert abs(d.d_alpha_det(t)) <= 1e-12
        assert abs(d.d_phi_det(t)) <= 1e-12


def test_classify_presets_riemannian(presets):
    for p in presets.values():
        assert classify(p) is Classification.RIEMANNIAN


def test_classify_degenerate():
    p = MetricProfile.from_polynomials({"alpha1": [1.0], "alpha2": [1.0]})
    assert classify(p) is Classification.DEGENERATE


def test_classify_pseudo():
    p = MetricProfile.from_polynomials({"alpha1": [-1.0], "alpha3": [-1.0]})
    assert classify(p) is Classification.NONDEGENERATE_PSEUDO


def test_classify_input_validation():
    p = preset("sasaki")
    with pytest.raises(ValueError):
        classify(p, [])
    with pytest.raises(ValueError):
        classify(p, [-1.0])


def test_psi_sasaki_zero():
    psis = psi_coeffs(preset("sasaki"), 4.2)
    assert psis == (0.0, 0.0, 0.0)


def test_psi_flat_family_at_zero():
    # all beta terms with alpha2(0) = 0 leave psi_theta = alpha1*beta2/(alpha*phi) = 2
    psis = psi_coeffs(preset("flat-family"), 0.0)
    assert abs(psis.psi_theta - 2.0) <= 1e-14
    assert abs(psis.psi_lambda) <= 1e-14
    assert abs(psis.psi_omega) <= 1e-14


def test_psi_vanishes_without_betas():
    p = MetricProfile.from_polynomials({"alpha1": [1.5], "alpha3": [0.5]})
    assert psi_coeffs(p, 2.0) == (0.0, 0.0, 0.0)


def test_psi_degenerate_raises():
    p = MetricProfile.from_polynomials({"alpha1": [1.0], "alpha2": [1.0]})
    with pytest.raises(DegenerateAt):
        psi_coeffs(p, 1.0)


def test_psi_identities_sasaki():
    assert np.abs(psi_identity_residuals(preset("sasaki"), 3.0)).max() == 0.0


def test_psi_identities_flat_family():
    p = preset("flat-family")
    for t in (0.0, 0.5, 1.0, 2.0):
        assert np.abs(psi_identity_residuals(p, t)).max() <= 1e-12


def test_psi_identities_random_profiles():
    rng = np.random.default_rng(123)
    for _ in range(5):
        p = random_riemannian_profile(rng)
        for t in rng.uniform(0.0, 10.0, size=100):
            assert np.abs(psi_identity_residuals(p, t)).max() <= 1e-10


def test_preset_sasaki_values():
    p = preset("sasaki")
    assert p.alpha1(7.0) == 1.0
    assert p.beta2(7.0) == 0.0


def test_preset_flat_family_relations():
    # the relations that make the preset produce a flat bundle metric
    p = preset("flat-family")
    for t in np.linspace(0.0, 5.0, 11):
        v = profile_at(p, t)
        assert v.bb == 0.0
        assert v.daa == 0.0
        assert abs(2.0 * v.da2 - v.b2) == 0.0
        assert abs(v.da1 * v.aa - v.a2 * v.b2) <= 1e-14
        assert abs(v.b1 * v.aa - v.b2 * (2.0 * v.a2 + t * v.b2)) <= 1e-14


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset("cheeger-gromoll")


def test_serialization_roundtrip(tmp_path):
    p = preset("flat-family")
    doc = profile_to_dict(p)
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(doc))
    q = load_profile(path)
    for t in (0.0, 1.3, 6.0):
        assert q.alpha1(t) == p.alpha1(t)
        assert q.d_beta1(t) == p.d_beta1(t)


def test_load_profile_preset_document():
    q = load_profile({"schema": 1, "preset": "sasaki"})
    assert q.name == "sasaki"


@pytest.mark.parametrize("doc", [
    {"schema": 1},
    {"preset": "sasaki", "polynomials": {}},
    {"polynomials": {"alpha9": [1.0]}},
    {"polynomials": {"alpha1": []}},
    "not json at all {",
])
def test_load_profile_rejects_bad_documents(doc):
    with pytest.raises(ProfileFormatError):
        load_profile(doc)


def test_supplied_derivatives_consistent(presets):
    for p in presets.values():
        assert validate_derivatives(p, np.linspace(0.0, 10.0, 9)) <= 1e-6


def test_derivative_fallback_warns():
    with pytest.warns(UserWarning, match="falling back"):
        p = MetricProfile(
            alpha1=lambda t: 1.0 + t * t, alpha2=lambda t: 0.0, alpha3=lambda t: 0.0,
            beta1=lambda t: 0.0, beta2=lambda t: 0.0, beta3=lambda t: 0.0,
        )
    assert abs(p.d_alpha1(2.0) - 4.0) <= 1e-6


def test_random_riemannian_profiles_classify():
    rng = np.random.default_rng(9)
    for _ in range(10):
        assert classify(random_riemannian_profile(rng)) is Classification.RIEMANNIAN
