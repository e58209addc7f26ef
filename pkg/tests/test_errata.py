import pytest

from vessel_lab import errata


def test_classify():
    assert errata.classify(1e-9) == "holds"
    assert errata.classify(1e-3) == "fails as printed"


def test_relation_status_matches_frozen():
    measured = errata.relation_status()
    for name, frozen in errata.FROZEN_RELATION_STATUS.items():
        assert measured[name]["status"] == frozen, (name, measured[name])


def test_symmetric_status_matches_frozen():
    measured = errata.symmetric_status()
    for name, frozen in errata.FROZEN_SYMMETRIC_STATUS.items():
        assert measured[name]["status"] == frozen, (name, measured[name])


def test_sign_convention_entry():
    entry = errata.sign_convention_entry()
    assert max(entry["compatible"]["commutator_B"], entry["compatible"]["commutator_C"]) <= 1e-12
    assert entry["paper"]["commutator_B"] > 1
    assert entry["compatible"]["compatibility_residual"] <= 1e-6
    assert entry["paper"]["compatibility_residual"] > 1e-3


def test_generator_cube_entry():
    e = errata.generator_cube_entry()
    assert e["Mx_B_cube_vs_blockdiag_A"] <= 1e-12
    assert e["Mx_C_cube_vs_plus_A_zeta"] <= 1e-12
    assert e["Mx_C_cube_vs_minus_A_zeta"] > 1e-3


def test_soliton_entries():
    e = errata.soliton_entries()
    assert e["classic"]["printed_over_X_derived_at_crest"][0] == pytest.approx(4.0, abs=1e-6)
    assert e["exp"]["printed_X0_lyapunov_residual"] > 1e-3


def test_beta_readings():
    e = errata.beta_entry()
    assert e["soliton data"]["ladder_max_residual"] <= 1e-8
    assert e["headline equation"]["ladder_max_residual"] > 1e-3
    assert e["proof display"]["ladder_max_residual"] > 1e-3
