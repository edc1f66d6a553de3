import math

import numpy as np
import pytest

from marangoni.geometry import BoxGeometry, ModeIndex
from marangoni.params import StabilityParams
from marangoni.reduced import ReducedSystem, find_steady_states
from marangoni.transitions import (
    ConfigurationError,
    classify_hex,
    classify_single,
    hex_classifier,
    single_mode_classifier,
    sweep,
    write_report_json,
    write_sweep_csv,
)

# regression anchors (escalated 20-branch sums, quadrature order 64)
ROLL_C = {0.1: -67.65, 1.0: -30.7031, 10.0: -29.21}


@pytest.mark.parametrize("Pr", sorted(ROLL_C))
def test_roll_cubic_coefficient(Pr, roll_box, roll_critical):
    rep = single_mode_classifier(roll_box, StabilityParams(Pr, 0.0, roll_critical.lambda_c))
    assert rep.transition_type == "TypeI"
    assert rep.c_I == pytest.approx(ROLL_C[Pr], rel=1e-3)
    assert rep.imag_residue < 1e-12


def test_roll_bifurcated_amplitude(roll_report):
    lam = roll_report.lambda_c + 0.5
    y = roll_report.bifurcated_amplitude(lam)
    assert y > 0
    assert roll_report.bifurcated_amplitude(roll_report.lambda_c - 0.5) == 0.0


def test_hex_identities_and_structure(hex_report):
    res = hex_report.identity_residuals()
    assert max(res.values()) < 1e-12
    assert hex_report.spurious < 1e-12
    assert hex_report.imag_residue < 1e-12
    assert hex_report.a1 > 0 and hex_report.b2 < 0
    assert hex_report.transition_type == "TypeIII"
    assert (hex_report.I.horizontal, hex_report.J.horizontal) == ((2, 1), (0, 2))


def test_b2_equals_single_mode_coefficient_of_J(hex_box, hex_critical, hex_report):
    rep = single_mode_classifier(
        hex_box, StabilityParams(1.0, 0.0, hex_critical.lambda_c), index=ModeIndex(0, 2)
    )
    assert abs(rep.c_I - hex_report.b2) <= 1e-10 * abs(hex_report.b2)


def test_wrong_classifier_rejected(roll_box, hex_box, roll_critical, hex_critical):
    with pytest.raises(ConfigurationError):
        hex_classifier(roll_box, StabilityParams(1.0, 0.0, roll_critical.lambda_c))
    with pytest.raises(ConfigurationError):
        single_mode_classifier(hex_box, StabilityParams(1.0, 0.0, hex_critical.lambda_c))


def test_classification_rules():
    assert classify_single(-1.0) == "TypeI"
    assert classify_single(2.0) == "TypeII"
    assert classify_single(1e-13) == "inconclusive"
    assert classify_hex(1.0, -1.0) == "TypeIII"
    assert classify_hex(1.0, 1.0) == "TypeII"
    assert classify_hex(1.0, 0.0) == "inconclusive"


@pytest.mark.parametrize("beta", [1e-4, 1e-3])
def test_leading_order_states_match_truncated_system(beta, hex_report):
    system = ReducedSystem.from_report(hex_report, beta)
    found = find_steady_states(system, 2 * system.amplitude_scale())
    approx = hex_report.steady_states(beta)
    for name, loc in approx.items():
        loc = np.array(loc)
        d = min(np.linalg.norm(p - loc) for p in found)
        # first correction is one order higher in the state size
        assert d < 20 * math.sqrt(beta) * np.linalg.norm(loc), name


def test_quadrature_doubling_leaves_coefficients(roll_box, roll_critical, roll_report):
    rep = single_mode_classifier(
        roll_box, StabilityParams(1.0, 0.0, roll_critical.lambda_c), quad_order=128
    )
    assert abs(rep.c_I - roll_report.c_I) < 1e-10 * abs(roll_report.c_I)


def test_sweep_signs_and_export(tmp_path, roll_box):
    reports = sweep(roll_box, (0.1, 3.0, 100.0), (0.0, 5.0))
    assert all(r.c_I < 0 for r in reports)
    lines = write_sweep_csv(reports, tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "Pr,Bi,c_I" and len(lines) == 7


def test_report_json(tmp_path, hex_report):
    import json

    d = json.loads(write_report_json(hex_report, tmp_path / "r.json", beta=0.01).read_text())
    assert {"a1", "a2", "a3", "b1", "b2", "b3", "identity_residuals", "steady_states", "jacobian_spectra"} <= set(d)
    assert d["transition_type"] == "TypeIII"


def test_quadrature_too_low_for_branch_count_rejected(roll_box, roll_critical):
    with pytest.raises(ValueError):
        single_mode_classifier(roll_box, StabilityParams(1.0, 0.0, roll_critical.lambda_c), quad_order=16)
