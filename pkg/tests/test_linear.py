import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marangoni.collocation import collocation_spectrum
from marangoni.geometry import BoxGeometry, ModeIndex, wavenumber
from marangoni.linear import (
    continuous_minimum,
    critical_marangoni,
    growth_derivative_at_critical,
    growth_rate,
    marginal_curve,
    marginal_marangoni,
    real_growth_rates,
    spectrum,
    write_curve_csv,
)
from marangoni.params import StabilityParams
from marangoni.secular import marangoni_from_growth, secular_determinant

# frozen oracle values (lattice minimum of the marginal curve, computed with
# an independent 40-digit evaluation of the closed form)
ROLL_LAMBDA_C = 79.82679516404
HEX_LAMBDA_C = 79.77162070881
CONTINUOUS_MIN = (1.992904912, 79.606694803)


def test_marginal_curve_continuous_minimum():
    a, lam = continuous_minimum(0.0)
    assert a == pytest.approx(CONTINUOUS_MIN[0], rel=1e-7)
    assert lam == pytest.approx(CONTINUOUS_MIN[1], rel=1e-10)


def test_minimum_moves_with_biot_number():
    a, lam = continuous_minimum(100.0)
    assert a == pytest.approx(2.9755, abs=1e-3)
    assert lam > continuous_minimum(10.0)[1] > continuous_minimum(0.0)[1]


def test_series_and_closed_form_agree_at_switch():
    lo, hi = marginal_marangoni(0.1 - 1e-9), marginal_marangoni(0.1 + 1e-9)
    assert lo == pytest.approx(hi, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.0, -1.0, math.nan])
def test_marginal_rejects_bad_alpha(alpha):
    with pytest.raises(ValueError):
        marginal_marangoni(alpha)


def test_marginal_reports_overflow():
    with pytest.raises(OverflowError):
        marginal_marangoni(1e200)


def test_large_alpha_does_not_overflow():
    assert math.isfinite(marginal_marangoni(700.0)) and marginal_marangoni(700.0) > 0


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.3, 12.0), Bi=st.floats(0.0, 20.0))
def test_marginal_value_is_a_root_of_the_secular_relation(alpha, Bi):
    lam = marginal_marangoni(alpha, Bi)
    # beta = 0 must be a root at the marginal Marangoni number
    assert marangoni_from_growth(0.0, alpha, 1.0, Bi).real == pytest.approx(lam, rel=1e-9)
    near = abs(secular_determinant(0.0, alpha, lam, 1.0, Bi))
    far = abs(secular_determinant(0.0, alpha, 1.2 * lam, 1.0, Bi))
    assert near < 1e-8 * far


@pytest.mark.parametrize("alpha,Bi,Pr", [(2.0, 0.0, 1.0), (1.0, 3.0, 0.1), (4.0, 0.0, 10.0)])
def test_collocation_confirms_marginal_curve(alpha, Bi, Pr):
    lam = marginal_marangoni(alpha, Bi)
    lead = collocation_spectrum(alpha, lam, Pr, Bi, 64)[0]
    assert abs(lead) < 1e-7


def test_curve_unimodal_and_csv(tmp_path):
    samples = marginal_curve(0.5, 6.0, 200, 0.0)
    lams = np.array([l for _, l in samples])
    k = int(np.argmin(lams))
    assert np.all(np.diff(lams[: k + 1]) < 0) and np.all(np.diff(lams[k:]) > 0)
    text = write_curve_csv(samples, tmp_path / "c.csv").read_text().splitlines()
    assert text[0] == "alpha,lambda" and len(text) == 201


def test_roll_box_critical(roll_critical):
    assert roll_critical.lambda_c == pytest.approx(ROLL_LAMBDA_C, rel=1e-11)
    assert [m.horizontal for m in roll_critical.critical_set] == [(1, 0)]
    assert roll_critical.alpha_c == 2 * math.pi / 3


def test_hex_box_critical(hex_critical, hex_box):
    assert hex_critical.lambda_c == pytest.approx(HEX_LAMBDA_C, rel=1e-11)
    assert {m.horizontal for m in hex_critical.critical_set} == {(2, 1), (0, 2)}


@settings(max_examples=20, deadline=None)
@given(L1=st.floats(0.3, 8.0), L2=st.floats(0.3, 8.0), Bi=st.sampled_from([0.0, 1.0, 10.0]))
def test_lattice_minimum_bounds(L1, L2, Bi):
    box = BoxGeometry(L1, L2)
    crit = critical_marangoni(box, Bi)
    _, lam_inf = continuous_minimum(Bi)
    assert crit.lambda_c >= lam_inf * (1 - 1e-12)
    # brute force over a generous index range
    brute = min(
        marginal_marangoni(wavenumber((j, k), box), Bi)
        for j in range(0, 40) for k in range(0, 40) if (j, k) != (0, 0)
    )
    assert crit.lambda_c == pytest.approx(brute, rel=1e-12)


def test_degenerate_square_box_has_two_critical_modes():
    crit = critical_marangoni(BoxGeometry(2.0, 2.0), 0.0)
    assert {m.horizontal for m in crit.critical_set} in ({(1, 1)}, {(2, 0), (0, 2)})
    assert len({wavenumber(m, BoxGeometry(2.0, 2.0)) for m in crit.critical_set}) == 1


@pytest.mark.parametrize("Pr", [0.1, 1.0, 10.0])
def test_spectrum_matches_collocation(Pr):
    alpha = 2.0
    lam = 79.0
    sp = spectrum(StabilityParams(Pr, 0.0, lam), alpha, 8)
    coll = collocation_spectrum(alpha, lam, Pr, 0.0, 96)
    for b in sp.betas:
        assert np.min(np.abs(coll - b)) < 1e-6 * max(1.0, abs(b))
    reals = [b.real for b in sp.betas]
    assert reals == sorted(reals, reverse=True)


@pytest.mark.parametrize("Pr", [0.1, 1.0, 10.0])
def test_sign_scan_agrees_with_spectrum(Pr):
    params = StabilityParams(Pr, 0.0, 60.0)
    sp = spectrum(params, 2.5, 12)
    lo = min(b.real for b in sp.betas) * 1.001
    scan = real_growth_rates(params, 2.5, lo, 5.0)
    seeded = sorted((b.real for b in sp.betas if b.imag == 0), reverse=True)
    assert len(scan) == len(seeded)
    assert np.allclose(scan, seeded, rtol=1e-10, atol=1e-12)


def test_growth_rate_sign_changes_through_marginal_value():
    alpha = 2.0
    lam = marginal_marangoni(alpha)
    assert growth_rate(StabilityParams(1.0, 0.0, lam), alpha) == pytest.approx(0.0, abs=1e-9)
    assert growth_rate(StabilityParams(1.0, 0.0, lam + 1), alpha) > 0
    assert growth_rate(StabilityParams(1.0, 0.0, lam - 1), alpha) < 0


@pytest.mark.parametrize("Pr", [0.1, 1.0, 10.0])
def test_growth_derivative_matches_finite_difference(Pr, hex_box, hex_critical):
    idx = hex_critical.critical_set[0]
    a = wavenumber(idx, hex_box)
    h = 1e-4 * hex_critical.lambda_c
    bp = growth_rate(StabilityParams(Pr, 0.0, hex_critical.lambda_c + h), a)
    bm = growth_rate(StabilityParams(Pr, 0.0, hex_critical.lambda_c - h), a)
    fd = (bp - bm) / (2 * h)
    closed = growth_derivative_at_critical(hex_box, 0.0, idx, Pr)
    assert closed > 0
    assert closed == pytest.approx(fd, rel=1e-6)


def test_growth_derivative_rejects_noncritical(roll_box):
    with pytest.raises(ValueError):
        growth_derivative_at_critical(roll_box, 0.0, ModeIndex(0, 1))


def test_params_validation():
    with pytest.raises(ValueError):
        StabilityParams(0.0, 0.0, 80.0)
    with pytest.raises(ValueError):
        StabilityParams(1.0, -1.0, 80.0)
