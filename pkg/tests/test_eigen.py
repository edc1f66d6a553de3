import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marangoni.eigen import (
    ResidualError,
    branch_modes,
    conduction_root,
    critical_mode,
    general_mode,
    mode_pair,
    residuals,
    vertical_pairing,
    zero_mode,
)
from marangoni.geometry import BoxGeometry, ModeIndex
from marangoni.linear import growth_rate, marginal_marangoni, spectrum
from marangoni.params import StabilityParams

# printed-form neutral pairing at alpha = 2 pi / 3, Bi = 0, Pr = 1 (oracle
# from 40-digit quadrature of the closed forms)
NEUTRAL_PAIRING_ROLL = -312.5195


def _max_res(pair):
    return max(residuals(pair).values())


@pytest.mark.parametrize("alpha,Bi,Pr", [(2 * math.pi / 3, 0.0, 1.0), (1.0, 2.0, 0.1), (5.0, 0.0, 10.0)])
def test_neutral_mode_solves_equations(alpha, Bi, Pr):
    pair = critical_mode(alpha, Bi, Pr)
    assert pair.params.lam == pytest.approx(marginal_marangoni(alpha, Bi))
    assert _max_res(pair) < 1e-10


def test_neutral_pairing_value():
    pair = critical_mode(2 * math.pi / 3, 0.0, 1.0)
    assert pair.vertical_pairing.real == pytest.approx(NEUTRAL_PAIRING_ROLL, rel=1e-6)


@pytest.mark.parametrize("Pr", [0.1, 1.0, 10.0])
def test_general_modes_solve_equations(Pr):
    params = StabilityParams(Pr, 0.0, 79.8)
    for k, b in enumerate(spectrum(params, 2.1, 8).betas):
        pair = general_mode(2.1, b, params)
        assert _max_res(pair) < 1e-8, (k, b)


@pytest.mark.parametrize("Pr", [0.1, 1.0, 10.0])
def test_biorthogonality(Pr):
    params = StabilityParams(Pr, 0.0, 79.8)
    alpha = 2.1
    modes = [general_mode(alpha, b, params) for b in spectrum(params, alpha, 8).betas]
    for i, m in enumerate(modes):
        for j, n in enumerate(modes):
            if i == j:
                continue
            p = vertical_pairing(alpha, m.profile, n.adjoint_profile, 64)
            scale = math.sqrt(abs(m.vertical_pairing) * abs(n.vertical_pairing))
            assert abs(p) < 1e-9 * scale, (i, j)


def test_general_mode_tends_to_neutral_mode():
    alpha = 2 * math.pi / 3
    neutral = critical_mode(alpha, 0.0, 1.0)
    z = np.linspace(0, 1, 11)
    lam0 = marginal_marangoni(alpha)
    for eps in (1e-3, 1e-5):
        params = StabilityParams(1.0, 0.0, lam0 + eps)
        b = growth_rate(params, alpha)
        pair = general_mode(alpha, b, params)
        for f in ("W", "Theta"):
            got = np.asarray(getattr(pair.profile, f)(z)).real
            ref = np.asarray(getattr(neutral.profile, f)(z)).real
            assert np.max(np.abs(got - ref)) < 100 * eps * np.max(np.abs(ref))
        assert pair.vertical_pairing.real == pytest.approx(neutral.vertical_pairing.real, rel=100 * eps)


def test_prandtl_one_coalescence_is_regular():
    # eta = alpha exactly when beta = 0 and any Pr; at Pr = 1 mu = eta as well
    params = StabilityParams(1.0, 0.0, 60.0)
    b = growth_rate(params, 2.0)
    assert _max_res(general_mode(2.0, b, params)) < 1e-9


def test_non_root_rejected():
    params = StabilityParams(1.0, 0.0, 79.8)
    with pytest.raises(ResidualError):
        general_mode(2.1, -7.0, params)


def test_quadrature_doubling_changes_pairing_negligibly():
    params = StabilityParams(1.0, 0.0, 79.8)
    for b in spectrum(params, 2.1, 6).betas:
        p64 = general_mode(2.1, b, params, 64).vertical_pairing
        p128 = general_mode(2.1, b, params, 128).vertical_pairing
        assert abs(p64 - p128) < 1e-10 * abs(p128)


@pytest.mark.parametrize("Bi", [0.0, 0.7, 20.0])
def test_zero_mode(Bi):
    for l in range(4):
        rho = conduction_root(l, Bi)
        assert rho * math.cos(rho) + Bi * math.sin(rho) == pytest.approx(0.0, abs=1e-11 * rho)
        pair = zero_mode(l, Bi)
        assert pair.beta == pytest.approx(-rho * rho)
        assert not pair.profile.has_velocity
        z, w = np.polynomial.legendre.leggauss(80)
        z = 0.5 * (z + 1)
        direct = 0.5 * np.sum(w * np.sin(rho * z) ** 2)
        assert pair.vertical_pairing == pytest.approx(direct, rel=1e-13)


def test_zero_modes_orthogonal():
    z, w = np.polynomial.legendre.leggauss(80)
    z = 0.5 * (z + 1)
    a = np.asarray(zero_mode(0, 1.0).profile.Theta(z)).real
    b = np.asarray(zero_mode(2, 1.0).profile.Theta(z)).real
    assert abs(0.5 * np.sum(w * a * b)) < 1e-14


def test_branch_modes_complete_conjugate_pairs(hex_box, hex_critical):
    params = StabilityParams(1.0, 0.0, hex_critical.lambda_c)
    modes = branch_modes((2, 1), hex_box, params, 4)
    imag = [complex(m.beta).imag for m in modes]
    assert abs(sum(imag)) < 1e-9 * max(1.0, max(abs(v) for v in imag))
    assert [m.index.branch for m in modes] == list(range(1, len(modes) + 1))


def test_mode_pair_uses_closed_form_at_critical(roll_box, roll_critical):
    params = StabilityParams(1.0, 0.0, roll_critical.lambda_c)
    pair = mode_pair(ModeIndex(1, 0), roll_box, params)
    assert pair.kind == "neutral" and pair.beta == 0.0
    assert pair.pairing.real == pytest.approx(NEUTRAL_PAIRING_ROLL * 1.5 / 2, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.2, 8.0), Bi=st.floats(0.0, 10.0), Pr=st.floats(0.05, 50.0))
def test_neutral_mode_residuals_property(alpha, Bi, Pr):
    assert _max_res(critical_mode(alpha, Bi, Pr)) < 1e-8


def test_mode_dump(tmp_path):
    pair = critical_mode(2.0, 0.0, 1.0)
    d = pair.to_dict()
    assert len(d["z"]) == 101 and set(("W", "DW", "D2W", "Theta", "DTheta")) <= set(d)
    assert d["W"][0] == 0.0
