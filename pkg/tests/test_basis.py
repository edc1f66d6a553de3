import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marangoni.basis import derivative_form, divided_difference, gauss_legendre_01, hyperbolic, shc


def _mp_dd(kind, power, nodes, z):
    """Divided difference by the recursive definition in 40-digit arithmetic."""
    mpmath.mp.dps = 40

    def f(q):
        s = mpmath.sqrt(q)
        base = mpmath.cosh(s * z) if kind == "C" else (mpmath.sinh(s * z) / s if q != 0 else mpmath.mpf(z))
        return q**power * base

    def dd(ns):
        if len(ns) == 1:
            return f(ns[0])
        return (dd(ns[1:]) - dd(ns[:-1])) / (ns[-1] - ns[0])

    return complex(dd([mpmath.mpc(n) for n in nodes]))


def test_shc_small_and_large():
    x = np.array([0.0, 1e-6, 1e-3, 0.5, 3.0])
    expected = [1.0] + [float(np.sinh(v) / v) for v in x[1:]]
    assert np.allclose(shc(x).real, expected, rtol=1e-14, atol=0)


def test_hyperbolic_second_derivative_is_multiplication_by_q():
    q, z, h = 2.3, np.array([0.3, 0.7]), 1e-4
    for kind in ("C", "S"):
        f = lambda zz: hyperbolic(kind, 0, q, zz)
        d2 = (f(z + h) - 2 * f(z) + f(z - h)) / h**2
        assert np.allclose(d2, q * f(z), rtol=1e-6)


def test_derivative_form_cycles():
    assert derivative_form("C", 0, 1) == ("S", 1)
    assert derivative_form("S", 0, 1) == ("C", 0)
    assert derivative_form("C", 0, 2) == ("C", 1)


@settings(max_examples=30, deadline=None)
@given(
    a=st.floats(0.5, 20.0),
    gaps=st.tuples(st.floats(1e-3, 10.0), st.floats(1e-3, 10.0)),
    z=st.floats(0.0, 1.0),
    kind=st.sampled_from(["C", "S"]),
)
def test_divided_difference_matches_high_precision(a, gaps, z, kind):
    nodes = [a, a + gaps[0], a + gaps[0] + gaps[1]]
    got = complex(np.asarray(divided_difference(kind, 0, nodes, np.array([z])))[0])
    ref = _mp_dd(kind, 0, nodes, z)
    assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("eps", [1e-12, 1e-8, 1e-5])
def test_clustered_nodes_keep_full_accuracy(eps):
    a, z = 4.0, 0.8
    got = complex(np.asarray(divided_difference("S", 0, [a, a + eps], np.array([z])))[0])
    ref = _mp_dd("S", 0, [a, a + eps], z)
    assert abs(got - ref) <= 1e-10 * abs(ref)


def test_coincident_nodes_give_derivative():
    a, z = 4.0, 0.8
    got = complex(np.asarray(divided_difference("S", 0, [a, a], np.array([z])))[0])
    mpmath.mp.dps = 40
    ref = complex(mpmath.diff(lambda q: mpmath.sinh(mpmath.sqrt(q) * z) / mpmath.sqrt(q), a))
    assert abs(got - ref) <= 1e-10 * abs(ref)


def test_gauss_legendre_on_unit_interval_integrates_polynomials():
    x, w = gauss_legendre_01(16)
    for k in range(32):
        assert abs(np.sum(w * x**k) - 1.0 / (k + 1)) < 1e-14
