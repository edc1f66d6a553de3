"""Eigenmodes and adjoint eigenmodes of the linearized problem.

Three constructions are provided:

* horizontally uniform modes (alpha = 0): pure conduction, Theta = sin(rho z);
* neutral modes (beta = 0) in closed polynomial-hyperbolic form;
* general modes (any beta, real or complex) as divided-difference
  combinations, see :mod:`marangoni.basis`.

Pairings use the bilinear form (no complex conjugation), so a complex mode is
paired with the adjoint built at the same beta; for real beta this is the
usual inner product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize

from .basis import DDCombination, DDTerm, PolyHyperbolic, Zero, gauss_legendre_01
from .geometry import BoxGeometry, ModeIndex, VerticalProfile, wavenumber
from .linear import critical_marangoni, growth_rate, marginal_marangoni, spectrum
from .params import StabilityParams
from .secular import adjoint_matrix, forward_matrix, node_values, null_vector, singularity

DEFAULT_QUAD_ORDER = 64
# largest alpha for which the closed-form neutral adjoint stays in range
NEUTRAL_ALPHA_MAX = 200.0
NEUTRAL_ALPHA_MIN = 1e-150


class ResidualError(ArithmeticError):
    """A constructed mode does not satisfy its equations."""


def horizontal_factor(index: ModeIndex | tuple[int, int], box: BoxGeometry) -> float:
    """Integral over the box of cos^2(ax x) cos^2(ay y)."""
    Ix, Iy = index.horizontal if isinstance(index, ModeIndex) else index
    return box.L1 * box.L2 * (0.5 if Ix > 0 else 1.0) * (0.5 if Iy > 0 else 1.0)


def vertical_pairing(alpha: float, prof: VerticalProfile, adj: VerticalProfile, quad_order: int) -> complex:
    """int_0^1 (DW DW*/alpha^2 + W W* + Theta Theta*) dz."""
    z, w = gauss_legendre_01(quad_order)
    integrand = prof.Theta(z) * adj.Theta(z)
    if alpha > 0 and prof.has_velocity and adj.has_velocity:
        integrand = integrand + prof.DW(z) * adj.DW(z) / alpha**2 + prof.W(z) * adj.W(z)
    return complex(np.dot(w, integrand))


@dataclass(frozen=True)
class EigenPair:
    alpha: float
    beta: complex
    params: StabilityParams
    profile: VerticalProfile
    adjoint_profile: VerticalProfile
    vertical_pairing: complex
    index: ModeIndex | None = None
    box: BoxGeometry | None = None
    kind: str = "general"

    @property
    def is_real(self) -> bool:
        return complex(self.beta).imag == 0

    def pairing_value(self, box: BoxGeometry | None = None, index: ModeIndex | None = None) -> complex:
        """<phi, phi*> over the whole box."""
        box = box or self.box
        index = index or self.index
        if box is None or index is None:
            raise ValueError("the pairing over the box needs both the box and the mode index")
        return horizontal_factor(index, box) * self.vertical_pairing

    @property
    def pairing(self) -> complex:
        return self.pairing_value()

    def located(self, index: ModeIndex, box: BoxGeometry) -> "EigenPair":
        return replace(self, index=index, box=box)

    def to_dict(self, n: int = 101) -> dict:
        z = np.linspace(0.0, 1.0, n)
        p = self.profile
        cols = {
            "W": p.W(z), "DW": p.DW(z), "D2W": p.D2W(z), "Theta": p.Theta(z), "DTheta": p.DTheta(z),
        }
        beta = complex(self.beta)
        out = {
            "index": None if self.index is None else [self.index.Ix, self.index.Iy, self.index.branch],
            "alpha": self.alpha,
            "beta": beta.real if beta.imag == 0 else [beta.real, beta.imag],
            "z": z.tolist(),
        }
        for name, v in cols.items():
            v = np.asarray(v, dtype=complex)
            out[name] = v.real.tolist()
            if np.any(v.imag != 0):
                out[name + "_imag"] = v.imag.tolist()
        return out

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict()) + "\n")
        return path


# ---------------------------------------------------------------- alpha = 0

def conduction_root(l: int, Bi: float) -> float:
    """l-th positive root of rho cos(rho) + Bi sin(rho) = 0, in [pi/2 + l pi, pi + l pi)."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    lo = math.pi / 2 + l * math.pi
    if Bi == 0:
        return lo
    f = lambda r: r * math.cos(r) + Bi * math.sin(r)
    return optimize.brentq(f, lo, lo + math.pi / 2, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def zero_mode(l: int, Bi: float, Pr: float = 1.0, lam: float = 1.0) -> EigenPair:
    """Horizontally uniform mode: no flow, Theta = sin(rho_l z), beta = -rho_l^2; self-adjoint."""
    rho = conduction_root(l, Bi)
    theta = DDCombination((DDTerm(rho, "S", (complex(-rho * rho),)),))
    prof = VerticalProfile(Zero(), theta)
    pairing = 0.5 - math.sin(2 * rho) / (4 * rho)
    return EigenPair(0.0, -rho * rho, StabilityParams(Pr, Bi, lam), prof, prof, pairing, kind="uniform")


# ---------------------------------------------------------------- beta = 0

def _coth_minus_one(alpha: float) -> float:
    """alpha coth(alpha) - 1."""
    if alpha < 0.05:
        a2 = alpha * alpha
        return a2 / 3 - a2 * a2 / 45 + 2 * a2**3 / 945 - a2**4 / 4725
    return alpha / math.tanh(alpha) - 1.0


def neutral_constants(alpha: float, Bi: float, Pr: float) -> dict[str, float]:
    """Constants of the closed-form neutral mode and its adjoint."""
    if not NEUTRAL_ALPHA_MIN <= alpha <= NEUTRAL_ALPHA_MAX:
        raise OverflowError(
            f"closed-form neutral mode needs {NEUTRAL_ALPHA_MIN:g} <= alpha <= {NEUTRAL_ALPHA_MAX:g}, got {alpha:g}"
        )
    a = alpha
    ch, sh = math.cosh(a), math.sinh(a)
    coth = 1.0 / math.tanh(a)
    # Theta_1 with numerator and denominator divided by sinh^2
    theta1 = ((1 + Bi) * a * (coth + a / sh**2) + (1 + Bi + a * a)) / (a * coth + Bi)
    w1 = -sh * (a * ch + sh)
    w2 = -(2 * a * a * ch * ch - a * ch * sh - (1 + a * a) * sh * sh)
    w3 = a * (a - ch * sh)
    return {"C": _coth_minus_one(a), "Theta1": theta1, "w1": w1, "w2": w2, "w3": w3, "Theta1_adj": 8 * Pr * w3}


def critical_mode(alpha: float, Bi: float, Pr: float) -> EigenPair:
    """Neutral (beta = 0) mode at the marginal Marangoni number of alpha, in closed form."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    k = neutral_constants(alpha, Bi, Pr)
    a, C, T1 = alpha, k["C"], k["Theta1"]
    W = PolyHyperbolic(a, Polynomial([4 * a * a, 4 * a * a * C]), Polynomial([0.0, -4 * a**3]))
    Theta = PolyHyperbolic(a, Polynomial([T1, C, a * a]), Polynomial([0.0, -3 * a, -a * C]))
    w1, w2, w3 = k["w1"], k["w2"], k["w3"]
    W_adj = PolyHyperbolic(a, Polynomial([w1, w2, w3]), Polynomial([0.0, -a * w1]))
    Theta_adj = PolyHyperbolic(a, Polynomial([k["Theta1_adj"]]))
    prof = VerticalProfile(W, Theta)
    adj = VerticalProfile(W_adj, Theta_adj)
    params = StabilityParams(Pr, Bi, marginal_marangoni(alpha, Bi))
    pairing = vertical_pairing(alpha, prof, adj, DEFAULT_QUAD_ORDER)
    return EigenPair(alpha, 0.0, params, prof, adj, pairing, kind="neutral")


# ---------------------------------------------------------------- general beta

def _forward_scale(alpha: float) -> float:
    # 16 alpha^6 / sinh(alpha), matching the closed-form neutral W at beta = 0
    return 32.0 * alpha**6 * math.exp(-alpha) / (1.0 - math.exp(-2.0 * alpha))


def general_mode(
    alpha: float, beta: complex, params: StabilityParams, quad_order: int = DEFAULT_QUAD_ORDER,
    tol: float = 1e-6,
) -> EigenPair:
    """Mode and adjoint for a growth rate beta of the secular relation.

    The amplitude of W is fixed so that beta -> 0 reproduces the closed-form
    neutral W; the adjoint is scaled to match the neutral adjoint temperature
    in the same limit.  Raises :class:`ResidualError` if beta is not a root
    (relative smallest singular value above ``tol``).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive (use zero_mode for alpha = 0)")
    beta = complex(beta)
    lam, Pr, Bi = params.lam, params.Pr, params.Bi
    M = forward_matrix(beta, alpha, lam, Pr, Bi)
    Ma = adjoint_matrix(beta, alpha, lam, Pr, Bi)
    sing = max(singularity(M), singularity(Ma))
    if sing > tol:
        raise ResidualError(f"beta={beta} is not a growth rate (singular value ratio {sing:.2e})")
    a2, e2, m2 = node_values(alpha, beta, Pr)
    N2, N3f, N3a = (a2, e2), (m2, a2, e2), (a2, e2, m2)

    va, vb, vd = null_vector(M)
    one = np.array([1.0])
    S2 = complex(DDCombination((DDTerm(1.0, "S", N2),))(one)[0])
    C2 = complex(DDCombination((DDTerm(1.0, "C", N2),))(one)[0])
    kappa = _forward_scale(alpha)
    s = kappa * S2 / va if abs(va) >= abs(vb) else -kappa * C2 / vb
    a, b, d = s * va, s * vb, s * vd
    W = DDCombination((DDTerm(a, "C", N2), DDTerm(b, "S", N2)))
    Theta = DDCombination((DDTerm(-a, "C", N3f), DDTerm(-b, "S", N3f), DDTerm(d, "S", (m2,))))

    ua, ub, ue = null_vector(Ma)
    w3 = alpha * (alpha - math.cosh(alpha) * math.sinh(alpha)) if alpha <= NEUTRAL_ALPHA_MAX else -1.0
    target = 8.0 * Pr * alpha * w3
    if abs(ue) > 1e-8 * np.linalg.norm([ua, ub, ue]):
        t = target / ue
    else:
        t = abs(target) / np.linalg.norm([ua, ub, ue])
    ua, ub, ue = t * ua, t * ub, t * ue
    W_adj = DDCombination((DDTerm(ua, "C", N2), DDTerm(ub, "S", N2), DDTerm(a2 * ue / Pr, "S", N3a)))
    Theta_adj = DDCombination((DDTerm(ue, "S", (m2,)),))

    prof = VerticalProfile(W, Theta)
    adj = VerticalProfile(W_adj, Theta_adj)
    if beta.imag == 0:
        prof, adj = _realify(prof), _realify(adj)
        beta_out: complex = beta.real
    else:
        beta_out = beta
    pairing = vertical_pairing(alpha, prof, adj, quad_order)
    return EigenPair(alpha, beta_out, params, prof, adj, pairing)


@dataclass(frozen=True)
class _RealPart:
    f: object

    def __call__(self, z, order: int = 0):
        return np.real(self.f(z, order))


def _realify(p: VerticalProfile) -> VerticalProfile:
    # real growth rates give real profiles up to rounding in the contour sums
    return VerticalProfile(_RealPart(p.W_eval), _RealPart(p.Theta_eval))


# ---------------------------------------------------------------- residuals

def chebyshev_points(n: int = 200) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(n) / (n - 1)))


def _rel(res, *terms) -> float:
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(res))) / scale if scale > 0 else float(np.max(np.abs(res)))


def residuals(pair: EigenPair, n: int = 200) -> dict[str, float]:
    """Sup-norm residuals of the equations and boundary conditions, relative to term sizes."""
    z = chebyshev_points(n)
    alpha, beta, p = pair.alpha, complex(pair.beta), pair.params
    a2 = alpha * alpha
    e2 = a2 + beta / p.Pr
    m2 = a2 + beta
    f, g = pair.profile, pair.adjoint_profile
    out = {}
    W = [f.W_eval(z, k) for k in range(5)]
    T = [f.Theta_eval(z, k) for k in range(3)]
    Ws = [g.W_eval(z, k) for k in range(5)]
    Ts = [g.Theta_eval(z, k) for k in range(3)]
    t1, t2, t3 = W[4], (a2 + e2) * W[2], a2 * e2 * W[0]
    out["momentum"] = _rel(t1 - t2 + t3, t1, t2, t3)
    out["heat"] = _rel(T[2] - m2 * T[0] + W[0], T[2], m2 * T[0], W[0])
    s1, s2, s3, s4 = Ws[4], (a2 + e2) * Ws[2], a2 * e2 * Ws[0], a2 / p.Pr * Ts[0]
    out["momentum_adjoint"] = _rel(s1 - s2 + s3 - s4, s1, s2, s3, s4)
    out["heat_adjoint"] = _rel(Ts[2] - m2 * Ts[0], Ts[2], m2 * Ts[0])

    at = lambda fn, k, zz: complex(np.asarray(fn(np.array([zz]), k))[0])
    fw, ft, gw, gt = f.W_eval, f.Theta_eval, g.W_eval, g.Theta_eval
    wscale = max(float(np.max(np.abs(W[k]))) for k in range(3)) or 1.0
    tscale = max(float(np.max(np.abs(T[k]))) for k in range(2)) or 1.0
    bc = [
        abs(at(fw, 0, 0.0)) / wscale, abs(at(fw, 1, 0.0)) / wscale, abs(at(ft, 0, 0.0)) / tscale,
        abs(at(fw, 0, 1.0)) / wscale,
        abs(at(ft, 1, 1.0) + p.Bi * at(ft, 0, 1.0)) / tscale,
    ]
    if alpha > 0:
        d2w, th = at(fw, 2, 1.0), a2 * p.lam * at(ft, 0, 1.0)
        bc.append(abs(d2w + th) / max(abs(d2w), abs(th), 1e-300))
    out["boundary"] = max(bc)
    wscale = max(float(np.max(np.abs(Ws[k]))) for k in range(3)) or 1.0
    tscale = max(float(np.max(np.abs(Ts[k]))) for k in range(2)) or 1.0
    bca = [
        abs(at(gw, 0, 0.0)) / wscale, abs(at(gw, 1, 0.0)) / wscale, abs(at(gt, 0, 0.0)) / tscale,
        abs(at(gw, 0, 1.0)) / wscale, abs(at(gw, 2, 1.0)) / wscale,
    ]
    robin = at(gt, 1, 1.0) + p.Bi * at(gt, 0, 1.0)
    mar = p.lam * p.Pr * at(gw, 1, 1.0)
    bca.append(abs(robin + mar) / max(tscale, abs(mar)))
    out["boundary_adjoint"] = max(bca)
    return out


# ---------------------------------------------------------------- by index

def mode_pair(
    index: ModeIndex, box: BoxGeometry, params: StabilityParams, quad_order: int = DEFAULT_QUAD_ORDER
) -> EigenPair:
    """Eigenpair for a lattice index and branch at the given parameters.

    Critical indices on their leading branch at the critical Marangoni number
    use the closed-form neutral mode.
    """
    alpha = wavenumber(index, box)
    if alpha == 0:
        return zero_mode(index.branch - 1, params.Bi, params.Pr, params.lam).located(index, box)
    if index.branch == 1:
        crit = critical_marangoni(box, params.Bi)
        is_crit = index.horizontal in {m.horizontal for m in crit.critical_set}
        if is_crit and abs(params.lam - crit.lambda_c) <= 1e-12 * crit.lambda_c:
            pair = critical_mode(alpha, params.Bi, params.Pr)
            if quad_order != DEFAULT_QUAD_ORDER:
                pair = replace(pair, vertical_pairing=vertical_pairing(alpha, pair.profile, pair.adjoint_profile, quad_order))
            return replace(pair, params=params).located(index, box)
    beta = growth_rate(params, alpha, index.branch)
    return general_mode(alpha, beta, params, quad_order).located(index, box)


def branch_modes(
    horizontal: tuple[int, int], box: BoxGeometry, params: StabilityParams, count: int,
    quad_order: int = DEFAULT_QUAD_ORDER, first: int = 1,
) -> list[EigenPair]:
    """Eigenpairs on branches first..count of one horizontal index.

    If the last requested branch is one member of a complex-conjugate pair,
    its partner is appended so that sums over the list stay real.
    """
    Ix, Iy = horizontal
    alpha = wavenumber(horizontal, box)
    out = []
    if alpha == 0:
        for k in range(first, count + 1):
            out.append(zero_mode(k - 1, params.Bi, params.Pr, params.lam).located(ModeIndex(Ix, Iy, k), box))
        return out
    betas = list(spectrum(params, alpha, count + 1).betas)
    if count < len(betas) and betas[count - 1].imag > 0:
        count += 1
    for k in range(first, count + 1):
        b = betas[k - 1]
        mode = general_mode(alpha, b.real if b.imag == 0 else b, params, quad_order)
        out.append(mode.located(ModeIndex(Ix, Iy, k), box))
    return out
