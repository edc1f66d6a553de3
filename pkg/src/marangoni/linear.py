"""Marginal stability, the critical Marangoni number on a box lattice, and
growth rates of the linearized problem."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize

from .collocation import collocation_spectrum
from .geometry import BoxGeometry, ModeIndex, _fmt, wavenumber
from .params import StabilityParams
from .secular import marangoni_from_growth, secular_determinant

CRITICAL_RTOL = 1e-9
NEAR_DEGENERATE_RTOL = 1e-4
ALPHA_MAX = 1e150

# Taylor coefficients (in alpha^2) of (alpha^3 cosh - sinh^3)/alpha^7 and (sinh 2a - 2a)/a^3
_G_SERIES = (
    -1 / 15,
    -23 / 1890,
    -41 / 37800,
    -53 / 831600,
    -74677 / 27243216000,
    -989 / 10897286400,
    -79649 / 33345696384000,
)
_H_SERIES = (4 / 3, 4 / 15, 8 / 315, 4 / 2835, 8 / 155925, 8 / 6081075, 16 / 638512875)
_SERIES_BELOW = 0.1


class RootFindingError(RuntimeError):
    """A growth-rate search failed; carries the scanned interval."""

    def __init__(self, message: str, interval: tuple[float, float] | None = None):
        super().__init__(message if interval is None else f"{message} (scanned {interval})")
        self.interval = interval


def _poly_a2(coeffs, a2):
    return sum(c * a2**k for k, c in enumerate(coeffs))


def marginal_marangoni(alpha: float, Bi: float = 0.0) -> float:
    """Marangoni number at which wavenumber alpha has zero growth rate."""
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not Bi >= 0:
        raise ValueError(f"Bi must be nonnegative, got {Bi}")
    if alpha > ALPHA_MAX:
        raise OverflowError(f"alpha above {ALPHA_MAX:g} overflows the scaled hyperbolic form")
    if alpha < _SERIES_BELOW:
        a2 = alpha * alpha
        g = _poly_a2(_G_SERIES, a2)
        h = _poly_a2(_H_SERIES, a2)
        shc = math.sinh(alpha) / alpha
        return -4.0 * (math.cosh(alpha) + Bi * shc) * h / (g * a2)
    # divide through by cosh^3 so nothing overflows
    e = math.exp(-2.0 * alpha)
    th = (1.0 - e) / (1.0 + e)
    sech2 = 4.0 * e / (1.0 + e) ** 2
    num = 8.0 * alpha * (alpha + Bi * th) * (alpha * sech2 - th)
    den = alpha**3 * sech2 - th**3
    value = num / den
    if not math.isfinite(value):
        raise OverflowError(f"marginal Marangoni number not finite at alpha={alpha:g}")
    return value


def marginal_curve(alpha_min: float, alpha_max: float, n: int, Bi: float = 0.0) -> list[tuple[float, float]]:
    """Uniform samples of the marginal curve; checks it has a single interior minimum."""
    if not (0 < alpha_min < alpha_max) or n < 2:
        raise ValueError("need 0 < alpha_min < alpha_max and n >= 2")
    alphas = np.linspace(alpha_min, alpha_max, n)
    lams = np.array([marginal_marangoni(a, Bi) for a in alphas])
    steps = np.sign(np.diff(lams))
    steps = steps[steps != 0]
    if np.any(np.diff(steps) < 0):
        raise ArithmeticError("marginal curve is not unimodal on the sampled range")
    return list(zip(alphas.tolist(), lams.tolist()))


def write_curve_csv(samples, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "lambda"])
        for a, lam in samples:
            w.writerow([_fmt(a, 9), _fmt(lam, 9)])
    return path


@lru_cache(maxsize=64)
def continuous_minimum(Bi: float = 0.0) -> tuple[float, float]:
    """(alpha, lambda) minimizing the marginal curve over all alpha > 0."""
    res = optimize.minimize_scalar(
        lambda a: marginal_marangoni(a, Bi), bounds=(0.2, 10.0), method="bounded",
        options={"xatol": 1e-10},
    )
    if not res.success:
        raise ArithmeticError("minimization of the marginal curve failed")
    return float(res.x), float(res.fun)


@dataclass(frozen=True)
class CriticalResult:
    lambda_c: float
    critical_set: tuple[ModeIndex, ...]
    alpha_c: float
    near_degenerate: tuple[ModeIndex, ...] = ()

    def __post_init__(self):
        if not self.critical_set:
            raise ValueError("critical set cannot be empty")

    def to_dict(self) -> dict:
        return {
            "lambda_c": self.lambda_c,
            "alpha_c": self.alpha_c,
            "critical_set": [[m.Ix, m.Iy] for m in self.critical_set],
        }

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


def _alpha_bound(level: float, Bi: float, a_min: float) -> float:
    """Largest alpha (right of the minimum) with marginal value <= level."""
    hi = 2.0 * a_min
    while marginal_marangoni(hi, Bi) <= level:
        hi *= 2.0
    return optimize.brentq(lambda a: marginal_marangoni(a, Bi) - level, a_min, hi, xtol=1e-14)


def critical_marangoni(box: BoxGeometry, Bi: float = 0.0) -> CriticalResult:
    """Minimum of the marginal curve over the lattice alpha_(j,k), j, k >= 0, (j, k) != 0.

    The marginal curve is unimodal and diverges at both ends, so every index
    with lambda <= the best lattice value has alpha below the right-hand
    level crossing; enumerating up to that bound is exhaustive.
    """
    a_min, _ = continuous_minimum(Bi)
    bound = 2.0 * a_min
    best = math.inf
    while True:
        jmax = int(math.floor(bound * box.L1 / math.pi)) + 1
        kmax = int(math.floor(bound * box.L2 / math.pi)) + 1
        values: dict[tuple[int, int], float] = {}
        for j in range(jmax + 1):
            for k in range(kmax + 1):
                if j == 0 and k == 0:
                    continue
                a = wavenumber((j, k), box)
                if a <= bound:
                    values[(j, k)] = marginal_marangoni(a, Bi)
        if values:
            best = min(best, min(values.values()))
        if not math.isfinite(best):
            bound *= 2.0
            continue
        new_bound = _alpha_bound(best * (1.0 + 1e-6), Bi, a_min)
        if new_bound <= bound:
            break
        bound = new_bound
    crit = sorted(ModeIndex(j, k) for (j, k), v in values.items() if v <= best * (1 + CRITICAL_RTOL))
    near = sorted(
        ModeIndex(j, k)
        for (j, k), v in values.items()
        if best * (1 + CRITICAL_RTOL) < v <= best * (1 + NEAR_DEGENERATE_RTOL)
    )
    return CriticalResult(best, tuple(crit), wavenumber(crit[0], box), tuple(near))


# ---------------------------------------------------------------- growth rates

def _real_det(beta: float, alpha: float, p: StabilityParams) -> float:
    return secular_determinant(beta, alpha, p.lam, p.Pr, p.Bi).real


def real_growth_rates(
    params: StabilityParams, alpha: float, beta_min: float, beta_max: float, ds: float | None = None
) -> list[float]:
    """Real roots of the secular relation in [beta_min, beta_max] by a sign scan.

    The scan is uniform in s = sign(beta) sqrt|beta|, which matches the
    asymptotic spacing of the roots; each bracket is refined by Brent's
    method to 1e-12 relative accuracy.
    """
    if ds is None:
        ds = 0.02 * min(1.0, math.sqrt(params.Pr))
    s_lo = -math.sqrt(-beta_min) if beta_min < 0 else math.sqrt(beta_min)
    s_hi = math.sqrt(beta_max) if beta_max > 0 else -math.sqrt(-beta_max)
    s = np.linspace(s_lo, s_hi, max(3, int(math.ceil((s_hi - s_lo) / ds)) + 1))
    betas = np.sign(s) * s * s
    vals = np.array([_real_det(b, alpha, params) for b in betas])
    roots = []
    for i in range(len(betas) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0:
            roots.append(float(betas[i]))
        elif f0 * f1 < 0:
            roots.append(_refine_real(betas[i], betas[i + 1], alpha, params))
    if vals[-1] == 0.0:
        roots.append(float(betas[-1]))
    return sorted(roots, reverse=True)


def _refine_real(lo: float, hi: float, alpha: float, p: StabilityParams) -> float:
    return optimize.brentq(
        _real_det, lo, hi, args=(alpha, p), xtol=1e-14, rtol=1e-12, maxiter=200
    )


def _local_real_root(seed: float, alpha: float, p: StabilityParams) -> float:
    w = 1e-7 * max(1.0, abs(seed))
    f0 = _real_det(seed, alpha, p)
    if f0 == 0.0:
        return float(seed)
    for _ in range(12):
        lo, hi = seed - w, seed + w
        flo, fhi = _real_det(lo, alpha, p), _real_det(hi, alpha, p)
        if flo * f0 <= 0:
            return _refine_real(lo, seed, alpha, p)
        if fhi * f0 <= 0:
            return _refine_real(seed, hi, alpha, p)
        w *= 4.0
    raise RootFindingError("no sign change of the secular relation near a real seed", (seed - w, seed + w))


def _polish_complex(seed: complex, alpha: float, p: StabilityParams) -> complex:
    f = lambda b: secular_determinant(b, alpha, p.lam, p.Pr, p.Bi)
    h = 1e-6 * max(1.0, abs(seed))
    root = optimize.newton(f, seed, x1=seed + h * (1 + 1j), tol=1e-14 * max(1.0, abs(seed)), maxiter=100)
    return complex(root)


@dataclass(frozen=True)
class Spectrum:
    """Leading growth rates for one wavenumber, by decreasing real part."""

    alpha: float
    params: StabilityParams
    betas: tuple[complex, ...]

    def real_only(self) -> tuple[float, ...]:
        return tuple(b.real for b in self.betas if b.imag == 0)


def _is_real(b: complex) -> bool:
    return abs(b.imag) <= 1e-7 * max(1.0, abs(b))


def _order_key(b: complex):
    return (-round(b.real, 10), -b.imag)


@lru_cache(maxsize=512)
def spectrum(params: StabilityParams, alpha: float, count: int) -> Spectrum:
    """The ``count`` leading growth rates, real and complex, polished on the secular relation.

    Seeds come from Chebyshev collocation; a seed is trusted when it is
    reproduced at two resolutions.  Real seeds are bracketed and bisected,
    complex seeds are refined by the secant method.  Complex roots come in
    conjugate pairs and both members are listed.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive (use zero_mode for alpha = 0)")
    N = max(32, 4 * count + 24)
    for _ in range(6):
        ev1 = collocation_spectrum(alpha, params.lam, params.Pr, params.Bi, N)
        ev2 = collocation_spectrum(alpha, params.lam, params.Pr, params.Bi, N + 16)
        trusted = []
        for b in ev1:
            if np.min(np.abs(ev2 - b)) <= 1e-4 * max(1.0, abs(b)):
                trusted.append(complex(b))
            else:
                break
        if len(trusted) >= count + 2:
            break
        N += 32
    else:
        raise RootFindingError(f"collocation did not resolve {count} growth rates", (-np.inf, np.inf))
    roots: list[complex] = []
    for b in trusted[: count + 2]:
        if _is_real(b):
            r = complex(_local_real_root(b.real, alpha, params), 0.0)
        elif b.imag > 0:
            r = _polish_complex(b, alpha, params)
            if _is_real(r):
                r = complex(_local_real_root(r.real, alpha, params), 0.0)
        else:
            continue
        if any(abs(r - q) <= 1e-9 * max(1.0, abs(r)) for q in roots):
            raise RootFindingError("two seeds converged to the same growth rate", (r.real, r.real))
        roots.append(r)
        if r.imag != 0:
            roots.append(r.conjugate())
    roots.sort(key=_order_key)
    for r in roots:
        res = abs(marangoni_from_growth(r, alpha, params.Pr, params.Bi) - params.lam)
        # allow for the sensitivity of lambda(beta) at a root located to ~1e-12 relative
        h = 1e-6 * max(1.0, abs(r))
        slope = abs(marangoni_from_growth(r + h, alpha, params.Pr, params.Bi) - params.lam) / h
        if res > 1e-9 * params.lam + 1e-11 * max(1.0, abs(r)) * slope:
            raise RootFindingError(f"growth rate {r} misses the secular relation by {res:.2e}", (r.real, r.real))
    return Spectrum(alpha, params, tuple(roots[:count]))


def growth_rate(params: StabilityParams, alpha: float, branch: int = 1) -> complex | float:
    """Growth rate of the given branch (1 = largest real part).

    Real rates are returned as floats; a complex rate is returned with the
    sign of its imaginary part fixed by the ordering (positive first).
    """
    if branch < 1:
        raise ValueError("branch numbers start at 1")
    b = spectrum(params, float(alpha), branch).betas[branch - 1]
    return b.real if b.imag == 0 else b


def growth_derivative_at_critical(
    box: BoxGeometry, Bi: float, index: ModeIndex, Pr: float = 1.0
) -> float:
    """d beta / d lambda of the leading branch at the critical Marangoni number.

    Perturbing the Marangoni condition and projecting on the adjoint gives
    d beta / d lambda = -Pr A Theta(1) DW*(1) / <phi, phi*>, where A is the
    horizontal integral of the planform squared (L1 L2 / 4 when both wave
    indices are nonzero) and the boundary product has the closed form of
    :func:`boundary_growth_integral`.
    """
    from .eigen import critical_mode, horizontal_factor

    crit = critical_marangoni(box, Bi)
    if index.horizontal not in {m.horizontal for m in crit.critical_set}:
        raise ValueError(f"{index} is not in the critical set")
    a = wavenumber(index, box)
    pair = critical_mode(a, Bi, Pr)
    area = horizontal_factor(index, box)
    return -Pr * boundary_growth_integral(a, Bi, area) / pair.pairing_value(box, index).real


def boundary_growth_integral(alpha: float, Bi: float, area_factor: float = 1.0) -> float:
    """area_factor (sinh^3 a - a^3 cosh a)^2 / (sinh a (a cosh a + Bi sinh a)), overflow-safe."""
    a = alpha
    e = math.exp(-2.0 * a)
    th = (1.0 - e) / (1.0 + e)
    sech = 2.0 * math.exp(-a) / (1.0 + e)
    # cosh^6 / (sinh cosh) = cosh^4 / th
    core = (th**3 - a**3 * sech**2) ** 2 / (th * (a + Bi * th))
    log_cosh4 = 4.0 * (a + math.log1p(e) - math.log(2.0))
    return area_factor * core * math.exp(log_cosh4)
