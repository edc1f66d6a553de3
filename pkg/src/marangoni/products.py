"""Inner products and the quadratic (advective) interaction of modes.

Horizontal integrals of trigonometric products are evaluated exactly in
rational arithmetic, so selection-rule zeros are exact zeros; vertical
integrals use Gauss-Legendre quadrature.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .basis import gauss_legendre_01
from .eigen import DEFAULT_QUAD_ORDER, EigenPair
from .geometry import BoxGeometry, ModeIndex, VerticalProfile, wavenumber


class PairingError(ArithmeticError):
    """Target mode has (numerically) zero pairing with its adjoint."""


# ---------------------------------------------------------------- horizontal integrals

@lru_cache(maxsize=65536)
def _trig_integral_units(kinds: tuple[str, ...], ns: tuple[int, ...]) -> tuple[Fraction, bool]:
    """Integral over (0, L) of prod f_j(pi n_j x / L), f in {sin, cos}.

    Returned as (r, over_pi): the value is r * L, or r * L / pi when an odd
    number of sines is present.
    """
    s = kinds.count("s")
    if any(k == "s" and n == 0 for k, n in zip(kinds, ns)):
        return Fraction(0), s % 2 == 1
    total = Fraction(0)
    for signs in itertools.product((1, -1), repeat=len(ns)):
        coef = Fraction(1, 2 ** len(ns))
        for k, sg in zip(kinds, signs):
            if k == "s":
                coef *= sg
        m = sum(sg * n for sg, n in zip(signs, ns))
        # prod of 1/(2i) factors contributes (1/i)^s = (-i)^s
        if s % 2 == 0:
            if m == 0:
                total += coef * (-1) ** (s // 2)
        elif m % 2 != 0:
            # (-i)^s * L / (i pi m) * ((-1)^m - 1) = (-i)^s * 2 i L / (pi m)
            # with s odd, (-i)^s * i = (-1)^((s - 1) // 2)
            total += coef * (-1) ** ((s - 1) // 2) * Fraction(2, m)
    return total, s % 2 == 1


def trig_integral(kinds: Sequence[str], ns: Sequence[int], L: float) -> float:
    r, over_pi = _trig_integral_units(tuple(kinds), tuple(int(n) for n in ns))
    if r == 0:
        return 0.0
    return float(r) * L / math.pi if over_pi else float(r) * L


# ---------------------------------------------------------------- sampled modes

_COMPONENTS = ("u", "v", "w", "theta")


@dataclass(frozen=True)
class SampledMode:
    """Components of one separated mode with z-profiles sampled at quadrature nodes.

    ``parts[c]`` is (coef, xkind, ykind, zkey) with zkey naming an entry of
    ``z``: 'W0', 'W1', 'W2', 'T0', 'T1'.
    """

    index: ModeIndex
    box: BoxGeometry
    parts: dict
    z: dict
    quad_order: int

    @classmethod
    def build(cls, index: ModeIndex, profile: VerticalProfile, box: BoxGeometry, quad_order: int) -> "SampledMode":
        nodes, _ = gauss_legendre_01(quad_order)
        ax, ay = box.wavevector(index.Ix, index.Iy)
        a2 = ax * ax + ay * ay
        zv = {"T0": np.asarray(profile.Theta_eval(nodes, 0)), "T1": np.asarray(profile.Theta_eval(nodes, 1))}
        parts = {"theta": (1.0, "c", "c", "T0")}
        if a2 > 0 and profile.has_velocity:
            for k in range(3):
                zv[f"W{k}"] = np.asarray(profile.W_eval(nodes, k))
            parts["u"] = (-ax / a2, "s", "c", "W1")
            parts["v"] = (-ay / a2, "c", "s", "W1")
            parts["w"] = (1.0, "c", "c", "W0")
        return cls(index, box, parts, zv, quad_order)


_SAMPLE_CACHE: dict = {}


def sample(pair: EigenPair, adjoint: bool = False, quad_order: int = DEFAULT_QUAD_ORDER) -> SampledMode:
    if pair.index is None or pair.box is None:
        raise ValueError("mode must be located on a box (EigenPair.located)")
    key = (id(pair), adjoint, quad_order)
    hit = _SAMPLE_CACHE.get(key)
    if hit is not None and hit[0] is pair:
        return hit[1]
    prof = pair.adjoint_profile if adjoint else pair.profile
    s = SampledMode.build(pair.index, prof, pair.box, quad_order)
    if len(_SAMPLE_CACHE) > 4096:
        _SAMPLE_CACHE.clear()
    _SAMPLE_CACHE[key] = (pair, s)
    return s


_DZ = {"W0": "W1", "W1": "W2", "T0": "T1"}


def _deriv(part, axis: str, box: BoxGeometry, index: ModeIndex):
    """Apply d/dx, d/dy or d/dz to one component part."""
    coef, xk, yk, zk = part
    if axis == "z":
        return coef, xk, yk, _DZ[zk]
    if axis == "x":
        k = math.pi * index.Ix / box.L1
        return (coef * (-k if xk == "c" else k), "s" if xk == "c" else "c", yk, zk)
    k = math.pi * index.Iy / box.L2
    return (coef * (-k if yk == "c" else k), xk, "s" if yk == "c" else "c", zk)


def _zvalues(m: SampledMode, zk: str) -> np.ndarray:
    return m.z[zk]


def trilinear(a: SampledMode, b: SampledMode, c: SampledMode) -> complex:
    """<G(a, b), c> = -int [(u_a . grad) u_b . u_c + (u_a . grad) theta_b theta_c] over the box.

    ``c`` is normally an adjoint mode; its velocity is divergence free with
    no normal flow, so the pressure (Leray) part of G pairs to zero.
    """
    box = a.box
    if b.box != box or c.box != box:
        raise ValueError("modes live on different boxes")
    _, wq = gauss_legendre_01(a.quad_order)
    total = 0.0 + 0.0j
    for j, axis in (("u", "x"), ("v", "y"), ("w", "z")):
        if j not in a.parts:
            continue
        pa = a.parts[j]
        for i in _COMPONENTS:
            if i not in b.parts or i not in c.parts:
                continue
            pb = _deriv(b.parts[i], axis, box, b.index)
            pc = c.parts[i]
            coef = pa[0] * pb[0] * pc[0]
            if coef == 0:
                continue
            hx = trig_integral((pa[1], pb[1], pc[1]), (a.index.Ix, b.index.Ix, c.index.Ix), box.L1)
            if hx == 0:
                continue
            hy = trig_integral((pa[2], pb[2], pc[2]), (a.index.Iy, b.index.Iy, c.index.Iy), box.L2)
            if hy == 0:
                continue
            zint = np.dot(wq, _zvalues(a, pa[3]) * _zvalues(b, pb[3]) * _zvalues(c, pc[3]))
            total += coef * hx * hy * zint
    return -total


def pairing(a: SampledMode, b: SampledMode, velocity_weight: float = 1.0) -> complex:
    """int over the box of (velocity_weight u_a . u_b + theta_a theta_b), bilinear."""
    box = a.box
    _, wq = gauss_legendre_01(a.quad_order)
    total = 0.0 + 0.0j
    for i in _COMPONENTS:
        if i not in a.parts or i not in b.parts:
            continue
        pa, pb = a.parts[i], b.parts[i]
        hx = trig_integral((pa[1], pb[1]), (a.index.Ix, b.index.Ix), box.L1)
        hy = trig_integral((pa[2], pb[2]), (a.index.Iy, b.index.Iy), box.L2)
        if hx == 0 or hy == 0:
            continue
        w = 1.0 if i == "theta" else velocity_weight
        total += w * pa[0] * pb[0] * hx * hy * np.dot(wq, _zvalues(a, pa[3]) * _zvalues(b, pb[3]))
    return total


def inner_product(a: EigenPair, b_adjoint: EigenPair, quad_order: int = DEFAULT_QUAD_ORDER) -> complex:
    """<phi_a, phi*_b>: mode a against the adjoint of mode b."""
    return pairing(sample(a, False, quad_order), sample(b_adjoint, True, quad_order))


def trilinear_projection(
    a: EigenPair, b: EigenPair, target: EigenPair, quad_order: int = DEFAULT_QUAD_ORDER, normalized: bool = True
) -> complex:
    """<G(phi_a, phi_b), phi*_t>, divided by <phi_t, phi*_t> when ``normalized``."""
    val = trilinear(sample(a, False, quad_order), sample(b, False, quad_order), sample(target, True, quad_order))
    if not normalized:
        return val
    den = inner_product(target, target, quad_order)
    if den == 0 or not np.isfinite(den):
        raise PairingError("non-simple or misnormalized target")
    return val / den


# ---------------------------------------------------------------- interaction set

@dataclass(frozen=True)
class InteractionSet:
    members: frozenset

    @classmethod
    def from_critical(cls, critical: Iterable[ModeIndex | tuple[int, int]]) -> "InteractionSet":
        crit = [c.horizontal if isinstance(c, ModeIndex) else tuple(c) for c in critical]
        out = set()
        for (ix, iy), (jx, jy) in itertools.product(crit, repeat=2):
            for sx, sy in itertools.product((1, -1), repeat=2):
                out.add((abs(ix + sx * jx), abs(iy + sy * jy)))
        return cls(frozenset(out))

    def __contains__(self, item) -> bool:
        key = item.horizontal if isinstance(item, ModeIndex) else tuple(item)
        return key in self.members

    def sorted(self) -> list[tuple[int, int]]:
        return sorted(self.members)


# ---------------------------------------------------------------- energy check

def energy_annihilation_check(
    combination: Sequence[tuple[float, EigenPair]], Pr: float, quad_order: int = DEFAULT_QUAD_ORDER
) -> tuple[float, float]:
    """(|<G(phi, phi), phi>_E|, ||phi||_E^3) for phi = sum amp_k phi_k.

    The energy pairing weights velocity by 1/Pr; advection is skew, so the
    first number vanishes up to rounding.
    """
    modes = [(amp, sample(p, False, quad_order)) for amp, p in combination]
    res = 0.0 + 0.0j
    for (ca, ma), (cb, mb), (cc, mc) in itertools.product(modes, repeat=3):
        w = ca * cb * cc
        if w == 0:
            continue
        res += w * _weighted_trilinear(ma, mb, mc, 1.0 / Pr)
    norm2 = 0.0 + 0.0j
    for (ca, ma), (cb, mb) in itertools.product(modes, repeat=2):
        norm2 += ca * cb * pairing(ma, mb, 1.0 / Pr)
    return abs(res), abs(norm2) ** 1.5


def _weighted_trilinear(a: SampledMode, b: SampledMode, c: SampledMode, vw: float) -> complex:
    # split the momentum and heat parts so the velocity part can be weighted
    t_heat = trilinear(a, _only(b, "theta"), _only(c, "theta"))
    b_vel, c_vel = _only(b, "u", "v", "w"), _only(c, "u", "v", "w")
    return vw * trilinear(a, b_vel, c_vel) + t_heat


def _only(m: SampledMode, *names: str) -> SampledMode:
    return SampledMode(m.index, m.box, {k: v for k, v in m.parts.items() if k in names}, m.z, m.quad_order)


# ---------------------------------------------------------------- export

def write_coefficient_csv(rows: Iterable[tuple[ModeIndex, ModeIndex, ModeIndex, float]], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Ia", "Ja", "Ka", "Ib", "Jb", "Kb", "It", "Jt", "Kt", "value"])
        for a, b, t, v in rows:
            w.writerow([a.Ix, a.Iy, a.branch, b.Ix, b.Iy, b.branch, t.Ix, t.Iy, t.branch, f"{float(np.real(v)) + 0.0:.12g}"])
    return path
