"""Closed-form building blocks for the vertical eigenfunctions.

Two families are used:

* ``C(q, z) = cosh(sqrt(q) z)`` and ``S(q, z) = sinh(sqrt(q) z) / sqrt(q)``,
  which are entire in ``q`` and real for real ``q`` of either sign.  The
  general (nonzero growth rate) eigenfunctions are linear combinations of
  divided differences of these in ``q``; that form stays regular when the
  exponents coalesce (growth rate -> 0, Pr -> 1).
* Polynomial-times-hyperbolic expressions ``P(z) sinh(az) + Q(z) cosh(az)``
  for the printed neutral (zero growth rate) modes.

With ``T = d^2/dz^2`` we have ``T C = q C`` and ``T S = q S``, so
``D^n`` of a divided difference is again a divided difference of
``q^p C`` or ``q^p S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

# trapezoid nodes on the contour used for clustered divided differences
_CONTOUR_POINTS = 32


def shc(x):
    """sinh(x)/x, entire, for complex arrays."""
    x = np.asarray(x, dtype=complex)
    out = np.ones_like(x)
    big = np.abs(x) > 1e-4
    out[big] = np.sinh(x[big]) / x[big]
    x2 = x[~big] ** 2
    out[~big] = 1 + x2 / 6 * (1 + x2 / 20 * (1 + x2 / 42))
    return out


def hyperbolic(kind: str, power: int, q, z):
    """``q**power * C(q, z)`` (kind 'C') or ``q**power * S(q, z)`` (kind 'S').

    ``q`` broadcasts against a trailing z axis: the result has shape
    ``q.shape + z.shape``.
    """
    q = np.asarray(q, dtype=complex)
    z = np.asarray(z, dtype=float)
    qq = q.reshape(q.shape + (1,) * z.ndim)
    s = np.sqrt(qq)
    if kind == "C":
        f = np.cosh(s * z)
    elif kind == "S":
        f = z * shc(s * z)
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    return qq**power * f


def derivative_form(kind: str, power: int, order: int) -> tuple[str, int]:
    """Return (kind, power) of ``D^order`` applied to ``q^power * kind``."""
    for _ in range(order):
        if kind == "C":
            kind, power = "S", power + 1
        else:
            kind = "C"
    return kind, power


def divided_difference(kind: str, power: int, nodes: Sequence[complex], z):
    """Divided difference in ``q`` of ``q^power * kind(q, z)`` over ``nodes``.

    Well-separated nodes use the recursive definition; clustered nodes are
    handled with the Cauchy integral on a circle around the cluster, which
    is exact for the confluent limit and free of cancellation.
    """
    nodes = [complex(n) for n in nodes]
    z = np.asarray(z, dtype=float)
    if len(nodes) == 1:
        return hyperbolic(kind, power, nodes[0], z)
    centre = sum(nodes) / len(nodes)
    spread = max(abs(a - b) for a in nodes for b in nodes)
    # keep |Re sqrt(zeta)| = O(1) on the contour
    tau = max(0.5, 0.5 * abs(np.sqrt(centre)))
    if spread <= tau:
        radius = max(4.0 * spread, tau)
        theta = 2 * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5) / _CONTOUR_POINTS
        zeta = centre + radius * np.exp(1j * theta)
        denom = np.ones_like(zeta)
        for n in nodes:
            denom = denom * (zeta - n)
        weights = radius * np.exp(1j * theta) / denom / _CONTOUR_POINTS
        vals = hyperbolic(kind, power, zeta, z)
        return np.tensordot(weights, vals, axes=(0, 0))
    i, j = max(
        ((i, j) for i in range(len(nodes)) for j in range(len(nodes))),
        key=lambda ij: abs(nodes[ij[0]] - nodes[ij[1]]),
    )
    drop_i = nodes[:i] + nodes[i + 1:]
    drop_j = nodes[:j] + nodes[j + 1:]
    return (divided_difference(kind, power, drop_i, z) - divided_difference(kind, power, drop_j, z)) / (
        nodes[j] - nodes[i]
    )


@dataclass(frozen=True)
class DDTerm:
    coef: complex
    kind: str
    nodes: tuple[complex, ...]
    power: int = 0


@dataclass(frozen=True)
class DDCombination:
    """Sum of ``coef * (q^power kind)[nodes](z)`` terms; evaluable with derivatives."""

    terms: tuple[DDTerm, ...] = ()

    def __call__(self, z, order: int = 0):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for t in self.terms:
            if t.coef == 0:
                continue
            kind, power = derivative_form(t.kind, t.power, order)
            out = out + t.coef * divided_difference(kind, power, t.nodes, z)
        return out

    def scaled(self, s: complex) -> "DDCombination":
        return DDCombination(tuple(DDTerm(t.coef * s, t.kind, t.nodes, t.power) for t in self.terms))

    def __add__(self, other: "DDCombination") -> "DDCombination":
        return DDCombination(self.terms + other.terms)


@dataclass(frozen=True)
class PolyHyperbolic:
    """``P(z) sinh(a z) + Q(z) cosh(a z)`` with polynomial P, Q."""

    a: float
    p_sinh: Polynomial = field(default_factory=lambda: Polynomial([0.0]))
    p_cosh: Polynomial = field(default_factory=lambda: Polynomial([0.0]))

    def derivative(self) -> "PolyHyperbolic":
        a = self.a
        return PolyHyperbolic(
            a,
            self.p_sinh.deriv() + a * self.p_cosh,
            self.p_cosh.deriv() + a * self.p_sinh,
        )

    def __call__(self, z, order: int = 0):
        f = self
        for _ in range(order):
            f = f.derivative()
        z = np.asarray(z, dtype=float)
        return f.p_sinh(z) * np.sinh(f.a * z) + f.p_cosh(z) * np.cosh(f.a * z)

    def scaled(self, s: float) -> "PolyHyperbolic":
        return PolyHyperbolic(self.a, self.p_sinh * s, self.p_cosh * s)


@dataclass(frozen=True)
class Zero:
    """The identically zero profile."""

    def __call__(self, z, order: int = 0):
        return np.zeros(np.shape(z))

    def scaled(self, s) -> "Zero":
        return self


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]
