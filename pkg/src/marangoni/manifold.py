"""Quadratic approximation of the center manifold.

For critical modes phi_I, phi_J and a stable mode (K, k) the slaved
amplitude is

    Phi_IJK = -<G_sym(phi_I, phi_J), phi*_K> / (beta_K <phi_K, phi*_K>),

with G_sym the symmetrized quadratic term, so that the manifold function is
sum over unordered {I, J} of (2 if I != J else 1) Phi_IJK y_I y_J phi_K.
Complex growth rates enter in conjugate pairs; their contributions are
summed separately and the total is real.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import DEFAULT_QUAD_ORDER, EigenPair, branch_modes, mode_pair
from .geometry import BoxGeometry, ModeIndex
from .linear import CriticalResult, critical_marangoni
from .params import StabilityParams
from .products import InteractionSet, inner_product, sample, trilinear

DEFAULT_LMAX = 10
ESCALATED_LMAX = 20
TAIL_TOL = 1e-8
RESONANCE_TOL = 1e-10


class ResonanceError(ArithmeticError):
    """A target in the stable sum has (numerically) zero growth rate."""


@dataclass(frozen=True)
class ManifoldCoefficient:
    I: ModeIndex
    J: ModeIndex
    K: ModeIndex
    beta: complex
    value: complex

    def to_dict(self, tail: float | None = None) -> dict:
        beta = complex(self.beta)
        val = complex(self.value)
        d = {
            "I": [self.I.Ix, self.I.Iy],
            "J": [self.J.Ix, self.J.Iy],
            "K": [self.K.Ix, self.K.Iy],
            "branch": self.K.branch,
            "beta_K": beta.real if beta.imag == 0 else [beta.real, beta.imag],
            "value": val.real if val.imag == 0 else [val.real, val.imag],
            "tail": tail,
        }
        return d


def manifold_coefficient(
    I: EigenPair, J: EigenPair, K: EigenPair, quad_order: int = DEFAULT_QUAD_ORDER
) -> ManifoldCoefficient:
    """Slaved amplitude of stable mode K driven by the critical pair (I, J)."""
    beta = complex(K.beta)
    if abs(beta) < RESONANCE_TOL:
        raise ResonanceError(f"resonant/critical target in stable sum: {K.index} has beta={beta:.3e}")
    sI, sJ, sK = sample(I, False, quad_order), sample(J, False, quad_order), sample(K, True, quad_order)
    num = 0.5 * (trilinear(sI, sJ, sK) + trilinear(sJ, sI, sK))
    if num == 0:
        value = 0.0
    else:
        value = -num / (beta * inner_product(K, K, quad_order))
    return ManifoldCoefficient(I.index, J.index, K.index, beta, value)


@dataclass
class ManifoldTable:
    box: BoxGeometry
    params: StabilityParams
    critical: list[EigenPair]
    targets: list[EigenPair]
    entries: list[ManifoldCoefficient]
    l_max: int
    quad_order: int
    convergence: dict = field(default_factory=dict)
    interaction: InteractionSet | None = None

    @property
    def converged(self) -> bool:
        return all(v["converged"] for v in self.convergence.values())

    def phi(self, I: ModeIndex, J: ModeIndex) -> dict[ModeIndex, complex]:
        """Symmetrized Phi over all retained targets for the unordered pair {I, J}."""
        key = {I.horizontal, J.horizontal}
        return {
            e.K: e.value for e in self.entries if {e.I.horizontal, e.J.horizontal} == key and e.value != 0
        }

    def margin(self) -> float:
        """Largest real part over retained targets (strictly negative for a valid table)."""
        return max(complex(t.beta).real for t in self.targets)

    def to_list(self) -> list[dict]:
        out = []
        for e in self.entries:
            tail = self.convergence.get((e.I.horizontal, e.J.horizontal, e.K.horizontal), {}).get("tail")
            out.append(e.to_dict(tail))
        return out

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_list(), indent=1) + "\n")
        return path


def _sum_tail(values: list[tuple[int, complex]]) -> tuple[float, float]:
    """(tail, decay ratio) of a branch-ordered list of contributions.

    Conjugate partners are merged first so the tail looks at the last real
    contribution.
    """
    merged: list[complex] = []
    i = 0
    while i < len(values):
        v = values[i][1]
        if i + 1 < len(values) and abs(v.imag) > 0 and abs(values[i + 1][1] - np.conj(v)) <= 1e-9 * abs(v):
            v = v + values[i + 1][1]
            i += 1
        merged.append(v)
        i += 1
    total = sum(merged)
    if abs(total) == 0:
        return 0.0, 0.0
    tail = abs(merged[-1]) / abs(total)
    ratio = abs(merged[-1]) / abs(merged[-2]) if len(merged) > 1 and merged[-2] != 0 else 0.0
    return float(tail), float(ratio)


def build_manifold_table(
    box: BoxGeometry,
    params: StabilityParams,
    critical: CriticalResult | None = None,
    l_max: int = DEFAULT_LMAX,
    quad_order: int = DEFAULT_QUAD_ORDER,
    escalate: bool = True,
) -> ManifoldTable:
    """All Phi_IJK with K in the interaction set, branches 1..l_max (critical branches excluded).

    ``params.lam`` should be the critical Marangoni number of ``critical``.
    With ``escalate`` a table whose tail check fails is rebuilt once with
    ``ESCALATED_LMAX`` branches; the result still reports its own tails.
    Branch l oscillates roughly l/2 times in z, so the quadrature order must
    exceed the largest branch number by a margin.
    """
    top = max(l_max, ESCALATED_LMAX if escalate else l_max)
    if quad_order < top + 16:
        raise ValueError(
            f"quadrature order {quad_order} cannot resolve {top} vertical branches; use at least {top + 16}"
        )
    table = _build(box, params, critical, l_max, quad_order)
    if escalate and not table.converged and l_max < ESCALATED_LMAX:
        table = _build(box, params, critical, ESCALATED_LMAX, quad_order)
    return table


def _build(box, params, critical, l_max, quad_order) -> ManifoldTable:
    if critical is None:
        critical = critical_marangoni(box, params.Bi)
    crit_modes = [mode_pair(m, box, params, quad_order) for m in critical.critical_set]
    S = InteractionSet.from_critical(critical.critical_set)
    crit_h = {m.horizontal for m in critical.critical_set}
    targets: list[EigenPair] = []
    for Kh in S.sorted():
        first = 2 if Kh in crit_h else 1
        targets.extend(branch_modes(Kh, box, params, l_max, quad_order, first=first))
    for t in targets:
        if complex(t.beta).real >= 0:
            raise ResonanceError(f"target {t.index} is not stable (beta={t.beta})")
    entries = []
    for a, b in itertools.combinations_with_replacement(range(len(crit_modes)), 2):
        for K in targets:
            entries.append(manifold_coefficient(crit_modes[a], crit_modes[b], K, quad_order))
    table = ManifoldTable(box, params, crit_modes, targets, entries, l_max, quad_order, interaction=S)
    groups: dict = {}
    for e in entries:
        groups.setdefault((e.I.horizontal, e.J.horizontal, e.K.horizontal), []).append((e.K.branch, complex(e.value)))
    for key, vals in groups.items():
        vals.sort()
        if all(v == 0 for _, v in vals):
            continue
        tail, ratio = _sum_tail(vals)
        table.convergence[key] = {"tail": tail, "ratio": ratio, "converged": tail < TAIL_TOL}
    return table
