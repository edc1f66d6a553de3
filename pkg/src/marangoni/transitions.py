"""Reduced amplitude equations on the center manifold and transition classification.

For critical modes y_1..y_n the reduced system at the critical Marangoni number
reads

    dy_i/dt = beta y_i + sum_ab Q[i,a,b] y_a y_b + sum_abc T[i,a,b,c] y_a y_b y_c,

with Q from the quadratic interaction of critical modes and T from the
slaved stable modes: T[i,a,b,c] = sum_K H(a, K, i) Phi_bcK, where
H(a, K, i) = (<G(a, K), i*> + <G(K, a), i*>) / <i, i*>.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .eigen import DEFAULT_QUAD_ORDER
from .geometry import BoxGeometry, ModeIndex, wavenumber
from .linear import CriticalResult, critical_marangoni, growth_rate
from .manifold import DEFAULT_LMAX, ManifoldTable, build_manifold_table
from .params import StabilityParams
from .products import inner_product, sample, trilinear

DEGENERATE_TOL = 1e-10
IDENTITY_TOL = 1e-8
PR_GRID = tuple(np.logspace(-1, 2, 13).tolist())
BI_GRID = (0.0, 1.0, 5.0, 10.0)


class DegenerateClassification(ArithmeticError):
    """A classifying coefficient is too small to decide the transition type."""


class ConfigurationError(ValueError):
    """The critical set does not have the shape required by a classifier."""


# ---------------------------------------------------------------- reduced coefficients

@dataclass
class ReducedCoefficients:
    critical: tuple[ModeIndex, ...]
    Q: np.ndarray
    T: np.ndarray
    imag_residue: float

    def monomial(self, eq: int, powers: Sequence[int]) -> float:
        """Coefficient of prod y_a^powers[a] in equation ``eq``."""
        deg = sum(powers)
        idx = [a for a, p in enumerate(powers) for _ in range(p)]
        arr = self.Q if deg == 2 else self.T
        total = 0.0
        for perm in set(itertools.permutations(idx)):
            total += arr[(eq,) + perm]
        return float(total)


def reduced_coefficients(table: ManifoldTable) -> ReducedCoefficients:
    """Quadratic and cubic coefficient tensors of the reduced system."""
    q = table.quad_order
    crit = table.critical
    n = len(crit)
    sm = [sample(c, False, q) for c in crit]
    sa = [sample(c, True, q) for c in crit]
    norm = [inner_product(c, c, q) for c in crit]
    Q = np.zeros((n, n, n), dtype=complex)
    for i, a, b in itertools.product(range(n), repeat=3):
        Q[i, a, b] = trilinear(sm[a], sm[b], sa[i]) / norm[i]
    pos = {c.index.horizontal: k for k, c in enumerate(crit)}
    phi: dict[tuple[int, int], dict] = {}
    for e in table.entries:
        if e.value == 0:
            continue
        b, c = pos[e.I.horizontal], pos[e.J.horizontal]
        phi.setdefault((b, c), {})[e.K] = e.value
        phi.setdefault((c, b), {})[e.K] = e.value
    targets = {t.index: t for t in table.targets}
    T = np.zeros((n,) * 4, dtype=complex)
    H_cache: dict = {}
    for (b, c), comp in phi.items():
        for K, val in comp.items():
            sK = sample(targets[K], False, q)
            for i, a in itertools.product(range(n), repeat=2):
                key = (i, a, K)
                if key not in H_cache:
                    H_cache[key] = (trilinear(sm[a], sK, sa[i]) + trilinear(sK, sm[a], sa[i])) / norm[i]
                h = H_cache[key]
                if h != 0:
                    T[i, a, b, c] += h * val
    scale = max(np.max(np.abs(Q)), np.max(np.abs(T)), 1e-300)
    residue = float(max(np.max(np.abs(Q.imag)), np.max(np.abs(T.imag))) / scale)
    return ReducedCoefficients(tuple(c.index for c in crit), Q.real, T.real, residue)


def _table(box: BoxGeometry, params: StabilityParams, table, l_max: int, quad_order: int, crit=None) -> ManifoldTable:
    if table is not None:
        return table
    return build_manifold_table(box, params, crit, l_max=l_max, quad_order=quad_order)


def _at_critical(box: BoxGeometry, params: StabilityParams) -> tuple[StabilityParams, CriticalResult]:
    crit = critical_marangoni(box, params.Bi)
    return params.with_lambda(crit.lambda_c), crit


# ---------------------------------------------------------------- single mode

@dataclass
class SingleModeReport:
    index: ModeIndex
    c_I: float
    transition_type: str
    lambda_c: float
    params: StabilityParams
    box: BoxGeometry
    imag_residue: float = 0.0
    convergence: dict = field(default_factory=dict)

    def bifurcated_amplitude(self, lam: float) -> float:
        """sqrt(-beta(lam)/c_I) for lam above critical (Type-I only)."""
        if self.transition_type != "TypeI":
            raise ValueError("bifurcated amplitude is defined for a Type-I transition")
        beta = growth_rate(self.params.with_lambda(lam), wavenumber(self.index, self.box), 1)
        if beta <= 0:
            return 0.0
        return math.sqrt(-beta / self.c_I)

    def to_dict(self) -> dict:
        return {
            "kind": "single",
            "index": [self.index.Ix, self.index.Iy],
            "Pr": self.params.Pr,
            "Bi": self.params.Bi,
            "lambda_c": self.lambda_c,
            "c_I": self.c_I,
            "transition_type": self.transition_type,
            "imag_residue": self.imag_residue,
        }


def classify_single(c: float) -> str:
    if abs(c) <= DEGENERATE_TOL:
        return "inconclusive"
    return "TypeI" if c < 0 else "TypeII"


def single_mode_classifier(
    box: BoxGeometry, params: StabilityParams, table: ManifoldTable | None = None,
    l_max: int = DEFAULT_LMAX, quad_order: int = DEFAULT_QUAD_ORDER, index: ModeIndex | None = None,
) -> SingleModeReport:
    """Cubic coefficient c_I of a single critical mode and the transition type.

    With ``index`` given, the computation treats that mode alone as critical
    (used to cross-check the hexagonal b2).
    """
    params, crit = _at_critical(box, params)
    if index is not None:
        crit = CriticalResult(crit.lambda_c, (ModeIndex(index.Ix, index.Iy),), wavenumber(index, box))
    elif len(crit.critical_set) != 1:
        raise ConfigurationError(
            f"critical set {[m.horizontal for m in crit.critical_set]} is not a singleton; use the hexagonal classifier"
        )
    table = _table(box, params, table, l_max, quad_order, crit)
    rc = reduced_coefficients(table)
    c = rc.monomial(0, (3,))
    return SingleModeReport(
        crit.critical_set[0], c, classify_single(c), crit.lambda_c, params, box, rc.imag_residue,
        {str(k): v for k, v in table.convergence.items()},
    )


# ---------------------------------------------------------------- hexagonal pair

@dataclass
class HexReport:
    I: ModeIndex
    J: ModeIndex
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    lambda_c: float
    params: StabilityParams
    transition_type: str
    imag_residue: float = 0.0
    spurious: float = 0.0
    convergence: dict = field(default_factory=dict)

    @property
    def coefficients(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("a1", "a2", "a3", "b1", "b2", "b3")}

    def identity_residuals(self) -> dict[str, float]:
        scale = max(abs(self.a1), abs(self.b2), 1.0)
        return {
            "a1-4b1": abs(self.a1 - 4 * self.b1) / scale,
            "a3-2b3": abs(self.a3 - 2 * self.b3) / scale,
            "4a2-a3-b2": abs(4 * self.a2 - self.a3 - self.b2) / scale,
        }

    @property
    def identities_hold(self) -> bool:
        return all(v < IDENTITY_TOL for v in self.identity_residuals().values())

    @property
    def orientation(self) -> str:
        return "standard" if self.a1 > 0 else "reflected"

    @property
    def basin_angle(self) -> float:
        return math.atan(0.5)

    def steady_states(self, beta: float) -> dict[str, tuple[float, float]]:
        """Leading-order bifurcated states (y_I, y_J) for growth rate beta > 0."""
        out = {}
        if -beta / self.b2 > 0:
            r = math.sqrt(-beta / self.b2)
            out["+R"] = (0.0, r)
            out["-R"] = (0.0, -r)
        out["H1"] = (-2 * beta / self.a1, -beta / self.a1)
        out["H2"] = (2 * beta / self.a1, -beta / self.a1)
        return out

    def jacobian_spectra(self, beta: float) -> dict[str, tuple[float, float]]:
        """Leading-order Jacobian eigenvalues at the bifurcated states."""
        out = {}
        if -beta / self.b2 > 0:
            r = math.sqrt(-beta / self.b2)
            shift = beta * (1 - self.a3 / self.b2)
            out["+R"] = (self.a1 * r + shift, -2 * beta)
            out["-R"] = (-self.a1 * r + shift, -2 * beta)
        out["H1"] = (2 * beta, -beta)
        out["H2"] = (2 * beta, -beta)
        return out

    def to_dict(self, beta: float | None = None) -> dict:
        d = {
            "kind": "hex",
            "I": [self.I.Ix, self.I.Iy],
            "J": [self.J.Ix, self.J.Iy],
            "Pr": self.params.Pr,
            "Bi": self.params.Bi,
            "lambda_c": self.lambda_c,
            **self.coefficients,
            "identity_residuals": self.identity_residuals(),
            "transition_type": self.transition_type,
            "orientation": self.orientation,
            "basin_angle": self.basin_angle,
            "imag_residue": self.imag_residue,
        }
        if beta is not None:
            d["beta"] = beta
            d["steady_states"] = {k: list(v) for k, v in self.steady_states(beta).items()}
            d["jacobian_spectra"] = {k: list(v) for k, v in self.jacobian_spectra(beta).items()}
        return d


def classify_hex(a1: float, b2: float) -> str:
    if abs(b2) <= DEGENERATE_TOL or abs(a1) <= DEGENERATE_TOL:
        return "inconclusive"
    return "TypeIII" if b2 < 0 else "TypeII"


def hex_pair(crit: CriticalResult, box: BoxGeometry) -> tuple[ModeIndex, ModeIndex]:
    """(I, J) with I = (Ix, Iy), J = (0, 2 Iy) on a hexagonal box."""
    if len(crit.critical_set) != 2:
        raise ConfigurationError("hexagonal classification needs exactly two critical modes")
    a, b = crit.critical_set
    I, J = (a, b) if b.Ix == 0 else (b, a)
    if not (J.Ix == 0 and J.Iy == 2 * I.Iy and I.Ix > 0):
        raise ConfigurationError(f"critical modes {I.horizontal}, {J.horizontal} are not of the form (Ix, Iy), (0, 2Iy)")
    if not box.hex_compatible(I.Ix, I.Iy):
        raise ConfigurationError("box is not hexagonally compatible with the critical modes")
    return I, J


def hex_classifier(
    box: BoxGeometry, params: StabilityParams, table: ManifoldTable | None = None,
    l_max: int = DEFAULT_LMAX, quad_order: int = DEFAULT_QUAD_ORDER,
) -> HexReport:
    params, crit = _at_critical(box, params)
    I, J = hex_pair(crit, box)
    table = _table(box, params, table, l_max, quad_order, crit)
    rc = reduced_coefficients(table)
    pos = {m.horizontal: k for k, m in enumerate(rc.critical)}
    i, j = pos[I.horizontal], pos[J.horizontal]

    def mono(eq, pI, pJ):
        p = [0, 0]
        p[i], p[j] = pI, pJ
        return rc.monomial(eq, p)

    a1, b1 = mono(i, 1, 1), mono(j, 2, 0)
    a2, a3 = mono(i, 3, 0), mono(i, 1, 2)
    b2, b3 = mono(j, 0, 3), mono(j, 2, 1)
    # monomials absent from the hexagonal normal form
    extra = [mono(i, 2, 0), mono(i, 0, 2), mono(j, 1, 1), mono(j, 0, 2),
             mono(i, 2, 1), mono(i, 0, 3), mono(j, 3, 0), mono(j, 1, 2)]
    scale = max(abs(a1), abs(b2), 1.0)
    spurious = max(abs(x) for x in extra) / scale
    return HexReport(
        I, J, a1, a2, a3, b1, b2, b3, crit.lambda_c, params, classify_hex(a1, b2), rc.imag_residue, spurious,
        {str(k): v for k, v in table.convergence.items()},
    )


# ---------------------------------------------------------------- sweeps

def sweep(
    box: BoxGeometry, Pr_grid: Iterable[float] = PR_GRID, Bi_grid: Iterable[float] = (0.0,),
    l_max: int = DEFAULT_LMAX, quad_order: int = DEFAULT_QUAD_ORDER,
) -> list:
    """Classifier reports over a (Pr, Bi) grid; single or hexagonal by critical-set shape."""
    out = []
    for Bi in Bi_grid:
        crit = critical_marangoni(box, Bi)
        for Pr in Pr_grid:
            params = StabilityParams(float(Pr), float(Bi), crit.lambda_c)
            if len(crit.critical_set) == 1:
                out.append(single_mode_classifier(box, params, l_max=l_max, quad_order=quad_order))
            else:
                out.append(hex_classifier(box, params, l_max=l_max, quad_order=quad_order))
    return out


def write_sweep_csv(reports: Sequence, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if reports and isinstance(reports[0], SingleModeReport):
            w.writerow(["Pr", "Bi", "c_I"])
            for r in reports:
                w.writerow([f"{r.params.Pr:.12g}", f"{r.params.Bi:.12g}", f"{r.c_I:.12g}"])
        else:
            w.writerow(["Pr", "Bi", "a1", "a2", "a3", "b1", "b2", "b3", "type"])
            for r in reports:
                w.writerow(
                    [f"{r.params.Pr:.12g}", f"{r.params.Bi:.12g}"]
                    + [f"{v:.12g}" for v in r.coefficients.values()]
                    + [r.transition_type]
                )
    return path


def write_report_json(report, path: str | Path, beta: float | None = None) -> Path:
    path = Path(path)
    d = report.to_dict(beta) if isinstance(report, HexReport) else report.to_dict()
    path.write_text(json.dumps(d, indent=2) + "\n")
    return path
