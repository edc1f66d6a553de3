"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import math
import time
from functools import lru_cache

import numpy as np

from marangoni.eigen import mode_pair
from marangoni.geometry import BoxGeometry, ModeIndex, assemble_field, superpose, wavenumber
from marangoni.linear import (
    continuous_minimum,
    critical_marangoni,
    growth_derivative_at_critical,
    growth_rate,
    spectrum,
)
from marangoni.manifold import build_manifold_table
from marangoni.params import StabilityParams
from marangoni.products import energy_annihilation_check
from marangoni.reduced import ReducedSystem, portrait
from marangoni.transitions import PR_GRID, hex_classifier, single_mode_classifier

RESULTS: dict[int, tuple[bool, str]] = {}

ROLL_BOX = BoxGeometry(1.5, 1.0)
HEX_BOX = BoxGeometry(2 * 3.02 / math.sqrt(3), 3.02)


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@lru_cache(maxsize=None)
def hex_sweep() -> tuple:
    crit = critical_marangoni(HEX_BOX, 0.0)
    return tuple(hex_classifier(HEX_BOX, StabilityParams(Pr, 0.0, crit.lambda_c)) for Pr in PR_GRID)


@lru_cache(maxsize=None)
def roll_sweep() -> tuple:
    crit = critical_marangoni(ROLL_BOX, 0.0)
    return tuple(single_mode_classifier(ROLL_BOX, StabilityParams(Pr, 0.0, crit.lambda_c)) for Pr in PR_GRID)


def hex_at_unit_prandtl():
    return next(r for r in hex_sweep() if abs(r.params.Pr - 1.0) < 1e-12)


# ---------------------------------------------------------------- criteria

def criterion_1():
    t = time.perf_counter()
    alpha, lam = continuous_minimum(0.0)
    dt = time.perf_counter() - t
    ok = _rel(lam, 79.6) < 0.01 and _rel(alpha, 2.0) < 0.05 and dt < 1.0
    record(1, ok, f"min lambda={lam:.5f} at alpha={alpha:.5f} ({dt:.2f}s)")
    return ok


def criterion_2():
    t = time.perf_counter()
    crit = critical_marangoni(ROLL_BOX, 0.0)
    dt = time.perf_counter() - t
    cs = [m.horizontal for m in crit.critical_set]
    ok = abs(crit.lambda_c - 79.82) <= 0.05 and cs == [(1, 0)] and crit.alpha_c == 2 * math.pi / 3 and dt < 1.0
    record(2, ok, f"lambda_c={crit.lambda_c:.5f} C={cs} alpha_c={crit.alpha_c!r} ({dt:.2f}s)")
    return ok


def criterion_3():
    t = time.perf_counter()
    crit = critical_marangoni(HEX_BOX, 0.0)
    dt = time.perf_counter() - t
    cs = {m.horizontal for m in crit.critical_set}
    gap = abs(wavenumber((2, 1), HEX_BOX) - wavenumber((0, 2), HEX_BOX))
    ok = abs(crit.lambda_c - 79.77) <= 0.05 and cs == {(2, 1), (0, 2)} and gap < 1e-12 and dt < 1.0
    record(3, ok, f"lambda_c={crit.lambda_c:.5f} C={sorted(cs)} wavenumber gap={gap:.1e} ({dt:.2f}s)")
    return ok


def criterion_4():
    t = time.perf_counter()
    problems = []
    worst_zero = worst_slope = 0.0
    for box in (ROLL_BOX, HEX_BOX):
        crit = critical_marangoni(box, 0.0)
        lam_c = crit.lambda_c
        crit_h = {m.horizontal for m in crit.critical_set}
        a_c = crit.alpha_c
        b0 = growth_rate(StabilityParams(1.0, 0.0, lam_c), a_c)
        worst_zero = max(worst_zero, abs(b0))
        if abs(b0) > 1e-7:
            problems.append(f"beta at critical {b0:.2e}")
        others = sorted({
            wavenumber((j, k), box)
            for j in range(12) for k in range(12)
            if (j, k) != (0, 0) and (j, k) not in crit_h and wavenumber((j, k), box) <= 8.0
        })
        for off in (-5.0, -1.0, -0.1, 0.1, 1.0, 5.0):
            p = StabilityParams(1.0, 0.0, lam_c + off)
            sp = spectrum(p, a_c, 2).betas
            if np.sign(sp[0].real) != np.sign(off) or sp[0].imag != 0:
                problems.append(f"leading critical rate {sp[0]} at offset {off}")
            if sp[1].real >= 0:
                problems.append(f"second branch {sp[1]} at offset {off}")
            if off > 0:
                continue
            for a in others:
                b = spectrum(p, a, 1).betas[0]
                if b.real >= 0:
                    problems.append(f"noncritical alpha={a:.3f} rate {b} at offset {off}")
        for m in crit.critical_set:
            for Pr in (0.1, 1.0, 10.0):
                h = 1e-4 * lam_c
                fd = (growth_rate(StabilityParams(Pr, 0.0, lam_c + h), a_c)
                      - growth_rate(StabilityParams(Pr, 0.0, lam_c - h), a_c)) / (2 * h)
                closed = growth_derivative_at_critical(box, 0.0, m, Pr)
                worst_slope = max(worst_slope, _rel(closed, fd))
                if _rel(closed, fd) > 1e-3:
                    problems.append(f"slope {closed} vs {fd}")
    dt = time.perf_counter() - t
    ok = not problems and dt < 10.0
    detail = f"|beta(lambda_c)|<={worst_zero:.1e}, slope rel err<={worst_slope:.1e} ({dt:.1f}s)"
    record(4, ok, detail + ("" if not problems else "; " + "; ".join(problems[:3])))
    return ok


def criterion_5():
    t = time.perf_counter()
    reports = hex_sweep()
    dt = time.perf_counter() - t
    worst = max(max(r.identity_residuals().values()) for r in reports)
    ok = worst < 1e-8 and all(r.identities_hold for r in reports) and dt < 300
    record(5, ok, f"{len(reports)} Prandtl numbers, worst identity residual {worst:.1e} ({dt:.0f}s)")
    return ok


def criterion_6():
    cs = [r.c_I for r in roll_sweep()]
    b2 = [r.b2 for r in hex_sweep()]
    ok = all(c < 0 for c in cs) and all(b < 0 for b in b2)
    record(6, ok, f"c_I in [{min(cs):.3f}, {max(cs):.3f}], b2 in [{min(b2):.3f}, {max(b2):.3f}]")
    return ok


def criterion_7():
    rep = hex_at_unit_prandtl()
    crit = critical_marangoni(HEX_BOX, 0.0)
    single = single_mode_classifier(HEX_BOX, StabilityParams(1.0, 0.0, crit.lambda_c), index=ModeIndex(0, 2))
    err = _rel(single.c_I, rep.b2)
    ok = err < 1e-10
    record(7, ok, f"b2={rep.b2:.10f} c_J={single.c_I:.10f} rel diff {err:.1e}")
    return ok


def criterion_8():
    t = time.perf_counter()
    rep = hex_at_unit_prandtl()
    p = portrait(ReducedSystem.from_report(rep, 1e-2), grid=41)
    dt = time.perf_counter() - t
    names = sorted(s.name for s in p.steady_states)
    cls = {s.name: s.stability for s in p.steady_states}
    expect = {"-R": "attractor", "+R": "saddle", "H1": "saddle", "H2": "saddle"}
    het = {c for c in p.connections if set(c) in ({"-R", "H1"}, {"-R", "H2"})}
    angle = p.basin_angle
    ok = (
        names == ["+R", "-R", "H1", "H2", "origin"]
        and all(cls[k] == v for k, v in expect.items())
        and len(het) == 2
        and angle is not None and abs(angle - math.atan(0.5)) <= 0.02
        and dt < 120
    )
    record(8, ok, f"states={names} heteroclinics={sorted(het)} angle={angle} ({dt:.0f}s)")
    return ok


def criterion_9():
    problems = []
    crit_h = critical_marangoni(HEX_BOX, 0.0)
    crit_r = critical_marangoni(ROLL_BOX, 0.0)
    ph = StabilityParams(1.0, 0.0, crit_h.lambda_c)
    pr = StabilityParams(1.0, 0.0, crit_r.lambda_c)

    # quadrature doubling on every reported coefficient
    h64, h128 = hex_classifier(HEX_BOX, ph), hex_classifier(HEX_BOX, ph, quad_order=128)
    r64, r128 = single_mode_classifier(ROLL_BOX, pr), single_mode_classifier(ROLL_BOX, pr, quad_order=128)
    quad = max([_rel(h64.coefficients[k], h128.coefficients[k]) for k in h64.coefficients] + [_rel(r64.c_I, r128.c_I)])
    if quad >= 1e-10:
        problems.append(f"quadrature doubling changes coefficients by {quad:.1e}")

    # truncation of the stable-mode sums
    b2 = {}
    for l_max in (10, 20):
        table = build_manifold_table(HEX_BOX, ph, crit_h, l_max=l_max, escalate=False)
        b2[l_max] = hex_classifier(HEX_BOX, ph, table=table).b2
    trunc = _rel(b2[10], b2[20])
    if trunc >= 1e-6:
        problems.append(f"b2 changes by {trunc:.1e} from 10 to 20 branches")

    # energy annihilation on random combinations
    rng = np.random.default_rng(2024)
    pool = [mode_pair(ModeIndex(ix, iy, br), HEX_BOX, ph)
            for (ix, iy), br in itertools.product([(2, 1), (0, 2), (2, 3), (4, 2), (4, 0), (0, 4)], [1, 2, 3])]
    energy = 0.0
    for _ in range(20):
        pick = rng.choice(len(pool), size=int(rng.integers(2, 5)), replace=False)
        combo = [(float(rng.normal()), pool[k]) for k in pick]
        res, norm3 = energy_annihilation_check(combo, ph.Pr)
        energy = max(energy, res / max(1.0, norm3))
    if energy >= 1e-8:
        problems.append(f"energy residual {energy:.1e}")

    # divergence of assembled fields
    fields = [assemble_field(m.profile, m.index, HEX_BOX, float(rng.normal())) for m in pool]
    X, Y, Z = (rng.uniform(0, L, 200) for L in (HEX_BOX.L1, HEX_BOX.L2, 1.0))
    div = 0.0
    for f in fields + [superpose(fields)]:
        scale = max(1.0, float(np.max(np.abs(f.w(X, Y, Z)))))
        div = max(div, float(np.max(np.abs(f.divergence(X, Y, Z)))) / scale)
    if div >= 1e-8:
        problems.append(f"divergence residual {div:.1e}")

    ok = not problems
    detail = f"quad {quad:.1e}, b2 10->20 branches {trunc:.1e}, energy {energy:.1e}, divergence {div:.1e}"
    record(9, ok, detail + ("" if ok else "; " + "; ".join(problems)))
    return ok


# ---------------------------------------------------------------- pytest entry points

def test_criterion_1_continuous_minimum():
    assert criterion_1()


def test_criterion_2_roll_box():
    assert criterion_2()


def test_criterion_3_hexagonal_box():
    assert criterion_3()


def test_criterion_4_exchange_of_stabilities():
    assert criterion_4()


def test_criterion_5_hexagonal_identities():
    assert criterion_5()


def test_criterion_6_transition_signs():
    assert criterion_6()


def test_criterion_7_b2_cross_check():
    assert criterion_7()


def test_criterion_8_reduced_topology():
    assert criterion_8()


def test_criterion_9_numerical_hygiene():
    assert criterion_9()


if __name__ == "__main__":
    for n in range(1, 10):
        globals()[f"criterion_{n}"]()
