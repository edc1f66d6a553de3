"""Command-line interface.

Every command writes its data files into ``--out`` together with a
``run.json`` sidecar holding the effective configuration.  Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 degenerate
classification.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig
from .eigen import branch_modes, mode_pair
from .geometry import ModeIndex, assemble_field, superpose, wavenumber, write_pattern_csv
from .linear import (
    RootFindingError,
    continuous_minimum,
    critical_marangoni,
    growth_rate,
    marginal_curve,
    write_curve_csv,
)
from .manifold import build_manifold_table
from .params import StabilityParams
from .products import trilinear_projection, write_coefficient_csv
from .reduced import ReducedSystem, integrate, portrait
from .transitions import (
    ConfigurationError,
    DegenerateClassification,
    HexReport,
    hex_classifier,
    single_mode_classifier,
    sweep,
    write_report_json,
    write_sweep_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_DEGENERATE = 0, 2, 3, 4


def _params(cfg: RunConfig, Pr: float | None = None, Bi: float | None = None):
    box = cfg.geometry()
    Bi = cfg.bi[0] if Bi is None else Bi
    Pr = cfg.pr[0] if Pr is None else Pr
    crit = critical_marangoni(box, Bi)
    return box, crit, StabilityParams(Pr, Bi, crit.lambda_c)


def _classify(cfg: RunConfig):
    box, crit, params = _params(cfg)
    if len(crit.critical_set) == 1:
        return single_mode_classifier(box, params, l_max=cfg.lmax, quad_order=cfg.quad_order)
    return hex_classifier(box, params, l_max=cfg.lmax, quad_order=cfg.quad_order)


def _label(v: float) -> str:
    return f"{v:g}"


# ---------------------------------------------------------------- commands

def cmd_curve(cfg: RunConfig, out: Path) -> list[Path]:
    a, b, n = cfg.alpha_range()
    files = []
    curves = {}
    for Bi in cfg.bi:
        samples = marginal_curve(a, b, n, Bi)
        curves[Bi] = samples
        files.append(write_curve_csv(samples, out / f"curve_Bi{_label(Bi)}.csv"))
    if cfg.svg:
        series = {f"Bi={_label(Bi)}": [(x, y) for x, y in s] for Bi, s in curves.items()}
        files.append(write_svg(series, out / "curve.svg", "alpha", "lambda"))
    return files


def cmd_critical(cfg: RunConfig, out: Path) -> list[Path]:
    box = cfg.geometry()
    files = []
    for Bi in cfg.bi:
        crit = critical_marangoni(box, Bi)
        a_inf, lam_inf = continuous_minimum(Bi)
        d = crit.to_dict()
        d["Bi"] = Bi
        d["continuous_minimum"] = {"alpha": a_inf, "lambda": lam_inf}
        path = out / f"critical_Bi{_label(Bi)}.json"
        path.write_text(json.dumps(d, indent=2) + "\n")
        files.append(path)
    return files


def cmd_modes(cfg: RunConfig, out: Path) -> list[Path]:
    box, crit, params = _params(cfg)
    params = params.with_lambda(crit.lambda_c + cfg.lambda_offset)
    files = []
    for m in crit.critical_set:
        for pair in branch_modes(m.horizontal, box, params, cfg.branches, cfg.quad_order):
            idx = pair.index
            files.append(pair.write_json(out / f"mode_{idx.Ix}_{idx.Iy}_{idx.branch}.json"))
    return files


def cmd_coeffs(cfg: RunConfig, out: Path) -> list[Path]:
    box, crit, params = _params(cfg)
    table = build_manifold_table(box, params, crit, l_max=cfg.lmax, quad_order=cfg.quad_order)
    files = [table.write_json(out / "manifold.json")]
    rows = []
    # quadratic terms among critical modes, their forcing of stable modes and the feedback
    for a in table.critical:
        for b in table.critical:
            for t in table.critical:
                rows.append((a.index, b.index, t.index, trilinear_projection(a, b, t, cfg.quad_order).real))
            for K in table.targets:
                rows.append((a.index, b.index, K.index, trilinear_projection(a, b, K, cfg.quad_order).real))
    for a in table.critical:
        for K in table.targets:
            if not np.isreal(K.beta):
                continue
            for t in table.critical:
                rows.append((a.index, K.index, t.index, trilinear_projection(a, K, t, cfg.quad_order).real))
                rows.append((K.index, a.index, t.index, trilinear_projection(K, a, t, cfg.quad_order).real))
    files.append(write_coefficient_csv(rows, out / "coefficients.csv"))
    return files


def cmd_classify(cfg: RunConfig, out: Path) -> list[Path]:
    report = _classify(cfg)
    beta = None
    if isinstance(report, HexReport) and cfg.lambda_offset > 0:
        alpha = wavenumber(report.I, cfg.geometry())
        beta = float(np.real(growth_rate(report.params.with_lambda(report.lambda_c + cfg.lambda_offset), alpha, 1)))
    path = write_report_json(report, out / "report.json", beta)
    if report.transition_type == "inconclusive":
        raise DegenerateClassification(f"classifying coefficient below threshold; report in {path}")
    return [path]


def cmd_simulate(cfg: RunConfig, out: Path) -> list[Path]:
    report = _classify(cfg)
    box = cfg.geometry()
    beta = cfg.beta
    if beta is None:
        if cfg.lambda_offset == 0:
            raise ConfigError("simulate needs --beta or a nonzero --lambda-offset")
        index = report.I if isinstance(report, HexReport) else report.index
        beta = float(np.real(growth_rate(
            report.params.with_lambda(report.lambda_c + cfg.lambda_offset), wavenumber(index, box), 1
        )))
    system = ReducedSystem.from_report(report, beta)
    scale = system.amplitude_scale()
    T = cfg.duration if cfg.duration is not None else 60.0 / abs(beta)
    dt = cfg.dt if cfg.dt is not None else 0.05 / abs(beta)
    if cfg.y0:
        y0 = np.array(cfg.y0)
    else:
        # default start below the hexagonal states, inside the basin of the bifurcated attractor
        y0 = np.array([0.1 * scale] if system.kind == "single" else [0.05 * scale, -0.1 * scale])
    if y0.shape != (system.dim,):
        raise ConfigError(f"y0 needs {system.dim} components")
    traj = integrate(system, y0, T, dt)
    files = [traj.write_csv(out / "trajectory.csv")]
    if system.kind == "hex":
        p = portrait(system, grid=cfg.grid, T=T, dt=dt)
        files.append(p.write_json(out / "portrait.json"))
        files.append(p.write_basin_csv(out / "basin.csv"))
    return files


def cmd_pattern(cfg: RunConfig, out: Path) -> list[Path]:
    box, crit, params = _params(cfg)
    combo = cfg.combination()
    if not combo:
        combo = [(m.horizontal, 1.0) for m in crit.critical_set]
    fields = []
    for (ix, iy), amp in combo:
        pair = mode_pair(ModeIndex(ix, iy), box, params, cfg.quad_order)
        fields.append(assemble_field(pair.profile, pair.index, box, amp))
    return [write_pattern_csv(superpose(fields), out / "pattern.csv", cfg.shape)]


def cmd_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    reports = sweep(cfg.geometry(), cfg.pr, cfg.bi, l_max=cfg.lmax, quad_order=cfg.quad_order)
    files = [write_sweep_csv(reports, out / "sweep.csv")]
    if cfg.svg:
        key = "b2" if isinstance(reports[0], HexReport) else "c_I"
        series = {}
        for r in reports:
            series.setdefault(f"Bi={_label(r.params.Bi)}", []).append(
                (np.log10(r.params.Pr), r.b2 if key == "b2" else r.c_I)
            )
        files.append(write_svg(series, out / "sweep.svg", "log10 Pr", key))
    return files


COMMANDS = {
    "curve": (cmd_curve, "marginal Marangoni number against wavenumber"),
    "critical": (cmd_critical, "critical Marangoni number and critical set of a box"),
    "modes": (cmd_modes, "eigenfunction and adjoint profiles of the critical indices"),
    "coeffs": (cmd_coeffs, "center-manifold table and critical interaction coefficients"),
    "classify": (cmd_classify, "transition type from the reduced cubic coefficients"),
    "simulate": (cmd_simulate, "integrate the reduced equations and map the phase portrait"),
    "pattern": (cmd_pattern, "sample a superposition of critical modes on a grid"),
    "sweep": (cmd_sweep, "classifier coefficients over Prandtl and Biot grids"),
}


# ---------------------------------------------------------------- svg

def write_svg(series: dict[str, list[tuple[float, float]]], path: Path, xlabel: str, ylabel: str) -> Path:
    """Minimal self-contained line plot."""
    W, H, pad = 640, 420, 56
    pts = [p for s in series.values() for p in s]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def X(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def Y(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect x="{pad}" y="{pad}" width="{W - 2 * pad}" height="{H - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 14}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{H / 2}" transform="rotate(-90 16 {H / 2})" text-anchor="middle">{ylabel}</text>',
        f'<text x="{pad}" y="{H - pad + 16}" text-anchor="middle">{x0:.4g}</text>',
        f'<text x="{W - pad}" y="{H - pad + 16}" text-anchor="middle">{x1:.4g}</text>',
        f'<text x="{pad - 4}" y="{H - pad}" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end">{y1:.4g}</text>',
    ]
    for k, (name, s) in enumerate(series.items()):
        c = colors[k % len(colors)]
        coords = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in s)
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{coords}"/>')
        parts.append(f'<text x="{W - pad - 4}" y="{pad + 16 + 14 * k}" text-anchor="end" fill="{c}">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with a [run] section; flags override it")
    common.add_argument("--box", help="L1xL2, or hex:L2 for the hexagonally compatible box")
    common.add_argument("--bi", help="Biot number(s), comma separated")
    common.add_argument("--pr", help="Prandtl number(s), comma separated")
    common.add_argument("--lambda-offset", dest="lambda_offset", help="Marangoni number minus its critical value")
    common.add_argument("--quad-order", dest="quad_order", help="Gauss-Legendre order in z")
    common.add_argument("--lmax", help="vertical branches per index in the manifold sums")
    common.add_argument("--out", help="output directory")
    common.add_argument("--alpha", help="wavenumber range a:b:n (curve)")
    common.add_argument("--beta", help="growth rate for simulate (overrides --lambda-offset)")
    common.add_argument("--y0", help="initial amplitudes for simulate, comma separated")
    common.add_argument("--duration", help="integration time for simulate")
    common.add_argument("--dt", help="output step for simulate")
    common.add_argument("--grid", help="basin grid size for simulate")
    common.add_argument("--modes", help="combination Ix,Iy:amp;... for pattern")
    common.add_argument("--shape", help="sampling grid nx,ny,nz for pattern")
    common.add_argument("--branches", help="branches per critical index for modes")
    common.add_argument("--svg", action="store_const", const="true", help="also write an SVG plot (curve, sweep)")

    parser = argparse.ArgumentParser(prog="marangoni", description="Marangoni convection transition toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {
        k: v for k, v in vars(args).items() if k not in ("config", "command") and v is not None
    }
    return cfg.updated(overrides).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        func = COMMANDS[args.command][0]
        files = func(cfg, out)
        sidecar = {
            "command": args.command,
            "config": cfg.to_dict(),
            "outputs": sorted(p.name for p in files),
            "versions": {"marangoni": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        }
        (out / "run.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    except (ConfigError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateClassification as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ArithmeticError, RootFindingError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for p in files:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
