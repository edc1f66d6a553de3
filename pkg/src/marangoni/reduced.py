"""Dynamics of the truncated amplitude equations.

Single mode:  dy/dt = beta y + c y^3.
Hexagonal pair (y = (y_I, y_J)):
    dy_I/dt = beta y_I + a1 y_I y_J + a2 y_I^3 + a3 y_I y_J^2
    dy_J/dt = beta y_J + b1 y_I^2 + b2 y_J^3 + b3 y_I^2 y_J

Length scales used by the phase-portrait probes are tied to the size of the
bifurcated states (the coefficients carry the eigenmode normalization, so
absolute radii have no intrinsic meaning).
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize

ESCAPE_RADIUS = 1e6
IDENTITY_TOL = 1e-8
FIXED_POINT_TOL = 1e-10
HETEROCLINIC_OFFSET = 1e-6
HETEROCLINIC_BALL = 1e-4


class IdentityError(ArithmeticError):
    """Hexagonal coefficients violate the symmetry identities."""


@dataclass(frozen=True)
class ReducedSystem:
    kind: str
    beta: float
    coefficients: dict

    def __post_init__(self):
        if self.kind == "single":
            if set(self.coefficients) != {"c"}:
                raise ValueError("single-mode system needs exactly the coefficient 'c'")
        elif self.kind == "hex":
            missing = {"a1", "a2", "a3", "b1", "b2", "b3"} - set(self.coefficients)
            if missing:
                raise ValueError(f"missing hexagonal coefficients {sorted(missing)}")
            res = hex_identity_residuals(self.coefficients)
            bad = {k: v for k, v in res.items() if v >= IDENTITY_TOL}
            if bad:
                raise IdentityError(f"hexagonal identities violated: {bad}")
        else:
            raise ValueError(f"unknown reduced system kind {self.kind!r}")

    @classmethod
    def single(cls, beta: float, c: float) -> "ReducedSystem":
        return cls("single", float(beta), {"c": float(c)})

    @classmethod
    def hex(cls, beta: float, a1, a2, a3, b1, b2, b3) -> "ReducedSystem":
        vals = dict(a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, b3=b3)
        return cls("hex", float(beta), {k: float(v) for k, v in vals.items()})

    @classmethod
    def from_report(cls, report, beta: float) -> "ReducedSystem":
        if hasattr(report, "c_I"):
            return cls.single(beta, report.c_I)
        return cls.hex(beta, **report.coefficients)

    @property
    def dim(self) -> int:
        return 1 if self.kind == "single" else 2

    def with_beta(self, beta: float) -> "ReducedSystem":
        return ReducedSystem(self.kind, float(beta), dict(self.coefficients))

    def rhs(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        b = self.beta
        k = self.coefficients
        if self.kind == "single":
            return b * y + k["c"] * y**3
        yi, yj = y[..., 0], y[..., 1]
        fi = b * yi + k["a1"] * yi * yj + k["a2"] * yi**3 + k["a3"] * yi * yj**2
        fj = b * yj + k["b1"] * yi**2 + k["b2"] * yj**3 + k["b3"] * yi**2 * yj
        return np.stack([fi, fj], axis=-1)

    def jacobian(self, y: Sequence[float]) -> np.ndarray:
        b = self.beta
        k = self.coefficients
        if self.kind == "single":
            return np.array([[b + 3 * k["c"] * y[0] ** 2]])
        yi, yj = y
        return np.array(
            [
                [b + k["a1"] * yj + 3 * k["a2"] * yi**2 + k["a3"] * yj**2, k["a1"] * yi + 2 * k["a3"] * yi * yj],
                [2 * k["b1"] * yi + 2 * k["b3"] * yi * yj, b + 3 * k["b2"] * yj**2 + k["b3"] * yi**2],
            ]
        )

    def amplitude_scale(self) -> float:
        """Size of the bifurcated states at leading order."""
        b = abs(self.beta)
        k = self.coefficients
        if self.kind == "single":
            return math.sqrt(b / abs(k["c"])) if k["c"] != 0 else 1.0
        r = math.sqrt(b / abs(k["b2"])) if k["b2"] != 0 else 0.0
        h = math.sqrt(5.0) * b / abs(k["a1"]) if k["a1"] != 0 else 0.0
        return max(r, h)


def hex_identity_residuals(k: dict) -> dict[str, float]:
    scale = max(abs(k["a1"]), abs(k["b2"]), 1.0)
    return {
        "a1-4b1": abs(k["a1"] - 4 * k["b1"]) / scale,
        "a3-2b3": abs(k["a3"] - 2 * k["b3"]) / scale,
        "4a2-a3-b2": abs(4 * k["a2"] - k["a3"] - k["b2"]) / scale,
    }


# ---------------------------------------------------------------- integration

@dataclass
class Trajectory:
    """Sampled solution; ``escaped`` flags each seed that left the escape radius."""

    t: np.ndarray
    y: np.ndarray
    status: str
    escaped: np.ndarray | None = None

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "yI", "yJ"] if self.y.shape[-1] == 2 else ["t", "y"])
            for t, y in zip(self.t, self.y):
                w.writerow([f"{t:.12g}"] + [f"{v:.12g}" for v in np.atleast_1d(y)])
        return path


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _advance(f, y, span, h, tol, escaped, radius):
    """RK4 with step doubling over ``span``.

    Seeds leaving ``radius`` (or becoming non-finite) are flagged in
    ``escaped`` and frozen at their last state.  Returns the new state and the
    step size to try next.
    """
    t = 0.0
    h_min = 1e-12 * span
    while t < span * (1 - 1e-14) and not escaped.all():
        h = min(h, span - t)
        full = _rk4(f, y, h)
        half = _rk4(f, _rk4(f, y, 0.5 * h), 0.5 * h)
        live = ~escaped & np.all(np.isfinite(half), axis=-1) & np.all(np.isfinite(full), axis=-1)
        diff = np.abs(half - full)[live] / (1.0 + np.abs(half[live]))
        err = float(diff.max()) if diff.size else 0.0
        factor = 4.0 if err == 0 else min(4.0, max(0.1, 0.9 * (tol / err) ** 0.2))
        if err > tol and h > h_min:
            h = max(h * factor, h_min)
            continue
        new = half + (half - full) / 15.0
        gone = ~escaped & (~live | ~np.all(np.isfinite(new), axis=-1)
                           | (np.max(np.abs(np.where(np.isfinite(new), new, np.inf)), axis=-1) > radius))
        y = np.where((escaped | gone)[:, None], y, new)
        escaped |= gone
        t += h
        h *= factor
    return y, h


def integrate(
    system: ReducedSystem, y0, T: float, dt: float, stride: int = 1, tol: float = 1e-10,
    escape_radius: float = ESCAPE_RADIUS,
) -> Trajectory:
    """Integrate from y0 (shape (dim,) or (seeds, dim)) over [0, T].

    Output is sampled every ``stride * dt``; ``dt`` is also the initial step.
    Seeds that exceed the escape radius are frozen; a single-seed trajectory
    is then cut short and labelled "escaped".
    """
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    y = np.array(y0, dtype=float)
    single = y.ndim == 1
    if single:
        y = y[None, :]
    if y.shape[-1] != system.dim:
        raise ValueError(f"state must have {system.dim} components")
    n_out = int(math.floor(T / (dt * stride) + 1e-9))
    escaped = np.max(np.abs(y), axis=-1) > escape_radius

    def f(z):
        out = system.rhs(z)
        out[escaped] = 0.0
        return out

    ts = [0.0]
    ys = [y.copy()]
    h = dt
    for k in range(n_out):
        if escaped.all():
            break
        y, h = _advance(f, y, dt * stride, h, tol, escaped, escape_radius)
        ts.append((k + 1) * dt * stride)
        ys.append(y.copy())
    Y = np.array(ys)
    if single:
        Y = Y[:, 0, :]
    status = "escaped" if single and escaped[0] else "ok"
    return Trajectory(np.array(ts), Y, status, escaped[0] if single else escaped)


# ---------------------------------------------------------------- invariant lines

def straight_line_orbits(system: ReducedSystem, tol: float = 1e-8) -> list[float]:
    """Slopes k of invariant lines y_I = k y_J of the hexagonal system."""
    if system.kind != "hex":
        raise ValueError("straight-line orbits are defined for the hexagonal system")
    k = system.coefficients
    res = hex_identity_residuals(k)
    if any(v >= IDENTITY_TOL for v in res.values()):
        raise IdentityError(f"hexagonal identities violated: {res}")
    slopes = [0.0]
    if k["b1"] != 0 and k["a1"] / k["b1"] > 0:
        s = math.sqrt(k["a1"] / k["b1"])
        # the cubic terms must also respect the line: a2 s^2 + a3 = b2 + b3 s^2
        scale = max(abs(k["a2"]), abs(k["a3"]), abs(k["b2"]), abs(k["b3"])) * max(1.0, s * s)
        if abs(k["a2"] * s * s + k["a3"] - k["b2"] - k["b3"] * s * s) <= tol * scale:
            slopes += [s, -s]
    return sorted(slopes)


# ---------------------------------------------------------------- phase portrait

@dataclass
class SteadyState:
    name: str
    location: tuple[float, ...]
    eigenvalues: tuple[complex, ...]
    stability: str
    residual: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "location": list(self.location),
            "eigenvalues": [[float(np.real(e)), float(np.imag(e))] for e in self.eigenvalues],
            "stability": self.stability,
            "residual": self.residual,
        }


@dataclass
class PhasePortrait:
    system: ReducedSystem
    steady_states: list[SteadyState]
    connections: list[tuple[str, str]]
    basin_samples: list[tuple[float, float, str]]
    basin_angle: float | None
    scales: dict = field(default_factory=dict)

    def state(self, name: str) -> SteadyState:
        for s in self.steady_states:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.system.kind,
            "beta": self.system.beta,
            "coefficients": self.system.coefficients,
            "steady_states": [s.to_dict() for s in self.steady_states],
            "connections": [list(c) for c in self.connections],
            "basin_angle": self.basin_angle,
            "scales": self.scales,
        }

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path

    def write_basin_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["yI0", "yJ0", "label"])
            for x, y, lab in self.basin_samples:
                w.writerow([f"{x:.9g}", f"{y:.9g}", lab])
        return path


@dataclass(frozen=True)
class _TimeReversed:
    system: ReducedSystem

    @property
    def dim(self) -> int:
        return self.system.dim

    def rhs(self, y):
        return -self.system.rhs(y)


def _classify(ev: np.ndarray) -> str:
    re = np.real(ev)
    if np.all(re < 0):
        return "attractor"
    if np.all(re > 0):
        return "repeller"
    if np.any(re > 0) and np.any(re < 0):
        return "saddle"
    return "nonhyperbolic"


def find_steady_states(system: ReducedSystem, radius: float, grid: int = 21) -> list[np.ndarray]:
    """Fixed points with |y| <= radius, seeded from the invariant lines and a grid."""
    seeds: list[np.ndarray] = []
    if system.kind == "single":
        c = system.coefficients["c"]
        roots = [0.0]
        if c != 0 and -system.beta / c > 0:
            r = math.sqrt(-system.beta / c)
            roots += [r, -r]
        return [np.array([x]) for x in roots if abs(x) <= radius]
    k = system.coefficients
    for s in straight_line_orbits(system):
        # on y_I = s y_J the y_J equation is y (beta + b1 s^2 y + (b2 + b3 s^2) y^2)
        poly = [k["b2"] + k["b3"] * s * s, k["b1"] * s * s, system.beta, 0.0]
        for r in np.roots(poly):
            if abs(r.imag) < 1e-12:
                seeds.append(np.array([s * r.real, r.real]))
    for x, y in itertools.product(np.linspace(-radius, radius, grid), repeat=2):
        seeds.append(np.array([x, y]))
    found: list[np.ndarray] = []
    for s0 in seeds:
        sol = optimize.root(system.rhs, s0, jac=system.jacobian, method="hybr", options={"xtol": 1e-14})
        if not sol.success:
            continue
        p = sol.x
        if np.linalg.norm(p) > radius or np.max(np.abs(system.rhs(p))) > FIXED_POINT_TOL:
            continue
        if all(np.linalg.norm(p - q) > 1e-9 * max(radius, 1e-300) for q in found):
            found.append(p)
    return found


def _name_hex_state(p: np.ndarray, scale: float) -> str:
    yi, yj = p
    tol = 1e-6 * scale
    if abs(yi) <= tol and abs(yj) <= tol:
        return "origin"
    if abs(yi) <= tol:
        return "+R" if yj > 0 else "-R"
    if abs(yi - 2 * yj) <= 1e-6 * abs(yi):
        return "H1"
    if abs(yi + 2 * yj) <= 1e-6 * abs(yi):
        return "H2"
    return f"P({yi:.3g},{yj:.3g})"


def portrait(
    system: ReducedSystem, grid: int = 41, T: float | None = None, dt: float | None = None,
    angle_tol: float = 1e-4,
) -> PhasePortrait:
    """Steady states, heteroclinic connections and basin samples near the origin.

    Probe radii are multiples of the bifurcated-state scale r: fixed points are
    searched in |y| <= 2r, basins sampled in [-r, r]^2, departure means
    leaving |y| <= 2r.
    """
    if system.kind != "hex":
        raise ValueError("phase portraits are implemented for the hexagonal system")
    beta = system.beta
    r = system.amplitude_scale()
    if r == 0:
        raise ValueError("beta = 0 gives no bifurcated states to resolve")
    local = 2.0 * r
    probe_escape = 10.0 * local
    if T is None:
        T = 60.0 / abs(beta)
    if dt is None:
        dt = 0.05 / abs(beta)

    states = []
    for p in find_steady_states(system, local):
        ev = np.linalg.eigvals(system.jacobian(p))
        states.append(SteadyState(
            _name_hex_state(p, r), tuple(float(v) for v in p), tuple(complex(e) for e in ev),
            _classify(ev), float(np.max(np.abs(system.rhs(p)))),
        ))
    states.sort(key=lambda s: s.name)
    sigma = [s for s in states if s.name in ("-R", "H1", "H2")]

    def label(y_end: np.ndarray) -> list[str]:
        out = []
        for y in y_end:
            if not np.all(np.isfinite(y)) or np.linalg.norm(y) > local:
                out.append("away")
                continue
            near = [s.name for s in states if np.linalg.norm(y - np.array(s.location)) < 1e-3 * r]
            out.append(near[0] if near else "undecided")
        return out

    def run(seeds: np.ndarray) -> np.ndarray:
        traj = integrate(system, seeds, T, dt, stride=max(1, int(T / dt) // 60), escape_radius=probe_escape)
        ends = traj.y[-1]
        # any seed that ever left the local ball counts as departed
        left = np.any(np.linalg.norm(traj.y, axis=-1) > local, axis=0)
        ends = ends.copy()
        ends[left] = np.inf
        return ends

    offset = min(HETEROCLINIC_OFFSET, 1e-4 * r)
    ball = min(HETEROCLINIC_BALL, 1e-2 * r)
    backward = _TimeReversed(system)
    launches = {"forward": [], "backward": []}
    for s in states:
        if s.stability != "saddle":
            continue
        p = np.array(s.location)
        ev, vec = np.linalg.eig(system.jacobian(p))
        # unstable direction forward in time, stable direction backward in time
        for flow, pick in (("forward", np.argmax), ("backward", np.argmin)):
            v = np.real(vec[:, int(pick(np.real(ev)))])
            for sign in (1.0, -1.0):
                launches[flow].append((s.name, p + sign * offset * v / np.linalg.norm(v)))
    connections = []
    for flow, items in launches.items():
        if not items:
            continue
        vector_field = system if flow == "forward" else backward
        traj = integrate(vector_field, np.array([x for _, x in items]), T, dt, escape_radius=probe_escape)
        for n, (name, _) in enumerate(items):
            for other in states:
                if other.name == name:
                    continue
                d = np.linalg.norm(traj.y[:, n] - np.array(other.location), axis=-1)
                if np.any(d < ball):
                    pair = (name, other.name) if flow == "forward" else (other.name, name)
                    if pair not in connections:
                        connections.append(pair)
                    break
    xs = np.linspace(-r, r, grid)
    seeds = np.array([(x, y) for x in xs for y in xs])
    labels = label(run(seeds))
    basin = [(float(a), float(b), lab) for (a, b), lab in zip(seeds, labels)]

    angle = None
    if sigma:
        names = {s.name for s in sigma}

        def in_sigma(theta: float) -> bool:
            p = r * np.array([[math.cos(theta), math.sin(theta)]])
            return label(run(p))[0] in names

        # boundary between the bottom direction (inside) and the horizontal (outside)
        lo, hi = -math.pi / 2, 0.0
        if in_sigma(lo) and not in_sigma(hi):
            while hi - lo > angle_tol:
                mid = 0.5 * (lo + hi)
                if in_sigma(mid):
                    lo = mid
                else:
                    hi = mid
            angle = -0.5 * (lo + hi)
    scales = {"state_scale": r, "search_radius": local, "departure_radius": local, "basin_half_width": r}
    return PhasePortrait(system, states, connections, basin, angle, scales)
