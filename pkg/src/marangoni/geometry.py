"""Box geometry, horizontal wave indices and 3D field reconstruction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .basis import Zero

HEX_RTOL = 1e-12


@dataclass(frozen=True)
class BoxGeometry:
    """Horizontal extent of the domain (0, L1) x (0, L2) x (0, 1)."""

    L1: float
    L2: float

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0) or not (math.isfinite(self.L1) and math.isfinite(self.L2)):
            raise ValueError(f"box lengths must be positive and finite, got L1={self.L1}, L2={self.L2}")

    @classmethod
    def hexagonal(cls, L2: float, Ix: int = 2, Iy: int = 1) -> "BoxGeometry":
        """Box on which (Ix, Iy) and (0, 2 Iy) share a wavenumber."""
        return cls(Ix * L2 / (Iy * math.sqrt(3.0)), L2)

    def hex_compatible(self, Ix: int, Iy: int) -> bool:
        if Ix <= 0 or Iy <= 0:
            return False
        target = Ix / (Iy * math.sqrt(3.0))
        return abs(self.L1 / self.L2 - target) <= HEX_RTOL * target

    def wavevector(self, Ix: int, Iy: int) -> tuple[float, float]:
        return math.pi * Ix / self.L1, math.pi * Iy / self.L2

    @classmethod
    def parse(cls, text: str) -> "BoxGeometry":
        """Parse ``"L1xL2"``; ``hex:L2`` builds the (2,1)/(0,2) hexagonal box."""
        text = text.strip()
        if text.startswith("hex:"):
            return cls.hexagonal(float(text[4:]))
        try:
            a, b = text.lower().split("x")
            return cls(float(a), float(b))
        except ValueError as exc:
            raise ValueError(f"box must look like L1xL2 or hex:L2, got {text!r}") from exc


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Horizontal wave pair plus the vertical branch number (1 = leading)."""

    Ix: int
    Iy: int
    branch: int = 1

    def __post_init__(self):
        if self.Ix < 0 or self.Iy < 0:
            raise ValueError("wave indices are nonnegative; sign flips give the same mode")
        if self.branch < 1:
            raise ValueError("branch numbers start at 1")

    @classmethod
    def from_signed(cls, Ix: int, Iy: int, branch: int = 1) -> "ModeIndex":
        return cls(abs(Ix), abs(Iy), branch)

    @property
    def horizontal(self) -> tuple[int, int]:
        return (self.Ix, self.Iy)

    def with_branch(self, branch: int) -> "ModeIndex":
        return ModeIndex(self.Ix, self.Iy, branch)


def wavenumber(index: ModeIndex | tuple[int, int], box: BoxGeometry) -> float:
    """alpha = pi * sqrt((Ix/L1)^2 + (Iy/L2)^2)."""
    Ix, Iy = index.horizontal if isinstance(index, ModeIndex) else index
    return math.pi * math.hypot(Ix / box.L1, Iy / box.L2)


Evaluator = Callable[..., np.ndarray]


@dataclass(frozen=True)
class _Sum:
    parts: tuple[tuple[complex, Evaluator], ...]

    def __call__(self, z, order: int = 0):
        out = 0
        for c, f in self.parts:
            out = out + c * f(z, order)
        return out + np.zeros(np.shape(z))


@dataclass(frozen=True)
class VerticalProfile:
    """The z-dependent pair (W, Theta); each entry is callable as ``f(z, order)``."""

    W_eval: Evaluator
    Theta_eval: Evaluator

    def W(self, z):
        return self.W_eval(z, 0)

    def DW(self, z):
        return self.W_eval(z, 1)

    def D2W(self, z):
        return self.W_eval(z, 2)

    def Theta(self, z):
        return self.Theta_eval(z, 0)

    def DTheta(self, z):
        return self.Theta_eval(z, 1)

    @property
    def has_velocity(self) -> bool:
        return not isinstance(self.W_eval, Zero)

    def __mul__(self, s) -> "VerticalProfile":
        return VerticalProfile(_Sum(((s, self.W_eval),)), _Sum(((s, self.Theta_eval),)))

    __rmul__ = __mul__

    def __add__(self, other: "VerticalProfile") -> "VerticalProfile":
        return VerticalProfile(
            _Sum(((1.0, self.W_eval), (1.0, other.W_eval))),
            _Sum(((1.0, self.Theta_eval), (1.0, other.Theta_eval))),
        )


def _trig(kind: str, k: float, x, deriv: int):
    # d^n/dx^n of sin(kx) or cos(kx)
    phase = {"s": 0.0, "c": math.pi / 2}[kind] + deriv * math.pi / 2
    return k**deriv * np.sin(k * x + phase)


@dataclass(frozen=True)
class Field3D:
    """Superposition of separated modes; real part is reported."""

    box: BoxGeometry
    modes: tuple[tuple[complex, ModeIndex, VerticalProfile], ...]

    def _eval(self, comp: str, x, y, z, dx: int = 0, dy: int = 0, dz: int = 0):
        x, y, z = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y, z)))
        out = np.zeros(x.shape, dtype=complex)
        for amp, idx, prof in self.modes:
            ax, ay = self.box.wavevector(idx.Ix, idx.Iy)
            a2 = ax * ax + ay * ay
            if comp == "theta":
                zpart = prof.Theta_eval(z, dz)
                kinds = ("c", "c")
            else:
                if a2 == 0:
                    continue
                if comp == "w":
                    zpart = prof.W_eval(z, dz)
                    kinds = ("c", "c")
                elif comp == "u":
                    zpart = -ax / a2 * prof.W_eval(z, dz + 1)
                    kinds = ("s", "c")
                else:
                    zpart = -ay / a2 * prof.W_eval(z, dz + 1)
                    kinds = ("c", "s")
            out += amp * zpart * _trig(kinds[0], ax, x, dx) * _trig(kinds[1], ay, y, dy)
        return out.real

    def u(self, x, y, z):
        return self._eval("u", x, y, z)

    def v(self, x, y, z):
        return self._eval("v", x, y, z)

    def w(self, x, y, z):
        return self._eval("w", x, y, z)

    def theta(self, x, y, z):
        return self._eval("theta", x, y, z)

    def divergence(self, x, y, z):
        return (
            self._eval("u", x, y, z, dx=1)
            + self._eval("v", x, y, z, dy=1)
            + self._eval("w", x, y, z, dz=1)
        )

    def __add__(self, other: "Field3D") -> "Field3D":
        if other.box != self.box:
            raise ValueError("fields live on different boxes")
        return Field3D(self.box, self.modes + other.modes)


def assemble_field(
    profile: VerticalProfile, index: ModeIndex, box: BoxGeometry, amplitude: complex = 1.0
) -> Field3D:
    """Separated-variable reconstruction of (u, v, w, theta) for one mode."""
    if wavenumber(index, box) == 0 and profile.has_velocity:
        probe = np.linspace(0.0, 1.0, 33)
        if np.max(np.abs(profile.W(probe))) > 0:
            raise ValueError("a horizontally uniform mode (alpha = 0) cannot carry vertical velocity")
    return Field3D(box, ((amplitude, index, profile),))


def superpose(fields: Iterable[Field3D]) -> Field3D:
    fields = list(fields)
    if not fields:
        raise ValueError("nothing to superpose")
    out = fields[0]
    for f in fields[1:]:
        out = out + f
    return out


def sample_grid(box: BoxGeometry, shape: Sequence[int] = (64, 64, 32)):
    nx, ny, nz = shape
    x = np.linspace(0.0, box.L1, nx)
    y = np.linspace(0.0, box.L2, ny)
    z = np.linspace(0.0, 1.0, nz)
    return np.meshgrid(x, y, z, indexing="ij")


def write_pattern_csv(field: Field3D, path: str | Path, shape: Sequence[int] = (64, 64, 32)) -> Path:
    """Row-major dump of the field on a uniform grid, 9 significant digits."""
    X, Y, Z = sample_grid(field.box, shape)
    cols = [X, Y, Z, field.u(X, Y, Z), field.v(X, Y, Z), field.w(X, Y, Z), field.theta(X, Y, Z)]
    flat = np.stack([c.ravel() for c in cols], axis=1)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "z", "u", "v", "w", "theta"])
        for row in flat:
            writer.writerow([_fmt(v, 9) for v in row])
    return path


def _fmt(v: float, digits: int) -> str:
    v = float(v)
    if v == 0:
        return "0"
    return f"{v:.{digits}g}"
