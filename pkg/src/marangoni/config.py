"""Run configuration: a flat ``key = value`` document under a ``[run]`` section."""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, fields
from pathlib import Path

from .geometry import BoxGeometry

SECTION = "run"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    box: str = "1.5x1"
    bi: tuple[float, ...] = (0.0,)
    pr: tuple[float, ...] = (1.0,)
    lambda_offset: float = 0.0
    quad_order: int = 64
    lmax: int = 10
    out: str = "out"
    alpha: str = "0.5:6:200"
    beta: float | None = None
    y0: tuple[float, ...] = ()
    duration: float | None = None
    dt: float | None = None
    grid: int = 41
    modes: str = ""
    shape: tuple[int, ...] = (64, 64, 32)
    branches: int = 4
    svg: bool = False

    def geometry(self) -> BoxGeometry:
        try:
            return BoxGeometry.parse(self.box)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def alpha_range(self) -> tuple[float, float, int]:
        try:
            a, b, n = self.alpha.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError as exc:
            raise ConfigError(f"alpha must look like a:b:n, got {self.alpha!r}") from exc
        if a <= 0:
            raise ConfigError(f"alpha range must start above 0, got {a}")
        if b <= a or n < 2:
            raise ConfigError(f"alpha range {self.alpha!r} needs b > a and n >= 2")
        return a, b, n

    def combination(self) -> list[tuple[tuple[int, int], float]]:
        """Parse ``"2,1:2;0,2:1"`` into [((2, 1), 2.0), ((0, 2), 1.0)]."""
        out = []
        for item in filter(None, (s.strip() for s in self.modes.split(";"))):
            try:
                idx, amp = item.split(":")
                ix, iy = (int(v) for v in idx.split(","))
                out.append(((ix, iy), float(amp)))
            except ValueError as exc:
                raise ConfigError(f"mode combination entries look like Ix,Iy:amplitude, got {item!r}") from exc
        return out

    def validate(self) -> "RunConfig":
        self.geometry()
        if any(b < 0 for b in self.bi):
            raise ConfigError("Biot numbers must be non-negative")
        if not self.pr or any(p <= 0 for p in self.pr):
            raise ConfigError("Prandtl numbers must be positive")
        if not self.bi:
            raise ConfigError("at least one Biot number is required")
        if self.quad_order < 8:
            raise ConfigError("quadrature order must be at least 8")
        if self.lmax < 1:
            raise ConfigError("lmax must be at least 1")
        if self.grid < 3:
            raise ConfigError("grid must be at least 3")
        if self.branches < 1:
            raise ConfigError("branches must be at least 1")
        if len(self.shape) != 3 or any(n < 2 for n in self.shape):
            raise ConfigError("shape needs three counts of at least 2")
        for name in ("duration", "dt"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive")
        return self

    # ------------------------------------------------------------ text form

    def to_text(self) -> str:
        parser = configparser.ConfigParser()
        parser[SECTION] = {f.name: _encode(getattr(self, f.name)) for f in fields(self)}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from exc
        if not parser.has_section(SECTION):
            raise ConfigError(f"config needs a [{SECTION}] section")
        return cls().updated(dict(parser[SECTION]))

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            return cls.from_text(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def updated(self, values: dict[str, str]) -> "RunConfig":
        """Copy with string-valued overrides decoded by field type."""
        types = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in types:
                raise ConfigError(f"unknown config key {key!r}")
            changes[name] = _decode(types[name], raw, name)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: _jsonable(getattr(self, f.name)) for f in fields(self)}


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def _encode(v) -> str:
    if v is None:
        return ""
    if isinstance(v, tuple):
        return ",".join(repr(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _decode(kind: str, raw: str, name: str):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off", ""):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "float | None":
            return None if raw == "" else float(raw)
        if kind == "tuple[float, ...]":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if kind == "tuple[int, ...]":
            return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    raise ConfigError(f"unsupported config field type {kind}")
