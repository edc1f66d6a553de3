"""Linear stability, center-manifold reduction and transition classification
for surface-tension driven convection in a rectangular box."""

__version__ = "0.1.0"

from .geometry import BoxGeometry, ModeIndex, wavenumber
from .params import StabilityParams
from .linear import critical_marangoni, growth_rate, marginal_marangoni, spectrum
from .eigen import critical_mode, general_mode, mode_pair
from .manifold import build_manifold_table
from .transitions import hex_classifier, single_mode_classifier, sweep
from .reduced import ReducedSystem, integrate, portrait, straight_line_orbits

__all__ = [
    "BoxGeometry",
    "ModeIndex",
    "wavenumber",
    "StabilityParams",
    "critical_marangoni",
    "growth_rate",
    "marginal_marangoni",
    "spectrum",
    "critical_mode",
    "general_mode",
    "mode_pair",
    "build_manifold_table",
    "hex_classifier",
    "single_mode_classifier",
    "sweep",
    "ReducedSystem",
    "integrate",
    "portrait",
    "straight_line_orbits",
]
