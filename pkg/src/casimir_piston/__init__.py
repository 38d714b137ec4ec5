"""Casimir forces on a piston: exact sums, asymptotics, optical paths and spectra."""

from .fields import Field
from .forces import ForceResult, PistonConfig, force, force_box, force_em_exact, force_scalar_asymptotic
from .geometry import CrossSection, chi, parse_cross_section
from .special_functions import j_constants

__all__ = [
    "Field",
    "ForceResult",
    "PistonConfig",
    "force",
    "force_box",
    "force_em_exact",
    "force_scalar_asymptotic",
    "CrossSection",
    "chi",
    "parse_cross_section",
    "j_constants",
]
