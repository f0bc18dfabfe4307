"""Figure rendering for nwbsim results CSVs."""

from nwbfigures.render import FAMILIES, render_family

__version__ = "0.1.0"

__all__ = ["FAMILIES", "render_family"]
