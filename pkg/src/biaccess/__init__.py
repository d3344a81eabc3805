"""Biaccessibility and Brolin measure for quadratic Julia sets."""

from .angles import Angle, CircleArc, double, halves, orbit, orbit_summary, siegel_angle
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["Angle", "CircleArc", "double", "halves", "orbit", "orbit_summary", "siegel_angle", "BACKEND"]
