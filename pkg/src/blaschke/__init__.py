"""Numerical and exact tools for the Blaschke family
B_a(z) = z^(d+1) ((z - a) / (1 - conj(a) z))^d."""

from .mapcore import MapParams, evaluate, classify_region, RegionClass
from .errors import BlaschkeError

__version__ = "0.1.0"
__all__ = ["MapParams", "evaluate", "classify_region", "RegionClass", "BlaschkeError"]
