"""Radical towers with prescribed Northcott numbers, certificates and brute-force oracles."""

__version__ = "0.1.0"

from .exceptions import NorthcottError  # noqa: E402
from .heights import RadicalTower, TowerElement, parse_element  # noqa: E402
from .numerics import ComplexBox, PointTuple, RealInterval  # noqa: E402

__all__ = [
    "__version__",
    "ComplexBox",
    "NorthcottError",
    "PointTuple",
    "RadicalTower",
    "RealInterval",
    "TowerElement",
    "parse_element",
]
