"""Bilinear-covariant geometry of the Dirac field: algebra, tetrads, connections,
identity residuals, a radial bound-state solver and a 1+1D evolution demo."""
from .algebra import MATS, ETA, bilinears
from .errors import DiracGeomError

__all__ = ["MATS", "ETA", "bilinears", "DiracGeomError"]
__version__ = "0.1.0"
