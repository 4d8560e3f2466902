"""Fast-marching eikonal solver on R^n and orientation-lifted grids, with
geodesic backtracking and minimal-path key-point tracking.

The hot update loop lives in the compiled extension ``_core`` when it was
built; otherwise the pure-Python twin ``_purepy`` is used (set
``ROTOTRACK_PURE=1`` to force it).
"""

from .grid import LiftedGrid, centered_grid
from .solver import KERNEL, DistanceField, get_stencil, solve_eikonal
from .backtrack import backtrack_geodesic
from .keypoints import detect_keypoints

__all__ = [
    "KERNEL",
    "LiftedGrid",
    "centered_grid",
    "DistanceField",
    "get_stencil",
    "solve_eikonal",
    "backtrack_geodesic",
    "detect_keypoints",
]
