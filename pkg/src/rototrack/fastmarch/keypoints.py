"""Minimal-path tracking with key points.

Fronts grow from an accumulating source set; whenever the first accepted node
has spatial arc length at least l_max and lies on the mask it becomes a new
key point and restarts as a zero-distance source (with its arc length reset).
Tracking stops once the whole front has arc length at least 3 l_max.
"""

from __future__ import annotations

import math

import numpy as np

from .. import ConfigError
from ..metrics import MetricSpec
from .grid import LiftedGrid
from .solver import DistanceField, _cost_array, _kernel, get_stencil


def detect_keypoints(
    grid: LiftedGrid,
    metric: MetricSpec,
    cost,
    mask: np.ndarray,
    seed,
    l_max: float,
    kp_max: int = 100000,
    scheme: str = "full",
    stop_factor: float = 3.0,
):
    """Returns (ordered key points as index tuples, the final DistanceField).

    The seed is the first entry of the returned list.  Key points are grid
    nodes; on lifted grids they carry the orientation index of first arrival.
    """
    mask = np.asarray(mask)
    if mask.size != grid.n_nodes:
        raise ConfigError("mask shape does not match the grid")
    mask_flat = (mask.reshape(-1) > 0).astype(np.uint8)
    seed_node = _seed_node(grid, seed)
    if not mask_flat[seed_node]:
        raise ConfigError("seed must lie on the mask")

    st = get_stencil(grid, metric, scheme)
    U, Ul, kp_nodes, stats = _kernel.solve(
        st,
        grid.padded_shape(),
        _cost_array(grid, cost),
        np.asarray([seed_node], dtype=np.int64),
        ul_stop=stop_factor * float(l_max),
        u_stop=math.inf,
        mask=mask_flat,
        kp_lmax=float(l_max),
        kp_max=int(kp_max),
    )
    field = DistanceField(
        grid=grid,
        metric=metric,
        U=U.reshape(grid.shape),
        Ul=Ul.reshape(grid.shape),
        sources=[seed_node] + [int(n) for n in kp_nodes],
        stats=stats,
    )
    points = [grid.node_index(seed_node)] + [grid.node_index(int(n)) for n in kp_nodes]
    if grid.orientation is None:
        points = [sp for sp, _ in points]
    return points, field


def _seed_node(grid: LiftedGrid, seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    seed = tuple(seed)
    if grid.orientation is None:
        return grid.node_id(seed)
    return grid.node_id(seed[:-1], seed[-1])
