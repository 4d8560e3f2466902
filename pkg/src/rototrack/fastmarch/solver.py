"""Public fast-marching interface: kernel selection, stencil caching and the
DistanceField result type."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .. import ConfigError
from ..metrics import CostField, MetricSpec, tangent_weights
from .grid import LiftedGrid
from .stencil import StencilTable, build_stencil

if os.environ.get("ROTOTRACK_PURE"):
    from . import _purepy as _kernel

    KERNEL = "pure"
else:
    try:
        from . import _core as _kernel

        KERNEL = "compiled"
    except ImportError:
        from . import _purepy as _kernel

        KERNEL = "pure"


_STENCIL_CACHE: dict = {}
_STENCIL_CACHE_MAX = 8


def _stencil_key(grid: LiftedGrid, spec: MetricSpec, scheme: str):
    w = tuple(np.round(tangent_weights(spec), 12))
    return (grid.sd, grid.orientation, tuple(grid.spacing), w, scheme)


def get_stencil(grid: LiftedGrid, spec: MetricSpec, scheme: str = "full") -> StencilTable:
    key = _stencil_key(grid, spec, scheme)
    st = _STENCIL_CACHE.get(key)
    if st is None:
        st = build_stencil(grid, spec, scheme)
        if len(_STENCIL_CACHE) >= _STENCIL_CACHE_MAX:
            _STENCIL_CACHE.pop(next(iter(_STENCIL_CACHE)))
        _STENCIL_CACHE[key] = st
    return st


@dataclass
class DistanceField:
    """Solved eikonal field: geodesic distance U and spatial arc length Ul
    per node, shaped (spatial..., orientation)."""

    grid: LiftedGrid
    metric: MetricSpec
    U: np.ndarray = field(repr=False)
    Ul: np.ndarray = field(repr=False)
    sources: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def u_at(self, spatial_idx, o: int = 0) -> float:
        return float(self.U.reshape(-1)[self.grid.node_id(spatial_idx, o)])

    def ul_at(self, spatial_idx, o: int = 0) -> float:
        return float(self.Ul.reshape(-1)[self.grid.node_id(spatial_idx, o)])


def _normalize_sources(grid: LiftedGrid, sources) -> np.ndarray:
    out = []
    for s in sources:
        if isinstance(s, (int, np.integer)):
            out.append(int(s))
        else:
            s = tuple(s)
            if grid.orientation is None:
                out.append(grid.node_id(s))
            else:
                out.append(grid.node_id(s[:-1], s[-1]))
    return np.asarray(out, dtype=np.int64)


def _cost_array(grid: LiftedGrid, cost) -> np.ndarray:
    if cost is None:
        return np.ones(grid.n_nodes)
    values = cost.values if isinstance(cost, CostField) else np.asarray(cost, dtype=float)
    if values.size != grid.n_nodes:
        raise ConfigError(
            f"cost has {values.size} values but the grid has {grid.n_nodes} nodes"
        )
    flat = values.reshape(-1).astype(np.float64)
    if flat.min() <= 0:
        raise ConfigError("cost values must be positive")
    return flat


def _angular_distances(grid: LiftedGrid, spec: MetricSpec) -> np.ndarray:
    """Pairwise rotation-control distances between orientation samples."""
    w = tangent_weights(spec)
    if grid.orientation[0] == "SE2":
        th = grid.thetas()
        d = np.abs(th[:, None] - th[None, :])
        d = np.minimum(d, 2 * math.pi - d)
        return math.sqrt(w[0]) * d
    vecs = grid.s2().vectors()
    dots = np.clip(vecs @ vecs.T, -1.0, 1.0)
    return math.sqrt(w[3]) * np.arccos(dots)


def _spatial_metric_tensors(grid: LiftedGrid, spec: MetricSpec) -> np.ndarray:
    """Per-orientation spatial metric blocks, shape (n_orient, sd, sd)."""
    w = tangent_weights(spec)
    if grid.orientation[0] == "SE2":
        th = grid.thetas()
        n = np.stack([np.cos(th), np.sin(th)], axis=1)
        proj = np.einsum("oi,oj->oij", n, n)
        return w[1] * proj + w[2] * (np.eye(2)[None] - proj)
    vecs = grid.s2().vectors()
    proj = np.einsum("oi,oj->oij", vecs, vecs)
    return w[2] * proj + w[0] * (np.eye(3)[None] - proj)


def _ball_seeds(grid: LiftedGrid, spec: MetricSpec, src_node: int, radius: int):
    """Upper-bound seed values on a small ball around a lifted source: the
    best turn-move-turn path (rotate in place, straight segment in the frozen
    metric of the intermediate orientation, rotate again).  Counters the
    rarefaction-fan error of one-segment point-source updates under strong
    anisotropy; the solver may still improve seeded nodes."""
    sp_src, o_src = grid.node_index(src_node)
    ang = _angular_distances(grid, spec)
    tensors = _spatial_metric_tensors(grid, spec)
    n_orient = grid.n_orient

    lo = [max(0, i - radius) for i in sp_src]
    hi = [min(n - 1, i + radius) for i, n in zip(sp_src, grid.spatial_shape)]
    ranges = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*ranges, indexing="ij")
    offsets_idx = np.stack([m.reshape(-1) for m in mesh], axis=1)
    dx = (offsets_idx - np.asarray(sp_src)) * np.asarray(grid.spacing)

    # segment lengths per (intermediate orientation, ball point)
    seg = np.sqrt(np.maximum(np.einsum("oij,ki,kj->ok", tensors, dx, dx), 0.0))
    b = ang[o_src][:, None] + seg  # (n_orient, K)
    nodes, vals, uls = [], [], []
    slen = np.linalg.norm(dx, axis=1)
    for k in range(offsets_idx.shape[0]):
        u0 = np.min(b[:, k][:, None] + ang, axis=0)  # (n_orient,)
        for o in range(n_orient):
            node = grid.node_id(tuple(offsets_idx[k]), o)
            if node == src_node:
                continue
            nodes.append(node)
            vals.append(u0[o])
            uls.append(slen[k])
    return nodes, vals, uls


def solve_eikonal(
    grid: LiftedGrid,
    metric: MetricSpec,
    cost=None,
    sources=(),
    scheme: str = "full",
    ul_stop: float | None = None,
    u_stop: float | None = None,
    watch=None,
    seed_ball: int = 3,
) -> DistanceField:
    """Solve the eikonal equation on the grid from the given source nodes.

    sources are index tuples (spatial..., orientation) or flat node ids; the
    optional stops terminate the front once its minimal spatial arc length
    (ul_stop) or distance (u_stop) passes the threshold, or once every watch
    node has been accepted.  seed_ball > 0 initialises a small ball around
    each source of a lifted grid with two-segment path upper bounds.
    """
    if not len(sources):
        raise ConfigError("at least one source node is required")
    st = get_stencil(grid, metric, scheme)
    src = _normalize_sources(grid, sources)
    cost_flat = _cost_array(grid, cost)

    src_nodes = list(src)
    src_vals = [0.0] * len(src_nodes)
    src_uls = [0.0] * len(src_nodes)
    src_fixed = [1] * len(src_nodes)
    if grid.orientation is not None and seed_ball > 0:
        for s in src:
            nodes, vals, uls = _ball_seeds(grid, metric, int(s), seed_ball)
            src_nodes += nodes
            src_vals += vals
            src_uls += uls
            src_fixed += [0] * len(nodes)

    watch_nodes = None if watch is None else _normalize_sources(grid, watch)
    U, Ul, _, stats = _kernel.solve(
        st,
        grid.padded_shape(),
        cost_flat,
        np.asarray(src_nodes, dtype=np.int64),
        src_vals=np.asarray(src_vals),
        src_uls=np.asarray(src_uls),
        src_fixed=np.asarray(src_fixed, dtype=np.uint8),
        ul_stop=-1.0 if ul_stop is None else float(ul_stop),
        u_stop=math.inf if u_stop is None else float(u_stop),
        watch_nodes=watch_nodes,
    )
    return DistanceField(
        grid=grid,
        metric=metric,
        U=U.reshape(grid.shape),
        Ul=Ul.reshape(grid.shape),
        sources=[int(s) for s in src],
        stats=stats,
    )
