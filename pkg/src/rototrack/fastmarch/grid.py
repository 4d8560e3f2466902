"""Grid descriptors for eikonal solves on R^n and on orientation-lifted
position spaces.

Nodes are indexed ``(ix, iy[, iz], o)`` with ``o`` the orientation sample
(absent meaning a purely spatial grid); the flat node id puts the orientation
axis fastest.  Internally a dummy z axis of size 1 is used for planar grids so
all kernels work on one layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import ConfigError
from ..orientations import S2Grid, se2_angles


@dataclass(frozen=True)
class LiftedGrid:
    """Spatial extents with optional orientation sampling.

    orientation: None for R^n, ("SE2", n_theta) for a periodic circle, or
    ("SE3", n_beta) for the Euler sphere grid.
    """

    spatial_shape: tuple
    spacing: tuple
    origin: tuple
    orientation: tuple | None = None

    def __post_init__(self):
        if len(self.spatial_shape) not in (2, 3):
            raise ConfigError("spatial dimension must be 2 or 3")
        if len(self.spacing) != len(self.spatial_shape) or len(self.origin) != len(
            self.spatial_shape
        ):
            raise ConfigError("spacing/origin must match the spatial dimension")
        if any(h <= 0 for h in self.spacing):
            raise ConfigError("all spacings must be positive")
        if self.orientation is not None:
            kind, n = self.orientation
            if kind not in ("SE2", "SE3"):
                raise ConfigError(f"unknown orientation sampling {kind!r}")
            if kind == "SE2" and n < 4:
                raise ConfigError("need at least 4 orientation samples")
            if kind == "SE3" and 2 * n * n < 4:
                raise ConfigError("need at least 4 orientation samples")

    # -- sizes ---------------------------------------------------------------
    @property
    def sd(self) -> int:
        return len(self.spatial_shape)

    @property
    def n_spatial(self) -> int:
        return int(np.prod(self.spatial_shape))

    @property
    def n_orient(self) -> int:
        if self.orientation is None:
            return 1
        kind, n = self.orientation
        return n if kind == "SE2" else 2 * n * n

    @property
    def n_nodes(self) -> int:
        return self.n_spatial * self.n_orient

    @property
    def shape(self) -> tuple:
        """Array shape (spatial..., orientation) for field values."""
        if self.orientation is None:
            return tuple(self.spatial_shape)
        return tuple(self.spatial_shape) + (self.n_orient,)

    # -- orientation samples ---------------------------------------------------
    def thetas(self) -> np.ndarray:
        kind, n = self.orientation
        assert kind == "SE2"
        return se2_angles(n)

    def s2(self) -> S2Grid:
        kind, n = self.orientation
        assert kind == "SE3"
        return S2Grid(n)

    # -- indexing --------------------------------------------------------------
    def padded_shape(self) -> tuple:
        """(nx, ny, nz) with nz = 1 for planar grids."""
        if self.sd == 2:
            return (*self.spatial_shape, 1)
        return tuple(self.spatial_shape)

    def node_id(self, spatial_idx, o: int = 0) -> int:
        nx, ny, nz = self.padded_shape()
        idx = tuple(spatial_idx) + ((0,) if self.sd == 2 else ())
        for i, (j, n) in enumerate(zip(idx, (nx, ny, nz))):
            if not 0 <= j < n:
                raise ConfigError(f"spatial index {spatial_idx} outside the grid")
        if not 0 <= o < self.n_orient:
            raise ConfigError(f"orientation index {o} out of range")
        flat = (idx[0] * ny + idx[1]) * nz + idx[2]
        return flat * self.n_orient + o

    def node_index(self, node: int):
        nx, ny, nz = self.padded_shape()
        o = node % self.n_orient
        s = node // self.n_orient
        iz = s % nz
        t = s // nz
        iy = t % ny
        ix = t // ny
        spatial = (ix, iy) if self.sd == 2 else (ix, iy, iz)
        return spatial, o

    def spatial_coords(self, spatial_idx) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(spatial_idx) * np.asarray(self.spacing)

    def nearest_spatial(self, point) -> tuple:
        idx = np.rint(
            (np.asarray(point, dtype=float) - np.asarray(self.origin)) / np.asarray(self.spacing)
        ).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.spatial_shape) - 1)
        return tuple(int(i) for i in idx)

    def nearest_theta(self, theta: float) -> int:
        kind, n = self.orientation
        assert kind == "SE2"
        return int(round((theta % (2 * math.pi)) / (2 * math.pi / n))) % n


def centered_grid(half_width: float, n: int, orientation=None, sd: int = 2) -> LiftedGrid:
    """Convenience grid over [-half_width, half_width]^sd with n nodes per axis."""
    h = 2 * half_width / (n - 1)
    return LiftedGrid(
        spatial_shape=(n,) * sd,
        spacing=(h,) * sd,
        origin=(-half_width,) * sd,
        orientation=orientation,
    )
