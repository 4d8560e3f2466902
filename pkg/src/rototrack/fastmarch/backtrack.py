"""Geodesic extraction by steepest descent on a solved distance field,
following the intrinsic gradient (the metric inverse applied to dU)."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .. import NumericalError
from ..metrics import tangent_weights
from .grid import LiftedGrid
from .solver import DistanceField

_BIG = 1e30


class _FieldInterp:
    """Multilinear interpolation of U in index coordinates, with the
    orientation axes wrapped (theta, gamma) or clamped (beta)."""

    def __init__(self, field: DistanceField):
        self.grid = field.grid
        self.values = np.where(np.isfinite(field.U), field.U, _BIG).reshape(-1)
        g = self.grid
        self.dims = list(g.spatial_shape)
        self.periodic = [False] * g.sd
        if g.orientation is not None:
            kind, n = g.orientation
            if kind == "SE2":
                self.dims += [g.n_orient]
                self.periodic += [True]
            else:
                s2 = g.s2()
                self.dims += [s2.n_beta, s2.n_gamma]
                self.periodic += [False, True]
        self.nd = len(self.dims)

    def _flat(self, idx) -> int:
        g = self.grid
        if g.orientation is None:
            return g.node_id(idx)
        if g.orientation[0] == "SE2":
            return g.node_id(idx[: g.sd], idx[g.sd])
        s2 = g.s2()
        return g.node_id(idx[: g.sd], s2.index(idx[g.sd], idx[g.sd + 1]))

    def __call__(self, p) -> float:
        base, frac = [], []
        for a in range(self.nd):
            x = p[a]
            n = self.dims[a]
            if self.periodic[a]:
                x = x % n
                i0 = int(math.floor(x))
                base.append(i0)
                frac.append(x - i0)
            else:
                x = min(max(x, 0.0), n - 1.0)
                i0 = min(int(math.floor(x)), n - 2) if n > 1 else 0
                base.append(i0)
                frac.append(x - i0 if n > 1 else 0.0)
        total = 0.0
        for corner in itertools.product((0, 1), repeat=self.nd):
            w = 1.0
            idx = []
            for a in range(self.nd):
                w *= frac[a] if corner[a] else 1.0 - frac[a]
                j = base[a] + corner[a]
                if self.periodic[a]:
                    j %= self.dims[a]
                else:
                    j = min(j, self.dims[a] - 1)
                idx.append(j)
            if w:
                total += w * self.values[self._flat(idx)]
        return total


def _axis_scales(grid: LiftedGrid):
    """Physical length of one index step per descent axis."""
    scales = list(grid.spacing)
    if grid.orientation is not None:
        kind, n = grid.orientation
        if kind == "SE2":
            scales += [2 * math.pi / n]
        else:
            s2 = grid.s2()
            scales += [s2.beta_step, s2.gamma_step]
    return np.asarray(scales)


def _metric_diag(field: DistanceField, p):
    """Metric matrix (physical units) at the continuous position p, block
    diagonal: heading-aligned spatial block plus angular block."""
    g = field.grid
    w = tangent_weights(field.metric)
    if g.orientation is None:
        return np.eye(g.sd)
    kind, n = g.orientation
    if kind == "SE2":
        theta = p[g.sd] * (2 * math.pi / n)
        nvec = np.array([math.cos(theta), math.sin(theta)])
        proj = np.outer(nvec, nvec)
        m = np.zeros((3, 3))
        m[:2, :2] = w[1] * proj + w[2] * (np.eye(2) - proj)
        m[2, 2] = w[0]
        return m
    s2 = g.s2()
    beta = (0.5 + p[g.sd]) * s2.beta_step
    gamma = p[g.sd + 1] * s2.gamma_step
    sb = math.sin(beta)
    nvec = np.array([sb * math.cos(gamma), sb * math.sin(gamma), math.cos(beta)])
    proj = np.outer(nvec, nvec)
    m = np.zeros((5, 5))
    m[:3, :3] = w[2] * proj + w[0] * (np.eye(3) - proj)
    m[3, 3] = w[3]
    m[4, 4] = w[4] * max(sb, 1e-6) ** 2
    return m


def backtrack_geodesic(
    field: DistanceField,
    endpoint,
    step_fraction: float = 0.45,
    max_steps: int | None = None,
):
    """Integrate the steepest-descent curve of U from the endpoint back to a
    source.

    Returns a dict with the curve in index coordinates, the spatial polyline
    in physical coordinates, its spatial arc length, and the drop in U.
    Raises NumericalError when the descent stalls on a plateau.
    """
    g = field.grid
    interp = _FieldInterp(field)
    scales = _axis_scales(g)
    nd = interp.nd
    src_pts = [_node_to_axes(g, s) for s in field.sources]

    p = np.asarray(_point_to_axes(g, endpoint), dtype=float)
    u_end = interp(p)
    if not u_end < _BIG:
        raise NumericalError("endpoint has no finite distance value")

    curve = [p.copy()]
    if max_steps is None:
        max_steps = int(40 * sum(interp.dims) / step_fraction)

    for _ in range(max_steps):
        if _near_source(p, src_pts, interp):
            break
        grad = np.zeros(nd)
        for a in range(nd):
            dp = np.zeros(nd)
            dp[a] = 0.5
            grad[a] = (interp(p + dp) - interp(p - dp)) / (scales[a])
        v = -np.linalg.solve(_metric_diag(field, p), grad)
        vn = np.abs(v / scales)  # index steps per unit time
        m = vn.max()
        if m <= 0:
            p = _discrete_step(p, interp)
            curve.append(p.copy())
            continue
        moved = False
        frac = step_fraction
        for _ in range(4):
            cand = _wrap(p + v / scales * (frac / m), interp)
            if interp(cand) < interp(p) - 1e-14:
                p = cand
                moved = True
                break
            frac *= 0.5
        if not moved:
            p = _discrete_step(p, interp)
        curve.append(p.copy())
    else:
        raise NumericalError("geodesic descent exceeded the step budget")

    curve = np.asarray(curve)
    spatial = curve[:, : g.sd] * np.asarray(g.spacing) + np.asarray(g.origin)
    seglen = np.linalg.norm(np.diff(spatial, axis=0), axis=1)
    return {
        "curve_index": curve,
        "spatial": spatial,
        "spatial_length": float(seglen.sum()),
        "u_drop": float(u_end - interp(curve[-1])),
        "u_end": float(u_end),
    }


def _point_to_axes(grid: LiftedGrid, point):
    """Endpoint spec (index tuple incl. orientation) to descent axes."""
    point = tuple(point)
    if grid.orientation is None:
        return [float(v) for v in point]
    if grid.orientation[0] == "SE2":
        return [float(v) for v in point]
    s2 = grid.s2()
    o = int(point[grid.sd])
    return [float(v) for v in point[: grid.sd]] + [float(o // s2.n_gamma), float(o % s2.n_gamma)]


def _node_to_axes(grid: LiftedGrid, node: int):
    sp, o = grid.node_index(node)
    if grid.orientation is None:
        return np.asarray(sp, dtype=float)
    return np.asarray(_point_to_axes(grid, tuple(sp) + (o,)), dtype=float)


def _near_source(p, src_pts, interp) -> bool:
    for s in src_pts:
        d = 0.0
        for a in range(interp.nd):
            delta = abs(p[a] - s[a])
            if interp.periodic[a]:
                delta = min(delta, interp.dims[a] - delta)
            d = max(d, delta)
        if d <= 1.0:
            return True
    return False


def _wrap(p, interp):
    q = p.copy()
    for a in range(interp.nd):
        if interp.periodic[a]:
            q[a] = q[a] % interp.dims[a]
        else:
            q[a] = min(max(q[a], 0.0), interp.dims[a] - 1.0)
    return q


def _discrete_step(p, interp):
    """Plateau fallback: hop to the best strictly-lower lattice neighbour."""
    base = np.rint(p)
    best, best_val = None, interp(p) - 1e-14
    for off in itertools.product((-1.0, 0.0, 1.0), repeat=interp.nd):
        cand = _wrap(base + np.asarray(off), interp)
        val = interp(cand)
        if val < best_val:
            best, best_val = cand, val
    if best is None:
        raise NumericalError("geodesic descent stalled on a plateau")
    return best
