"""Construction of the semi-Lagrangian update stencils.

For every orientation sample the update minimises, over a set of small
simplices spanned by lattice neighbours, the interpolated arrival time plus
the metric length of the step.  The metric is diagonal in the left-invariant
frame, so per orientation sample we assemble the tensor in grid coordinates
(spatial block aligned with the heading, round-sphere angular block) and
precompute the Gram matrices of all simplices.

All arrays are flat and indexed through per-orientation start/count tables so
the solver kernels never touch Python objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..metrics import MetricSpec, tangent_weights
from .grid import LiftedGrid

_PACK = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


def ring_vectors(radius: int) -> list[tuple[int, int]]:
    """Planar lattice directions with coprime components up to the given
    Chebyshev radius, sorted counterclockwise starting at (1, 0)."""
    dirs = []
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            if (a, b) == (0, 0) or max(abs(a), abs(b)) > radius:
                continue
            if math.gcd(abs(a), abs(b)) != 1:
                continue
            dirs.append((a, b))
    dirs.sort(key=lambda v: math.atan2(v[1], v[0]))
    return dirs


def cube_surface_triangles():
    """The 48 (axis, face-diagonal, corner) triangles covering all spatial
    directions of the 26-neighbourhood in 3D."""
    tris = []
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                ex, ey, ez = (sx, 0, 0), (0, sy, 0), (0, 0, sz)
                corner = (sx, sy, sz)
                fxy = (sx, sy, 0)
                fyz = (0, sy, sz)
                fzx = (sx, 0, sz)
                tris += [
                    (ex, fxy, corner),
                    (ey, fxy, corner),
                    (ey, fyz, corner),
                    (ez, fyz, corner),
                    (ez, fzx, corner),
                    (ex, fzx, corner),
                ]
    return tris


ANGULAR_RING = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


@dataclass
class StencilTable:
    """Flat stencil arrays shared by the compiled and pure kernels."""

    sd: int
    n_orient: int
    dir_start: np.ndarray
    dir_count: np.ndarray
    dir_dspat: np.ndarray  # (D, 3) int32, dummy z for planar grids
    dir_dorient: np.ndarray  # (D,) int32 absolute target orientation
    dir_len: np.ndarray  # (D,) unit-cost metric length
    dir_slen: np.ndarray  # (D,) Euclidean spatial length
    simp_start: np.ndarray
    simp_count: np.ndarray
    simp_k: np.ndarray  # (S,) int8
    simp_dirs: np.ndarray  # (S, 3) int32 global direction ids, -1 padded
    simp_Q: np.ndarray  # (S, 6) packed symmetric Gram
    simp_A: np.ndarray  # (S, 6) packed inverse Gram
    simp_P: np.ndarray  # (S, 6) packed spatial Gram
    inc_start: np.ndarray
    inc_count: np.ndarray
    inc_list: np.ndarray
    rev_start: np.ndarray
    rev_count: np.ndarray
    rev_dspat: np.ndarray  # (R, 3) offset from the popped node to the dependent node
    rev_oorient: np.ndarray  # (R,) orientation of the dependent node
    rev_dir: np.ndarray  # (R,) global direction id inside the dependent node's stencil


def _pack_sym(m: np.ndarray) -> np.ndarray:
    out = np.zeros(6)
    k = m.shape[0]
    for slot, (i, j) in enumerate(_PACK):
        if i < k and j < k:
            out[slot] = m[i, j]
    return out


def _metric_blocks(grid: LiftedGrid, spec: MetricSpec, o: int):
    """Spatial (3x3, dummy z) and angular metric blocks at orientation o."""
    w = tangent_weights(spec)
    if grid.orientation is None:
        gs = np.eye(3)
        if grid.sd == 2:
            gs[2, 2] = 0.0
        return gs, np.zeros((0, 0))
    kind, _ = grid.orientation
    if kind == "SE2":
        theta = grid.thetas()[o]
        n = np.array([math.cos(theta), math.sin(theta)])
        proj = np.outer(n, n)
        gs2 = w[1] * proj + w[2] * (np.eye(2) - proj)
        gs = np.zeros((3, 3))
        gs[:2, :2] = gs2
        ga = np.array([[w[0]]])
        return gs, ga
    s2 = grid.s2()
    beta, _ = s2.angles(o)
    n = s2.vectors()[o]
    proj = np.outer(n, n)
    gs = w[2] * proj + w[0] * (np.eye(3) - proj)
    ga = np.diag([w[3], w[4] * math.sin(beta) ** 2])
    return gs, ga


def _spatial_directions(grid: LiftedGrid, scheme: str):
    """List of spatial index offsets (always 3 ints) used by the stencil."""
    if grid.sd == 2:
        radius = 2 if (scheme == "full" and grid.orientation is not None) else 1
        ring = ring_vectors(radius)
        return [(a, b, 0) for a, b in ring], [
            (i, (i + 1) % len(ring)) for i in range(len(ring))
        ]
    offsets = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) != (0, 0, 0):
                    offsets.append((dx, dy, dz))
    index = {v: i for i, v in enumerate(offsets)}
    tris = [(index[a], index[b], index[c]) for a, b, c in cube_surface_triangles()]
    return offsets, tris


def build_stencil(grid: LiftedGrid, spec: MetricSpec, scheme: str = "full") -> StencilTable:
    n_orient = grid.n_orient
    hs = list(grid.spacing) + ([1.0] if grid.sd == 2 else [])

    dir_start, dir_count = [], []
    dirs_dspat, dirs_dorient, dirs_y = [], [], []
    simp_start, simp_count = [], []
    simps_k, simps_dirs = [], []
    simps_Q, simps_A, simps_P = [], [], []

    spat_offsets, spat_faces = _spatial_directions(grid, scheme)

    all_lens, all_slens = [], []
    for o in range(n_orient):
        gs, ga = _metric_blocks(grid, spec, o)
        ad = ga.shape[0]
        base = len(dirs_dspat)
        local = []  # (dspat, dorient, y_phys) index -> global id base + i

        def add_dir(dspat, dorient, y):
            local.append((dspat, dorient, np.asarray(y, dtype=float)))

        spat_ids = []
        for off in spat_offsets:
            y = np.zeros(3 + ad)
            y[:3] = np.asarray(off, dtype=float) * hs
            spat_ids.append(len(local))
            add_dir(off, o, y)

        ang_ids = {}  # ring position -> local id of a regular angular direction
        stitches = []  # (local id, metric length)
        if grid.orientation is not None:
            kind, _ = grid.orientation
            if kind == "SE2":
                n_theta = grid.n_orient
                h_theta = 2 * math.pi / n_theta
                for pos, sgn in enumerate((1, -1)):
                    y = np.zeros(4)
                    y[3] = sgn * h_theta
                    ang_ids[pos] = len(local)
                    add_dir((0, 0, 0), (o + sgn) % n_theta, y)
            else:
                s2 = grid.s2()
                b, g = o // s2.n_gamma, o % s2.n_gamma
                hb, hg = s2.beta_step, s2.gamma_step
                for pos, (db, dg) in enumerate(ANGULAR_RING):
                    tb = b + db
                    if 0 <= tb < s2.n_beta:
                        y = np.zeros(5)
                        y[3] = db * hb
                        y[4] = dg * hg
                        ang_ids[pos] = len(local)
                        add_dir((0, 0, 0), s2.index(tb, g + dg), y)
                    elif dg == 0:
                        # geodesic over the pole: same row, antipodal azimuth
                        betas = s2.betas()
                        dist = 2 * betas[0] if tb < 0 else 2 * (math.pi - betas[-1])
                        lid = len(local)
                        y = np.zeros(5)  # placeholder, length set explicitly
                        add_dir((0, 0, 0), s2.index(b, g + s2.n_beta), y)
                        stitches.append((lid, math.sqrt(ga[0, 0]) * dist))
                # same-row great-circle chords: the azimuth circle is not a
                # geodesic, so multi-step gamma hops carry their exact
                # spherical length (the true arc dips towards the pole)
                beta_here = s2.betas()[b]
                sb2, cb2 = math.sin(beta_here) ** 2, math.cos(beta_here) ** 2
                for dk in range(2, s2.n_beta + 1):
                    for sgn in (1, -1):
                        if dk == s2.n_beta and sgn == -1:
                            continue  # antipodal azimuth: one chord suffices
                        cosang = sb2 * math.cos(dk * hg) + cb2
                        ang = math.acos(max(-1.0, min(1.0, cosang)))
                        lid = len(local)
                        y = np.zeros(5)
                        add_dir((0, 0, 0), s2.index(b, g + sgn * dk), y)
                        stitches.append((lid, math.sqrt(ga[0, 0]) * ang))

        # metric lengths of single directions
        def q_of(ids):
            ys = [local[i][2] for i in ids]
            k = len(ys)
            q = np.zeros((k, k))
            for a in range(k):
                for bb in range(k):
                    ya, yb = ys[a], ys[bb]
                    q[a, bb] = ya[:3] @ gs @ yb[:3]
                    if ad:
                        q[a, bb] += ya[3:] @ ga @ yb[3:]
            return q

        def p_of(ids):
            ys = [local[i][2][:3] for i in ids]
            k = len(ys)
            return np.array([[ys[a] @ ys[bb] for bb in range(k)] for a in range(k)])

        simp_entries = []
        if grid.sd == 3:
            for tri in spat_faces:
                simp_entries.append(tuple(spat_ids[i] for i in tri))
        else:
            for a, bb in spat_faces:
                simp_entries.append((spat_ids[a], spat_ids[bb]))

        if grid.orientation is not None:
            kind, _ = grid.orientation
            if kind == "SE2":
                m = len(spat_ids)
                for t in (0, 1):
                    if t not in ang_ids:
                        continue
                    at = ang_ids[t]
                    for i in range(m):
                        simp_entries.append((spat_ids[i], at))
                    for i in range(m):
                        simp_entries.append((spat_ids[i], spat_ids[(i + 1) % m], at))
            else:
                ring = ANGULAR_RING
                pairs = [
                    (p, (p + 1) % len(ring))
                    for p in range(len(ring))
                    if p in ang_ids and (p + 1) % len(ring) in ang_ids
                ]
                for p, pq in pairs:
                    simp_entries.append((ang_ids[p], ang_ids[pq]))
                for s in spat_ids:
                    for p in ang_ids.values():
                        simp_entries.append((s, p))
                if scheme == "full":
                    for s in spat_ids:
                        for p, pq in pairs:
                            simp_entries.append((s, ang_ids[p], ang_ids[pq]))

        # assemble per-orientation tables
        dir_start.append(base)
        dir_count.append(len(local))
        for dspat, dorient, y in local:
            dirs_dspat.append(dspat)
            dirs_dorient.append(dorient)
            dirs_y.append(y)

        sbase = len(simps_k)
        simp_start.append(sbase)
        stitch_lens = dict(stitches)
        lens = np.zeros(len(local))
        slens = np.zeros(len(local))
        for i, (_, _, y) in enumerate(local):
            if i in stitch_lens:
                lens[i] = stitch_lens[i]
                slens[i] = 0.0
            else:
                q = q_of([i])
                lens[i] = math.sqrt(max(q[0, 0], 0.0))
                slens[i] = float(np.linalg.norm(y[:3]))
        dir_len_local = lens
        dir_slen_local = slens

        for lid, _ in stitches:
            simp_entries.append((lid,))

        for ids in simp_entries:
            k = len(ids)
            q = q_of(list(ids))
            if k == 1 and ids[0] in stitch_lens:
                q = np.array([[stitch_lens[ids[0]] ** 2]])
            try:
                a_inv = np.linalg.inv(q)
            except np.linalg.LinAlgError:
                continue
            simps_k.append(k)
            simps_dirs.append([base + ids[i] if i < k else -1 for i in range(3)])
            simps_Q.append(_pack_sym(q))
            simps_A.append(_pack_sym(a_inv))
            simps_P.append(_pack_sym(p_of(list(ids))))
        simp_count.append(len(simps_k) - sbase)

        all_lens.append(dir_len_local)
        all_slens.append(dir_slen_local)

    dir_dspat = np.asarray(dirs_dspat, dtype=np.int32).reshape(-1, 3)
    dir_dorient = np.asarray(dirs_dorient, dtype=np.int32)
    dir_len = np.concatenate(all_lens)
    dir_slen = np.concatenate(all_slens)
    simp_dirs = np.asarray(simps_dirs, dtype=np.int32).reshape(-1, 3)
    simp_k = np.asarray(simps_k, dtype=np.int8)
    simp_Q = np.asarray(simps_Q).reshape(-1, 6)
    simp_A = np.asarray(simps_A).reshape(-1, 6)
    simp_P = np.asarray(simps_P).reshape(-1, 6)
    dir_start = np.asarray(dir_start, dtype=np.int64)
    dir_count = np.asarray(dir_count, dtype=np.int64)
    simp_start = np.asarray(simp_start, dtype=np.int64)
    simp_count = np.asarray(simp_count, dtype=np.int64)

    # incidence: simplices containing each global direction
    n_dirs = len(dir_dorient)
    inc = [[] for _ in range(n_dirs)]
    for s in range(len(simp_k)):
        for t in range(simp_k[s]):
            inc[simp_dirs[s, t]].append(s)
    inc_count = np.array([len(x) for x in inc], dtype=np.int64)
    inc_start = np.concatenate([[0], np.cumsum(inc_count)[:-1]]).astype(np.int64)
    inc_list = (
        np.concatenate([np.asarray(x, dtype=np.int64) for x in inc])
        if n_dirs
        else np.zeros(0, dtype=np.int64)
    )

    # reverse stencil grouped by the orientation of the popped node
    rev = [[] for _ in range(n_orient)]
    for o in range(n_orient):
        for d in range(dir_start[o], dir_start[o] + dir_count[o]):
            rev[dir_dorient[d]].append((dir_dspat[d], o, d))
    rev_count = np.array([len(x) for x in rev], dtype=np.int64)
    rev_start = np.concatenate([[0], np.cumsum(rev_count)[:-1]]).astype(np.int64)
    rev_dspat = np.zeros((int(rev_count.sum()), 3), dtype=np.int32)
    rev_oorient = np.zeros(int(rev_count.sum()), dtype=np.int32)
    rev_dir = np.zeros(int(rev_count.sum()), dtype=np.int64)
    pos = 0
    for o in range(n_orient):
        for dspat, oo, d in rev[o]:
            rev_dspat[pos] = dspat
            rev_oorient[pos] = oo
            rev_dir[pos] = d
            pos += 1

    return StencilTable(
        sd=grid.sd,
        n_orient=n_orient,
        dir_start=dir_start,
        dir_count=dir_count,
        dir_dspat=dir_dspat,
        dir_dorient=dir_dorient,
        dir_len=dir_len,
        dir_slen=dir_slen,
        simp_start=simp_start,
        simp_count=simp_count,
        simp_k=simp_k,
        simp_dirs=simp_dirs,
        simp_Q=simp_Q,
        simp_A=simp_A,
        simp_P=simp_P,
        inc_start=inc_start,
        inc_count=inc_count,
        inc_list=inc_list,
        rev_start=rev_start,
        rev_count=rev_count,
        rev_dspat=rev_dspat,
        rev_oorient=rev_oorient,
        rev_dir=rev_dir,
    )
