"""Pure-Python fast-marching kernel.

Label-correcting variant of the causal solver: nodes are popped from a binary
heap in increasing tentative order and may be re-inserted if a later update
improves them, which keeps the solved field a fixed point of the local update
even where strong anisotropy breaks the acuteness that one-pass fast marching
assumes.  The compiled kernel in ``_core.pyx`` implements the identical
algorithm; this module is the fallback selected at import time and the
reference the compiled kernel is tested against.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

INF = math.inf

# packed symmetric 3x3 slots: (0,0)(0,1)(0,2)(1,1)(1,2)(2,2)
_SLOT = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 1): 3, (1, 2): 4, (2, 2): 5}

_LAMBDA_TOL = -1e-9


def _sym(packed, i, j):
    return packed[_SLOT[(i, j) if i <= j else (j, i)]]


def _solve_subset(q_packed, a_packed, u, c, active):
    """Minimise sum(lam*u) + c*sqrt(lam^T Q lam) over the simplex spanned by
    the active vertex subset.  Returns (value, lam_full or None)."""
    k = len(active)
    if k == 1:
        i = active[0]
        return u[i] + c * math.sqrt(max(_sym(q_packed, i, i), 0.0)), {i: 1.0}
    if k == 2:
        i, j = active
        qaa, qab, qbb = _sym(q_packed, i, i), _sym(q_packed, i, j), _sym(q_packed, j, j)
        det = qaa * qbb - qab * qab
        if det <= 0:
            return INF, None
        aaa, aab, abb = qbb / det, -qab / det, qaa / det
        ua, ub = u[i], u[j]
        au_a = aaa * ua + aab * ub
        au_b = aab * ua + abb * ub
        s11 = aaa + 2 * aab + abb
        s1u = au_a + au_b
        suu = ua * au_a + ub * au_b
        disc = s1u * s1u - s11 * (suu - c * c)
        if disc < 0 or s11 <= 0:
            return INF, None
        r = math.sqrt(disc)
        mu = (s1u + r) / s11
        la = mu * (aaa + aab) - au_a
        lb = mu * (aab + abb) - au_b
        if r <= 0 or la < _LAMBDA_TOL * r or lb < _LAMBDA_TOL * r:
            return INF, None
        return mu, {i: la / r, j: lb / r}
    # k == 3, full simplex: use the precomputed inverse
    a = a_packed
    au = [0.0, 0.0, 0.0]
    rowsum = [0.0, 0.0, 0.0]
    for i in range(3):
        for j in range(3):
            aij = _sym(a, i, j)
            au[i] += aij * u[j]
            rowsum[i] += aij
    s11 = sum(rowsum)
    s1u = sum(au)
    suu = sum(u[i] * au[i] for i in range(3))
    disc = s1u * s1u - s11 * (suu - c * c)
    if disc < 0 or s11 <= 0:
        return INF, None
    r = math.sqrt(disc)
    mu = (s1u + r) / s11
    lam = [mu * rowsum[i] - au[i] for i in range(3)]
    if r <= 0 or min(lam) < _LAMBDA_TOL * r:
        return INF, None
    return mu, {0: lam[0] / r, 1: lam[1] / r, 2: lam[2] / r}


def _simplex_update(st, s, trigger_local, u, finite, c):
    """Best update through simplex s restricted to faces containing the
    triggering vertex; returns (value, lam dict over local vertex ids)."""
    k = int(st.simp_k[s])
    q = st.simp_Q[s]
    active = [i for i in range(k) if finite[i]]
    if trigger_local not in active:
        return INF, None
    best, best_lam = INF, None
    if len(active) == k:
        val, lam = _solve_subset(q, st.simp_A[s], u, c, active)
        if lam is not None and val < best:
            best, best_lam = val, lam
    if k >= 2 and (best_lam is None):
        # faces containing the trigger
        others = [i for i in active if i != trigger_local]
        for j in others:
            val, lam = _solve_subset(q, None, u, c, [trigger_local, j])
            if lam is not None and val < best:
                best, best_lam = val, lam
        val, lam = _solve_subset(q, None, u, c, [trigger_local])
        if val < best:
            best, best_lam = val, lam
    elif k == 1:
        val, lam = _solve_subset(q, None, u, c, [trigger_local])
        if val < best:
            best, best_lam = val, lam
    return best, best_lam


def solve(
    st,
    padded_shape,
    cost,
    src_nodes,
    src_vals=None,
    src_uls=None,
    src_fixed=None,
    ul_stop=-1.0,
    u_stop=INF,
    mask=None,
    kp_lmax=-1.0,
    kp_max=1 << 30,
    U=None,
    Ul=None,
    watch_nodes=None,
):
    """Run the solver; returns (U, Ul, keypoints, stats)."""
    nx, ny, nz = padded_shape
    n_orient = st.n_orient
    n_nodes = nx * ny * nz * n_orient
    if U is None:
        U = np.full(n_nodes, INF)
        Ul = np.full(n_nodes, INF)
    is_source = np.zeros(n_nodes, dtype=np.uint8)
    processed = np.zeros(n_nodes, dtype=np.uint8)
    watch_flag = None
    watch_remaining = 0
    if watch_nodes is not None and len(watch_nodes):
        watch_flag = np.zeros(n_nodes, dtype=np.uint8)
        for w in np.unique(np.asarray(watch_nodes, dtype=np.int64)):
            watch_flag[w] = 1
            watch_remaining += 1

    heap = []
    counter = 0
    cnt_below = 0
    pops = stale = pushes = reinserts = 0
    max_violation = 0.0
    last_val = -INF
    keypoints = []

    def push(node, val):
        nonlocal counter, pushes, cnt_below
        flag = 1 if (ul_stop >= 0 and Ul[node] < ul_stop) else 0
        cnt_below += flag
        heapq.heappush(heap, (val, counter, node, flag))
        counter += 1
        pushes += 1

    if src_vals is None:
        src_vals = np.zeros(len(src_nodes))
    if src_uls is None:
        src_uls = np.zeros(len(src_nodes))
    if src_fixed is None:
        src_fixed = np.ones(len(src_nodes), dtype=np.uint8)
    for i, nstart in enumerate(src_nodes):
        if src_vals[i] >= U[nstart]:
            continue
        U[nstart] = float(src_vals[i])
        Ul[nstart] = float(src_uls[i])
        if src_fixed[i]:
            is_source[nstart] = 1
        push(nstart, float(src_vals[i]))

    while heap:
        val, _, node, flag = heapq.heappop(heap)
        if flag:
            cnt_below -= 1
        if val != U[node]:
            stale += 1
            continue
        if val > u_stop:
            break
        pops += 1
        if watch_flag is not None and watch_flag[node]:
            watch_flag[node] = 0
            watch_remaining -= 1
            if watch_remaining == 0:
                break
        if val < last_val:
            max_violation = max(max_violation, last_val - val)
        else:
            last_val = val

        # key-point hook: first popped node beyond the arc-length threshold
        if (
            kp_lmax >= 0
            and not is_source[node]
            and mask is not None
            and mask[node]
            and Ul[node] >= kp_lmax
        ):
            keypoints.append(node)
            if len(keypoints) >= kp_max:
                break
            U[node] = 0.0
            Ul[node] = 0.0
            is_source[node] = 1
            push(node, 0.0)
            continue

        if ul_stop >= 0 and cnt_below == 0 and Ul[node] >= ul_stop:
            break

        # decode the popped node
        op = node % n_orient
        s_flat = node // n_orient
        iz = s_flat % nz
        t = s_flat // nz
        iy = t % ny
        ix = t // ny
        u_p = U[node]

        for r in range(st.rev_start[op], st.rev_start[op] + st.rev_count[op]):
            jx = ix - st.rev_dspat[r, 0]
            jy = iy - st.rev_dspat[r, 1]
            jz = iz - st.rev_dspat[r, 2]
            if not (0 <= jx < nx and 0 <= jy < ny and 0 <= jz < nz):
                continue
            x = ((jx * ny + jy) * nz + jz) * n_orient + st.rev_oorient[r]
            if U[x] <= u_p or is_source[x]:
                continue
            c = cost[x]
            d_global = st.rev_dir[r]
            improved = False
            for ii in range(st.inc_start[d_global], st.inc_start[d_global] + st.inc_count[d_global]):
                s = st.inc_list[ii]
                k = int(st.simp_k[s])
                u_vert = [INF, INF, INF]
                finite = [False, False, False]
                trig = -1
                ok = True
                for tloc in range(k):
                    d = st.simp_dirs[s, tloc]
                    if d == d_global:
                        trig = tloc
                    vx = jx + st.dir_dspat[d, 0]
                    vy = jy + st.dir_dspat[d, 1]
                    vz = jz + st.dir_dspat[d, 2]
                    if not (0 <= vx < nx and 0 <= vy < ny and 0 <= vz < nz):
                        continue
                    vn = ((vx * ny + vy) * nz + vz) * n_orient + st.dir_dorient[d]
                    if U[vn] < INF:
                        u_vert[tloc] = U[vn]
                        finite[tloc] = True
                if trig < 0 or not finite[trig]:
                    continue
                valnew, lam = _simplex_update(st, s, trig, u_vert, finite, c)
                if lam is not None and valnew < U[x] - 1e-15:
                    # arc length through the same barycentric step
                    p = st.simp_P[s]
                    step2 = 0.0
                    ulnew = 0.0
                    for i_l, li in lam.items():
                        d = st.simp_dirs[s, i_l]
                        vx = jx + st.dir_dspat[d, 0]
                        vy = jy + st.dir_dspat[d, 1]
                        vz = jz + st.dir_dspat[d, 2]
                        vn = ((vx * ny + vy) * nz + vz) * n_orient + st.dir_dorient[d]
                        ulnew += li * Ul[vn]
                        for j_l, lj in lam.items():
                            step2 += li * lj * _sym(p, i_l, j_l)
                    # pole stitches have zero spatial step by construction
                    ulnew += math.sqrt(max(step2, 0.0))
                    if processed[x]:
                        reinserts += 1
                    U[x] = valnew
                    Ul[x] = ulnew
                    improved = True
            if improved:
                push(x, U[x])
        processed[node] = 1

    stats = {
        "pops": pops,
        "stale": stale,
        "pushes": pushes,
        "reinserts": reinserts,
        "max_monotonicity_violation": max_violation,
    }
    return U, Ul, np.asarray(keypoints, dtype=np.int64), stats
