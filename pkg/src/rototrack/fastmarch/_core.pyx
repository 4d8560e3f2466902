# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled fast-marching kernel.

Algorithmic twin of ``_purepy.solve`` (label-correcting heap, simplex updates
restricted to faces containing the triggering vertex); see that module for
the commented reference implementation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free, malloc, realloc

cnp.import_array()

DEF LAMBDA_TOL = -1e-9
DEF IMPROVE_EPS = 1e-15

cdef struct Heap:
    double* val
    long long* node
    long long* cnt
    unsigned char* flag
    Py_ssize_t size
    Py_ssize_t cap
    long long counter


cdef int heap_init(Heap* h, Py_ssize_t cap) except -1:
    h.val = <double*> malloc(cap * sizeof(double))
    h.node = <long long*> malloc(cap * sizeof(long long))
    h.cnt = <long long*> malloc(cap * sizeof(long long))
    h.flag = <unsigned char*> malloc(cap * sizeof(unsigned char))
    if not h.val or not h.node or not h.cnt or not h.flag:
        raise MemoryError()
    h.size = 0
    h.cap = cap
    h.counter = 0
    return 0


cdef void heap_free(Heap* h) noexcept:
    free(h.val); free(h.node); free(h.cnt); free(h.flag)


cdef int heap_grow(Heap* h) except -1:
    cdef Py_ssize_t cap = h.cap * 2
    h.val = <double*> realloc(h.val, cap * sizeof(double))
    h.node = <long long*> realloc(h.node, cap * sizeof(long long))
    h.cnt = <long long*> realloc(h.cnt, cap * sizeof(long long))
    h.flag = <unsigned char*> realloc(h.flag, cap * sizeof(unsigned char))
    if not h.val or not h.node or not h.cnt or not h.flag:
        raise MemoryError()
    h.cap = cap
    return 0


cdef inline bint heap_less(Heap* h, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    if h.val[a] != h.val[b]:
        return h.val[a] < h.val[b]
    return h.cnt[a] < h.cnt[b]


cdef inline void heap_swap(Heap* h, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef double tv = h.val[a]
    cdef long long tn = h.node[a]
    cdef long long tc = h.cnt[a]
    cdef unsigned char tf = h.flag[a]
    h.val[a] = h.val[b]
    h.val[b] = tv
    h.node[a] = h.node[b]
    h.node[b] = tn
    h.cnt[a] = h.cnt[b]
    h.cnt[b] = tc
    h.flag[a] = h.flag[b]
    h.flag[b] = tf


cdef int heap_push(Heap* h, double val, long long node, unsigned char flag) except -1:
    if h.size == h.cap:
        heap_grow(h)
    cdef Py_ssize_t i = h.size, parent
    h.val[i] = val
    h.node[i] = node
    h.cnt[i] = h.counter
    h.flag[i] = flag
    h.counter += 1
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if heap_less(h, i, parent):
            heap_swap(h, i, parent)
            i = parent
        else:
            break
    return 0


cdef void heap_pop(Heap* h, double* val, long long* node, unsigned char* flag) noexcept nogil:
    val[0] = h.val[0]
    node[0] = h.node[0]
    flag[0] = h.flag[0]
    h.size -= 1
    if h.size == 0:
        return
    h.val[0] = h.val[h.size]
    h.node[0] = h.node[h.size]
    h.cnt[0] = h.cnt[h.size]
    h.flag[0] = h.flag[h.size]
    cdef Py_ssize_t i = 0, left, right, best
    while True:
        left = 2 * i + 1
        right = left + 1
        best = i
        if left < h.size and heap_less(h, left, best):
            best = left
        if right < h.size and heap_less(h, right, best):
            best = right
        if best == i:
            return
        heap_swap(h, i, best)
        i = best


cdef inline double psym(const double* packed, int i, int j) noexcept nogil:
    cdef int a = i if i <= j else j
    cdef int b = j if i <= j else i
    if a == 0:
        return packed[b]          # slots 0,1,2
    if a == 1:
        return packed[2 + b]      # slots 3,4
    return packed[5]


cdef double solve_edge(const double* q, double ua, double ub, double c,
                       int ia, int ib, double* lam) noexcept nogil:
    cdef double qaa = psym(q, ia, ia)
    cdef double qab = psym(q, ia, ib)
    cdef double qbb = psym(q, ib, ib)
    cdef double det = qaa * qbb - qab * qab
    if det <= 0:
        return INFINITY
    cdef double aaa = qbb / det
    cdef double aab = -qab / det
    cdef double abb = qaa / det
    cdef double au_a = aaa * ua + aab * ub
    cdef double au_b = aab * ua + abb * ub
    cdef double s11 = aaa + 2 * aab + abb
    cdef double s1u = au_a + au_b
    cdef double suu = ua * au_a + ub * au_b
    cdef double disc = s1u * s1u - s11 * (suu - c * c)
    if disc < 0 or s11 <= 0:
        return INFINITY
    cdef double r = sqrt(disc)
    cdef double mu = (s1u + r) / s11
    cdef double la = mu * (aaa + aab) - au_a
    cdef double lb = mu * (aab + abb) - au_b
    if r <= 0 or la < LAMBDA_TOL * r or lb < LAMBDA_TOL * r:
        return INFINITY
    lam[0] = la / r
    lam[1] = lb / r
    return mu


cdef double solve_full3(const double* a, const double* u, double c, double* lam) noexcept nogil:
    cdef double au0 = 0, au1 = 0, au2 = 0
    cdef double rs0 = 0, rs1 = 0, rs2 = 0
    cdef double aij
    cdef int i, j
    cdef double uu[3]
    uu[0] = u[0]; uu[1] = u[1]; uu[2] = u[2]
    au0 = psym(a, 0, 0) * uu[0] + psym(a, 0, 1) * uu[1] + psym(a, 0, 2) * uu[2]
    au1 = psym(a, 1, 0) * uu[0] + psym(a, 1, 1) * uu[1] + psym(a, 1, 2) * uu[2]
    au2 = psym(a, 2, 0) * uu[0] + psym(a, 2, 1) * uu[1] + psym(a, 2, 2) * uu[2]
    rs0 = psym(a, 0, 0) + psym(a, 0, 1) + psym(a, 0, 2)
    rs1 = psym(a, 1, 0) + psym(a, 1, 1) + psym(a, 1, 2)
    rs2 = psym(a, 2, 0) + psym(a, 2, 1) + psym(a, 2, 2)
    cdef double s11 = rs0 + rs1 + rs2
    cdef double s1u = au0 + au1 + au2
    cdef double suu = uu[0] * au0 + uu[1] * au1 + uu[2] * au2
    cdef double disc = s1u * s1u - s11 * (suu - c * c)
    if disc < 0 or s11 <= 0:
        return INFINITY
    cdef double r = sqrt(disc)
    cdef double mu = (s1u + r) / s11
    cdef double l0 = mu * rs0 - au0
    cdef double l1 = mu * rs1 - au1
    cdef double l2 = mu * rs2 - au2
    cdef double lmin = l0
    if l1 < lmin: lmin = l1
    if l2 < lmin: lmin = l2
    if r <= 0 or lmin < LAMBDA_TOL * r:
        return INFINITY
    lam[0] = l0 / r
    lam[1] = l1 / r
    lam[2] = l2 / r
    return mu


def solve(
    st,
    padded_shape,
    cnp.ndarray[cnp.float64_t, ndim=1] cost,
    cnp.ndarray[cnp.int64_t, ndim=1] src_nodes,
    src_vals=None,
    src_uls=None,
    src_fixed=None,
    double ul_stop=-1.0,
    double u_stop=INFINITY,
    mask=None,
    double kp_lmax=-1.0,
    long long kp_max=(1 << 30),
    U=None,
    Ul=None,
    watch_nodes=None,
):
    cdef long long nx = padded_shape[0]
    cdef long long ny = padded_shape[1]
    cdef long long nz = padded_shape[2]
    cdef long long n_orient = st.n_orient
    cdef long long n_nodes = nx * ny * nz * n_orient

    if U is None:
        U = np.full(n_nodes, np.inf)
        Ul = np.full(n_nodes, np.inf)
    cdef double[::1] u_arr = U
    cdef double[::1] ul_arr = Ul
    cdef double[::1] cost_v = cost

    cdef cnp.ndarray mask_arr
    cdef bint has_mask = mask is not None
    if has_mask:
        mask_arr = np.ascontiguousarray(mask, dtype=np.uint8)
    else:
        mask_arr = np.zeros(1, dtype=np.uint8)
    cdef unsigned char[::1] mask_v = mask_arr

    # stencil tables
    cdef long long[::1] rev_start = st.rev_start
    cdef long long[::1] rev_count = st.rev_count
    cdef int[:, ::1] rev_dspat = st.rev_dspat
    cdef int[::1] rev_oorient = st.rev_oorient
    cdef long long[::1] rev_dir = st.rev_dir
    cdef int[:, ::1] dir_dspat = st.dir_dspat
    cdef int[::1] dir_dorient = st.dir_dorient
    cdef long long[::1] inc_start = st.inc_start
    cdef long long[::1] inc_count = st.inc_count
    cdef long long[::1] inc_list = st.inc_list
    cdef signed char[::1] simp_k = st.simp_k
    cdef int[:, ::1] simp_dirs = st.simp_dirs
    cdef double[:, ::1] simp_Q = st.simp_Q
    cdef double[:, ::1] simp_A = st.simp_A
    cdef double[:, ::1] simp_P = st.simp_P

    cdef cnp.ndarray is_source_np = np.zeros(n_nodes, dtype=np.uint8)
    cdef cnp.ndarray processed_np = np.zeros(n_nodes, dtype=np.uint8)
    cdef unsigned char[::1] is_source = is_source_np
    cdef unsigned char[::1] processed = processed_np

    cdef bint has_watch = watch_nodes is not None and len(watch_nodes) > 0
    cdef cnp.ndarray watch_np
    cdef long long watch_remaining = 0
    if has_watch:
        watch_np = np.zeros(n_nodes, dtype=np.uint8)
        for w in np.unique(np.asarray(watch_nodes, dtype=np.int64)):
            watch_np[w] = 1
            watch_remaining += 1
    else:
        watch_np = np.zeros(1, dtype=np.uint8)
    cdef unsigned char[::1] watch_v = watch_np

    cdef Heap heap
    cdef Py_ssize_t cap0 = <Py_ssize_t> (n_nodes // 2)
    heap_init(&heap, 1024 if cap0 < 1024 else cap0)

    cdef long long cnt_below = 0
    cdef long long pops = 0, stale = 0, pushes = 0, reinserts = 0
    cdef double max_violation = 0.0
    cdef double last_val = -INFINITY
    keypoints = []

    if src_vals is None:
        src_vals = np.zeros(src_nodes.shape[0])
    if src_uls is None:
        src_uls = np.zeros(src_nodes.shape[0])
    if src_fixed is None:
        src_fixed = np.ones(src_nodes.shape[0], dtype=np.uint8)
    cdef double[::1] src_vals_v = np.ascontiguousarray(src_vals, dtype=np.float64)
    cdef double[::1] src_uls_v = np.ascontiguousarray(src_uls, dtype=np.float64)
    cdef unsigned char[::1] src_fixed_v = np.ascontiguousarray(src_fixed, dtype=np.uint8)

    cdef long long i, nstart
    cdef unsigned char fl
    for i in range(src_nodes.shape[0]):
        nstart = src_nodes[i]
        if src_vals_v[i] >= u_arr[nstart]:
            continue
        u_arr[nstart] = src_vals_v[i]
        ul_arr[nstart] = src_uls_v[i]
        if src_fixed_v[i]:
            is_source[nstart] = 1
        fl = 1 if (ul_stop >= 0 and ul_arr[nstart] < ul_stop) else 0
        cnt_below += fl
        heap_push(&heap, src_vals_v[i], nstart, fl)
        pushes += 1

    cdef double val, u_p, c, valnew, best, bestul
    cdef long long node, op, s_flat, t, ix, iy, iz, x, r, d_global, ii, s, vn
    cdef long long jx, jy, jz, vx, vy, vz, d
    cdef long long kk, tloc, trig, nfin, oth
    cdef unsigned char flag
    cdef double uvert[3]
    cdef long long vnode[3]
    cdef bint finite[3]
    cdef double lam[3]
    cdef double lam_best[3]
    cdef long long lbl
    cdef int lam_idx[3]
    cdef int lam_n, li, lj
    cdef double step2, ulnew
    cdef bint improved, have
    cdef double q_local[6]
    cdef double a_local[6]
    cdef double p_local[6]

    while heap.size > 0:
        heap_pop(&heap, &val, &node, &flag)
        if flag:
            cnt_below -= 1
        if val != u_arr[node]:
            stale += 1
            continue
        if val > u_stop:
            break
        pops += 1
        if has_watch and watch_v[node]:
            watch_v[node] = 0
            watch_remaining -= 1
            if watch_remaining == 0:
                break
        if val < last_val:
            if last_val - val > max_violation:
                max_violation = last_val - val
        else:
            last_val = val

        if (
            kp_lmax >= 0
            and not is_source[node]
            and has_mask
            and mask_v[node]
            and ul_arr[node] >= kp_lmax
        ):
            keypoints.append(node)
            if len(keypoints) >= kp_max:
                break
            u_arr[node] = 0.0
            ul_arr[node] = 0.0
            is_source[node] = 1
            fl = 1 if (ul_stop >= 0 and ul_arr[node] < ul_stop) else 0
            cnt_below += fl
            heap_push(&heap, 0.0, node, fl)
            pushes += 1
            continue

        if ul_stop >= 0 and cnt_below == 0 and ul_arr[node] >= ul_stop:
            break

        op = node % n_orient
        s_flat = node // n_orient
        iz = s_flat % nz
        t = s_flat // nz
        iy = t % ny
        ix = t // ny
        u_p = u_arr[node]

        for r in range(rev_start[op], rev_start[op] + rev_count[op]):
            jx = ix - rev_dspat[r, 0]
            jy = iy - rev_dspat[r, 1]
            jz = iz - rev_dspat[r, 2]
            if jx < 0 or jx >= nx or jy < 0 or jy >= ny or jz < 0 or jz >= nz:
                continue
            x = ((jx * ny + jy) * nz + jz) * n_orient + rev_oorient[r]
            if u_arr[x] <= u_p or is_source[x]:
                continue
            c = cost_v[x]
            d_global = rev_dir[r]
            improved = False
            for ii in range(inc_start[d_global], inc_start[d_global] + inc_count[d_global]):
                s = inc_list[ii]
                kk = simp_k[s]
                trig = -1
                nfin = 0
                for tloc in range(kk):
                    d = simp_dirs[s, tloc]
                    if d == d_global:
                        trig = tloc
                    finite[tloc] = False
                    uvert[tloc] = INFINITY
                    vx = jx + dir_dspat[d, 0]
                    vy = jy + dir_dspat[d, 1]
                    vz = jz + dir_dspat[d, 2]
                    if vx < 0 or vx >= nx or vy < 0 or vy >= ny or vz < 0 or vz >= nz:
                        continue
                    vn = ((vx * ny + vy) * nz + vz) * n_orient + dir_dorient[d]
                    if u_arr[vn] < INFINITY:
                        uvert[tloc] = u_arr[vn]
                        vnode[tloc] = vn
                        finite[tloc] = True
                        nfin += 1
                if trig < 0 or not finite[trig]:
                    continue
                for li in range(6):
                    q_local[li] = simp_Q[s, li]
                    a_local[li] = simp_A[s, li]

                best = INFINITY
                lam_n = 0
                have = False
                # full simplex when every vertex is finite
                if nfin == kk and kk == 3:
                    best = solve_full3(a_local, uvert, c, lam)
                    if best < INFINITY:
                        lam_idx[0] = 0; lam_idx[1] = 1; lam_idx[2] = 2
                        lam_best[0] = lam[0]; lam_best[1] = lam[1]; lam_best[2] = lam[2]
                        lam_n = 3
                        have = True
                elif nfin == kk and kk == 2:
                    best = solve_edge(q_local, uvert[0], uvert[1], c, 0, 1, lam)
                    if best < INFINITY:
                        lam_idx[0] = 0; lam_idx[1] = 1
                        lam_best[0] = lam[0]; lam_best[1] = lam[1]
                        lam_n = 2
                        have = True
                if not have and kk >= 2:
                    # faces containing the trigger
                    for oth in range(kk):
                        if oth == trig or not finite[oth]:
                            continue
                        valnew = solve_edge(q_local, uvert[trig], uvert[oth], c,
                                            <int> trig, <int> oth, lam)
                        if valnew < best:
                            best = valnew
                            lam_idx[0] = <int> trig; lam_idx[1] = <int> oth
                            lam_best[0] = lam[0]; lam_best[1] = lam[1]
                            lam_n = 2
                            have = True
                    valnew = uvert[trig] + c * sqrt(psym(q_local, <int> trig, <int> trig))
                    if valnew < best:
                        best = valnew
                        lam_idx[0] = <int> trig
                        lam_best[0] = 1.0
                        lam_n = 1
                        have = True
                elif not have and kk == 1:
                    best = uvert[trig] + c * sqrt(psym(q_local, <int> trig, <int> trig))
                    lam_idx[0] = <int> trig
                    lam_best[0] = 1.0
                    lam_n = 1
                    have = True

                if have and best < u_arr[x] - IMPROVE_EPS:
                    for li in range(6):
                        p_local[li] = simp_P[s, li]
                    step2 = 0.0
                    ulnew = 0.0
                    for li in range(lam_n):
                        ulnew += lam_best[li] * ul_arr[vnode[lam_idx[li]]]
                        for lj in range(lam_n):
                            step2 += lam_best[li] * lam_best[lj] * psym(
                                p_local, lam_idx[li], lam_idx[lj]
                            )
                    if step2 > 0:
                        ulnew += sqrt(step2)
                    if processed[x]:
                        reinserts += 1
                    u_arr[x] = best
                    ul_arr[x] = ulnew
                    improved = True
            if improved:
                fl = 1 if (ul_stop >= 0 and ul_arr[x] < ul_stop) else 0
                cnt_below += fl
                heap_push(&heap, u_arr[x], x, fl)
                pushes += 1
        processed[node] = 1

    heap_free(&heap)
    stats = {
        "pops": int(pops),
        "stale": int(stale),
        "pushes": int(pushes),
        "reinserts": int(reinserts),
        "max_monotonicity_violation": float(max_violation),
    }
    return np.asarray(U), np.asarray(Ul), np.asarray(keypoints, dtype=np.int64), stats

