# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-descent kernels.

Graphs are given in CSR form; ``weights[e]`` already folds the edge
multiplicity and the factor r^(1-p), so the p-Laplacian at vertex i is
sum_e weights[e] * phi_p(values[indices[e]] - values[i]) and an edge
contributes weights[e] * |difference|^p to the energy.
"""

from libc.math cimport fabs, pow, copysign, INFINITY

import numpy as np

cdef double EPS = 2.220446049250313e-16


cdef inline double phi(double t, double p) noexcept nogil:
    if t == 0.0:
        return 0.0
    return copysign(pow(fabs(t), p - 1.0), t)


cdef double vertex_res(const long[:] indptr, const long[:] indices, const double[:] weights,
                       double[:] values, long i, double p) noexcept nogil:
    cdef double s = 0.0, ui = values[i]
    cdef long e
    for e in range(indptr[i], indptr[i + 1]):
        s += weights[e] * phi(values[indices[e]] - ui, p)
    return s


cdef double root_1d(double[:] v, double[:] w, long L, double t, double p) noexcept nogil:
    """Solve sum_a w[a] phi(v[a] - t) = 0 for t; the map is decreasing in t."""
    cdef long a, it
    cdef double lo = INFINITY, hi = -INFINITY, g, dg, d, ad, tn
    if L == 0:
        return t
    for a in range(L):
        if v[a] < lo:
            lo = v[a]
        if v[a] > hi:
            hi = v[a]
    if lo == hi:
        return lo
    if t <= lo or t >= hi:
        t = 0.5 * (lo + hi)
    for it in range(200):
        g = 0.0
        dg = 0.0
        for a in range(L):
            d = v[a] - t
            if d == 0.0:
                if p < 2.0:
                    dg = INFINITY
                elif p == 2.0:
                    dg += w[a]
                continue
            ad = fabs(d)
            g += w[a] * copysign(pow(ad, p - 1.0), d)
            dg += w[a] * pow(ad, p - 2.0)
        if g == 0.0:
            return t
        if g > 0.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 2.0 * EPS * fabs(t) or hi - lo <= 1e-300:
            return 0.5 * (lo + hi)
        tn = 0.5 * (lo + hi)
        if dg > 0.0 and dg < INFINITY:
            tn = t + g / ((p - 1.0) * dg)
            if not (tn > lo and tn < hi):
                tn = 0.5 * (lo + hi)
        if fabs(tn - t) <= EPS * fabs(t):
            return tn
        t = tn
    return t


cdef long find(long[:] parent, long i) noexcept nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


cdef double fused_pass(const long[:] indptr, const long[:] indices, const double[:] weights,
                       double[:] values, const long[:] free, double p, double fuse,
                       long[:] parent, const long[:] is_free, long[:] members, long[:] slot,
                       double[:] bv, double[:] bw) noexcept nogil:
    """Shift clusters of nearly equal free vertices rigidly.

    Clusters are components of free-free edges with |difference| <= fuse.
    Each cluster moves by the exact minimiser of the energy along its
    common direction (only edges leaving the cluster change), so every
    move is a descent step.  Returns the largest shift.
    """
    cdef long nf = free.shape[0], a, b, c, i, j, e, ri, rj, L, s, count
    cdef double step = 0.0, delta
    for a in range(nf):
        parent[free[a]] = free[a]
    for a in range(nf):
        i = free[a]
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if is_free[j] and fabs(values[j] - values[i]) <= fuse:
                ri = find(parent, i)
                rj = find(parent, j)
                if ri != rj:
                    parent[ri] = rj
    for a in range(nf):
        parent[free[a]] = find(parent, free[a])
    # counting sort of free vertices by cluster root
    for a in range(nf):
        slot[free[a]] = 0
    for a in range(nf):
        slot[parent[free[a]]] += 1
    s = 0
    for a in range(nf):
        i = free[a]
        if parent[i] == i:
            c = slot[i]
            slot[i] = s
            s += c
    for a in range(nf):
        i = free[a]
        ri = parent[i]
        members[slot[ri]] = i
        slot[ri] += 1
    a = 0
    while a < nf:
        ri = parent[members[a]]
        b = a + 1
        while b < nf and parent[members[b]] == ri:
            b += 1
        count = b - a
        if count >= 2:
            L = 0
            for c in range(a, b):
                i = members[c]
                for e in range(indptr[i], indptr[i + 1]):
                    j = indices[e]
                    if not (is_free[j] and parent[j] == ri):
                        bv[L] = values[j] - values[i]
                        bw[L] = weights[e]
                        L += 1
            if L > 0:
                delta = root_1d(bv, bw, L, 0.0, p)
                if fabs(delta) > step:
                    step = fabs(delta)
                for c in range(a, b):
                    values[members[c]] += delta
        a = b
    return step


def vertex_residuals(const long[:] indptr, const long[:] indices, const double[:] weights,
                     double[:] values, double p):
    cdef long n = indptr.shape[0] - 1, i
    out = np.zeros(n, dtype=np.float64)
    cdef double[:] o = out
    for i in range(n):
        o[i] = vertex_res(indptr, indices, weights, values, i, p)
    return out


def cd_solve(const long[:] indptr, const long[:] indices, const double[:] weights,
             double[:] values, const long[:] free, const long[:] check,
             double p, double tol, double xtol, long max_sweeps, long min_sweeps=0,
             double fuse=0.0):
    """Gauss-Seidel sweeps of exact single-vertex solves, in place.

    With ``fuse > 0`` each sweep is followed by a cluster pass; for p < 2
    an edge between nearly equal values is very stiff, and single-vertex
    updates can only crawl when such neighbours need to move together.  Returns (sweeps, max |residual| over ``check``, last
    max step, converged).
    """
    cdef long n = indptr.shape[0] - 1, nnz = indices.shape[0]
    cdef long sweep = 0, a, e, i, L, nf = free.shape[0], nc = check.shape[0]
    cdef double res, step, t, r, cstep
    bv_arr = np.empty(max(nnz, 1))
    bw_arr = np.empty(max(nnz, 1))
    parent_arr = np.arange(max(n, 1), dtype=np.int_)
    is_free_arr = np.zeros(max(n, 1), dtype=np.int_)
    is_free_arr[np.asarray(free)] = 1
    members_arr = np.zeros(max(nf, 1), dtype=np.int_)
    slot_arr = np.zeros(max(n, 1), dtype=np.int_)
    cdef double[:] bv = bv_arr, bw = bw_arr
    cdef long[:] parent = parent_arr, members = members_arr, slot = slot_arr
    cdef const long[:] is_free = is_free_arr
    with nogil:
        res = 0.0
        for a in range(nc):
            r = fabs(vertex_res(indptr, indices, weights, values, check[a], p))
            if r > res:
                res = r
        step = 0.0
        while sweep < min_sweeps or res > tol or (sweep > 0 and step > xtol):
            if sweep >= max_sweeps:
                break
            step = 0.0
            for a in range(nf):
                i = free[a]
                L = 0
                for e in range(indptr[i], indptr[i + 1]):
                    bv[L] = values[indices[e]]
                    bw[L] = weights[e]
                    L += 1
                t = root_1d(bv, bw, L, values[i], p)
                if fabs(t - values[i]) > step:
                    step = fabs(t - values[i])
                values[i] = t
            if fuse > 0.0:
                cstep = fused_pass(indptr, indices, weights, values, free, p, fuse,
                                   parent, is_free, members, slot, bv, bw)
                if cstep > step:
                    step = cstep
            sweep += 1
            res = 0.0
            for a in range(nc):
                r = fabs(vertex_res(indptr, indices, weights, values, check[a], p))
                if r > res:
                    res = r
    converged = res <= tol and (sweep == 0 or step <= xtol)
    return sweep, res, step, converged
