"""Pure-Python twin of the compiled kernels in ``_kernels.pyx``.

Same signatures and the same arithmetic, operation for operation, so both
backends agree to rounding.  Used when the extension is not built.
"""

import math

import numpy as np

EPS = 2.220446049250313e-16
INF = math.inf


def _phi(t, p):
    if t == 0.0:
        return 0.0
    return math.copysign(abs(t) ** (p - 1.0), t)


def _vertex_res(indptr, indices, weights, values, i, p):
    ui = values[i]
    s = 0.0
    for e in range(indptr[i], indptr[i + 1]):
        s += weights[e] * _phi(values[indices[e]] - ui, p)
    return s


def _root_1d(nb, w, t, p):
    if not nb:
        return t
    lo, hi = min(nb), max(nb)
    if lo == hi:
        return lo
    if t <= lo or t >= hi:
        t = 0.5 * (lo + hi)
    for _ in range(200):
        g = 0.0
        dg = 0.0
        for v, we in zip(nb, w):
            d = v - t
            if d == 0.0:
                if p < 2.0:
                    dg = INF
                elif p == 2.0:
                    dg += we
                continue
            a = abs(d)
            g += we * math.copysign(a ** (p - 1.0), d)
            dg += we * a ** (p - 2.0)
        if g == 0.0:
            return t
        if g > 0.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 2.0 * EPS * abs(t) or hi - lo <= 1e-300:
            return 0.5 * (lo + hi)
        tn = 0.5 * (lo + hi)
        if 0.0 < dg < INF:
            tn = t + g / ((p - 1.0) * dg)
            if not lo < tn < hi:
                tn = 0.5 * (lo + hi)
        if abs(tn - t) <= EPS * abs(t):
            return tn
        t = tn
    return t


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _fused_pass(indptr, indices, weights, vals, free, is_free, p, fuse):
    parent = {i: i for i in free}
    for i in free:
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if is_free[j] and abs(vals[j] - vals[i]) <= fuse:
                ri, rj = _find(parent, i), _find(parent, j)
                if ri != rj:
                    parent[ri] = rj
    for i in free:
        parent[i] = _find(parent, i)
    groups = {}
    for i in free:
        groups.setdefault(parent[i], []).append(i)
    step = 0.0
    for root, members in groups.items():
        if len(members) < 2:
            continue
        nb, w = [], []
        for i in members:
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                if not (is_free[j] and parent[j] == root):
                    nb.append(vals[j] - vals[i])
                    w.append(weights[e])
        if not nb:
            continue
        delta = _root_1d(nb, w, 0.0, p)
        step = max(step, abs(delta))
        for i in members:
            vals[i] += delta
    return step


def vertex_residuals(indptr, indices, weights, values, p):
    indptr, indices, weights = list(indptr), list(indices), list(weights)
    vals = list(values)
    return np.array([_vertex_res(indptr, indices, weights, vals, i, p) for i in range(len(indptr) - 1)])


def cd_solve(indptr, indices, weights, values, free, check, p, tol, xtol, max_sweeps, min_sweeps=0, fuse=0.0):
    indptr, indices, weights = list(indptr), list(indices), [float(w) for w in weights]
    free, check = list(free), list(check)
    vals = [float(v) for v in values]
    is_free = [False] * len(vals)
    for i in free:
        is_free[i] = True

    def max_res():
        return max((abs(_vertex_res(indptr, indices, weights, vals, i, p)) for i in check), default=0.0)

    sweep = 0
    res = max_res()
    step = 0.0
    while sweep < min_sweeps or res > tol or (sweep > 0 and step > xtol):
        if sweep >= max_sweeps:
            break
        step = 0.0
        for i in free:
            nb = [vals[indices[e]] for e in range(indptr[i], indptr[i + 1])]
            t = _root_1d(nb, weights[indptr[i]:indptr[i + 1]], vals[i], p)
            step = max(step, abs(t - vals[i]))
            vals[i] = t
        if fuse > 0.0:
            step = max(step, _fused_pass(indptr, indices, weights, vals, free, is_free, p, fuse))
        sweep += 1
        res = max_res()
    values[:] = vals
    converged = res <= tol and (sweep == 0 or step <= xtol)
    return sweep, res, step, converged
