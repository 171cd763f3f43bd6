"""Periodic p-harmonic functions for finite-index parity subgroups.

A function periodic under H = H_{A_1} ∩ ... ∩ H_{A_m} is a profile: one value
per coset, i.e. a vector of length 2^m indexed by packed parity labels.
Its p-Laplacian at any vertex depends only on the coset, which reduces
harmonicity to a finite nonlinear system on the quotient graph.  Every
solution of that system is constant; the solver and the max-principle
check below corroborate this numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _backend
from .plaplace import ConvergenceError, check_p
from .subgroup import FiniteIndex, QuotientGraph, coset_id, validate_and_index
from .word_group import ReducedWord

CosetResistances = dict  # (coset, coset) -> r, symmetric


def coset_resistances(q: QuotientGraph, table: Mapping) -> CosetResistances:
    """Symmetrise ``table`` and check it covers every quotient edge."""
    out: CosetResistances = {}
    for (i, j), val in table.items():
        i, j, val = int(i), int(j), float(val)
        if val <= 0:
            raise ValueError(f"resistance for cosets {i}-{j} must be positive")
        if out.get((j, i), val) != val:
            raise ValueError(f"asymmetric resistance for cosets {i}-{j}")
        out[(i, j)] = out[(j, i)] = val
    for i, j in q.edges():
        if (i, j) not in out:
            raise ValueError(f"no resistance for quotient edge {i}-{j}")
    return out


def random_coset_resistances(q: QuotientGraph, rng: np.random.Generator, low=0.1, high=10.0) -> CosetResistances:
    """Log-uniform draws in [low, high], one per quotient edge."""
    table = {}
    for i, j in q.edges():
        table[(i, j)] = float(np.exp(rng.uniform(np.log(low), np.log(high))))
    return coset_resistances(q, table)


def resistances_from_json(obj: Mapping[str, float], q: QuotientGraph) -> CosetResistances:
    table = {}
    for key, val in obj.items():
        try:
            i, j = (int(s) for s in key.split("-"))
        except ValueError:
            raise ValueError(f"resistance key {key!r} is not of the form 'i-j'") from None
        table[(i, j)] = val
    return coset_resistances(q, table)


def resistances_to_json(r: CosetResistances) -> dict[str, float]:
    return {f"{i}-{j}": v for (i, j), v in sorted(r.items()) if i <= j}


class PeriodicLift(Mapping):
    """Vertex function u(x) = profile[coset of x]; defined on every vertex."""

    def __init__(self, profile, spec: FiniteIndex):
        self.values = np.asarray(profile, dtype=float)
        self.spec = spec

    def __getitem__(self, x: ReducedWord) -> float:
        return float(self.values[coset_id(x, self.spec)])

    def __iter__(self):
        raise TypeError("a periodic lift is defined on the whole (infinite) tree")

    def __len__(self):
        raise TypeError("a periodic lift is defined on the whole (infinite) tree")


def lift(profile, spec: FiniteIndex) -> PeriodicLift:
    n = validate_and_index(spec)
    if len(profile) != n:
        raise ValueError(f"profile has {len(profile)} entries, the subgroup has index {n}")
    return PeriodicLift(profile, spec)


def resistance_rule(spec: FiniteIndex, r: CosetResistances):
    """Vertex-level resistance r(x, y) = r[coset(x), coset(y)]."""
    return lambda x, y: r[(coset_id(x, spec), coset_id(y, spec))]


def residual_system(profile, q: QuotientGraph, r: CosetResistances, p: float) -> np.ndarray:
    """Component i: sum over cosets j != i of mult(i,j) phi_p(u_j - u_i) / r_ij^(p-1)."""
    p = check_p(p)
    u = np.asarray(profile, dtype=float)
    n = q.size
    if u.shape != (n,):
        raise ValueError(f"profile must have {n} entries")
    return (_weight_matrix(q, r, p) * _phi_array(u[None, :] - u[:, None], p)).sum(axis=1)


def _phi_array(t: np.ndarray, p: float) -> np.ndarray:
    return np.sign(t) * np.abs(t) ** (p - 1.0)


def _weight_matrix(q: QuotientGraph, r: CosetResistances, p: float) -> np.ndarray:
    """mult(i,j) r_ij^(1-p) off the diagonal; same-coset edges carry no flux."""
    n = q.size
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            c = q.multiplicity[i, j]
            if c and j != i:
                w[i, j] = c * r[(i, j)] ** (1.0 - p)
    return w


def _quotient_csr(q: QuotientGraph, r: CosetResistances, p: float):
    n = q.size
    indptr = [0]
    indices, weights = [], []
    for i in range(n):
        for j in range(n):
            c = q.multiplicity[i, j]
            if c and j != i:
                indices.append(j)
                weights.append(c * r[(i, j)] ** (1.0 - p))
        indptr.append(len(indices))
    return np.array(indptr, dtype=np.int_), np.array(indices, dtype=np.int_), np.array(weights)


@dataclass
class PeriodicSolution:
    values: np.ndarray
    residual: float
    iterations: int

    @property
    def spread(self) -> float:
        return float(self.values.max() - self.values.min())


def solve_periodic(
    q: QuotientGraph,
    r: CosetResistances,
    p: float,
    start,
    tol: float = 1e-10,
    *,
    xtol: float | None = None,
    max_sweeps: int = 100_000,
    backend: str | None = None,
) -> PeriodicSolution:
    """Minimise the quotient p-energy from ``start`` with coset 0 pinned.

    Iterates in offsets from the pinned value so that late iterates keep
    full relative precision; stops when max |residual| <= tol and the last
    sweep moved no coordinate by more than ``xtol`` (default ``tol``).
    """
    p = check_p(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    u0 = np.array(start, dtype=float)
    n = q.size
    if u0.shape != (n,):
        raise ValueError(f"start must have {n} entries")
    xtol = tol if xtol is None else xtol
    indptr, indices, weights = _quotient_csr(q, r, p)
    base = u0[0]
    d = u0 - base
    d[0] = 0.0
    free = np.arange(1, n, dtype=np.int_)
    check = np.arange(n, dtype=np.int_)
    kern = _backend.get(backend)

    min_sweeps = 0 if np.all(u0 == base) else 1
    # p < 2: shift nearly equal cosets together (see plaplace.dirichlet_solve)
    fuse = 1e-3 * max(float(np.ptp(u0)), 1e-300) if p < 2.0 else 0.0
    inner_tol, inner_xtol, total = tol, xtol, 0
    for _ in range(6):
        sweeps, res, _, ok = kern.cd_solve(
            indptr, indices, weights, d, free, check, p, inner_tol, inner_xtol, max_sweeps - total, min_sweeps, fuse
        )
        total += sweeps
        if not ok:
            raise ConvergenceError("periodic solve did not converge", res, total)
        values = base + d
        res = float(np.max(np.abs(residual_system(values, q, r, p))))
        if res <= tol:
            return PeriodicSolution(values, res, total)
        # rounding against the pinned value lost what the offsets resolved
        inner_tol *= 1e-3
        inner_xtol *= 1e-3
        min_sweeps = 1
    raise ConvergenceError("periodic solve stalled at rounding level", res, total)


@dataclass
class MaxPrincipleReport:
    passed: bool
    constant: bool
    residual: np.ndarray
    argmax: list[int]
    # per argmax coset: (coset, residual, has a strictly smaller neighbour)
    details: list[tuple[int, float, bool]]


def max_principle_check(profile, q: QuotientGraph, r: CosetResistances, p: float) -> MaxPrincipleReport:
    """Sign of the residual at the cosets attaining the maximum.

    For a non-constant profile every argmax coset next to a strictly
    smaller one must have a strictly negative residual, and at least one
    such coset must exist (the quotient graph is connected).
    """
    u = np.asarray(profile, dtype=float)
    res = residual_system(u, q, r, p)
    top = u.max()
    argmax = [int(i) for i in np.flatnonzero(u == top)]
    if u.min() == top:
        return MaxPrincipleReport(bool(np.all(res == 0.0)), True, res, argmax, [(i, float(res[i]), False) for i in argmax])
    details = []
    for i in argmax:
        lower = any(q.multiplicity[i, j] > 0 and u[j] < top for j in range(q.size))
        details.append((i, float(res[i]), lower))
    passed = all(v < 0 for _, v, low in details if low) and any(v < 0 for _, v, _ in details)
    return MaxPrincipleReport(passed, False, res, argmax, details)


def index_specs(k: int) -> dict[int, FiniteIndex]:
    """One validated parity spec per index 2, 4, 8 that G_k supports."""
    out = {}
    for m in (1, 2, 3):
        if m > k + 1:
            break
        spec = FiniteIndex.of([[s] for s in range(1, m + 1)], k)
        out[validate_and_index(spec)] = spec
    return out

