"""Discrete p-Laplacian with edge resistances on the Cayley tree.

A vertex function is any mapping ``word -> value`` (a dict, or one of the
lazy lifts built elsewhere in the package).  Values may be floats or
:class:`fractions.Fraction`; differences are taken before converting to
float, so exact inputs give correctly rounded gradients.

A resistance assignment is a callable ``r(x, y) -> float`` that must be
symmetric and positive on tree edges.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _backend
from .word_group import Ball, ReducedWord, distance, neighbors

P_MIN, P_MAX = 1.1, 10.0

Resistance = Callable[[ReducedWord, ReducedWord], float]


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, sweeps: int):
        super().__init__(f"{message} (residual {residual:.3e} after {sweeps} sweeps)")
        self.residual = residual
        self.sweeps = sweeps


def check_p(p: float) -> float:
    p = float(p)
    if not P_MIN <= p <= P_MAX:
        raise ValueError(f"p = {p} outside the supported range [{P_MIN}, {P_MAX}]")
    return p


def phi_p(t: float, p: float) -> float:
    """|t|^(p-2) t, with phi_p(0) = 0."""
    p = check_p(p)
    t = float(t)
    if t == 0.0:
        return 0.0
    return math.copysign(abs(t) ** (p - 1.0), t)


def _phi(t: float, p: float) -> float:
    # unchecked variant for inner loops
    if t == 0.0:
        return 0.0
    return math.copysign(abs(t) ** (p - 1.0), t)


# -- resistance rules --------------------------------------------------------------

def edge_key(x: ReducedWord, y: ReducedWord) -> tuple:
    a, b = x.letters, y.letters
    return (a, b) if (len(a), a) <= (len(b), b) else (b, a)


def hashed_loguniform(seed: int, x: ReducedWord, y: ReducedWord, low: float = 0.1, high: float = 10.0) -> float:
    """Deterministic log-uniform draw in [low, high] attached to the edge {x, y}."""
    a, b = edge_key(x, y)
    h = hashlib.blake2b(repr((seed, a, b)).encode(), digest_size=8).digest()
    frac = struct.unpack("<Q", h)[0] / 2.0**64
    return math.exp(math.log(low) + frac * (math.log(high) - math.log(low)))


def uniform_resistance(value: float = 1.0) -> Resistance:
    if value <= 0:
        raise ValueError("resistance must be positive")
    return lambda x, y: value


def random_edge_resistance(seed: int, low: float = 0.1, high: float = 10.0) -> Resistance:
    return lambda x, y: hashed_loguniform(seed, x, y, low, high)


# -- pointwise operators ----------------------------------------------------------------

def _value(u: Mapping, x: ReducedWord):
    try:
        return u[x]
    except KeyError:
        raise ValueError(f"vertex function has no value at {x}") from None


def gradient(u: Mapping, x: ReducedWord, y: ReducedWord, r: Resistance) -> float:
    """(u(y) - u(x)) / r(x, y) along a tree edge."""
    if distance(x, y) != 1:
        raise ValueError(f"{x} and {y} are not adjacent")
    return float(_value(u, y) - _value(u, x)) / r(x, y)


def p_laplacian(u: Mapping, x: ReducedWord, r: Resistance, p: float) -> float:
    """Sum over neighbours y of phi_p((u(y) - u(x)) / r(x, y))."""
    p = check_p(p)
    ux = _value(u, x)
    total = 0.0
    for y in neighbors(x):
        d = float(_value(u, y) - ux)
        if d:
            total += _phi(d, p) / r(x, y) ** (p - 1.0)
    return total


def energy(u: Mapping, region: Ball, r: Resistance, p: float) -> float:
    """p-energy sum over edges of r^(1-p) |u(y) - u(x)|^p."""
    p = check_p(p)
    total = 0.0
    for x, y in region.edges:
        d = abs(float(_value(u, y) - _value(u, x)))
        if d:
            total += d**p / r(x, y) ** (p - 1.0)
    return total


@dataclass
class HarmonicityReport:
    passed: bool
    max_residual: float
    worst_vertex: ReducedWord | None
    residuals: list[tuple[ReducedWord, float]]

    def rows(self):
        """(vertex, residual) pairs for CSV output."""
        return [(v.to_json(), res) for v, res in self.residuals]


def is_p_harmonic(u: Mapping, interior: Iterable[ReducedWord], r: Resistance, p: float, tol: float) -> HarmonicityReport:
    p = check_p(p)
    worst, worst_v, rows = 0.0, None, []
    for x in interior:
        res = p_laplacian(u, x, r, p)
        rows.append((x, res))
        if worst_v is None or abs(res) > worst:
            worst, worst_v = abs(res), x
    passed = worst <= tol
    return HarmonicityReport(passed, worst, None if passed else worst_v, rows)


# -- Dirichlet problem ----------------------------------------------------------------------

def ball_csr(region: Ball, r: Resistance, p: float):
    """CSR adjacency of a ball with weights r^(1-p)."""
    n = len(region)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    idx = region.index
    for x, y in region.edges:
        w = r(x, y) ** (1.0 - p)
        i, j = idx[x], idx[y]
        adj[i].append((j, w))
        adj[j].append((i, w))
    indptr = np.zeros(n + 1, dtype=np.int_)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.array([j for a in adj for j, _ in a], dtype=np.int_)
    weights = np.array([w for a in adj for _, w in a], dtype=np.float64)
    return indptr, indices, weights


@dataclass
class DirichletSolution:
    values: dict[ReducedWord, float]
    residual: float
    sweeps: int


def dirichlet_solve(
    region: Ball,
    boundary: Mapping,
    r: Resistance,
    p: float,
    tol: float = 1e-10,
    *,
    start: Mapping | None = None,
    xtol: float = math.inf,
    max_sweeps: int = 100_000,
    fuse: float | None = None,
    backend: str | None = None,
) -> DirichletSolution:
    """Minimise the p-energy over interior values with the boundary held fixed.

    Cyclic coordinate descent: each interior vertex is set to the root of
    its own p-Laplacian, which is monotone in that single value.  Stops
    once max |Delta_p u| over the interior is at most ``tol`` (and, if
    given, the largest update of the last sweep is at most ``xtol``).

    For p < 2 an edge between nearly equal values is very stiff and
    single-vertex updates crawl when both ends must move together; each
    sweep is then followed by a pass that shifts clusters of neighbours
    within ``fuse`` of each other rigidly, by an exact line search
    (default: 1e-3 times the boundary range).
    """
    p = check_p(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not region.boundary:
        raise ValueError("the region has no boundary")
    idx = region.index
    values = np.empty(len(region))
    bvals = [float(_value(boundary, v)) for v in region.boundary]
    fill = 0.5 * (min(bvals) + max(bvals))
    for v, i in idx.items():
        if v in region.boundary:
            values[i] = float(boundary[v])
        elif start is not None:
            values[i] = float(start[v])
        else:
            values[i] = fill
    interior = np.array([idx[v] for v in region.vertices if v not in region.boundary], dtype=np.int_)
    indptr, indices, weights = ball_csr(region, r, p)
    if fuse is None:
        fuse = 1e-3 * max(max(bvals) - min(bvals), 1e-300) if p < 2.0 else 0.0
    k = _backend.get(backend)
    sweeps, res, _, ok = k.cd_solve(
        indptr, indices, weights, values, interior, interior, p, tol, xtol, max_sweeps, int(xtol < math.inf), fuse
    )
    if not ok:
        raise ConvergenceError("Dirichlet solve did not converge", res, sweeps)
    return DirichletSolution({v: float(values[i]) for v, i in idx.items()}, float(res), int(sweeps))
