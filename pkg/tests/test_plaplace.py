import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pharmonic.periodic_infinite import CosetLift, FamilyMember, GeometricTail, ResistanceSequence, sequence_resistance
from pharmonic.plaplace import (
    ConvergenceError,
    dirichlet_solve,
    energy,
    gradient,
    hashed_loguniform,
    is_p_harmonic,
    p_laplacian,
    phi_p,
    random_edge_resistance,
    uniform_resistance,
)
from pharmonic.subgroup import PairSpec
from pharmonic.word_group import ReducedWord, ball, distance, neighbors, random_word, reduce

unit = uniform_resistance(1.0)
ps = st.floats(1.1, 10.0)


def test_phi_examples():
    for t in (-3.0, 0.0, 5.0):
        assert phi_p(t, 2) == t
    assert phi_p(2, 3) == 4 and phi_p(-2, 3) == -4
    assert phi_p(0.0, 1.5) == 0.0
    assert phi_p(1.5 * 2.0, 2.5) == pytest.approx(phi_p(1.5, 2.5) * phi_p(2.0, 2.5), rel=1e-12)
    with pytest.raises(ValueError):
        phi_p(1.0, 1.0)
    with pytest.raises(ValueError):
        phi_p(1.0, 10.5)


moderate = st.one_of(st.just(0.0), st.floats(1e-50, 1e3), st.floats(-1e3, -1e-50))


@given(moderate, moderate, ps)
def test_phi_identities(s, t, p):
    assert phi_p(s * t, p) == pytest.approx(phi_p(s, p) * phi_p(t, p), rel=1e-12, abs=1e-300)
    assert phi_p(-t, p) == -phi_p(t, p)
    if t > 0:
        assert phi_p(t, p) == pytest.approx(t ** (p - 1), rel=1e-12)


@given(st.floats(-50, 50), st.floats(-50, 50), ps)
def test_phi_strictly_increasing(s, t, p):
    if s < t:
        assert phi_p(s, p) < phi_p(t, p) or phi_p(s, p) == phi_p(t, p) == 0.0 or abs(s - t) < 1e-300


def test_gradient(W):
    x, y = W([]), W([1])
    u = {x: 1.0, y: 4.0}
    assert gradient(u, x, y, uniform_resistance(2.0)) == 1.5
    assert gradient(u, y, x, uniform_resistance(2.0)) == -1.5
    assert gradient({x: 7.0, y: 7.0}, x, y, unit) == 0.0
    with pytest.raises(ValueError):
        gradient(u, x, W([1, 2]), unit)
    with pytest.raises(ValueError):
        gradient({x: 1.0}, x, y, unit)


def test_gradient_antisymmetric_random():
    rng = random.Random(0)
    r = random_edge_resistance(4)
    for _ in range(100):
        x = random_word(3, rng.randint(0, 8), rng)
        y = rng.choice(neighbors(x))
        u = {x: rng.uniform(-5, 5), y: rng.uniform(-5, 5)}
        assert gradient(u, x, y, r) == -gradient(u, y, x, r)


def test_p_laplacian_examples(W):
    e = W([])
    u = {e: 0.0, W([1]): 1.0, W([2]): 2.0, W([3]): 3.0}
    assert p_laplacian(u, e, unit, 2) == 6.0
    const = {v: 2.5 for v in u}
    assert p_laplacian(const, e, random_edge_resistance(1), 3.3) == 0.0
    with pytest.raises(ValueError):
        p_laplacian({e: 0.0}, e, unit, 2)


def test_p_laplacian_with_resistance(W):
    # p = 3: sum of phi_3(d) / r^2 = 4/4 - 1/4
    e = W([], 1)
    u = {e: 0.0, W([1], 1): 2.0, W([2], 1): -1.0}
    assert p_laplacian(u, e, uniform_resistance(2.0), 3) == pytest.approx(0.75, rel=1e-15)


def test_adding_constant_preserves_laplacian():
    rng = random.Random(2)
    b = ball(ReducedWord.identity(2), 3)
    r = random_edge_resistance(9)
    for p in (1.5, 2.0, 3.7):
        u = {v: rng.uniform(-1, 1) for v in b.vertices}
        shifted = {v: val + 3.25 for v, val in u.items()}
        for x in b.interior:
            assert p_laplacian(shifted, x, r, p) == pytest.approx(p_laplacian(u, x, r, p), rel=1e-9, abs=1e-12)


def test_energy_examples(W):
    b = ball(W([], 1), 1)
    u = {W([], 1): 0.0, W([1], 1): 2.0, W([2], 1): 0.0}
    assert energy(u, b, unit, 3) == 8.0
    assert energy({v: 1.0 for v in b.vertices}, b, unit, 2.5) == 0.0


def test_energy_homogeneity():
    rng = random.Random(3)
    b = ball(ReducedWord.identity(2), 3)
    r = random_edge_resistance(1)
    for _ in range(20):
        p, lam = rng.uniform(1.1, 6), rng.uniform(-3, 3)
        u = {v: rng.uniform(-1, 1) for v in b.vertices}
        scaled = {v: lam * x for v, x in u.items()}
        assert energy(scaled, b, r, p) == pytest.approx(abs(lam) ** p * energy(u, b, r, p), rel=1e-10)


def energy_fd_errors(n_configs, seed=0):
    """Relative mismatch between central differences of the energy and -p Delta_p."""
    rng = random.Random(seed)
    b = ball(ReducedWord.identity(2), 3)
    h = 1e-6
    worst = 0.0
    for c in range(n_configs):
        p = rng.uniform(1.5, 5.0)
        r = random_edge_resistance(1000 + c)
        u = {v: rng.uniform(-1, 1) for v in b.vertices}
        x = rng.choice(b.interior)
        up, down = dict(u), dict(u)
        up[x] += h
        down[x] -= h
        fd = (energy(up, b, r, p) - energy(down, b, r, p)) / (2 * h)
        analytic = -p * p_laplacian(u, x, r, p)
        worst = max(worst, abs(fd - analytic) / max(abs(analytic), 1e-3))
    return worst


def test_energy_gradient_consistency():
    assert energy_fd_errors(100) <= 1e-5


def test_is_p_harmonic_examples(W):
    b = ball(W([]), 3)
    const = {v: 4.0 for v in b.vertices}
    rep = is_p_harmonic(const, b.interior, unit, 2, 1e-12)
    assert rep.passed and rep.max_residual == 0 and rep.worst_vertex is None

    dist = {v: float(distance(W([]), v)) for v in b.vertices}
    rep = is_p_harmonic(dist, b.interior, unit, 2, 1e-9)
    assert not rep.passed
    assert rep.worst_vertex == W([]) and rep.max_residual == 3.0
    assert rep.rows()[0] == ([], 3.0)


def linear_oracle(b, boundary, r):
    """Direct solve of the p = 2 resistive network (conductance 1/r)."""
    idx = {v: i for i, v in enumerate(b.interior)}
    n = len(idx)
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    for x, y in b.edges:
        c = 1.0 / r(x, y)
        for a, bb in ((x, y), (y, x)):
            if a in idx:
                A[idx[a], idx[a]] += c
                if bb in idx:
                    A[idx[a], idx[bb]] -= c
                else:
                    rhs[idx[a]] += c * boundary[bb]
    sol = np.linalg.solve(A, rhs)
    return {v: sol[i] for v, i in idx.items()}


@pytest.mark.parametrize("k, radius", [(1, 6), (2, 4), (3, 3)])
def test_dirichlet_p2_matches_linear_solve(k, radius):
    b = ball(ReducedWord.identity(k), radius)
    rng = random.Random(radius)
    r = random_edge_resistance(radius)
    boundary = {v: rng.uniform(-1, 1) for v in b.boundary}
    sol = dirichlet_solve(b, boundary, r, 2.0, tol=1e-13)
    ref = linear_oracle(b, boundary, r)
    assert max(abs(sol.values[v] - ref[v]) for v in ref) <= 1e-10


def test_dirichlet_constant_boundary(W):
    b = ball(W([]), 3)
    sol = dirichlet_solve(b, {v: 1.75 for v in b.boundary}, random_edge_resistance(2), 3.0)
    assert all(val == 1.75 for val in sol.values.values())
    assert sol.sweeps == 0


def test_dirichlet_solution_is_harmonic():
    b = ball(ReducedWord.identity(2), 4)
    rng = random.Random(11)
    r = random_edge_resistance(5)
    for p in (1.5, 2.5, 4.0):
        boundary = {v: rng.uniform(-1, 1) for v in b.boundary}
        sol = dirichlet_solve(b, boundary, r, p, tol=1e-10)
        assert is_p_harmonic(sol.values, b.interior, r, p, 1e-10).passed


def test_dirichlet_start_invariance():
    b = ball(ReducedWord.identity(2), 4)
    rng = random.Random(7)
    r = random_edge_resistance(8)
    boundary = {v: rng.uniform(-1, 1) for v in b.boundary}
    for p in (1.5, 3.0):
        sols = []
        for _ in range(5):
            start = {v: rng.uniform(-3, 3) for v in b.vertices}
            sols.append(dirichlet_solve(b, boundary, r, p, tol=1e-11, start=start).values)
        for other in sols[1:]:
            assert max(abs(other[v] - sols[0][v]) for v in b.vertices) <= 1e-6


def family_reproduction_error(radius, p, k=2, center=None):
    seq = ResistanceSequence(-2, (1.0, 0.5, 2.0, 0.75, 1.25), GeometricTail(0.8, 0.7), GeometricTail(0.6, 0.8))
    member = FamilyMember("U1", 1.3, -0.4, seq)
    pair = PairSpec(1, 2, k)
    exact = CosetLift(member, pair, exact=True)
    b = ball(center or ReducedWord.identity(k), radius)
    r = sequence_resistance(seq, pair)
    bvals = {v: float(exact[v]) for v in b.boundary}
    if p >= 2:
        sol = dirichlet_solve(b, bvals, r, p, tol=1e-11)
    else:
        # residuals at nearly flat edges are dominated by rounding; stop on the step size
        sol = dirichlet_solve(b, bvals, r, p, tol=1.0, xtol=1e-13)
    return max(abs(sol.values[v] - float(exact[v])) for v in b.interior)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0])
def test_dirichlet_reproduces_family_member(p):
    assert family_reproduction_error(4, p) <= 1e-6


def test_dirichlet_errors(W):
    b = ball(W([]), 2)
    with pytest.raises(ValueError):
        dirichlet_solve(b, {v: 0.0 for v in b.boundary}, unit, 2.0, tol=0)
    with pytest.raises(ValueError):
        dirichlet_solve(ball(W([]), 0), {}, unit, 2.0)
    with pytest.raises(ConvergenceError) as exc:
        big = ball(W([]), 4)
        dirichlet_solve(big, {v: float(i) for i, v in enumerate(big.boundary)}, unit, 3.0, tol=1e-14, max_sweeps=1)
    assert exc.value.residual > 0


def test_hashed_resistance_symmetric_and_in_range():
    rng = random.Random(0)
    for _ in range(200):
        x = random_word(2, rng.randint(0, 6), rng)
        y = rng.choice(neighbors(x))
        v = hashed_loguniform(3, x, y)
        assert v == hashed_loguniform(3, y, x)
        assert 0.1 <= v <= 10.0
    assert hashed_loguniform(3, reduce([], 2), reduce([1], 2)) != hashed_loguniform(4, reduce([], 2), reduce([1], 2))
