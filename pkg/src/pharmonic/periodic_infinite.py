"""H_ij-periodic p-harmonic functions built from summable resistance sequences.

For the pair subgroup H_ij the cosets are H_n, n in Z, and every vertex of
H_n has exactly one neighbour in H_{n-1} and one in H_{n+1}.  A
coset-constant function u_n is p-harmonic iff the flux
phi_p(u_{n+1} - u_n) / r_{n,n+1}^(p-1) does not depend on n, which gives
the two families

    U1:  u_n = offset + A * sum_{s <= n-1} r_{s,s+1}
    U2:  u_n = offset + A * sum_{s >= n}   r_{s,s+1}

with amplitude A >= 0.  Linear combinations of members of both families
stay in (U1 ∪ U2 ∪ constants), hence stay p-harmonic even for p != 2.

Tail sums can be taken exactly: every float is a dyadic rational and the
tails are geometric, so ``exact=True`` returns :class:`Fraction` values.
Consecutive differences are then exact, which matters far out in the
tails where increments are many orders of magnitude below the values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from .plaplace import HarmonicityReport, _phi, check_p, hashed_loguniform, is_p_harmonic
from .subgroup import PairSpec, coset_index
from .word_group import ReducedWord, ball


@dataclass(frozen=True)
class GeometricTail:
    """Tail values base, base*ratio, base*ratio^2, ... moving away from the window."""

    base: float
    ratio: float

    def __post_init__(self):
        if not self.base > 0:
            raise ValueError("tail base must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("tail ratio must lie in (0, 1)")

    def total(self, exact=False):
        if exact:
            return Fraction(self.base) / (1 - Fraction(self.ratio))
        return self.base / (1.0 - self.ratio)

    def partial(self, count: int, exact=False):
        """Sum of the first ``count`` tail values."""
        if exact:
            b, q = Fraction(self.base), Fraction(self.ratio)
            return b * (1 - q**count) / (1 - q)
        return self.base * -math.expm1(count * math.log(self.ratio)) / (1.0 - self.ratio)

    def beyond(self, count: int, exact=False):
        """Sum of the tail values after skipping the first ``count``."""
        if exact:
            return Fraction(self.ratio) ** count * self.total(exact=True)
        return self.ratio**count * self.total()


@dataclass(frozen=True)
class ResistanceSequence:
    """The cross-coset resistances r_{s,s+1}, s in Z.

    ``window`` holds r_{s,s+1} for s = start .. start+len(window)-1; outside
    it the geometric tails take over.  Edges inside a single coset get
    resistance 1, or a deterministic log-uniform draw in [0.1, 10] when
    ``within_seed`` is set.
    """

    start: int
    window: tuple[float, ...]
    left: GeometricTail
    right: GeometricTail
    within_seed: int | None = None
    _window_exact: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.window:
            raise ValueError("the window needs at least one value")
        if not all(v > 0 for v in self.window):
            raise ValueError("resistances must be positive")
        object.__setattr__(self, "window", tuple(float(v) for v in self.window))
        object.__setattr__(self, "_window_exact", tuple(Fraction(v) for v in self.window))

    @property
    def stop(self) -> int:
        """Last index covered by the window."""
        return self.start + len(self.window) - 1

    def resistance(self, s: int, exact=False):
        """r_{s,s+1}."""
        if s < self.start:
            m = self.start - 1 - s
            if exact:
                return Fraction(self.left.base) * Fraction(self.left.ratio) ** m
            return self.left.base * self.left.ratio**m
        if s > self.stop:
            m = s - self.stop - 1
            if exact:
                return Fraction(self.right.base) * Fraction(self.right.ratio) ** m
            return self.right.base * self.right.ratio**m
        return self._window_exact[s - self.start] if exact else self.window[s - self.start]

    def _window_sum(self, lo: int, hi: int, exact: bool):
        # indices lo..hi-1 into the window
        if exact:
            return sum(self._window_exact[lo:hi], Fraction(0))
        return math.fsum(self.window[lo:hi])

    def total(self, exact=False):
        return self.left.total(exact) + self._window_sum(0, len(self.window), exact) + self.right.total(exact)

    def within(self, x: ReducedWord, y: ReducedWord) -> float:
        if self.within_seed is None:
            return 1.0
        return hashed_loguniform(self.within_seed, x, y)

    def to_json(self) -> dict:
        out = {
            "window": {"from": self.start, "values": list(self.window)},
            "tail_left": {"base": self.left.base, "ratio": self.left.ratio},
            "tail_right": {"base": self.right.base, "ratio": self.right.ratio},
        }
        if self.within_seed is not None:
            out["within_seed"] = self.within_seed
        return out


def sequence_from_json(obj) -> ResistanceSequence:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        w = obj["window"]
        return ResistanceSequence(
            int(w["from"]),
            tuple(float(v) for v in w["values"]),
            GeometricTail(float(obj["tail_left"]["base"]), float(obj["tail_left"]["ratio"])),
            GeometricTail(float(obj["tail_right"]["base"]), float(obj["tail_right"]["ratio"])),
            obj.get("within_seed"),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed resistance sequence: {exc}") from None


def lower_tail_sum(seq: ResistanceSequence, n: int, exact=False):
    """sum_{s <= n-1} r_{s,s+1}."""
    if n <= seq.start:
        return seq.left.beyond(seq.start - n, exact)
    if n <= seq.stop + 1:
        return seq.left.total(exact) + seq._window_sum(0, n - seq.start, exact)
    return (
        seq.left.total(exact)
        + seq._window_sum(0, len(seq.window), exact)
        + seq.right.partial(n - seq.stop - 1, exact)
    )


def upper_tail_sum(seq: ResistanceSequence, n: int, exact=False):
    """sum_{s >= n} r_{s,s+1}."""
    if n > seq.stop:
        return seq.right.beyond(n - seq.stop - 1, exact)
    if n >= seq.start:
        return seq.right.total(exact) + seq._window_sum(n - seq.start, len(seq.window), exact)
    return (
        seq.right.total(exact)
        + seq._window_sum(0, len(seq.window), exact)
        + seq.left.partial(seq.start - n, exact)
    )


# -- families ---------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyMember:
    family: str  # "U1" (nondecreasing) or "U2" (nonincreasing)
    amplitude: float
    offset: float
    sequence: ResistanceSequence

    def __post_init__(self):
        if self.family not in ("U1", "U2"):
            raise ValueError(f"family must be 'U1' or 'U2', got {self.family!r}")
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be nonnegative")

    def __call__(self, n: int, exact=False):
        return evaluate(self, n, exact)

    def to_json(self) -> dict:
        return {"family": self.family, "amplitude": self.amplitude, "offset": self.offset}


def member_from_json(obj, seq: ResistanceSequence | None = None) -> FamilyMember:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "sequence" in obj:
        seq = sequence_from_json(obj["sequence"])
    if seq is None:
        raise ValueError("family member needs a resistance sequence")
    try:
        return FamilyMember(str(obj["family"]), float(obj["amplitude"]), float(obj.get("offset", 0.0)), seq)
    except KeyError as exc:
        raise ValueError(f"family member is missing {exc}") from None


def evaluate(member: FamilyMember, n: int, exact=False):
    seq = member.sequence
    tail = lower_tail_sum(seq, n, exact) if member.family == "U1" else upper_tail_sum(seq, n, exact)
    if exact:
        return Fraction(member.offset) + Fraction(member.amplitude) * tail
    return member.offset + member.amplitude * tail


class CosetLift(Mapping):
    """Vertex function x -> profile(coset_index(x)) on the whole tree."""

    def __init__(self, profile: Callable, pair: PairSpec, exact=False):
        self.pair = pair
        self._at = lru_cache(maxsize=None)(lambda n: profile(n, exact) if exact else profile(n))

    def __getitem__(self, x: ReducedWord):
        return self._at(coset_index(x, self.pair))

    def __iter__(self):
        raise TypeError("a coset lift is defined on the whole (infinite) tree")

    def __len__(self):
        raise TypeError("a coset lift is defined on the whole (infinite) tree")


def evaluate_at_vertex(member: FamilyMember, x: ReducedWord, pair: PairSpec, exact=False):
    return evaluate(member, coset_index(x, pair), exact)


def sequence_resistance(seq: ResistanceSequence, pair: PairSpec):
    """Resistance rule on tree edges: r_{n,n+1} across cosets, ``seq.within`` inside one."""

    def r(x: ReducedWord, y: ReducedWord) -> float:
        nx, ny = coset_index(x, pair), coset_index(y, pair)
        if nx == ny:
            return seq.within(x, y)
        return seq.resistance(min(nx, ny))

    return r


def flux(values: Callable, seq: ResistanceSequence, p: float, n: int) -> float:
    """X_n = phi_p(u_{n+1} - u_n) / r_{n,n+1}^(p-1)."""
    p = check_p(p)
    d = float(values(n + 1) - values(n))
    return _phi(d, p) / seq.resistance(n) ** (p - 1.0)


def coset_residual(values: Callable, seq: ResistanceSequence, p: float, n: int) -> float:
    """Coset-level p-Laplacian at H_n of a coset-constant function."""
    p = check_p(p)
    un = values(n)
    up = float(values(n + 1) - un)
    dn = float(values(n - 1) - un)
    return _phi(up, p) / seq.resistance(n) ** (p - 1.0) + _phi(dn, p) / seq.resistance(n - 1) ** (p - 1.0)


# -- linear combinations ------------------------------------------------------------------

@dataclass(frozen=True)
class Combination:
    members: tuple[FamilyMember, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a combination needs at least one member")
        if len(self.members) != len(self.coefficients):
            raise ValueError("one coefficient per member is required")
        if any(t == 0 for t in self.coefficients):
            raise ValueError("coefficients must be nonzero")
        seq = self.members[0].sequence
        if any(m.sequence != seq for m in self.members):
            raise ValueError("all members must share one resistance sequence")

    @property
    def sequence(self) -> ResistanceSequence:
        return self.members[0].sequence


class CombinedProfile:
    """v_n = sum_i t_i u_i(n); its increments are K * r_{n,n+1}."""

    def __init__(self, c: Combination):
        self.combination = c
        self.sequence = c.sequence
        up = sum(t * m.amplitude for t, m in zip(c.coefficients, c.members) if m.family == "U1")
        down = sum(t * m.amplitude for t, m in zip(c.coefficients, c.members) if m.family == "U2")
        self.K = up - down
        self.offset = sum(t * m.offset for t, m in zip(c.coefficients, c.members))

    def __call__(self, n: int, exact=False):
        c = self.combination
        if exact:
            return sum((Fraction(t) * evaluate(m, n, True) for t, m in zip(c.coefficients, c.members)), Fraction(0))
        return math.fsum(t * evaluate(m, n) for t, m in zip(c.coefficients, c.members))

    def as_member(self) -> FamilyMember | float:
        """The single family member (or constant) this combination equals."""
        c = self.combination
        total = self.sequence.total()
        u2 = sum(t * m.amplitude for t, m in zip(c.coefficients, c.members) if m.family == "U2")
        base = self.offset + u2 * total  # constant part when written against the lower tail sum
        if self.K == 0:
            return base
        if self.K > 0:
            return FamilyMember("U1", self.K, base, self.sequence)
        return FamilyMember("U2", -self.K, base + self.K * total, self.sequence)


def combine(c: Combination) -> CombinedProfile:
    return CombinedProfile(c)


@dataclass
class CosetReport:
    passed: bool
    max_residual: float
    failures: list[int]
    residuals: dict[int, float]


def verify_profile(values: Callable, seq: ResistanceSequence, p: float, n_range: Iterable[int], tol: float) -> CosetReport:
    """Check the coset-level equation at every n in ``n_range``."""
    res = {n: coset_residual(values, seq, p, n) for n in n_range}
    fails = [n for n, v in res.items() if not abs(v) <= tol]
    worst = max((abs(v) for v in res.values()), default=0.0)
    return CosetReport(not fails, worst, fails, res)


@dataclass
class CombinationReport:
    passed: bool
    coset: CosetReport
    vertex: list[HarmonicityReport]

    @property
    def max_residual(self) -> float:
        return max([self.coset.max_residual] + [v.max_residual for v in self.vertex])


def verify_combination(
    c: Combination,
    p: float,
    n_range: Iterable[int],
    tol: float,
    *,
    pair: PairSpec | None = None,
    radius: int = 0,
    centers: Iterable[ReducedWord] = (),
) -> CombinationReport:
    """Coset-level check over ``n_range`` plus vertex-level checks on balls.

    Vertex checks run on a ball of ``radius`` around each centre, with the
    combination lifted exactly and the sequence's resistance rule.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = combine(c)
    exact = lambda n: v(n, exact=True)  # noqa: E731
    coset = verify_profile(exact, c.sequence, p, n_range, tol)
    reports = []
    centers = list(centers)
    if centers:
        if pair is None:
            raise ValueError("vertex-level checks need the pair subgroup")
        u = CosetLift(v, pair, exact=True)
        r = sequence_resistance(c.sequence, pair)
        for x in centers:
            region = ball(x, radius)
            reports.append(is_p_harmonic(u, region.interior, r, p, tol))
    return CombinationReport(coset.passed and all(rep.passed for rep in reports), coset, reports)


# -- random instances -----------------------------------------------------------------------------

def random_sequence(rng: np.random.Generator, *, window=(-3, 3), ratios=(0.3, 0.9), within_seed=None) -> ResistanceSequence:
    """Log-uniform window values in [0.1, 10] with random geometric tails."""
    lo, hi = window
    vals = tuple(float(v) for v in np.exp(rng.uniform(np.log(0.1), np.log(10.0), hi - lo + 1)))
    tails = [
        GeometricTail(float(np.exp(rng.uniform(np.log(0.1), np.log(10.0)))), float(rng.uniform(*ratios)))
        for _ in range(2)
    ]
    return ResistanceSequence(lo, vals, tails[0], tails[1], within_seed)


def random_combination(rng: np.random.Generator, seq: ResistanceSequence, q_max: int = 6) -> Combination:
    """Between 1 and q_max members, both families mixed when q >= 2, t_i in [-2, 2] minus a gap at 0."""
    q = int(rng.integers(1, q_max + 1))
    fams = ["U1", "U2"] + [str(f) for f in rng.choice(["U1", "U2"], size=max(q - 2, 0))]
    fams = fams[:q] if q >= 2 else [str(rng.choice(["U1", "U2"]))]
    members = tuple(
        FamilyMember(f, float(rng.uniform(0.0, 1.5)), float(rng.uniform(-1.0, 1.0)), seq) for f in fams
    )
    coeffs = tuple(float(rng.choice([-1, 1]) * rng.uniform(0.05, 2.0)) for _ in range(q))
    return Combination(members, coeffs)
