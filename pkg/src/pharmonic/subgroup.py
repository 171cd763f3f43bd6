"""Normal subgroups of G_k used as periodicity groups.

Two kinds are supported:

* ``FiniteIndex`` -- intersections of parity subgroups H_A (words with an
  even number of letters from A).  Cosets are identified with parity
  vectors in {0,1}^m, packed into integers (bit l is the parity for A_l).
* ``PairSpec`` -- the kernel H_ij of the projection that deletes every
  letter except a_i and a_j.  The quotient is the infinite dihedral group
  and its cosets are indexed by the integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .word_group import ReducedWord, reduce


class NonSpanningSpec(ValueError):
    """The parity subsets do not give a subgroup of index 2^m."""


@dataclass(frozen=True)
class FiniteIndex:
    A: tuple[frozenset[int], ...]
    k: int

    def __post_init__(self):
        if not self.A:
            raise ValueError("at least one parity subset is required")
        top = self.k + 1
        for a in self.A:
            if not a:
                raise ValueError("parity subsets must be nonempty")
            if not all(1 <= s <= top for s in a):
                raise ValueError(f"parity subset {sorted(a)} not inside 1..{top}")

    @classmethod
    def of(cls, A, k: int) -> "FiniteIndex":
        return cls(tuple(frozenset(int(s) for s in a) for a in A), k)

    @property
    def m(self) -> int:
        return len(self.A)

    def masks(self) -> list[int]:
        """Bitmask of parity coordinates flipped by each generator a_1..a_{k+1}."""
        return [sum(1 << l for l, a in enumerate(self.A) if s in a) for s in range(1, self.k + 2)]

    def to_json(self) -> dict:
        return {"finite": {"A": [sorted(a) for a in self.A]}, "k": self.k}


@dataclass(frozen=True)
class PairSpec:
    i: int
    j: int
    k: int

    def __post_init__(self):
        top = self.k + 1
        if self.i == self.j:
            raise ValueError("the pair must consist of two distinct generators")
        if not (1 <= self.i <= top and 1 <= self.j <= top):
            raise ValueError(f"pair ({self.i}, {self.j}) not inside 1..{top}")

    def to_json(self) -> dict:
        return {"pair": [self.i, self.j], "k": self.k}


SubgroupSpec = Union[FiniteIndex, PairSpec]


def spec_from_json(obj, k: int | None = None) -> SubgroupSpec:
    """Parse ``{"finite": {"A": [[1],[2]]}}`` or ``{"pair": [1,2]}``.

    An optional top-level ``"k"`` overrides the ``k`` argument.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ValueError("subgroup spec must be a JSON object")
    k = obj.get("k", k)
    if k is None:
        raise ValueError("tree order k is required for a subgroup spec")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"invalid tree order {k!r}")
    if "finite" in obj:
        A = obj["finite"]["A"]
        if not isinstance(A, list) or not all(isinstance(a, list) for a in A):
            raise ValueError("finite spec needs A as a list of lists")
        return FiniteIndex.of(A, k)
    if "pair" in obj:
        pair = obj["pair"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError("pair spec needs exactly two generator indices")
        return PairSpec(int(pair[0]), int(pair[1]), k)
    raise ValueError("subgroup spec needs a 'finite' or 'pair' key")


# -- finite index ----------------------------------------------------------

def letter_count(x: ReducedWord, i: int) -> int:
    """Number of occurrences of a_i in x."""
    if not 1 <= i <= x.k + 1:
        raise ValueError(f"generator index {i} outside 1..{x.k + 1}")
    return x.letters.count(i)


def parity_label(x: ReducedWord, spec: FiniteIndex) -> tuple[int, ...]:
    counts = [x.letters.count(s) for s in range(1, x.k + 2)]
    return tuple(sum(counts[s - 1] for s in a) % 2 for a in spec.A)


def coset_id(x: ReducedWord, spec: FiniteIndex) -> int:
    """Packed parity label: bit l is the parity of letters from A_l."""
    masks = spec.masks()
    c = 0
    for s in x.letters:
        c ^= masks[s - 1]
    return c


def label_to_id(label) -> int:
    return sum(int(b) << l for l, b in enumerate(label))


def id_to_label(c: int, m: int) -> tuple[int, ...]:
    return tuple((c >> l) & 1 for l in range(m))


def gf2_rank(vectors) -> int:
    """Rank over GF(2) of integers read as bit vectors."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def validate_and_index(spec: FiniteIndex) -> int:
    """Index 2^m of the intersection, provided the generator masks span GF(2)^m."""
    r = gf2_rank(spec.masks())
    if r != spec.m:
        raise NonSpanningSpec(
            f"parity subsets {[sorted(a) for a in spec.A]} have mask rank {r} < {spec.m}; "
            f"the intersection has index {2**r}, not {2**spec.m}"
        )
    return 2**spec.m


@dataclass(frozen=True)
class QuotientGraph:
    """Cosets of a finite-index parity subgroup with generator multiplicities.

    ``multiplicity[v, w]`` counts generators s with mask(s) = v xor w, i.e.
    how many neighbours of any vertex in coset v lie in coset w.
    """

    m: int
    k: int
    generator_mask: tuple[int, ...]
    multiplicity: np.ndarray

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def cosets(self) -> list[tuple[int, ...]]:
        return [id_to_label(c, self.m) for c in range(self.size)]

    def edges(self) -> list[tuple[int, int]]:
        """Unordered coset pairs (v <= w) joined by at least one generator."""
        n = self.size
        return [(v, w) for v in range(n) for w in range(v, n) if self.multiplicity[v, w] > 0]


def quotient_graph(spec: FiniteIndex) -> QuotientGraph:
    validate_and_index(spec)
    masks = spec.masks()
    n = 1 << spec.m
    mult = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        for mask in masks:
            mult[v, v ^ mask] += 1
    mult.setflags(write=False)
    return QuotientGraph(spec.m, spec.k, tuple(masks), mult)


# -- infinite index ------------------------------------------------------------

def project(x: ReducedWord, pair: PairSpec) -> ReducedWord:
    """Delete letters outside {a_i, a_j} and reduce."""
    keep = (pair.i, pair.j)
    return reduce((a for a in x.letters if a in keep), x.k)


def coset_index(x: ReducedWord, pair: PairSpec) -> int:
    """Integer label n of the coset H_n containing x.

    The projection is an alternating word in a_i, a_j; its length gives
    |n| and the first letter the sign (a_i positive).
    """
    w = project(x, pair).letters
    if not w:
        return 0
    return len(w) if w[0] == pair.i else -len(w)


def lemma1_profile(x: ReducedWord, pair: PairSpec) -> tuple[int, int, int]:
    """Neighbour counts of x in (H_{n-1}, H_n, H_{n+1})."""
    n = coset_index(x, pair)
    counts = [0, 0, 0]
    other = 0
    for s in range(1, x.k + 2):
        d = coset_index(x * ReducedWord.generator(s, x.k), pair) - n
        if -1 <= d <= 1:
            counts[d + 1] += 1
        else:
            other += 1
    if other:
        raise RuntimeError(f"neighbour of {x} left the adjacent cosets")
    return tuple(counts)
