"""Reduced words in G_k, the free product of k+1 copies of Z/2.

Vertices of the Cayley tree of order k are the elements of G_k; two
vertices are adjacent when they differ by right multiplication with a
single generator.  Generators are numbered 1..k+1 and every generator is
its own inverse, so a word is reduced exactly when no two consecutive
letters coincide.
"""

from __future__ import annotations

import os
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_VERTEX_CAP = 10**6
VERTEX_CAP_ENV = "PHARMONIC_VERTEX_CAP"


class OrderMismatch(ValueError):
    """Words from groups of different order were combined."""


class BallTooLarge(ValueError):
    """The requested ball exceeds the configured vertex cap."""


def _check_order(k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"tree order must be a positive integer, got {k!r}")


@dataclass(frozen=True, slots=True)
class ReducedWord:
    """An element of G_k stored in its cancellation-free normal form.

    Construct through :func:`reduce` (or :meth:`identity` /
    :meth:`generator`); the constructor checks the invariants but does not
    cancel letters.
    """

    letters: tuple[int, ...]
    k: int

    def __post_init__(self):
        _check_order(self.k)
        top = self.k + 1
        prev = 0
        for a in self.letters:
            if not 1 <= a <= top:
                raise ValueError(f"generator index {a} outside 1..{top}")
            if a == prev:
                raise ValueError(f"word {list(self.letters)} is not reduced")
            prev = a

    @classmethod
    def identity(cls, k: int) -> "ReducedWord":
        return cls((), k)

    @classmethod
    def generator(cls, s: int, k: int) -> "ReducedWord":
        return cls((s,), k)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return inverse(self)

    def __repr__(self) -> str:
        return f"ReducedWord({list(self.letters)}, k={self.k})"

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def to_json(self) -> list[int]:
        return list(self.letters)


def reduce(letters: Iterable[int], k: int) -> ReducedWord:
    """Cancel adjacent equal letters until none remain.

    A single left-to-right pass with a stack suffices: cancellation of
    involutions is confluent.
    """
    _check_order(k)
    top = k + 1
    stack: list[int] = []
    for a in letters:
        a = int(a)
        if not 1 <= a <= top:
            raise ValueError(f"generator index {a} outside 1..{top}")
        if stack and stack[-1] == a:
            stack.pop()
        else:
            stack.append(a)
    return ReducedWord(tuple(stack), k)


def multiply(x: ReducedWord, y: ReducedWord) -> ReducedWord:
    if x.k != y.k:
        raise OrderMismatch(f"cannot multiply words of order {x.k} and {y.k}")
    a, b = x.letters, y.letters
    # only the junction can cancel
    i = 0
    n = min(len(a), len(b))
    while i < n and a[-1 - i] == b[i]:
        i += 1
    return ReducedWord(a[: len(a) - i] + b[i:], x.k)


def inverse(x: ReducedWord) -> ReducedWord:
    return ReducedWord(x.letters[::-1], x.k)


def distance(x: ReducedWord, y: ReducedWord) -> int:
    """Tree distance d(x, y) = |x^{-1} y|."""
    if x.k != y.k:
        raise OrderMismatch(f"cannot compare words of order {x.k} and {y.k}")
    a, b = x.letters, y.letters
    i = 0
    n = min(len(a), len(b))
    while i < n and a[i] == b[i]:
        i += 1
    return len(a) + len(b) - 2 * i


def neighbors(x: ReducedWord) -> list[ReducedWord]:
    """The k+1 vertices x*a_s, s = 1..k+1, in generator order."""
    return [x * ReducedWord.generator(s, x.k) for s in range(1, x.k + 2)]


def ball_size(k: int, radius: int) -> int:
    """Closed-form vertex count of a ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if k == 1:
        return 1 + 2 * radius
    return 1 + (k + 1) * (k**radius - 1) // (k - 1)


def vertex_cap() -> int:
    raw = os.environ.get(VERTEX_CAP_ENV)
    if raw is None:
        return DEFAULT_VERTEX_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{VERTEX_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{VERTEX_CAP_ENV} must be positive")
    return cap


@dataclass(frozen=True)
class Ball:
    """A finite ball of the tree, listed in breadth-first order.

    ``edges`` holds each tree edge once as ``(parent, child)`` with the
    parent closer to the centre.
    """

    center: ReducedWord
    radius: int
    vertices: tuple[ReducedWord, ...]
    edges: tuple[tuple[ReducedWord, ReducedWord], ...]
    boundary: frozenset[ReducedWord]
    index: dict = field(repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.center.k

    @property
    def interior(self) -> list[ReducedWord]:
        return [v for v in self.vertices if v not in self.boundary]

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, x: ReducedWord) -> bool:
        return x in self.index

    def to_json(self) -> dict:
        return {
            "center": self.center.to_json(),
            "radius": self.radius,
            "vertices": [v.to_json() for v in self.vertices],
            "edges": [[a.to_json(), b.to_json()] for a, b in self.edges],
        }


def ball(center: ReducedWord, radius: int, cap: int | None = None) -> Ball:
    """All vertices within ``radius`` of ``center``, by breadth-first search."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    cap = vertex_cap() if cap is None else cap
    size = ball_size(center.k, radius)
    if size > cap:
        raise BallTooLarge(f"ball of radius {radius} at k={center.k} has {size} vertices (cap {cap})")

    gens = [ReducedWord.generator(s, center.k) for s in range(1, center.k + 2)]
    depth = {center: 0}
    order = [center]
    edges = []
    queue = deque([center])
    while queue:
        x = queue.popleft()
        d = depth[x]
        if d == radius:
            continue
        for g in gens:
            y = x * g
            if y in depth:
                continue
            depth[y] = d + 1
            order.append(y)
            edges.append((x, y))
            queue.append(y)
    boundary = frozenset(v for v in order if depth[v] == radius)
    index = {v: i for i, v in enumerate(order)}
    return Ball(center, radius, tuple(order), tuple(edges), boundary, index)


def random_word(k: int, length: int, rng: random.Random) -> ReducedWord:
    """Uniform reduced word of exactly the given length."""
    letters: list[int] = []
    for _ in range(length):
        choices = [s for s in range(1, k + 2) if not letters or s != letters[-1]]
        letters.append(rng.choice(choices))
    return ReducedWord(tuple(letters), k)


def word_from_json(obj: Sequence[int], k: int) -> ReducedWord:
    """Parse a JSON array of generator indices; the array is reduced first."""
    if not isinstance(obj, (list, tuple)) or not all(isinstance(a, int) and not isinstance(a, bool) for a in obj):
        raise ValueError(f"a word must be a JSON array of integers, got {obj!r}")
    return reduce(obj, k)
