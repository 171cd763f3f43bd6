import functools
import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import word_tuples, words
from pharmonic.subgroup import (
    FiniteIndex,
    NonSpanningSpec,
    PairSpec,
    coset_id,
    coset_index,
    label_to_id,
    lemma1_profile,
    letter_count,
    parity_label,
    project,
    quotient_graph,
    spec_from_json,
    validate_and_index,
)
from pharmonic.word_group import ReducedWord, multiply, neighbors, random_word, reduce


def span_size(spec):
    """Number of parity labels reachable: XORs over all generator subsets."""
    masks = spec.masks()
    return len({
        functools.reduce(lambda a, b: a ^ b, sub, 0)
        for r in range(len(masks) + 1)
        for sub in itertools.combinations(masks, r)
    })


def isometry_index(x, pair):
    """Independent coset oracle: a_i acts on Z by t -> 1-t, a_j by t -> -1-t."""
    t = 0
    for a in reversed(x.letters):
        if a == pair.i:
            t = 1 - t
        elif a == pair.j:
            t = -1 - t
    return t


def test_letter_count(W):
    assert letter_count(W([]), 1) == 0
    assert letter_count(W([1, 2, 1]), 1) == 2
    with pytest.raises(ValueError):
        letter_count(W([1]), 4)


@given(words())
def test_letter_counts_partition_length(w):
    assert sum(letter_count(w, i) for i in range(1, w.k + 2)) == len(w)


def test_parity_label_examples(W):
    spec = FiniteIndex.of([[1], [2]], 2)
    assert parity_label(W([]), spec) == (0, 0)
    assert parity_label(W([1, 2, 1]), FiniteIndex.of([[1]], 2)) == (0,)
    assert parity_label(W([1, 3]), spec) == (1, 0)


@given(word_tuples(2), st.data())
def test_parity_label_is_homomorphism(t, data):
    x, y = t
    k = x.k
    m = data.draw(st.integers(1, 3))
    A = [data.draw(st.sets(st.integers(1, k + 1), min_size=1)) for _ in range(m)]
    spec = FiniteIndex.of(A, k)
    lx, ly, lxy = parity_label(x, spec), parity_label(y, spec), parity_label(x * y, spec)
    assert lxy == tuple(a ^ b for a, b in zip(lx, ly))
    assert coset_id(x, spec) == label_to_id(lx)


@pytest.mark.parametrize(
    "A, k, index", [([[1]], 2, 2), ([[1], [2]], 2, 4), ([[1], [2], [3]], 2, 8), ([[1], [2]], 1, 4), ([[1, 2], [2, 3]], 3, 4)]
)
def test_validate_and_index(A, k, index):
    assert validate_and_index(FiniteIndex.of(A, k)) == index


def test_validate_rejects_non_spanning():
    with pytest.raises(NonSpanningSpec):
        validate_and_index(FiniteIndex.of([[1, 2, 3], [1, 2, 3]], 2))
    with pytest.raises(NonSpanningSpec):
        validate_and_index(FiniteIndex.of([[1], [2], [1, 2]], 3))
    with pytest.raises(NonSpanningSpec):
        # two generators cannot span three parity coordinates
        validate_and_index(FiniteIndex.of([[1], [2], [1]], 1))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_validate_agrees_with_span_enumeration(k):
    subsets = [s for r in range(1, k + 2) for s in itertools.combinations(range(1, k + 2), r)]
    rng = random.Random(k)
    for _ in range(200):
        m = rng.randint(1, 3)
        spec = FiniteIndex.of([rng.choice(subsets) for _ in range(m)], k)
        size = span_size(spec)
        if size == 2**m:
            assert validate_and_index(spec) == size
        else:
            with pytest.raises(NonSpanningSpec):
                validate_and_index(spec)


def test_labels_are_onto(W):
    spec = FiniteIndex.of([[1], [2], [3]], 2)
    seen = {coset_id(reduce(seq, 2), spec) for n in range(4) for seq in itertools.product([1, 2, 3], repeat=n)}
    assert seen == set(range(8))


def test_quotient_graph_examples():
    q = quotient_graph(FiniteIndex.of([[1]], 2))
    assert q.multiplicity[0, 1] == 1 and q.multiplicity[0, 0] == 2
    q = quotient_graph(FiniteIndex.of([[1, 2, 3]], 2))
    assert q.multiplicity[0, 1] == 3 and q.multiplicity[0, 0] == 0


@pytest.mark.parametrize("A, k", [([[1]], 2), ([[1], [2]], 2), ([[1], [2], [3]], 3), ([[1, 2], [2, 3]], 3), ([[1], [2]], 1)])
def test_quotient_graph_matches_vertex_neighbourhoods(A, k):
    spec = FiniteIndex.of(A, k)
    q = quotient_graph(spec)
    assert (q.multiplicity.sum(axis=1) == k + 1).all()
    assert (q.multiplicity == q.multiplicity.T).all()
    rng = random.Random(3)
    for _ in range(100):
        x = random_word(k, rng.randint(0, 10), rng)
        v = coset_id(x, spec)
        counts = [0] * q.size
        for y in neighbors(x):
            counts[coset_id(y, spec)] += 1
        assert counts == list(q.multiplicity[v])


def test_quotient_graph_rejects_non_spanning():
    with pytest.raises(NonSpanningSpec):
        quotient_graph(FiniteIndex.of([[1, 2, 3], [1, 2, 3]], 2))


def test_project_examples():
    pair = PairSpec(1, 2, 3)
    assert project(reduce([1, 3, 2], 3), pair).letters == (1, 2)
    assert project(reduce([3, 4, 3], 3), pair).is_identity
    assert project(reduce([1, 3, 1], 3), pair).is_identity


@given(word_tuples(2), st.data())
def test_project_is_homomorphism(t, data):
    x, y = t
    if x.k < 2:
        return
    i, j = data.draw(st.lists(st.integers(1, x.k + 1), min_size=2, max_size=2, unique=True))
    pair = PairSpec(i, j, x.k)
    assert project(x * y, pair) == multiply(project(x, pair), project(y, pair))


def test_coset_index_examples():
    pair = PairSpec(1, 2, 2)
    assert coset_index(ReducedWord.identity(2), pair) == 0
    assert coset_index(reduce([1], 2), pair) == 1
    assert coset_index(reduce([2], 2), pair) == -1
    assert coset_index(reduce([1, 3, 2], 2), pair) == 2
    assert coset_index(reduce([2, 3, 1, 2], 2), pair) == -3


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_coset_index_matches_isometry_oracle(k):
    rng = random.Random(k)
    pairs = [PairSpec(1, 2, k), PairSpec(2, 1, k), PairSpec(1, k + 1, k)]
    for _ in range(500):
        x = random_word(k, rng.randint(0, 40), rng)
        for pair in pairs:
            assert coset_index(x, pair) == isometry_index(x, pair)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_generator_moves(k):
    pair = PairSpec(1, 2, k)
    rng = random.Random(k)
    for _ in range(300):
        x = random_word(k, rng.randint(0, 25), rng)
        n = coset_index(x, pair)
        steps = {s: coset_index(x * ReducedWord.generator(s, k), pair) - n for s in range(1, k + 2)}
        for s, d in steps.items():
            assert d == 0 if s not in (1, 2) else d in (-1, 1)
        assert {steps[1], steps[2]} == {-1, 1}


def test_lemma1_examples():
    assert lemma1_profile(ReducedWord.identity(2), PairSpec(1, 2, 2)) == (1, 1, 1)
    rng = random.Random(0)
    for _ in range(50):
        assert lemma1_profile(random_word(1, rng.randint(0, 20), rng), PairSpec(1, 2, 1)) == (1, 0, 1)


def test_lemma1_k3_random():
    rng = random.Random(1)
    pair = PairSpec(1, 2, 3)
    done = 0
    while done < 1000:
        x = random_word(3, rng.randint(0, 40), rng)
        if abs(coset_index(x, pair)) > 20:
            continue
        assert lemma1_profile(x, pair) == (1, 2, 1)
        done += 1


def test_spec_json():
    assert spec_from_json({"finite": {"A": [[1], [2]]}}, 2) == FiniteIndex.of([[1], [2]], 2)
    assert spec_from_json('{"pair": [1, 2], "k": 3}') == PairSpec(1, 2, 3)
    spec = FiniteIndex.of([[1, 3], [2]], 2)
    assert spec_from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        spec_from_json({"pair": [1, 1]}, 2)
    with pytest.raises(ValueError):
        spec_from_json({"pair": [1, 2]})
    with pytest.raises(ValueError):
        spec_from_json({"finite": {"A": [[]]}}, 2)
