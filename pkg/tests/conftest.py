import hypothesis.strategies as st
import pytest
from hypothesis import settings

from pharmonic.word_group import reduce

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@st.composite
def words(draw, k=None, max_len=12):
    """Reduced words of a fixed (or drawn) tree order."""
    if k is None:
        k = draw(st.integers(1, 4))
    raw = draw(st.lists(st.integers(1, k + 1), max_size=max_len))
    return reduce(raw, k)


@st.composite
def word_tuples(draw, n, max_len=12):
    k = draw(st.integers(1, 4))
    return tuple(draw(words(k=k, max_len=max_len)) for _ in range(n))


@pytest.fixture
def W():
    """Shorthand constructor: W([1,2], k=2)."""
    return lambda letters, k=2: reduce(letters, k)
