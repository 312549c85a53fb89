import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxpush.dominance import dominates, nondominated_filter
from oracles import brute_dominates, brute_nondominated


@pytest.mark.parametrize(
    "u, v, expected",
    [
        ((1, 2), (2, 3), True),
        ((1, 3), (2, 2), False),
        ((2, 2), (1, 3), False),
        ((1, 2), (1, 2), False),
        ((1, 2), (1, 3), True),
    ],
)
def test_dominates_examples(u, v, expected):
    assert dominates(u, v) is expected


def test_dominates_length_mismatch():
    with pytest.raises(ValueError):
        dominates((1, 2), (1, 2, 3))


@pytest.mark.parametrize(
    "points, expected",
    [
        ([(1, 1)], [0]),
        ([(1, 1), (2, 2), (0, 3)], [0, 2]),
        ([(1, 2), (1, 2)], [0, 1]),
    ],
)
def test_nondominated_filter_examples(points, expected):
    assert nondominated_filter(points) == expected


def test_nondominated_filter_rejects_empty():
    with pytest.raises(ValueError):
        nondominated_filter([])


vectors = st.lists(st.integers(-3, 3), min_size=3, max_size=3)


@given(vectors, vectors, vectors)
def test_dominance_is_a_strict_partial_order(a, b, c):
    assert not dominates(a, a)
    assert not (dominates(a, b) and dominates(b, a))
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=40))
def test_filter_matches_bruteforce_with_ties(points):
    assert nondominated_filter(points) == brute_nondominated(points)


@given(vectors, vectors)
def test_dominates_matches_bruteforce(u, v):
    assert dominates(u, v) == brute_dominates(u, v)


def test_filter_handles_three_objectives():
    rng = np.random.default_rng(3)
    pts = rng.random((60, 3))
    assert nondominated_filter(pts) == brute_nondominated(pts.tolist())
