import itertools
from functools import cmp_to_key
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unboundlsq.errors import CapacityError
from unboundlsq.multiindex import (IndexSet, SpaceKind, build_index_set, compare_graded_lex,
                                   graded_lex_key, index_set_size)


def brute_force(kind, q, d):
    pts = itertools.product(range(q + 1), repeat=d)
    if kind == "td":
        pts = (p for p in pts if sum(p) <= q)
    return sorted(pts, key=lambda p: (sum(p), p))


def test_paper_cardinalities():
    assert build_index_set("tp", 3, 2).cardinality == 16
    assert build_index_set("td", 3, 2).cardinality == 10


def test_td_zero_order():
    s = build_index_set(SpaceKind.TD, 0, 5)
    assert list(s) == [(0, 0, 0, 0, 0)]


def test_compare_examples():
    assert compare_graded_lex((0, 1), (1, 0)) == -1
    assert compare_graded_lex((2, 0), (0, 1)) == 1
    assert compare_graded_lex((1, 1), (1, 1)) == 0


def test_compare_dimension_mismatch():
    with pytest.raises(ValueError):
        compare_graded_lex((0, 1), (0, 1, 2))


@pytest.mark.parametrize("kind", ["tp", "td"])
@pytest.mark.parametrize("q", range(0, 9))
@pytest.mark.parametrize("d", range(1, 5))
def test_matches_brute_force(kind, q, d):
    if index_set_size(kind, q, d) > 20000:
        pytest.skip("large set covered by smaller cases")
    s = build_index_set(kind, q, d)
    assert list(s) == brute_force(kind, q, d)


@pytest.mark.parametrize("q,d", [(4, 3), (6, 2), (3, 4)])
def test_td_subset_of_tp(q, d):
    td = set(build_index_set("td", q, d))
    tp = set(build_index_set("tp", q, d))
    assert td <= tp
    assert len(td) == comb(q + d, d)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 6), st.integers(1, 4), st.sampled_from(["tp", "td"]), st.randoms())
def test_sort_recovers_canonical_order(q, d, kind, rnd):
    s = build_index_set(kind, q, d)
    rows = list(s)
    rnd.shuffle(rows)
    assert sorted(rows, key=cmp_to_key(compare_graded_lex)) == list(s)
    assert sorted(rows, key=graded_lex_key) == list(s)


def test_strictly_increasing_and_readonly():
    s = build_index_set("tp", 3, 3)
    rows = list(s)
    assert all(compare_graded_lex(a, b) == -1 for a, b in zip(rows, rows[1:]))
    with pytest.raises(ValueError):
        s.indices[0, 0] = 5


def test_invariants_tp_td():
    tp = build_index_set("tp", 4, 3)
    assert tp.indices.max() <= 4 and tp.cardinality == 125
    td = build_index_set("td", 4, 3)
    assert td.degrees().max() <= 4
    assert td.position((0, 0, 1)) == 1


def test_capacity_error():
    with pytest.raises(CapacityError):
        build_index_set("tp", 10, 40)


def test_bad_parameters():
    with pytest.raises(ValueError):
        build_index_set("td", -1, 2)
    with pytest.raises(ValueError):
        build_index_set("td", 2, 0)
    with pytest.raises(ValueError):
        build_index_set("hc", 2, 2)


def test_indexset_is_value_type():
    s = build_index_set("td", 2, 2)
    assert isinstance(s, IndexSet) and len(s) == 6
    assert s.indices.dtype == np.int64
