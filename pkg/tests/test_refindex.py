import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmsbwt.refindex import (
    block_maxima, build_inverse, build_lcp, build_min_tree, build_reference_index, build_suffix_array, nsv, psv,
)
from cmsbwt.textmodel import TERMINATOR, augment_reference, Collection

from helpers import EXAMPLE_REF

texts = st.integers(2, 6).flatmap(lambda s: st.lists(st.integers(2, s + 1), min_size=0, max_size=200))


def _example_index(block_size=256):
    return build_reference_index(augment_reference(EXAMPLE_REF, Collection.from_documents([EXAMPLE_REF])), block_size)


def naive_sa(text):
    return sorted(range(len(text)), key=lambda i: list(text[i:]))


def test_example_suffix_array():
    idx = _example_index()
    assert (idx.sa + 1).tolist() == [12, 10, 5, 7, 2, 1, 11, 6, 9, 4, 8, 3]


def test_terminator_only():
    assert build_suffix_array([TERMINATOR]).tolist() == [0]
    assert build_inverse([0]).tolist() == [0]


def test_example_inverse():
    isa = _example_index().isa
    assert isa[11] + 1 == 1
    assert isa[3] + 1 == 10


def test_example_lcp():
    lcp = _example_index().lcp
    assert lcp[0] == 0
    assert lcp[1] == 0   # "#" vs "AG#"
    assert lcp[2] == 2   # "AG#" vs "AGATTAG#"
    assert lcp.tolist() == [0, 0, 2, 1, 5, 0, 0, 1, 0, 3, 1, 4]


def test_example_bwt():
    idx = _example_index()
    sym = ["#" if c == TERMINATOR else chr(c - 2) for c in idx.bwt.tolist()]
    assert "".join(sym) == "GTTGC#AATTAA"


def test_block_maxima():
    idx = _example_index(block_size=4)
    assert idx.block_max.tolist() == [2, 5, 4]
    assert _example_index(block_size=100).block_max.tolist() == [5]
    with pytest.raises(ValueError):
        block_maxima([1, 2], 0)


def test_psv_nsv_example():
    lcp = [0, 0, 2, 1]
    assert psv(lcp, 2) == 1
    assert nsv(lcp, 2) == 3
    assert psv(lcp, 1) == -1 and nsv(lcp, 1) == 4
    with pytest.raises(IndexError):
        psv(lcp, 4)


def test_rejects_bad_reference():
    with pytest.raises(ValueError):
        build_reference_index(np.array([3, 4, 5]))
    with pytest.raises(ValueError):
        build_reference_index(np.array([3, 0, 5, 0]))


@given(texts)
def test_suffix_array_matches_sort(body):
    text = body + [TERMINATOR]
    sa = build_suffix_array(text)
    assert sa.tolist() == naive_sa(text)
    isa = build_inverse(sa)
    assert np.array_equal(sa[isa], np.arange(len(text)))
    assert np.array_equal(build_inverse(isa), sa)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=30))
def test_suffix_array_without_terminator(text):
    # shorter suffix first when it prefixes the other
    assert build_suffix_array(text).tolist() == naive_sa(text)


@given(texts)
def test_lcp_matches_direct(body):
    text = body + [TERMINATOR]
    sa = build_suffix_array(text)
    lcp = build_lcp(text, sa)
    assert lcp[0] == 0
    for i in range(1, len(sa)):
        a, b = sa[i - 1], sa[i]
        h = 0
        while text[a + h] == text[b + h]:
            h += 1
        assert lcp[i] == h


@given(st.lists(st.integers(0, 8), min_size=1, max_size=80))
def test_psv_nsv_scan(values):
    tree = build_min_tree(values)
    for i, v in enumerate(values):
        left = [k for k in range(i) if values[k] < v]
        right = [k for k in range(i + 1, len(values)) if values[k] < v]
        assert psv(values, i, tree) == (left[-1] if left else -1)
        assert nsv(values, i, tree) == (right[0] if right else len(values))


@settings(max_examples=50)
@given(texts, st.integers(1, 9))
def test_index_consistency(body, bs):
    idx = build_reference_index(np.array(body + [TERMINATOR]), bs)
    assert idx.block_max.max() == idx.lcp.max()
    # LF reconstruction of the text from its BWT
    order = np.lexsort((np.arange(len(idx)), idx.bwt))
    lf = np.empty(len(idx), dtype=np.int64)
    lf[order] = np.arange(len(idx))
    r, out = 0, []
    for _ in range(len(idx) - 1):
        out.append(int(idx.bwt[r]))
        r = lf[r]
    assert out[::-1] == body
