import itertools
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmsbwt.bwtbuild import (
    BUFFER_ENTRY_BYTES, Bwt, BuildConfig, CounterSet, UniqueHeadLayer, cms_bwt, count_head_precedence,
    emit_bwt, locate, query_key, two_layer_locate,
)
from cmsbwt.headsort import sort_insert_heads
from cmsbwt.mstats import compute_ecms
from cmsbwt.oracle import naive_bwt, naive_global_order
from cmsbwt.refindex import build_reference_index
from cmsbwt.textmodel import Collection, augment_reference

from helpers import EXAMPLE_DOCS, EXAMPLE_REF, lf_invert, mutate, random_instance

EXAMPLE_BWT = b"TGTTTGTGCGAAA$ATTT$TAAAA"


def _pipeline(ref, docs):
    coll = Collection.from_documents(docs)
    idx = build_reference_index(augment_reference(ref, coll))
    ecms = compute_ecms(coll, idx)
    order = sort_insert_heads(ecms, idx, coll.m)
    return coll, idx, ecms, order


def test_example_counters_and_bwt():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, EXAMPLE_DOCS)
    counters = count_head_precedence(coll, ecms, order, idx)
    assert counters.head_counters.tolist() == [0, 0, 2, 0, 1, 0, 2, 1]
    assert counters.residuals().min() >= 0
    bwt = emit_bwt(idx, ecms, order, counters, coll)
    assert bwt.tobytes() == EXAMPLE_BWT
    assert bwt.symbols()[13] == "$2" and bwt.symbols()[18] == "$1"


def test_two_symbol_case():
    res = cms_bwt("A", Collection.from_documents(["A"]))
    assert res.bwt.tobytes() == b"A$"


def test_example_two_layer_queries():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, EXAMPLE_DOCS)
    layer = UniqueHeadLayer.build(order)
    head = int(order.rank[1])  # head (4,5,6,T,L)
    for pos in (1, 21):
        q = query_key(pos, ecms, idx, order, coll.m)
        assert q[0] == order.s_ip[head]
        assert two_layer_locate(q, order, layer) == locate(q, order) == head


def test_query_below_all_groups():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, EXAMPLE_DOCS)
    layer = UniqueHeadLayer.build(order)
    t = int(order.s_ip[0])
    assert two_layer_locate((t, 0, 0, -1, -1), order, layer) == order.bucket_start[t]
    assert two_layer_locate((t, 0, 1, 10**9, 10**9), order, layer) is None


def test_layer_keys_increase():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, EXAMPLE_DOCS)
    layer = UniqueHeadLayer.build(order)
    for t in range(len(idx)):
        keys = layer.key[layer.bucket_start[t]:layer.bucket_start[t + 1]]
        assert np.all(np.diff(keys) > 0)


def test_identical_document():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, [EXAMPLE_REF])
    counters = count_head_precedence(coll, ecms, order, idx)
    counters.check()
    assert emit_bwt(idx, ecms, order, counters, coll).tobytes() == naive_bwt(coll).data


def test_emit_rejects_inconsistent_counters():
    coll, idx, ecms, order = _pipeline(EXAMPLE_REF, EXAMPLE_DOCS)
    good = count_head_precedence(coll, ecms, order, idx)
    bad = CounterSet(good.bucket_counters, good.head_counters + 5, good.bucket_start)
    with pytest.raises(ValueError):
        bad.check()
    with pytest.raises(ValueError):
        emit_bwt(idx, ecms, order, bad, coll)


def test_config_validation():
    with pytest.raises(ValueError):
        BuildConfig(head_sort="quick")
    with pytest.raises(ValueError):
        BuildConfig(buffer_bytes=BUFFER_ENTRY_BYTES - 1)
    with pytest.raises(ValueError):
        BuildConfig(lcp_block_size=0)


def test_stats_example():
    res = cms_bwt(EXAMPLE_REF, Collection.from_documents(EXAMPLE_DOCS))
    assert res.stats == {"N": 24, "R": 12, "kappa": 8, "unique_heads": 7, "head_buckets": 7, "runs": 15}


def _brute_counters(coll, ecms, order, idx):
    """Head-counters from the full suffix order: non-heads between consecutive bucket heads."""
    rank_of = {p: r for r, p in enumerate(naive_global_order(coll))}
    head_set = set(ecms.j.tolist())
    bucket = {p: int(idx.isa[ecms.ems(p).q]) for p in range(coll.N)}
    out = np.zeros(len(ecms), dtype=np.int64)
    for g, k in enumerate(order.order):
        t = int(order.s_ip[g])
        lo = rank_of[int(ecms.j[order.order[g - 1]])] if g > order.bucket_start[t] else -1
        hi = rank_of[int(ecms.j[k])]
        out[g] = sum(1 for p in range(coll.N) if p not in head_set and bucket[p] == t and lo < rank_of[p] < hi)
    return out


@pytest.mark.parametrize("sigma, ndocs, rate", list(itertools.product([2, 4, 6], [1, 2, 5], [0, 0.05, 0.2])))
def test_matches_naive(sigma, ndocs, rate):
    rng = random.Random(sigma * 100 + ndocs * 10 + int(rate * 100))
    alpha = "ACGTNX"[:sigma]
    for _ in range(20):
        ref = "".join(rng.choice(alpha) for _ in range(rng.randint(5, 60)))
        docs = [mutate(rng, ref, rate, alpha) for _ in range(ndocs)]
        coll = Collection.from_documents(docs)
        res = cms_bwt(ref, coll)
        expected = naive_bwt(coll)
        assert res.bwt.tobytes() == expected.data
        assert res.bwt.sentinel_docs.tolist() == expected.sentinel_docs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_counters_match_brute_force(seed):
    rng = random.Random(seed)
    ref, docs = random_instance(rng, max_len=50, max_docs=3)
    coll, idx, ecms, order = _pipeline(ref, docs)
    counters = count_head_precedence(coll, ecms, order, idx)
    assert counters.head_counters.tolist() == _brute_counters(coll, ecms, order, idx).tolist()
    assert counters.bucket_counters.sum() == coll.N


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_layer_equals_single_layer(seed):
    rng = random.Random(seed)
    ref, docs = random_instance(rng, max_len=150, max_docs=5)
    coll, idx, ecms, order = _pipeline(ref, docs)
    layer = UniqueHeadLayer.build(order)
    for p in range(coll.N):
        q = query_key(p, ecms, idx, order, coll.m)
        if order.bucket_start[q[0] + 1] > order.bucket_start[q[0]]:
            assert two_layer_locate(q, order, layer) == locate(q, order)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_configuration_invariance(seed):
    rng = random.Random(seed)
    ref, docs = random_instance(rng, max_len=200, max_docs=6)
    coll = Collection.from_documents(docs)
    base = cms_bwt(ref, coll)
    base.counters.check()
    for cfg in (BuildConfig(buffer_bytes=BUFFER_ENTRY_BYTES), BuildConfig(buffer_bytes=BUFFER_ENTRY_BYTES * 7),
                BuildConfig(two_layer=False), BuildConfig(head_sort="metastring"),
                BuildConfig(memory_saving=True, head_sort="metastring"), BuildConfig(memory_saving=True),
                BuildConfig(leaf_heuristic=False, lcp_block_size=1)):
        other = cms_bwt(ref, coll, cfg)
        assert other.bwt == base.bwt
        assert np.array_equal(other.counters.head_counters, base.counters.head_counters)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_permutation_and_inversion(seed):
    rng = random.Random(seed)
    ref, docs = random_instance(rng, max_len=120, max_docs=5)
    res = cms_bwt(ref, Collection.from_documents(docs))
    data = res.bwt.tobytes()
    assert len(data) == sum(len(d) + 1 for d in docs)
    assert Counter(data) == Counter("".join(d + "$" for d in docs).encode())
    assert lf_invert(data, res.bwt.sentinel_docs.tolist()) == [d.encode() for d in docs]


def test_bwt_equality():
    a = Bwt(np.frombuffer(b"A$", np.uint8), np.array([0]))
    assert a == Bwt(np.frombuffer(b"A$", np.uint8), np.array([0]))
    assert a != Bwt(np.frombuffer(b"$A", np.uint8), np.array([0]))
