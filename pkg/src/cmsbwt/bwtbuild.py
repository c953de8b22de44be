"""Head-counters and BWT emission.

Non-head suffixes of an insert-bucket are all preceded by the same reference
symbol, so the BWT of a bucket is that symbol repeated, broken only where a
head (preceded by its own collection symbol) falls. Counting how many
non-head suffixes sit in front of each head is therefore enough.
"""
from __future__ import annotations

import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from . import headsort
from .headsort import HeadOrder
from .mstats import ECms, compute_ecms, read_ecms, write_ecms
from .refindex import DEFAULT_BLOCK_SIZE, ReferenceIndex, build_reference_index
from .textmodel import OFFSET, SENTINEL_BYTE, Collection, augment_reference

log = logging.getLogger(__name__)

DEFAULT_BUFFER_BYTES = 2 << 30
# one buffered suffix: bucket, head, offset
BUFFER_ENTRY_BYTES = 24


@dataclass(frozen=True)
class Bwt:
    """Output bytes (every sentinel written as ``$``) plus the document of each ``$`` in order."""

    data: np.ndarray
    sentinel_docs: np.ndarray

    def __len__(self) -> int:
        return len(self.data)

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other) -> bool:
        return (isinstance(other, Bwt) and np.array_equal(self.data, other.data)
                and np.array_equal(self.sentinel_docs, other.sentinel_docs))

    def symbols(self) -> list[str]:
        """Readable symbols, sentinels as ``$<doc>`` (1-based)."""
        docs = iter(self.sentinel_docs.tolist())
        return [f"${next(docs) + 1}" if b == SENTINEL_BYTE else chr(b) for b in self.data.tolist()]


@dataclass(frozen=True)
class CounterSet:
    bucket_counters: np.ndarray
    head_counters: np.ndarray  # by global head rank
    bucket_start: np.ndarray

    def residuals(self) -> np.ndarray:
        csum = np.zeros(len(self.head_counters) + 1, dtype=np.int64)
        np.cumsum(self.head_counters + 1, out=csum[1:])
        return self.bucket_counters - (csum[self.bucket_start[1:]] - csum[self.bucket_start[:-1]])

    def check(self) -> None:
        if np.any(self.residuals() < 0) or np.any(self.head_counters < 0):
            raise ValueError("counter identity violated: a bucket holds fewer suffixes than its heads account for")


@dataclass(frozen=True)
class UniqueHeadLayer:
    """Distinct (ell, x) keys per bucket and where each group starts among the sorted heads."""

    key: np.ndarray
    first: np.ndarray
    bucket_start: np.ndarray

    @classmethod
    def build(cls, order: HeadOrder) -> "UniqueHeadLayer":
        kappa = len(order)
        if kappa == 0:
            return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(len(order.bucket_start), np.int64))
        new = np.ones(kappa, dtype=bool)
        new[1:] = (order.s_ip[1:] != order.s_ip[:-1]) | (order.s_len[1:] != order.s_len[:-1])
        first = np.flatnonzero(new).astype(np.int64)
        n = len(order.bucket_start) - 1
        bstart = np.searchsorted(order.s_ip[first], np.arange(n + 1), side="left").astype(np.int64)
        return cls(order.s_len[first], first, bstart)


# -- locate kernels ---------------------------------------------------------------

@numba.njit(cache=True)
def _greater(a_len, a_sym, a_rho, b_len, b_sym, b_rho):
    if a_len != b_len:
        return a_len > b_len
    if a_sym != b_sym:
        return a_sym > b_sym
    return a_rho > b_rho


@numba.njit(cache=True)
def _first_greater(lo, hi, s_len, s_sym, s_rho, q_len, q_sym, q_rho):
    while lo < hi:
        mid = (lo + hi) >> 1
        if _greater(s_len[mid], s_sym[mid], s_rho[mid], q_len, q_sym, q_rho):
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _locate_one(ip, q_len, q_sym, q_rho, bucket_start, s_len, s_sym, s_rho):
    return _first_greater(bucket_start[ip], bucket_start[ip + 1], s_len, s_sym, s_rho, q_len, q_sym, q_rho)


@numba.njit(cache=True)
def _locate_two(ip, q_len, q_sym, q_rho, bucket_start, s_len, s_sym, s_rho, u_key, u_first, u_bstart):
    hi = bucket_start[ip + 1]
    lo_u = u_bstart[ip]
    hi_u = u_bstart[ip + 1]
    a, b = lo_u, hi_u
    while a < b:
        mid = (a + b) >> 1
        if u_key[mid] < q_len:
            a = mid + 1
        else:
            b = mid
    if a == hi_u:
        return hi
    if u_key[a] != q_len:
        return u_first[a]
    g_hi = u_first[a + 1] if a + 1 < hi_u else hi
    return _first_greater(u_first[a], g_hi, s_len, s_sym, s_rho, q_len, q_sym, q_rho)


@numba.njit(cache=True)
def _fill(hj, hq, N, isa, bucket_start, k, off, buf_ip, buf_k, buf_off):
    kappa = len(hj)
    cap = len(buf_ip)
    n = 0
    while k < kappa:
        end = hj[k + 1] if k + 1 < kappa else N
        run = end - hj[k]
        while off < run:
            ip = isa[hq[k] + off]
            if bucket_start[ip + 1] > bucket_start[ip]:
                if n == cap:
                    return n, k, off
                buf_ip[n] = ip
                buf_k[n] = k
                buf_off[n] = off
                n += 1
            off += 1
        k += 1
        off = 1
    return n, k, off


@numba.njit(cache=True)
def _count(perm, buf_ip, buf_k, buf_off, h_len, h_x, h_sym, h_rho, bucket_start,
           s_len, s_sym, s_rho, two_layer, u_key, u_first, u_bstart, counters, L_BASE):
    for t in perm:
        ip = buf_ip[t]
        k = buf_k[t]
        ell = h_len[k] - buf_off[t]
        q_len = ell if h_x[k] == 0 else L_BASE - ell
        if two_layer:
            g = _locate_two(ip, q_len, h_sym[k], h_rho[k], bucket_start, s_len, s_sym, s_rho,
                            u_key, u_first, u_bstart)
        else:
            g = _locate_one(ip, q_len, h_sym[k], h_rho[k], bucket_start, s_len, s_sym, s_rho)
        if g < bucket_start[ip + 1]:
            counters[g] += 1


# -- public operations ------------------------------------------------------

def locate(query, order: HeadOrder, layer: Optional[UniqueHeadLayer] = None) -> Optional[int]:
    """Sorted index of the first bucket head greater than ``query``; None if none.

    ``query`` is ``(ip, ell, x, sym_key, rho)`` as produced by :func:`query_key`.
    With ``layer`` the two-layer search is used.
    """
    ip, ell, x, sym, rho = query
    q_len = int(headsort.length_key(ell, x))
    if layer is None:
        g = _locate_one(ip, q_len, sym, rho, order.bucket_start, order.s_len, order.s_sym, order.s_rho)
    else:
        g = _locate_two(ip, q_len, sym, rho, order.bucket_start, order.s_len, order.s_sym, order.s_rho,
                        layer.key, layer.first, layer.bucket_start)
    return None if g >= order.bucket_start[ip + 1] else int(g)


@numba.njit(cache=True)
def _locate_many(ip, q_len, q_sym, q_rho, bucket_start, s_len, s_sym, s_rho, two_layer, u_key, u_first, u_bstart):
    out = np.empty(len(ip), dtype=np.int64)
    for t in range(len(ip)):
        if two_layer:
            out[t] = _locate_two(ip[t], q_len[t], q_sym[t], q_rho[t], bucket_start, s_len, s_sym, s_rho,
                                 u_key, u_first, u_bstart)
        else:
            out[t] = _locate_one(ip[t], q_len[t], q_sym[t], q_rho[t], bucket_start, s_len, s_sym, s_rho)
    return out


def locate_all(ecms: ECms, index: ReferenceIndex, order: HeadOrder, m: int, two_layer: bool) -> np.ndarray:
    """Located head (sorted index, or bucket end when none is greater) for every collection position."""
    N = ecms.N
    k = np.repeat(np.arange(len(ecms)), np.diff(np.append(ecms.j, N)))
    off = np.arange(N) - ecms.j[k]
    ip = index.isa[ecms.q[k] + off]
    q_len = headsort.length_key(ecms.ell[k] - off, ecms.x[k])
    q_sym = headsort.symbol_key(ecms.c, ecms.doc, m)[k]
    layer = UniqueHeadLayer.build(order)
    return _locate_many(ip, q_len, q_sym, order.rho[k], order.bucket_start, order.s_len, order.s_sym, order.s_rho,
                        two_layer, layer.key, layer.first, layer.bucket_start)


def two_layer_locate(query, order: HeadOrder, layer: UniqueHeadLayer) -> Optional[int]:
    return locate(query, order, layer)


def query_key(i: int, ecms: ECms, index: ReferenceIndex, order: HeadOrder, m: int) -> tuple:
    """Comparison key of the suffix at ``i`` derived from its governing head."""
    k = ecms.governing(i)
    h = ecms.ems(i)
    sym = int(headsort.symbol_key(h.c, h.doc, m))
    return int(index.isa[h.q]), h.ell, h.x, sym, int(order.rho[k])


def count_head_precedence(collection: Collection, ecms: ECms, order: HeadOrder, index: ReferenceIndex,
                          buffer_capacity: int = 1 << 16, two_layer: bool = True) -> CounterSet:
    """Count, per head, the non-head suffixes of its bucket between it and the previous head.

    Suffixes are queued in text order into a buffer of ``buffer_capacity``
    entries and located bucket by bucket once it fills.
    """
    m = collection.m
    kappa = len(ecms)
    counters = np.zeros(kappa, dtype=np.int64)
    if kappa == 0:
        return CounterSet(ecms.bucket_counters, counters, order.bucket_start)
    h_sym = headsort.symbol_key(ecms.c, ecms.doc, m)
    layer = UniqueHeadLayer.build(order)
    cap = max(1, int(buffer_capacity))
    cap = min(cap, max(1, collection.N - kappa))
    buf_ip = np.empty(cap, dtype=np.int64)
    buf_k = np.empty(cap, dtype=np.int64)
    buf_off = np.empty(cap, dtype=np.int64)
    k, off = 0, 1
    while k < kappa:
        n, k, off = _fill(ecms.j, ecms.q, collection.N, index.isa, order.bucket_start, k, off,
                          buf_ip, buf_k, buf_off)
        if n == 0:
            continue
        perm = np.argsort(buf_ip[:n], kind="stable")
        _count(perm, buf_ip, buf_k, buf_off, ecms.ell, ecms.x, h_sym, order.rho, order.bucket_start,
               order.s_len, order.s_sym, order.s_rho, two_layer, layer.key, layer.first,
               layer.bucket_start, counters, headsort._L_BASE)
    return CounterSet(ecms.bucket_counters, counters, order.bucket_start)


def preceding_symbols(collection: Collection, ecms: ECms) -> tuple[np.ndarray, np.ndarray]:
    """Byte preceding each head and, for document starts, the document whose ``$`` it is.

    A document start is preceded by its own sentinel (each document is read
    cyclically).
    """
    at_start = ecms.j == collection.starts[ecms.doc]
    prev = collection.text[np.maximum(ecms.j - 1, 0)].astype(np.int64) - OFFSET
    prev = np.where(at_start, SENTINEL_BYTE, prev).astype(np.uint8)
    return prev, np.where(at_start, ecms.doc, -1)


def emit_bwt(index: ReferenceIndex, ecms: ECms, order: HeadOrder, counters: CounterSet,
             collection: Collection) -> Bwt:
    n = len(index)
    kappa = len(order)
    residual = counters.residuals()
    if np.any(residual < 0):
        raise ValueError("counter identity violated")
    ch = (index.bwt - OFFSET).astype(np.int64)
    term_row = int(index.isa[0])
    ts = order.bucket_start
    if residual[term_row] or (ts[term_row + 1] > ts[term_row] and counters.head_counters[ts[term_row]:ts[term_row + 1]].any()):
        raise ValueError("non-head suffix assigned to the bucket of the whole reference")
    ch[term_row] = 0
    prev, prev_doc = preceding_symbols(collection, ecms)
    seg_sym = np.empty(n + 2 * kappa, dtype=np.uint8)
    seg_cnt = np.empty(n + 2 * kappa, dtype=np.int64)
    g = np.arange(kappa, dtype=np.int64)
    t = order.s_ip
    seg_sym[t + 2 * g] = ch[t]
    seg_cnt[t + 2 * g] = counters.head_counters
    seg_sym[t + 2 * g + 1] = prev[order.order]
    seg_cnt[t + 2 * g + 1] = 1
    rows = np.arange(n, dtype=np.int64)
    seg_sym[rows + 2 * ts[1:]] = ch
    seg_cnt[rows + 2 * ts[1:]] = residual
    data = np.repeat(seg_sym, seg_cnt)
    docs = prev_doc[order.order]
    if len(data) != collection.N:
        raise ValueError(f"emitted {len(data)} symbols for a collection of {collection.N}")
    return Bwt(data, docs[docs >= 0].astype(np.int64))


# -- pipeline ---------------------------------------------------------------

@dataclass
class BuildConfig:
    lcp_block_size: int = DEFAULT_BLOCK_SIZE
    head_sort: str = "comparator"
    buffer_bytes: int = DEFAULT_BUFFER_BYTES
    memory_saving: bool = False
    leaf_heuristic: bool = True
    two_layer: bool = True
    spill_dir: Optional[str] = None

    def __post_init__(self):
        if self.head_sort not in ("comparator", "metastring"):
            raise ValueError(f"unknown head sort {self.head_sort!r}")
        if self.lcp_block_size < 1:
            raise ValueError("lcp_block_size must be positive")
        if self.buffer_bytes < BUFFER_ENTRY_BYTES:
            raise ValueError(f"buffer must hold at least one entry ({BUFFER_ENTRY_BYTES} bytes)")

    @property
    def buffer_capacity(self) -> int:
        return self.buffer_bytes // BUFFER_ENTRY_BYTES


@dataclass
class BuildResult:
    bwt: Bwt
    index: ReferenceIndex
    ecms: ECms
    order: HeadOrder
    counters: CounterSet
    timings: dict = field(default_factory=dict)

    @property
    def stats(self) -> dict:
        e = self.ecms
        uniq = len(np.unique(np.stack([e.q, e.ell, e.x.astype(np.int64), e.c.astype(np.int64)]), axis=1).T) if len(e) else 0
        from .rle import count_runs
        return {
            "N": e.N,
            "R": len(self.index),
            "kappa": len(e),
            "unique_heads": uniq,
            "head_buckets": self.order.occupied_buckets(),
            "runs": count_runs(self.bwt.data),
        }


def build_from_index(index: ReferenceIndex, collection: Collection, config: Optional[BuildConfig] = None) -> BuildResult:
    """Run the collection passes against an already built reference index."""
    config = config or BuildConfig()
    m = collection.m
    timings = {}
    t0 = time.perf_counter()
    ecms = compute_ecms(collection, index, config.leaf_heuristic)
    timings["ecms"] = time.perf_counter() - t0

    with tempfile.TemporaryDirectory(dir=config.spill_dir) if config.memory_saving else _nullcontext() as tmp:
        meta = None
        if config.memory_saving:
            path = os.path.join(tmp, "ecms.bin")
            write_ecms(path, ecms)
            bucket, N = ecms.bucket_counters, ecms.N
            del ecms
            ecms = read_ecms(path, bucket, N)

        t0 = time.perf_counter()
        rho = headsort.continuation_ranks(ecms, index, m)
        if config.head_sort == "metastring":
            meta = headsort.metastring(ecms, index, m)
            if config.memory_saving:
                mpath = os.path.join(tmp, "meta.npz")
                np.savez(mpath, text=meta[0], pos=meta[1])
                del meta
                with np.load(mpath) as z:
                    meta = (z["text"], z["pos"])
            order = headsort.sort_insert_heads_metastring(ecms, index, m, rho, meta)
        else:
            order = headsort.sort_insert_heads(ecms, index, m, rho)
        timings["sort"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    counters = count_head_precedence(collection, ecms, order, index, config.buffer_capacity, config.two_layer)
    timings["count"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    bwt = emit_bwt(index, ecms, order, counters, collection)
    timings["emit"] = time.perf_counter() - t0
    return BuildResult(bwt, index, ecms, order, counters, timings)


def cms_bwt(reference, collection: Collection, config: Optional[BuildConfig] = None) -> BuildResult:
    """BWT of ``collection`` using ``reference`` (bytes or codes) as the guide string."""
    config = config or BuildConfig()
    t0 = time.perf_counter()
    index = build_reference_index(augment_reference(reference, collection), config.lcp_block_size)
    elapsed = time.perf_counter() - t0
    result = build_from_index(index, collection, config)
    result.timings["index"] = elapsed
    return result


class _nullcontext:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False
