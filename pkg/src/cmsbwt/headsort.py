"""Total order of the insert-heads.

Two suffixes with different insert points compare by insert point. Inside a
bucket the factor length, the S/L flag and the mismatch symbol decide, and an
exact tie is broken by the suffixes that follow the mismatch symbol.

Every position of a head's run shares that continuation (it starts right
after the head's mismatch symbol), so ties only ever need the order of the
``kappa`` continuation suffixes. :func:`continuation_ranks` computes that
order by pointer doubling; :func:`compare_positions` is the direct recursive
definition and serves as the reference the fast paths are checked against.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Optional

import numpy as np

from .mstats import ECms, InsertHead, S
from .refindex import ReferenceIndex, build_suffix_array
from .textmodel import SENTINEL

log = logging.getLogger(__name__)

TIE = 0


def symbol_key(c, doc, m: int):
    """Order-preserving integer key for mismatch symbols; sentinels by document."""
    c = np.asarray(c, dtype=np.int64)
    return np.where(c == SENTINEL, np.asarray(doc, dtype=np.int64), c + m)


_L_BASE = np.int64(1) << 62


def length_key(ell, x):
    """In-bucket key of (ell, x): S-side ascending in ell, then L-side descending."""
    ell = np.asarray(ell, dtype=np.int64)
    return np.where(np.asarray(x) == S, ell, _L_BASE - ell)


def compare_heads(a, b) -> int:
    """Order of two ems tuples ``(ip, ell, x, c_key)``; ``TIE`` when all agree.

    A tie means both suffixes share factor and mismatch symbol, so the order is
    that of their continuations.
    """
    ip_a, ell_a, x_a, c_a = a[:4]
    ip_b, ell_b, x_b, c_b = b[:4]
    if ip_a != ip_b:
        return -1 if ip_a < ip_b else 1
    if ell_a < ell_b:
        return -1 if x_a == S else 1
    if ell_b < ell_a:
        return 1 if x_b == S else -1
    if x_a != x_b:
        return -1 if x_a == S else 1
    if c_a != c_b:
        return -1 if c_a < c_b else 1
    return TIE


def _tuple(h: InsertHead, index: ReferenceIndex, m: int) -> tuple:
    ck = h.doc if h.c == SENTINEL else h.c + m
    return int(index.isa[h.q]), h.ell, h.x, ck


def compare_positions(p1: int, p2: int, ecms: ECms, index: ReferenceIndex, m: int,
                      head_rank: Optional[np.ndarray] = None) -> int:
    """Lexicographic order of the collection suffixes at ``p1`` and ``p2``."""
    while p1 != p2:
        if head_rank is not None:
            k1, k2 = ecms.governing(p1), ecms.governing(p2)
            if ecms.j[k1] == p1 and ecms.j[k2] == p2:
                return -1 if head_rank[k1] < head_rank[k2] else 1
        a, b = ecms.ems(p1), ecms.ems(p2)
        r = compare_heads(_tuple(a, index, m), _tuple(b, index, m))
        if r != TIE:
            return r
        p1 += a.ell + 1
        p2 += b.ell + 1
    return 0


def _dense(*keys) -> np.ndarray:
    """Dense rank of rows under lexicographic order of ``keys`` (major first)."""
    n = len(keys[0])
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort(keys[::-1])
    boundary = np.zeros(n, dtype=bool)
    boundary[0] = True
    for k in keys:
        ks = k[order]
        boundary[1:] |= ks[1:] != ks[:-1]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.cumsum(boundary) - 1
    return rank


def head_keys(ecms: ECms, index: ReferenceIndex, m: int):
    ip = index.isa[ecms.q]
    return ip, length_key(ecms.ell, ecms.x), symbol_key(ecms.c, ecms.doc, m)


def continuation_ranks(ecms: ECms, index: ReferenceIndex, m: int) -> np.ndarray:
    """Rank of each head's continuation suffix among all continuations.

    Heads whose mismatch symbol is a sentinel have no continuation (-1).
    Equal ranks mean the same continuation position.
    """
    kappa = len(ecms)
    if kappa == 0:
        return np.zeros(0, dtype=np.int64)
    open_ = ecms.c != SENTINEL
    rho = np.full(kappa, -1, dtype=np.int64)
    if not open_.any():
        return rho
    src = np.flatnonzero(open_)
    cont = ecms.j[src] + ecms.ell[src] + 1
    gov = np.searchsorted(ecms.j, cont, side="right") - 1
    off = cont - ecms.j[gov]
    ip = index.isa[ecms.q[gov] + off]
    lk = length_key(ecms.ell[gov] - off, ecms.x[gov])
    ck = symbol_key(ecms.c[gov], ecms.doc[gov], m)
    rank = np.full(kappa, -1, dtype=np.int64)
    rank[src] = _dense(ip, lk, ck)
    # T_k = label(cont(k)) . T_gov ; a sentinel-closed label ends the chain
    jump = np.full(kappa, -1, dtype=np.int64)
    jump[src] = np.where(open_[gov], gov, -1)
    while True:
        has = jump >= 0
        second = np.where(has, rank[np.where(has, jump, 0)], -1)
        live = rank >= 0
        new = np.full(kappa, -1, dtype=np.int64)
        new[live] = _dense(rank[live], second[live])
        rank = new
        if not has.any():
            break
        jump = np.where(has, jump[np.where(has, jump, 0)], -1)
    rho[src] = rank[src]
    return rho


@dataclass(frozen=True)
class HeadOrder:
    """Heads sorted by suffix order.

    ``order[r]`` is the head (text-order index) of rank ``r``; ``rank`` is its
    inverse. Sorted heads of bucket ``t`` occupy ``order[bucket_start[t]:
    bucket_start[t + 1]]``. The ``s_*`` arrays hold the comparison keys in
    sorted order.
    """

    order: np.ndarray
    rank: np.ndarray
    bucket_start: np.ndarray
    s_ip: np.ndarray
    s_len: np.ndarray
    s_sym: np.ndarray
    s_rho: np.ndarray
    rho: np.ndarray
    method: str

    def __len__(self) -> int:
        return len(self.order)

    def bucket(self, t: int) -> np.ndarray:
        return self.order[self.bucket_start[t]:self.bucket_start[t + 1]]

    def occupied_buckets(self) -> int:
        return int(np.count_nonzero(np.diff(self.bucket_start)))


def _finish(order, ecms, index, m, rho, method) -> HeadOrder:
    ip, lk, ck = head_keys(ecms, index, m)
    order = np.asarray(order, dtype=np.int64)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order), dtype=np.int64)
    s_ip = ip[order]
    bucket_start = np.searchsorted(s_ip, np.arange(len(index) + 1), side="left").astype(np.int64)
    return HeadOrder(order, rank, bucket_start, s_ip, lk[order], ck[order], rho[order], rho, method)


def _key_order(ecms, index, m, rho) -> np.ndarray:
    ip, lk, ck = head_keys(ecms, index, m)
    return np.lexsort((rho, ck, lk, ip))


def sort_insert_heads(ecms: ECms, index: ReferenceIndex, m: int, rho: Optional[np.ndarray] = None) -> HeadOrder:
    """Comparator order of the heads: ems tuple first, continuation on ties."""
    if rho is None:
        rho = continuation_ranks(ecms, index, m)
    return _finish(_key_order(ecms, index, m, rho), ecms, index, m, rho, "comparator")


def sort_insert_heads_by_comparison(ecms: ECms, index: ReferenceIndex, m: int) -> HeadOrder:
    """Plain comparison sort with :func:`compare_positions`; small inputs only."""
    keyf = cmp_to_key(lambda a, b: compare_positions(int(ecms.j[a]), int(ecms.j[b]), ecms, index, m))
    order = sorted(range(len(ecms)), key=keyf)
    return _finish(order, ecms, index, m, continuation_ranks(ecms, index, m), "comparison")


def metastring(ecms: ECms, index: ReferenceIndex, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Heads renamed by the rank of their ems tuple, in text order, one separator per document.

    Returns the string and, for each head, its offset in it.
    """
    ip, lk, ck = head_keys(ecms, index, m)
    meta = _dense(ip, lk, ck) + m
    # heads are in text order, hence grouped by document
    pos = np.arange(len(ecms), dtype=np.int64) + ecms.doc
    text = np.empty(len(ecms) + m, dtype=np.int64)
    text[pos] = meta
    seps = np.searchsorted(ecms.doc, np.arange(m), side="right") + np.arange(m)
    text[seps] = np.arange(m)
    return text, pos


def sort_insert_heads_metastring(ecms: ECms, index: ReferenceIndex, m: int,
                                 rho: Optional[np.ndarray] = None,
                                 meta: Optional[tuple[np.ndarray, np.ndarray]] = None) -> HeadOrder:
    """Order heads by suffix-sorting the metacharacter string.

    The result is checked pair by pair against the comparator order; any
    disagreement falls back to :func:`sort_insert_heads`.
    """
    text, pos = metastring(ecms, index, m) if meta is None else meta
    sa = build_suffix_array(text)
    is_head = np.zeros(len(text), dtype=bool)
    is_head[pos] = True
    head_of = np.full(len(text), -1, dtype=np.int64)
    head_of[pos] = np.arange(len(ecms), dtype=np.int64)
    order = head_of[sa[is_head[sa]]]
    if rho is None:
        rho = continuation_ranks(ecms, index, m)
    if not _is_sorted(order, ecms, index, m, rho):
        log.warning("metastring head order disagrees with the comparator; falling back")
        return sort_insert_heads(ecms, index, m, rho)
    return _finish(order, ecms, index, m, rho, "metastring")


def _is_sorted(order, ecms, index, m, rho) -> bool:
    if len(order) < 2:
        return True
    ip, lk, ck = head_keys(ecms, index, m)
    keys = (ip[order], lk[order], ck[order], rho[order])
    less = np.zeros(len(order) - 1, dtype=bool)
    equal = np.ones(len(order) - 1, dtype=bool)
    for k in keys:
        a, b = k[:-1], k[1:]
        less |= equal & (a < b)
        equal &= a == b
    return bool(less.all())
