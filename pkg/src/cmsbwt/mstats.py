"""Streaming matching statistics against the reference and eCMS extraction.

One left-to-right pass over the collection keeps the current matching factor
as an SA interval of the reference, right-extends it until the next symbol no
longer occurs, derives the insert point and S/L flag, and left-contracts for
the next position. A position whose reference position does not continue the
previous one by +1 starts an insert-head; only heads are stored, together with
the per-bucket suffix counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numba
import numpy as np

from .refindex import ReferenceIndex, next_less, prev_less
from .textmodel import SENTINEL, SENTINEL_BYTE, OFFSET, TERMINATOR, Collection

S = 0
L = 1


class InsertHead(NamedTuple):
    j: int
    doc: int
    q: int
    ell: int
    x: int
    c: int


@dataclass(frozen=True)
class FactorRange:
    s: int
    e: int
    ell: int

    def __post_init__(self):
        if self.s > self.e:
            raise ValueError("empty factor range")


# -- interval kernels ---------------------------------------------------------

@numba.njit(cache=True)
def _lower_bound(text, sa, lo, hi, off, sym):
    # first row in [lo, hi) whose symbol at ``off`` is >= sym
    while lo < hi:
        mid = (lo + hi) >> 1
        if text[sa[mid] + off] < sym:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True)
def _extend(text, sa, s, e, ell, sym):
    if s == e:
        if text[sa[s] + ell] == sym:
            return s, e
        return 1, 0
    first = _lower_bound(text, sa, s, e + 1, ell, sym)
    if first > e or text[sa[first] + ell] != sym:
        return 1, 0
    last = _lower_bound(text, sa, first, e + 1, ell, sym + 1) - 1
    return first, last


@numba.njit(cache=True)
def _insert_point(text, sa, s, e, ell, sym):
    # largest row of [s, e] whose next symbol is smaller than sym -> (row, L);
    # none -> (s, S). A row holding exactly factor + '#' is skipped as the
    # lower anchor when a longer suffix in the range continues the factor.
    t = _lower_bound(text, sa, s, e + 1, ell, sym) - 1
    if t < s:
        return s, 0
    if ell > 0 and t == s and s < e and text[sa[s] + ell] == 0:
        return s + 1, 0
    return t, 1


@numba.njit(cache=True)
def _contract(text, sa, isa, tree, block_max, block_size, s, ell, leaf):
    n = len(sa)
    r = isa[sa[s] + 1]
    ell -= 1
    if ell == 0:
        return 0, n - 1, 0
    if leaf:
        bound = block_max[r // block_size]
        if r + 1 < n:
            b2 = block_max[(r + 1) // block_size]
            if b2 > bound:
                bound = b2
        if ell > bound:
            return r, r, ell
    ns = prev_less(tree, r, ell)
    ne = next_less(tree, r + 1, ell, n) - 1
    return ns, ne, ell


@numba.njit(cache=True)
def _scan(ctext, starts, rtext, sa, isa, tree, block_max, block_size, leaf, bucket):
    n = len(sa)
    cap = 1024
    hj = np.empty(cap, dtype=np.int64)
    hq = np.empty(cap, dtype=np.int64)
    hl = np.empty(cap, dtype=np.int64)
    hx = np.empty(cap, dtype=np.uint8)
    hc = np.empty(cap, dtype=np.uint16)
    hd = np.empty(cap, dtype=np.int64)
    k = 0
    for d in range(len(starts) - 1):
        s = 0
        e = n - 1
        ell = 0
        prev_q = -2
        for i in range(starts[d], starts[d + 1]):
            while True:
                sym = ctext[i + ell]
                if sym == 1:
                    break
                ns, ne = _extend(rtext, sa, s, e, ell, sym)
                if ns > ne:
                    break
                s = ns
                e = ne
                ell += 1
            c = ctext[i + ell]
            ip, x = _insert_point(rtext, sa, s, e, ell, c)
            q = sa[ip]
            bucket[ip] += 1
            if i == starts[d] or q != prev_q + 1:
                if k == cap:
                    cap *= 2
                    hj = _grow(hj, cap)
                    hq = _grow(hq, cap)
                    hl = _grow(hl, cap)
                    hx = _grow(hx, cap)
                    hc = _grow(hc, cap)
                    hd = _grow(hd, cap)
                hj[k] = i
                hq[k] = q
                hl[k] = ell
                hx[k] = x
                hc[k] = c
                hd[k] = d
                k += 1
            prev_q = q
            if ell > 0:
                s, e, ell = _contract(rtext, sa, isa, tree, block_max, block_size, s, ell, leaf)
    return hj[:k].copy(), hq[:k].copy(), hl[:k].copy(), hx[:k].copy(), hc[:k].copy(), hd[:k].copy()


@numba.njit(cache=True)
def _grow(a, cap):
    out = np.empty(cap, dtype=a.dtype)
    out[: len(a)] = a
    return out


# -- public interval operations ----------------------------------------------

def full_range(index: ReferenceIndex) -> FactorRange:
    return FactorRange(0, len(index) - 1, 0)


def right_extend(rng: Optional[FactorRange], sym: int, index: ReferenceIndex) -> Optional[FactorRange]:
    """Sub-range whose suffixes continue the factor with ``sym``; None if empty."""
    if rng is None or sym == SENTINEL or sym == TERMINATOR:
        return None
    s, e = _extend(index.text, index.sa, rng.s, rng.e, rng.ell, sym)
    if s > e:
        return None
    return FactorRange(int(s), int(e), rng.ell + 1)


def left_contract(rng: FactorRange, index: ReferenceIndex, leaf_heuristic: bool = True) -> FactorRange:
    """Drop the first symbol of the factor and widen to its maximal range."""
    if rng.ell < 1:
        raise ValueError("cannot contract an empty factor")
    s, e, ell = _contract(
        index.text, index.sa, index.isa, index.tree, index.block_max, index.block_size,
        rng.s, rng.ell, leaf_heuristic,
    )
    return FactorRange(int(s), int(e), int(ell))


def insert_point_and_flag(rng: FactorRange, mismatch: int, index: ReferenceIndex) -> tuple[int, int]:
    """Insert point (row) and S/L flag for factor ``rng`` followed by ``mismatch``."""
    if right_extend(rng, mismatch, index) is not None:
        raise ValueError("factor followed by the mismatch symbol occurs in the reference")
    ip, x = _insert_point(index.text, index.sa, rng.s, rng.e, rng.ell, mismatch)
    return int(ip), int(x)


# -- eCMS -------------------------------------------------------------------

@dataclass
class ECms:
    """Insert-heads in text order plus per-bucket suffix counts.

    ``j`` holds 0-based collection offsets, ``q`` 0-based reference offsets,
    ``x`` is ``S``/``L`` and ``c`` the mismatch code (``SENTINEL`` means the
    sentinel of document ``doc``).
    """

    j: np.ndarray
    q: np.ndarray
    ell: np.ndarray
    x: np.ndarray
    c: np.ndarray
    doc: np.ndarray
    bucket_counters: np.ndarray
    N: int

    def __len__(self) -> int:
        return len(self.j)

    @property
    def kappa(self) -> int:
        return len(self.j)

    def head(self, k: int) -> InsertHead:
        return InsertHead(int(self.j[k]), int(self.doc[k]), int(self.q[k]), int(self.ell[k]),
                          int(self.x[k]), int(self.c[k]))

    def records(self) -> list[InsertHead]:
        return [self.head(k) for k in range(len(self))]

    def governing(self, i: int) -> int:
        if not 0 <= i < self.N:
            raise IndexError(f"position {i} outside the collection")
        return int(np.searchsorted(self.j, i, side="right")) - 1

    def ems(self, i: int) -> InsertHead:
        """ems tuple of an arbitrary position, as a head-shaped record with j = i."""
        return derived_ems(i, self.head(self.governing(i)))


def derived_ems(i: int, head: InsertHead) -> InsertHead:
    """ems of position ``i`` inside the run started by ``head``."""
    off = i - head.j
    if off < 0 or off > head.ell:
        raise ValueError(f"position {i} is not covered by the head at {head.j}")
    return InsertHead(i, head.doc, head.q + off, head.ell - off, head.x, head.c)


def compute_ecms(collection: Collection, index: ReferenceIndex, leaf_heuristic: bool = True) -> ECms:
    bucket = np.zeros(len(index), dtype=np.int64)
    hj, hq, hl, hx, hc, hd = _scan(
        collection.text, collection.starts, index.text, index.sa, index.isa, index.tree,
        index.block_max, index.block_size, leaf_heuristic, bucket,
    )
    return ECms(hj, hq, hl, hx, hc, hd, bucket, collection.N)


# -- spill format -----------------------------------------------------------

SPILL_DTYPE = np.dtype([
    ("j", "<u8"), ("q", "<u8"), ("ell", "<u8"), ("x", "u1"), ("c", "u1"), ("doc", "<u4"),
])
assert SPILL_DTYPE.itemsize == 30


def ecms_to_records(ecms: ECms) -> np.ndarray:
    rec = np.empty(len(ecms), dtype=SPILL_DTYPE)
    rec["j"] = ecms.j
    rec["q"] = ecms.q
    rec["ell"] = ecms.ell
    rec["x"] = ecms.x
    rec["c"] = np.where(ecms.c == SENTINEL, SENTINEL_BYTE, ecms.c.astype(np.int64) - OFFSET)
    rec["doc"] = ecms.doc
    return rec


def write_ecms(path, ecms: ECms) -> None:
    rec = ecms_to_records(ecms)
    with open(path, "wb") as fh:
        fh.write(np.uint64(len(rec)).astype("<u8").tobytes())
        fh.write(rec.tobytes())


def read_ecms(path, bucket_counters: np.ndarray, N: int) -> ECms:
    with open(path, "rb") as fh:
        count = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        rec = np.frombuffer(fh.read(count * SPILL_DTYPE.itemsize), dtype=SPILL_DTYPE)
    if len(rec) != count:
        raise ValueError(f"{path}: truncated eCMS spill ({len(rec)} of {count} records)")
    c = rec["c"].astype(np.uint16)
    c = np.where(c == SENTINEL_BYTE, SENTINEL, c + OFFSET).astype(np.uint16)
    return ECms(
        rec["j"].astype(np.int64), rec["q"].astype(np.int64), rec["ell"].astype(np.int64),
        rec["x"].copy(), c, rec["doc"].astype(np.int64), bucket_counters, N,
    )
