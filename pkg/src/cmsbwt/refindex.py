"""Per-reference index: SA, ISA, LCP, smaller-value queries, BWT, LCP block maxima.

All arrays are 0-based: ``sa[i]`` is the text offset of the ``i``-th smallest
suffix, ``lcp[0] == 0`` and ``lcp[i]`` is the common prefix length of the
suffixes at rows ``i - 1`` and ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .textmodel import TERMINATOR, AugmentedReference

DEFAULT_BLOCK_SIZE = 256
_PAD = np.iinfo(np.int64).max


def build_suffix_array(text) -> np.ndarray:
    """Suffix array by prefix doubling over integer ranks.

    ``text`` may be any integer sequence; when it ends with a unique smallest
    terminator this is the usual suffix order. Without one, a shorter suffix
    sorts before any suffix it prefixes.
    """
    text = np.asarray(text)
    n = len(text)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    _, rank = np.unique(text, return_inverse=True)
    rank = rank.astype(np.int64).ravel()
    sa = np.argsort(rank, kind="stable")
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        boundary = np.empty(n, dtype=bool)
        boundary[0] = True
        boundary[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(boundary) - 1
        rank = new_rank
        if boundary.all() or k >= n:
            break
        k *= 2
    return sa.astype(np.int64)


def build_inverse(sa) -> np.ndarray:
    sa = np.asarray(sa, dtype=np.int64)
    isa = np.empty_like(sa)
    isa[sa] = np.arange(len(sa), dtype=np.int64)
    return isa


@numba.njit(cache=True)
def _lcp_phi(text, sa):
    n = len(sa)
    phi = np.empty(n, dtype=np.int64)
    phi[sa[0]] = -1
    for i in range(1, n):
        phi[sa[i]] = sa[i - 1]
    plcp = np.zeros(n, dtype=np.int64)
    h = 0
    for i in range(n):
        j = phi[i]
        if j < 0:
            h = 0
            continue
        while i + h < n and j + h < n and text[i + h] == text[j + h]:
            h += 1
        plcp[i] = h
        if h > 0:
            h -= 1
    lcp = np.empty(n, dtype=np.int64)
    for i in range(n):
        lcp[i] = plcp[sa[i]]
    lcp[0] = 0
    return lcp


def build_lcp(text, sa) -> np.ndarray:
    """LCP array with the permuted-LCP (Phi) method."""
    sa = np.asarray(sa, dtype=np.int64)
    if len(sa) == 0:
        return np.zeros(0, dtype=np.int64)
    return _lcp_phi(np.asarray(text, dtype=np.int64), sa)


# -- smaller-value queries over a min segment tree ---------------------------

def build_min_tree(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    size = 1
    while size < max(len(values), 1):
        size *= 2
    tree = np.full(2 * size, _PAD, dtype=np.int64)
    tree[size:size + len(values)] = values
    lo = size // 2
    while lo >= 1:
        tree[lo:2 * lo] = np.minimum(tree[2 * lo:4 * lo:2], tree[2 * lo + 1:4 * lo:2])
        lo //= 2
    return tree


@numba.njit(cache=True)
def prev_less(tree, i, t):
    """Largest ``j <= i`` with ``values[j] < t``, or -1."""
    if i < 0:
        return -1
    size = len(tree) // 2
    node = size + i
    if tree[node] < t:
        return i
    while node > 1:
        if node & 1 and tree[node - 1] < t:
            node -= 1
            while node < size:
                node = 2 * node + 1 if tree[2 * node + 1] < t else 2 * node
            return node - size
        node >>= 1
    return -1


@numba.njit(cache=True)
def next_less(tree, i, t, n):
    """Smallest ``j >= i`` with ``values[j] < t``, or ``n``."""
    if i >= n:
        return n
    size = len(tree) // 2
    node = size + i
    if tree[node] < t:
        return i
    while node > 1:
        if not node & 1 and tree[node + 1] < t:
            node += 1
            while node < size:
                node = 2 * node if tree[2 * node] < t else 2 * node + 1
            return node - size
        node >>= 1
    return n


def psv(lcp, i: int, tree=None) -> int:
    """Previous strictly smaller value index; -1 when none exists."""
    lcp = np.asarray(lcp)
    if not 0 <= i < len(lcp):
        raise IndexError(f"index {i} outside 0..{len(lcp) - 1}")
    tree = build_min_tree(lcp) if tree is None else tree
    return int(prev_less(tree, i - 1, int(lcp[i])))


def nsv(lcp, i: int, tree=None) -> int:
    """Next strictly smaller value index; ``len(lcp)`` when none exists."""
    lcp = np.asarray(lcp)
    if not 0 <= i < len(lcp):
        raise IndexError(f"index {i} outside 0..{len(lcp) - 1}")
    tree = build_min_tree(lcp) if tree is None else tree
    return int(next_less(tree, i + 1, int(lcp[i]), len(lcp)))


def block_maxima(lcp, block_size: int) -> np.ndarray:
    if block_size < 1:
        raise ValueError("block_size must be positive")
    lcp = np.asarray(lcp, dtype=np.int64)
    nblocks = -(-len(lcp) // block_size)
    padded = np.zeros(nblocks * block_size, dtype=np.int64)
    padded[: len(lcp)] = lcp
    return padded.reshape(nblocks, block_size).max(axis=1)


@dataclass(frozen=True)
class ReferenceIndex:
    text: np.ndarray
    sa: np.ndarray
    isa: np.ndarray
    lcp: np.ndarray
    tree: np.ndarray
    bwt: np.ndarray
    block_max: np.ndarray
    block_size: int
    original_length: int

    def __len__(self) -> int:
        return len(self.text)

    def psv(self, i: int) -> int:
        return psv(self.lcp, i, self.tree)

    def nsv(self, i: int) -> int:
        return nsv(self.lcp, i, self.tree)


def build_reference_index(reference, block_size: int = DEFAULT_BLOCK_SIZE) -> ReferenceIndex:
    if isinstance(reference, AugmentedReference):
        text, original = reference.text, reference.original_length
    else:
        text = np.asarray(reference)
        original = len(text) - 1
    text = np.ascontiguousarray(text, dtype=np.int64)
    if len(text) == 0 or text[-1] != TERMINATOR or np.count_nonzero(text == TERMINATOR) != 1:
        raise ValueError("reference must end with exactly one terminator")
    sa = build_suffix_array(text)
    isa = build_inverse(sa)
    lcp = build_lcp(text, sa)
    bwt = text[sa - 1]
    bwt[sa == 0] = TERMINATOR
    return ReferenceIndex(
        text=text,
        sa=sa,
        isa=isa,
        lcp=lcp,
        tree=build_min_tree(lcp),
        bwt=bwt,
        block_max=block_maxima(lcp, block_size),
        block_size=block_size,
        original_length=original,
    )
