"""Brute-force references for validation.

Nothing here touches the pipeline's index or scan code; everything works on
plain byte strings with full suffix comparisons. Sizes are capped because the
cost is quadratic.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence, Union

MAX_N = 20_000

_TERM = ord("#")
_SENT = ord("$")


class OracleError(ValueError):
    pass


class NaiveBwt(NamedTuple):
    data: bytes
    sentinel_docs: list  # 0-based document of each '$' in output order


def _bodies(collection) -> list[bytes]:
    if hasattr(collection, "documents"):
        return [d.body for d in collection.documents()]
    return [b.encode("ascii") if isinstance(b, str) else bytes(b) for b in collection]


def _cap(n: int) -> None:
    if n > MAX_N:
        raise OracleError(f"instance of size {n} exceeds the oracle limit {MAX_N}")


def naive_suffix_order(collection) -> list[tuple[int, int]]:
    """All suffixes of the collection as ``(doc, offset)`` in sorted order.

    Offset ``len(body)`` is the sentinel suffix. A sentinel is below every
    byte and sentinels rank by document, so a suffix that is a proper prefix
    of another sorts first and equal texts tie-break on the document.
    """
    bodies = _bodies(collection)
    _cap(sum(len(b) + 1 for b in bodies))
    keys = [(b[i:], d, i) for d, b in enumerate(bodies) for i in range(len(b) + 1)]
    keys.sort(key=lambda k: (k[0], k[1]))
    return [(d, i) for _, d, i in keys]


def naive_bwt(collection) -> NaiveBwt:
    """Symbol preceding each sorted suffix; a document start is preceded by its own '$'."""
    bodies = _bodies(collection)
    out = bytearray()
    docs = []
    for d, i in naive_suffix_order(bodies):
        if i == 0:
            out.append(_SENT)
            docs.append(d)
        else:
            out.append(bodies[d][i - 1])
    return NaiveBwt(bytes(out), docs)


def naive_global_order(collection) -> list[int]:
    """Sorted suffixes as 0-based offsets into the concatenation body_1 $ body_2 $ ..."""
    bodies = _bodies(collection)
    start, acc = [], 0
    for b in bodies:
        start.append(acc)
        acc += len(b) + 1
    return [start[d] + i for d, i in naive_suffix_order(bodies)]


def _strip(s: Union[bytes, str], end: int) -> bytes:
    s = s.encode("ascii") if isinstance(s, str) else bytes(s)
    return s[:-1] if s and s[-1] == end else s


def naive_ms(S: Union[bytes, str], R: Union[bytes, str]) -> list[tuple[int, int]]:
    """Per position of ``S``: ``(p, ell)``, 0-based ``p`` (-1 when ``ell == 0``).

    A trailing ``$`` in ``S`` and ``#`` in ``R`` are end markers; the marker
    position of ``S`` is included and never matches. Within a decrement run
    ``p`` follows the previous occurrence (+1); a run start takes the leftmost
    occurrence.
    """
    S = _strip(S, _SENT)
    R = _strip(R, _TERM)
    _cap(len(S) * max(len(R), 1))
    out = []
    for i in range(len(S) + 1):
        ell = 0
        while i + ell < len(S) and S[i:i + ell + 1] in R:
            ell += 1
        if ell == 0:
            p = -1
        elif out and out[-1][1] == ell + 1 and R[out[-1][0] + 1:out[-1][0] + 1 + ell] == S[i:i + ell]:
            p = out[-1][0] + 1
        else:
            p = R.find(S[i:i + ell])
        out.append((p, ell))
    return out


def _code(b: int) -> int:
    return 0 if b == _TERM else 1 if b == _SENT else b + 2


def naive_insert_points(S: Union[bytes, str], R: Union[bytes, str]) -> list[tuple[int, int, int, int]]:
    """Per position of ``S``: ``(q, ell, x, c)`` with 0-based ``q``, ``x`` 0 = S / 1 = L, ``c`` a byte.

    Applies the three-case definition over the sorted suffixes of ``R#``: an
    empty factor goes to row 0; otherwise the largest row prefixed by the
    factor and smaller than factor + mismatch (L), else the smallest row
    prefixed by the factor (S). One refinement: when that largest smaller row
    is the bare factor + '#', is the smallest row of a longer range and the
    factor is non-empty, the suffix is placed at the next row instead (S), so
    that it stays adjacent to the occurrence it continues.
    """
    S = _strip(S, _SENT)
    R = _strip(R, _TERM)
    rt = [_code(b) for b in R] + [0]
    suffixes = sorted(range(len(rt)), key=lambda k: rt[k:])
    ms = naive_ms(S, R)
    st = [_code(b) for b in S] + [1]
    out = []
    for i, (_, ell) in enumerate(ms):
        u = st[i:i + ell]
        c = st[i + ell]
        if ell == 0:
            out.append((suffixes[0], 0, 1, S[i] if i < len(S) else _SENT))
            continue
        rows = [r for r in range(len(suffixes)) if rt[suffixes[r]:suffixes[r] + ell] == u]
        smaller = [r for r in rows if rt[suffixes[r]:] < u + [c]]
        if smaller:
            t = smaller[-1]
            x = 1
            if t == rows[0] and len(rows) > 1 and rt[suffixes[t]:] == u + [0]:
                t, x = rows[1], 0
        else:
            t, x = rows[0], 0
        out.append((suffixes[t], ell, x, c - 2 if c > 1 else _SENT))
    return out


def insert_heads(q: Sequence[int]) -> list[int]:
    """0-based positions whose ``q`` does not continue the previous one by +1."""
    return [i for i in range(len(q)) if i == 0 or q[i] != q[i - 1] + 1]


def ms_heads(ms: Sequence[tuple[int, int]]) -> list[int]:
    """0-based starts of decrement runs."""
    return [i for i in range(len(ms)) if i == 0 or ms[i - 1][1] == 0 or ms[i][1] != ms[i - 1][1] - 1]
