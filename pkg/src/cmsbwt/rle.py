"""Run-length coding of a BWT byte stream and its on-disk format.

File layout: run count as 8-byte little-endian, then per run one symbol byte
followed by its length as 8-byte little-endian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RECORD_DTYPE = np.dtype([("sym", "u1"), ("len", "<u8")])
assert RECORD_DTYPE.itemsize == 9


def _as_bytes(stream) -> np.ndarray:
    if isinstance(stream, (bytes, bytearray, memoryview)):
        return np.frombuffer(stream, dtype=np.uint8)
    if isinstance(stream, str):
        return np.frombuffer(stream.encode("ascii"), dtype=np.uint8)
    return np.asarray(stream, dtype=np.uint8)


def run_starts(data) -> np.ndarray:
    data = _as_bytes(data)
    if len(data) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(np.concatenate(([True], data[1:] != data[:-1])))


def count_runs(data) -> int:
    return len(run_starts(data))


@dataclass(frozen=True)
class RunLengthBwt:
    symbols: np.ndarray  # uint8
    lengths: np.ndarray  # uint64, all positive

    def __post_init__(self):
        if len(self.symbols) != len(self.lengths):
            raise ValueError("symbols and lengths differ in size")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def n(self) -> int:
        return int(self.lengths.sum()) if len(self.lengths) else 0

    def runs(self) -> list[tuple[str, int]]:
        return [(chr(s), int(k)) for s, k in zip(self.symbols.tolist(), self.lengths.tolist())]

    def __eq__(self, other) -> bool:
        return (isinstance(other, RunLengthBwt) and np.array_equal(self.symbols, other.symbols)
                and np.array_equal(self.lengths, other.lengths))

    @classmethod
    def from_runs(cls, runs) -> "RunLengthBwt":
        runs = list(runs)
        sym = np.array([ord(s) if isinstance(s, str) else s for s, _ in runs], dtype=np.uint8)
        lengths = np.array([k for _, k in runs], dtype=np.uint64)
        return cls(sym, lengths)

    def normalized(self) -> "RunLengthBwt":
        """Merge adjacent runs of the same symbol (zero-length runs are rejected)."""
        _check_lengths(self.lengths)
        if len(self) == 0:
            return self
        starts = run_starts(self.symbols)
        return RunLengthBwt(self.symbols[starts], np.add.reduceat(self.lengths, starts).astype(np.uint64))

    def to_bytes(self) -> bytes:
        rec = np.empty(len(self), dtype=RECORD_DTYPE)
        rec["sym"] = self.symbols
        rec["len"] = self.lengths
        return np.uint64(len(self)).astype("<u8").tobytes() + rec.tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "RunLengthBwt":
        if len(raw) < 8:
            raise ValueError("truncated run-length header")
        count = int(np.frombuffer(raw[:8], dtype="<u8")[0])
        body = raw[8:]
        if len(body) != count * RECORD_DTYPE.itemsize:
            raise ValueError(f"expected {count} runs, found {len(body)} bytes of records")
        rec = np.frombuffer(body, dtype=RECORD_DTYPE)
        return cls(rec["sym"].copy(), rec["len"].astype(np.uint64))


def _check_lengths(lengths) -> None:
    if len(lengths) and int(np.min(lengths)) == 0:
        raise ValueError("zero-length run")


def rle_encode(stream) -> RunLengthBwt:
    data = _as_bytes(stream)
    starts = run_starts(data)
    lengths = np.diff(np.append(starts, len(data))).astype(np.uint64)
    return RunLengthBwt(data[starts].copy(), lengths)


def rle_decode(rl: RunLengthBwt) -> bytes:
    _check_lengths(rl.lengths)
    return np.repeat(rl.symbols, rl.lengths.astype(np.int64)).tobytes()


def write_rle(path, rl: RunLengthBwt) -> None:
    with open(path, "wb") as fh:
        fh.write(rl.to_bytes())


def read_rle(path) -> RunLengthBwt:
    with open(path, "rb") as fh:
        return RunLengthBwt.from_bytes(fh.read())
