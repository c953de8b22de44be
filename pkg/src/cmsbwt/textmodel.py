"""Symbol alphabet, FASTA ingestion and reference augmentation.

Internal codes are small unsigned integers:

* ``TERMINATOR`` (0) is the reference end marker ``#``;
* ``SENTINEL`` (1) marks the end of every document. Documents are told apart
  by their index, which is carried next to the code wherever sentinels are
  compared (``$_1 < $_2 < ...``);
* a regular input byte ``b`` is encoded as ``b + OFFSET``, so byte order is
  preserved and every regular symbol sorts above both end markers.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

TERMINATOR = 0
SENTINEL = 1
OFFSET = 2

CODE_DTYPE = np.uint16

TERMINATOR_BYTE = ord("#")
SENTINEL_BYTE = ord("$")
# graphic ASCII; '#' and '$' are reserved for the end markers
_ALLOWED = np.zeros(256, dtype=bool)
_ALLOWED[0x21:0x7F] = True
_ALLOWED[TERMINATOR_BYTE] = False
_ALLOWED[SENTINEL_BYTE] = False

Source = Union[str, os.PathLike, bytes, BinaryIO]


class FastaError(ValueError):
    """Malformed FASTA input."""


@dataclass(frozen=True)
class Document:
    id: int  # 1-based
    body: bytes
    name: str = ""


@dataclass(frozen=True)
class Collection:
    """Documents concatenated into one code array, one sentinel after each.

    ``starts[d]`` is the 0-based offset of document ``d`` (0-based) and
    ``starts[-1] == N``.
    """

    text: np.ndarray
    starts: np.ndarray
    names: tuple = field(default=())

    @classmethod
    def from_documents(cls, docs: Iterable[Union[Document, bytes, str]]) -> "Collection":
        bodies, names = [], []
        for doc in docs:
            if isinstance(doc, Document):
                bodies.append(doc.body)
                names.append(doc.name)
            else:
                bodies.append(doc.encode("ascii") if isinstance(doc, str) else bytes(doc))
                names.append("")
        if not bodies:
            raise ValueError("collection is empty")
        lengths = np.array([len(b) + 1 for b in bodies], dtype=np.int64)
        starts = np.zeros(len(bodies) + 1, dtype=np.int64)
        np.cumsum(lengths, out=starts[1:])
        text = np.empty(int(starts[-1]), dtype=CODE_DTYPE)
        for d, body in enumerate(bodies):
            raw = np.frombuffer(body, dtype=np.uint8)
            check_symbols(raw)
            text[starts[d]:starts[d + 1] - 1] = raw.astype(CODE_DTYPE) + OFFSET
            text[starts[d + 1] - 1] = SENTINEL
        return cls(text, starts, tuple(names))

    @classmethod
    def from_codes(cls, bodies: Sequence[np.ndarray]) -> "Collection":
        """Build from already encoded bodies (arrays of regular codes)."""
        lengths = np.array([len(b) + 1 for b in bodies], dtype=np.int64)
        starts = np.zeros(len(bodies) + 1, dtype=np.int64)
        np.cumsum(lengths, out=starts[1:])
        text = np.empty(int(starts[-1]), dtype=CODE_DTYPE)
        for d, body in enumerate(bodies):
            if len(body) and int(np.min(body)) < OFFSET:
                raise ValueError("document bodies must hold regular codes only")
            text[starts[d]:starts[d + 1] - 1] = body
            text[starts[d + 1] - 1] = SENTINEL
        return cls(text, starts, ("",) * len(bodies))

    @property
    def N(self) -> int:
        return int(self.starts[-1])

    @property
    def m(self) -> int:
        return len(self.starts) - 1

    def doc_of(self, pos: int) -> int:
        return int(np.searchsorted(self.starts, pos, side="right")) - 1

    def body(self, d: int) -> bytes:
        codes = self.text[self.starts[d]:self.starts[d + 1] - 1]
        return (codes - OFFSET).astype(np.uint8).tobytes()

    def documents(self) -> list[Document]:
        return [
            Document(d + 1, self.body(d), self.names[d] if d < len(self.names) else "")
            for d in range(self.m)
        ]

    def alphabet(self) -> np.ndarray:
        """Sorted distinct regular codes."""
        present = np.bincount(self.text, minlength=OFFSET + 256)
        present[:OFFSET] = 0
        return np.flatnonzero(present)


@dataclass(frozen=True)
class AugmentedReference:
    text: np.ndarray  # codes, last entry TERMINATOR
    original_length: int

    @property
    def body(self) -> bytes:
        return (self.text[:-1] - OFFSET).astype(np.uint8).tobytes()

    def __len__(self) -> int:
        return len(self.text)


def check_symbols(raw: np.ndarray) -> None:
    bad = ~_ALLOWED[raw]
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raise FastaError(f"unsupported byte 0x{int(raw[pos]):02x} at offset {pos}")


def encode(body: Union[bytes, str]) -> np.ndarray:
    """Regular codes for a body (no end marker appended)."""
    if isinstance(body, str):
        body = body.encode("ascii")
    raw = np.frombuffer(body, dtype=np.uint8)
    check_symbols(raw)
    return raw.astype(CODE_DTYPE) + OFFSET


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if hasattr(source, "read"):
        return source.read()
    with open(source, "rb") as fh:
        return fh.read()


def parse_fasta(source: Source) -> list[Document]:
    """Parse multi-FASTA: one document per record, in file order.

    Sequence bytes are passed through untouched apart from stripping line
    breaks; no case folding or masking.
    """
    data = _read_bytes(source)
    if not data.strip():
        raise FastaError("empty FASTA input")
    docs: list[Document] = []
    name = None
    chunks: list[bytes] = []

    def close() -> None:
        body = b"".join(chunks)
        if not body:
            raise FastaError(f"record {name!r} has an empty sequence")
        check_symbols(np.frombuffer(body, dtype=np.uint8))
        docs.append(Document(len(docs) + 1, body, name))

    for lineno, line in enumerate(data.splitlines(), 1):
        line = line.rstrip(b"\r")
        if line.startswith(b">"):
            if name is not None:
                close()
            name = line[1:].decode("utf-8", "replace").strip()
            chunks = []
        elif name is None:
            if line.strip():
                raise FastaError(f"line {lineno}: sequence data before the first header")
        else:
            chunks.append(line.rstrip())
    if name is None:
        raise FastaError("no FASTA header found")
    close()
    return docs


def write_fasta(docs: Iterable[Document], width: int = 80) -> bytes:
    out = []
    for doc in docs:
        out.append(b">" + doc.name.encode("utf-8") + b"\n")
        for k in range(0, len(doc.body), width):
            out.append(doc.body[k:k + width] + b"\n")
    return b"".join(out)


def read_collection(source: Source) -> Collection:
    return Collection.from_documents(parse_fasta(source))


def read_reference(source: Source) -> bytes:
    docs = parse_fasta(source)
    if len(docs) > 1:
        log.warning("reference file has %d records; using only the first (%s)", len(docs), docs[0].name)
    return docs[0].body


def augment_reference(reference: Union[bytes, str, np.ndarray], collection: Collection) -> AugmentedReference:
    """Append every collection symbol missing from the reference, ascending, then ``#``.

    A trailing terminator already present in ``reference`` (as code) is dropped
    before augmentation.
    """
    body = reference if isinstance(reference, np.ndarray) else encode(reference)
    body = np.asarray(body, dtype=CODE_DTYPE)
    if len(body) and body[-1] == TERMINATOR:
        body = body[:-1]
    if len(body) == 0:
        raise ValueError("reference body is empty")
    if np.any(body < OFFSET):
        raise ValueError("reference body must hold regular symbols only")
    missing = np.setdiff1d(collection.alphabet(), np.unique(body)).astype(CODE_DTYPE)
    if len(missing):
        log.info("augmenting reference with %d missing symbols", len(missing))
    text = np.concatenate([body, missing, np.array([TERMINATOR], dtype=CODE_DTYPE)])
    return AugmentedReference(text, len(body))


def decode_symbol(code: int, doc: int = -1) -> str:
    """Human readable form of one code; sentinels as ``$<doc+1>``."""
    if code == TERMINATOR:
        return "#"
    if code == SENTINEL:
        return f"${doc + 1}" if doc >= 0 else "$"
    return chr(code - OFFSET)
