"""Estimator-style wrapper: fit builds the reference index, transform emits BWTs."""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bwtbuild import DEFAULT_BUFFER_BYTES, BuildConfig, BuildResult, build_from_index
from .refindex import DEFAULT_BLOCK_SIZE, build_reference_index
from .textmodel import OFFSET, Collection, augment_reference, encode

Docs = Union[Collection, Sequence[Union[bytes, str]]]


def check_collection(X: Docs) -> Collection:
    """Coerce documents (bytes/str sequence or a Collection) into a Collection."""
    if isinstance(X, Collection):
        return X
    if isinstance(X, (bytes, str)):
        raise TypeError("expected a sequence of documents, got a single string")
    docs = list(X)
    if not docs:
        raise ValueError("collection is empty")
    for k, d in enumerate(docs):
        if not isinstance(d, (bytes, bytearray, str)):
            raise TypeError(f"document {k} is {type(d).__name__}, expected bytes or str")
        if len(d) == 0:
            raise ValueError(f"document {k} is empty")
    return Collection.from_documents(docs)


def check_reference(reference) -> np.ndarray:
    if reference is None:
        raise ValueError("reference is required")
    if isinstance(reference, np.ndarray):
        return reference
    body = encode(reference)
    if len(body) == 0:
        raise ValueError("reference is empty")
    return body


class CmsBwt(TransformerMixin, BaseEstimator):
    """BWT of similar documents, guided by a reference.

    ``fit`` augments the reference with the alphabet of ``X`` and indexes it;
    ``transform`` returns the BWT bytes of any collection over that alphabet.
    Without an explicit ``reference`` the first document of ``X`` is used.
    """

    def __init__(self, lcp_block_size: int = DEFAULT_BLOCK_SIZE, head_sort: str = "comparator",
                 buffer_bytes: int = DEFAULT_BUFFER_BYTES, memory_saving: bool = False,
                 leaf_heuristic: bool = True, two_layer: bool = True):
        self.lcp_block_size = lcp_block_size
        self.head_sort = head_sort
        self.buffer_bytes = buffer_bytes
        self.memory_saving = memory_saving
        self.leaf_heuristic = leaf_heuristic
        self.two_layer = two_layer

    def _config(self) -> BuildConfig:
        return BuildConfig(
            lcp_block_size=self.lcp_block_size, head_sort=self.head_sort, buffer_bytes=self.buffer_bytes,
            memory_saving=self.memory_saving, leaf_heuristic=self.leaf_heuristic, two_layer=self.two_layer,
        )

    def fit(self, X: Docs, y=None, reference=None):
        coll = check_collection(X)
        config = self._config()
        ref = check_reference(reference) if reference is not None else coll.text[coll.starts[0]:coll.starts[1] - 1]
        self.index_ = build_reference_index(augment_reference(ref, coll), config.lcp_block_size)
        self.alphabet_ = coll.alphabet()
        self.n_documents_in_ = coll.m
        return self

    def build(self, X: Docs) -> BuildResult:
        check_is_fitted(self, "index_")
        coll = check_collection(X)
        unknown = np.setdiff1d(coll.alphabet(), self.index_.text)
        if len(unknown):
            symbols = "".join(chr(int(c) - OFFSET) for c in unknown)
            raise ValueError(f"symbols {symbols!r} were not seen during fit")
        return build_from_index(self.index_, coll, self._config())

    def transform(self, X: Docs) -> bytes:
        return self.build(X).bwt.tobytes()
