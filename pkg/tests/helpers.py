import random

import numpy as np

from cmsbwt import Collection

EXAMPLE_REF = "CATTAGATTAG"
EXAMPLE_DOCS = ["TAGAGATTATT", "GATTACATTAG"]
MS_TEXT = "TAGAGATTATT$"
MS_REF = "CATTAGATTAG#"

ALPHABET = "ACGTNX"


def mutate(rng, ref, rate, alpha):
    return "".join(rng.choice(alpha) if rng.random() < rate else ch for ch in ref)


def random_instance(rng, min_len=20, max_len=500, max_docs=8):
    sigma = rng.randint(2, 6)
    alpha = ALPHABET[:sigma]
    ref = "".join(rng.choice(alpha) for _ in range(rng.randint(min_len, max_len)))
    # mutation alphabet may include one symbol the reference never uses
    mut_alpha = ALPHABET[:sigma + 1] if sigma < 6 and rng.random() < 0.3 else alpha
    docs = [mutate(rng, ref, rng.uniform(0, 0.2), mut_alpha) for _ in range(rng.randint(1, max_docs))]
    return ref, docs


def adversarial_instances():
    rng = random.Random(99)
    base = "".join(rng.choice("ACGT") for _ in range(60))
    yield base, [base]                                # document identical to reference
    yield base, [base, base, base]                    # repeated identical documents
    yield base, [base + "Z"]                          # symbol absent from reference
    yield "ACGT" * 10, ["Z" * 17]                     # nothing matches
    yield "A" * 30, ["A"]                             # single-symbol documents
    yield "A" * 30, ["A" * 40, "A" * 29, "A"]
    yield "AB" * 15, ["BA" * 16, "B"]
    yield base, [base[::-1], base[10:], base[:10]]
    yield "A", ["A"]
    yield "AC" * 10, ["CA" * 11]


def instances(n, seed=0):
    rng = random.Random(seed)
    out = list(adversarial_instances())
    while len(out) < n:
        out.append(random_instance(rng))
    return out


def lex_less(coll: Collection, a: int, b: int) -> bool:
    """Direct comparison of two collection suffixes (sentinels by document)."""
    ta, tb = coll.text, coll.text
    da, db = coll.doc_of(a), coll.doc_of(b)
    while True:
        ca, cb = int(ta[a]), int(tb[b])
        if ca == 1 and cb == 1:
            return da < db
        if ca != cb:
            return ca < cb
        a += 1
        b += 1


def lf_invert(data: bytes, sentinel_docs) -> list[bytes]:
    """Recover the documents from a BWT by LF-walking from each sentinel suffix."""
    n = len(data)
    sent = iter(sentinel_docs)
    key = []
    for ch in data:
        key.append((1, next(sent)) if ch == ord("$") else (ch + 2, 0))
    order = sorted(range(n), key=lambda r: key[r])
    lf = [0] * n
    for rank, r in enumerate(order):
        lf[r] = rank
    m = len(sentinel_docs)
    docs = []
    for d in range(m):
        r, out = d, []
        while data[r] != ord("$"):
            out.append(data[r])
            r = lf[r]
        docs.append(bytes(reversed(out)))
    return docs


def as_np(x):
    return np.asarray(x, dtype=np.int64)
