"""Command-line driver: ``cms-bwt -r ref.fa -i coll.fa -o out.bwt``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .bwtbuild import DEFAULT_BUFFER_BYTES, BUFFER_ENTRY_BYTES, BuildConfig, cms_bwt
from .oracle import MAX_N, naive_bwt
from .refindex import DEFAULT_BLOCK_SIZE
from .rle import rle_encode
from .textmodel import FastaError, read_collection, read_reference

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3

log = logging.getLogger("cmsbwt")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cms-bwt", description="BWT of a collection of similar sequences against a reference.")
    p.add_argument("-r", "--reference", required=True, help="reference FASTA (first record is used)")
    p.add_argument("-i", "--input", required=True, help="collection multi-FASTA")
    p.add_argument("-o", "--output", required=True, help="output file")
    p.add_argument("--rle", action="store_true", help="write run-length encoded output")
    p.add_argument("--memory-saving", action="store_true", help="spill intermediate data to disk")
    p.add_argument("--buffer-size", type=_positive, default=DEFAULT_BUFFER_BYTES, metavar="BYTES")
    p.add_argument("--lcp-block-size", type=_positive, default=DEFAULT_BLOCK_SIZE, metavar="ENTRIES")
    p.add_argument("--head-sort", choices=("comparator", "metastring"), default="comparator")
    p.add_argument("--validate", action="store_true", help="check the result against a brute-force BWT")
    p.add_argument("--stats", action="store_true", help="print statistics to stderr")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.buffer_size < BUFFER_ENTRY_BYTES:
        print(f"cms-bwt: --buffer-size must be at least {BUFFER_ENTRY_BYTES}", file=sys.stderr)
        return EXIT_USAGE
    try:
        reference = read_reference(args.reference)
        collection = read_collection(args.input)
    except FastaError as exc:
        print(f"cms-bwt: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"cms-bwt: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO

    config = BuildConfig(
        lcp_block_size=args.lcp_block_size, head_sort=args.head_sort,
        buffer_bytes=args.buffer_size, memory_saving=args.memory_saving,
    )
    result = cms_bwt(reference, collection, config)
    data = result.bwt.tobytes()
    payload = rle_encode(data).to_bytes() if args.rle else data
    try:
        with open(args.output, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        print(f"cms-bwt: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.stats or args.validate:
        for key, value in result.stats.items():
            print(f"{key}={value}", file=sys.stderr)
        for key, value in result.timings.items():
            print(f"time_{key}={value:.3f}", file=sys.stderr)
    if args.validate:
        if collection.N > MAX_N:
            print(f"cms-bwt: collection too large to validate (N={collection.N} > {MAX_N})", file=sys.stderr)
            return EXIT_USAGE
        expected = naive_bwt(collection)
        ok = expected.data == data and list(expected.sentinel_docs) == result.bwt.sentinel_docs.tolist()
        print(f"validate={'ok' if ok else 'mismatch'}", file=sys.stderr)
        if not ok:
            return EXIT_MISMATCH
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
