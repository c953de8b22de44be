"""BWT of a repetitive string collection via compressed matching statistics against a reference."""
from .bwtbuild import Bwt, BuildConfig, BuildResult, cms_bwt
from .textmodel import Collection, Document, FastaError, parse_fasta, read_collection, read_reference

__version__ = "0.1.0"

__all__ = [
    "Bwt", "BuildConfig", "BuildResult", "cms_bwt",
    "Collection", "Document", "FastaError", "parse_fasta", "read_collection", "read_reference",
]
