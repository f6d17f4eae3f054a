from ._core import (
    Context,
    Error,
    FormatError,
    NotAConservationLaw,
    ParseError,
    PreconditionViolation,
    RankDeficient,
    System,
    UnknownSymbol,
    corpus_ids,
    corpus_text,
    load,
    parse_system,
    telegraph_catalog,
)

__all__ = [
    "Context",
    "Error",
    "FormatError",
    "NotAConservationLaw",
    "ParseError",
    "PreconditionViolation",
    "RankDeficient",
    "System",
    "UnknownSymbol",
    "corpus_ids",
    "corpus_text",
    "load",
    "parse_system",
    "telegraph_catalog",
]
