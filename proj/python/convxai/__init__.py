"""Python bindings for the convxai writing-support engine."""

from ._convxai import (
    ArtifactError,
    Bundle,
    ConvXaiError,
    DegenerateInputError,
    InvalidInputError,
    NotFoundError,
    Service,
    UnauthorizedError,
    classify_intent,
    dtw_distance,
    parse_variables,
    replay,
    split_sentences,
    tokenize,
)

__all__ = [
    "ArtifactError",
    "Bundle",
    "ConvXaiError",
    "DegenerateInputError",
    "InvalidInputError",
    "NotFoundError",
    "Service",
    "UnauthorizedError",
    "classify_intent",
    "dtw_distance",
    "parse_variables",
    "replay",
    "split_sentences",
    "tokenize",
]
