"""Python bindings for the reqconflict C++ core."""

from ._reqconflict import (
    CrfModel,
    ReqConflictError,
    RequirementSet,
    TfidfModel,
    cosine,
    format_delta,
    generate_synthetic,
    load_requirements,
    make_folds,
    overlap_ratio,
    parse_requirements,
    report,
    run_phase1,
    run_phase2,
    select_cutoff,
    similarity_matrix,
    tag_general,
    tokenize,
    train_crf,
    validate_requirements,
)

__all__ = [
    "CrfModel",
    "ReqConflictError",
    "RequirementSet",
    "TfidfModel",
    "cosine",
    "format_delta",
    "generate_synthetic",
    "load_requirements",
    "make_folds",
    "overlap_ratio",
    "parse_requirements",
    "report",
    "run_phase1",
    "run_phase2",
    "select_cutoff",
    "similarity_matrix",
    "tag_general",
    "tokenize",
    "train_crf",
    "validate_requirements",
]
