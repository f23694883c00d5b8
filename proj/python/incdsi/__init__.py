"""Incremental document indexing for dense retrieval."""

from ._core import (
    AddOptions,
    AddReport,
    Error,
    Hyperparams,
    Index,
    LossVariant,
    add_document,
    check_feasibility,
    f_beta_target,
    load_snapshot,
    save_snapshot,
)

__all__ = [
    "AddOptions",
    "AddReport",
    "Error",
    "Hyperparams",
    "Index",
    "LossVariant",
    "add_document",
    "check_feasibility",
    "f_beta_target",
    "load_snapshot",
    "save_snapshot",
]
