"""Graphon mean-field subsampling for tabular multi-agent control."""

from ._gmfs import (
    BudgetError,
    Config,
    ConfigError,
    DimensionError,
    DomainError,
    Error,
    FormatError,
    OverflowError,
    QTable,
    WarehouseEnv,
    __version__,
    evaluate,
    histogram_count,
    load_qtable,
    rank,
    sample_budget,
    sweep,
    train,
    unrank,
)

__all__ = [
    "BudgetError",
    "Config",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "Error",
    "FormatError",
    "OverflowError",
    "QTable",
    "WarehouseEnv",
    "__version__",
    "evaluate",
    "histogram_count",
    "load_qtable",
    "rank",
    "sample_budget",
    "sweep",
    "train",
    "unrank",
]
