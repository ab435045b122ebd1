# Copyright 2026 The rankopt Authors.
# SPDX-License-Identifier: Apache-2.0
"""Ranking metrics, LambdaRank and smoothed-rank listwise training."""

from ._rankopt import (
    ContractViolation,
    DataError,
    InteractionSet,
    ParseError,
    SplitAssignment,
    TrainingError,
    UserSplit,
    average_precision,
    cost_derivative,
    evaluate,
    exact_ranks,
    generate_synthetic,
    lambdas,
    list_loss,
    load_dataset,
    make_split,
    ndcg,
    nrbp,
    pair_cost,
    protocol_metrics,
    rbp,
    reciprocal_rank,
    smooth_ranks,
    swap_delta,
    train,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
