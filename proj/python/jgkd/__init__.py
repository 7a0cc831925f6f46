# Copyright (c) 2026, The jgkd Authors
# SPDX-License-Identifier: Apache-2.0

"""Joint-grained multi-teacher distillation for form understanding."""

import json

from ._core import (
    Error,
    IoError,
    NumericError,
    RunConfig,
    ValidationError,
    ablate,
    alignment_loss,
    config_keys,
    distil_loss,
    evaluate,
    gen_data,
    loss_oracle_table,
    selfcheck,
    similarity_loss,
    task_ce,
    train_student,
    train_teachers,
    triplet_hinge,
)
from ._core import generate_pages as _generate_pages

__all__ = [
    "Error",
    "IoError",
    "NumericError",
    "RunConfig",
    "ValidationError",
    "ablate",
    "alignment_loss",
    "config",
    "config_keys",
    "distil_loss",
    "evaluate",
    "gen_data",
    "generate_pages",
    "loss_oracle_table",
    "selfcheck",
    "similarity_loss",
    "task_ce",
    "train_student",
    "train_teachers",
    "triplet_hinge",
]


def config(**overrides):
    """RunConfig with keys overridden; dots in keys are written as '__'."""
    cfg = RunConfig()
    for key, value in overrides.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        cfg.set(key.replace("__", "."), str(value))
    return cfg


def generate_pages(cfg):
    """Generated pages as dicts, in generation order."""
    return [json.loads(line) for line in _generate_pages(cfg)]
