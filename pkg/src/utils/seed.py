"""Seeding utility."""

from __future__ import annotations

import random

import numpy as np

DEFAULT_SEED = 42


def seed_everything(seed: int | None = None) -> int:
    if seed is None:
        seed = DEFAULT_SEED

    random.seed(seed)
    np.random.seed(seed)

    return seed


def make_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(seed_everything(seed))
