"""Seed derivation. All randomness in the package flows from explicit 64-bit
master seeds through ``SeedSequence`` spawn keys, never from global state."""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import SeqPredictError

SEED_LIMIT = 2**64


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise SeqPredictError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed: int, *key: int) -> np.random.SeedSequence:
    """Child seed sequence for an integer path below a master seed."""
    return np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))


def derive_int_seed(seed: int, *key: int) -> int:
    """Like derive_seed, collapsed to a plain 64-bit integer."""
    return int(derive_seed(seed, *key).generate_state(1, dtype=np.uint64)[0])


def user_key(user: str) -> int:
    """Stable 63-bit key for a user id, independent of cohort composition."""
    return int.from_bytes(hashlib.sha256(user.encode("utf-8")).digest()[:8], "big") >> 1
