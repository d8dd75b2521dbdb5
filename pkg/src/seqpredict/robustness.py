"""
Mark-off robustness: hide a fraction of a sequence at random, keep the order
of what remains, and rerun the shuffle test.

Removing positions splices their neighbours into new adjacent pairs; no
attempt is made to account for the hidden gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bias_correction import NConvention
from .errors import InvalidRate, TooFewRemaining
from .sequence_model import ActivitySequence
from .rng import derive_seed
from .significance import BootstrapResult, bootstrap_mi_test

DEFAULT_RATES = tuple(round(0.1 * k, 1) for k in range(10))

# spawn-key namespace for deletion draws, kept apart from replicate indices
_MARKOFF_KEY = 0x4D4B


@dataclass(frozen=True)
class MarkoffStep:
    rate: float
    retained: int
    result: BootstrapResult


@dataclass(frozen=True)
class MarkoffProfile:
    steps: tuple[MarkoffStep, ...]
    critical_rate: float | None
    n: int
    seed: int

    @property
    def rates(self) -> list[float]:
        return [s.rate for s in self.steps]


def retained_length(n: int, rate: float) -> int:
    """round((1 - rate) * n), half up, robust to float noise in the product."""
    if not 0.0 <= rate < 1.0:
        raise InvalidRate(f"mark-off rate must lie in [0, 1), got {rate}")
    return int(math.floor(round((1.0 - rate) * n, 9) + 0.5))


def mark_off(seq: ActivitySequence, rate: float, seed) -> ActivitySequence:
    """Keep a uniformly random subset of round((1 - rate) * n) positions, in order.

    States that disappear entirely are dropped from the alphabet, so the
    result is densely relabelled; original labels are carried along.
    """
    keep = retained_length(len(seq), rate)
    if keep < 2:
        raise TooFewRemaining(
            f"rate {rate} leaves {keep} of {len(seq)} states; need at least 2"
        )
    if keep == len(seq):
        return seq
    rng = np.random.default_rng(seed)
    positions = np.sort(rng.choice(len(seq), size=keep, replace=False))
    kept = seq.states[positions]
    present, dense = np.unique(kept, return_inverse=True)
    return ActivitySequence(
        dense, tuple(seq.alphabet[i] for i in present), seq.source_user, seq.kind
    )


def _check_rates(rates: Sequence[float]) -> list[float]:
    rates = [float(r) for r in rates]
    if not rates:
        raise InvalidRate("at least one mark-off rate is required")
    for r in rates:
        if not 0.0 <= r < 1.0:
            raise InvalidRate(f"mark-off rate must lie in [0, 1), got {r}")
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise InvalidRate(f"rates must be strictly increasing: {rates}")
    return rates


def markoff_sweep(
    seq: ActivitySequence,
    rates: Sequence[float] = DEFAULT_RATES,
    R: int = 1000,
    seed: int = 0,
    corrected: bool = True,
    aligned: bool = False,
    n_convention: NConvention = "split",
) -> MarkoffProfile:
    """Shuffle test after mark-off at each rate.

    Every rate's bootstrap uses ``seed`` directly, so the rate-0 step equals
    ``bootstrap_mi_test(seq, R, seed)``. Deletions at rate index i draw from
    a child seed of ``seed``. ``critical_rate`` is the smallest tested rate
    at which the null is no longer rejected.
    """
    rates = _check_rates(rates)
    steps = []
    for i, rate in enumerate(rates):
        sub = mark_off(seq, rate, derive_seed(seed, _MARKOFF_KEY, i))
        res = bootstrap_mi_test(
            sub, R=R, seed=seed, corrected=corrected, aligned=aligned,
            n_convention=n_convention,
        )
        steps.append(MarkoffStep(rate=rate, retained=len(sub), result=res))
    critical = next((s.rate for s in steps if not s.result.reject_null), None)
    return MarkoffProfile(steps=tuple(steps), critical_rate=critical, n=len(seq), seed=seed)
