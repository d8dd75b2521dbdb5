"""
Discrete activity sequences and their plug-in entropy quantities.

All quantities are in bits. Two flavours of the marginal entropy are kept:

* default mode (CLI flag --paper-mode): H1 over all n positions, H2 over
  the n-1 adjacent pairs.
  MI = H1 - H2 can dip slightly below zero on short sequences because the
  two estimates come from different samples.
* aligned mode: H1 over the successor positions 2..n only, i.e. the marginal
  of the same bigram sample H2 is computed from. MI is then the empirical
  mutual information of the bigram table and never negative.

The conditional entropy is the usual H(next | current) weighted by the
context frequencies c(j)/N2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .errors import InvalidAlphabet, NoTransitions, SequenceTooShort, SeqPredictError


class Kind(str, enum.Enum):
    INDIVIDUAL = "individual"
    GROUP = "group"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class ActivitySequence:
    """Chronologically ordered states of one user, densely labelled 0..M-1.

    ``alphabet[k]`` is the original label of dense id ``k``. Equality
    compares the state ids and the source user only; labels and kind are
    metadata that do not survive the plain-text sequence file.
    """

    states: np.ndarray
    alphabet: tuple = None
    source_user: str | None = None
    kind: Kind = Kind.MIXED

    def __post_init__(self):
        states = np.array(self.states, dtype=np.int64).reshape(-1)
        if states.size and states.min() < 0:
            raise InvalidAlphabet("state ids must be non-negative")
        m = int(states.max()) + 1 if states.size else 0
        counts = np.bincount(states, minlength=m)
        if np.any(counts == 0):
            raise InvalidAlphabet(
                f"state ids are not dense: missing {np.flatnonzero(counts == 0).tolist()}"
            )
        alphabet = tuple(range(m)) if self.alphabet is None else tuple(self.alphabet)
        if len(alphabet) != m:
            raise InvalidAlphabet(f"alphabet has {len(alphabet)} labels for {m} states")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "kind", Kind(self.kind))

    @classmethod
    def from_labels(
        cls,
        labels: Iterable[Hashable],
        source_user: str | None = None,
        kind: Kind | str = Kind.MIXED,
    ) -> "ActivitySequence":
        """Relabel arbitrary hashable labels to dense ids in order of first appearance."""
        index: dict = {}
        states = [index.setdefault(lab, len(index)) for lab in labels]
        return cls(np.asarray(states, dtype=np.int64), tuple(index), source_user, kind)

    def _with_states(self, states: np.ndarray) -> "ActivitySequence":
        # Fast path for permutations of an already valid sequence: skips validation.
        new = object.__new__(ActivitySequence)
        states = np.asarray(states, dtype=np.int64)
        states.setflags(write=False)
        object.__setattr__(new, "states", states)
        object.__setattr__(new, "alphabet", self.alphabet)
        object.__setattr__(new, "source_user", self.source_user)
        object.__setattr__(new, "kind", self.kind)
        return new

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    def labels(self) -> list:
        return [self.alphabet[s] for s in self.states]

    def __len__(self) -> int:
        return int(self.states.size)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ActivitySequence):
            return NotImplemented
        return self.source_user == other.source_user and np.array_equal(
            self.states, other.states
        )

    def __hash__(self):
        return hash((self.source_user, self.states.tobytes()))

    def __repr__(self) -> str:
        head = " ".join(map(str, self.states[:12]))
        more = " ..." if len(self) > 12 else ""
        return (
            f"ActivitySequence(user={self.source_user!r}, kind={self.kind.value}, "
            f"n={len(self)}, M={self.alphabet_size}, states=[{head}{more}])"
        )


@dataclass(frozen=True)
class UnigramModel:
    counts: np.ndarray
    total: int
    probs: np.ndarray


@dataclass(frozen=True)
class BigramModel:
    transition_counts: np.ndarray  # [context j, successor i]
    context_counts: np.ndarray
    n_transitions: int
    cond_probs: np.ndarray  # rows with c(j) == 0 are all zero
    successor_counts: np.ndarray


@dataclass(frozen=True)
class CorrectedEntropies:
    h1: float
    h2: float
    mi: float
    mi_aligned: float
    clamped: bool = False
    # corrected MI outside [0, corrected h1]; left unclamped but marked
    flagged: bool = False


@dataclass(frozen=True)
class EntropyReport:
    h0: float
    h1: float
    h2: float
    mi: float
    h1_aligned: float
    mi_aligned: float
    n: int
    n_transitions: int
    alphabet_size: int
    corrected: CorrectedEntropies | None = None

    def as_dict(self) -> dict:
        out = {
            "n": self.n,
            "n_transitions": self.n_transitions,
            "alphabet_size": self.alphabet_size,
            "h0": self.h0,
            "h1": self.h1,
            "h2": self.h2,
            "mi": self.mi,
            "h1_aligned": self.h1_aligned,
            "mi_aligned": self.mi_aligned,
        }
        if self.corrected is not None:
            c = self.corrected
            out.update(
                h1_corrected=c.h1,
                h2_corrected=c.h2,
                mi_corrected=c.mi,
                mi_aligned_corrected=c.mi_aligned,
                corrected_flagged=c.flagged,
            )
        return out


def _entropy_of_counts(counts: np.ndarray, total: int) -> float:
    nz = counts[counts > 0]
    if total == 0 or nz.size == 0:
        return 0.0
    p = nz / total
    return float(-np.sum(p * np.log2(p))) + 0.0


def fit_models(seq: ActivitySequence) -> tuple[UnigramModel, BigramModel]:
    """Tally unigram counts over all n positions and bigram counts over the n-1 pairs."""
    n = len(seq)
    if n < 2:
        raise SequenceTooShort(f"need at least 2 states, got {n}")
    m = seq.alphabet_size
    s = seq.states
    counts = np.bincount(s, minlength=m)
    uni = UnigramModel(counts=counts, total=n, probs=counts / n)

    pairs = np.bincount(s[:-1] * m + s[1:], minlength=m * m).reshape(m, m)
    ctx = pairs.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(ctx[:, None] > 0, pairs / np.maximum(ctx, 1)[:, None], 0.0)
    bi = BigramModel(
        transition_counts=pairs,
        context_counts=ctx,
        n_transitions=n - 1,
        cond_probs=cond,
        successor_counts=pairs.sum(axis=0),
    )
    return uni, bi


def max_entropy(alphabet_size: int) -> float:
    if alphabet_size < 1:
        raise InvalidAlphabet(f"alphabet size must be >= 1, got {alphabet_size}")
    return math.log2(alphabet_size)


def plugin_entropy(model: UnigramModel) -> float:
    """-sum p log2 p over observed states."""
    return _entropy_of_counts(model.counts, model.total)


def conditional_entropy(model: BigramModel) -> float:
    """Entropy of the next state given the current one, weighted by c(j)/N2."""
    if model.n_transitions == 0:
        raise NoTransitions("bigram model has no transitions")
    pairs = model.transition_counts
    mask = pairs > 0
    ctx = np.broadcast_to(model.context_counts[:, None], pairs.shape)[mask]
    c = pairs[mask]
    # + 0.0 turns a -0.0 from all-deterministic rows into 0.0
    return float(-np.sum(c * np.log2(c / ctx)) / model.n_transitions) + 0.0


def mutual_information(h1: float, h2: float) -> float:
    return h1 - h2


def entropy_report(seq: ActivitySequence) -> EntropyReport:
    uni, bi = fit_models(seq)
    return report_from_models(uni, bi, seq.alphabet_size)


def report_from_models(uni: UnigramModel, bi: BigramModel, alphabet_size: int) -> EntropyReport:
    h1 = plugin_entropy(uni)
    h2 = conditional_entropy(bi)
    h1a = _entropy_of_counts(bi.successor_counts, bi.n_transitions)
    return EntropyReport(
        h0=max_entropy(alphabet_size),
        h1=h1,
        h2=h2,
        mi=mutual_information(h1, h2),
        h1_aligned=h1a,
        mi_aligned=mutual_information(h1a, h2),
        n=uni.total,
        n_transitions=bi.n_transitions,
        alphabet_size=alphabet_size,
    )


def as_sequence(obj: ActivitySequence | Sequence[Hashable]) -> ActivitySequence:
    """Accept either an ActivitySequence or a raw list of labels."""
    if isinstance(obj, ActivitySequence):
        return obj
    if isinstance(obj, (str, bytes)):
        raise SeqPredictError("pass a sequence of labels, not a string")
    return ActivitySequence.from_labels(obj)
