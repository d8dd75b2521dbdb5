"""
Sequences with known ground truth, plus an independent brute-force estimator.

``brute_force_report`` shares no code with :mod:`seqpredict.sequence_model`:
it counts with plain dictionaries and sums with :func:`math.log2`, so it can
serve as a witness for the vectorised path.
"""

from __future__ import annotations

import bisect
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidSpec, NoConvergence, OracleScaleExceeded
from .ingestion import EventRecord
from .rng import derive_int_seed, derive_seed
from .sequence_model import ActivitySequence, EntropyReport, Kind

ORACLE_MAX_LENGTH = 10_000


@dataclass(frozen=True)
class MarkovSpec:
    M: int
    P: np.ndarray
    initial: np.ndarray
    n: int
    seed: int = 0

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        init = np.asarray(self.initial, dtype=float)
        if self.M < 1 or P.shape != (self.M, self.M):
            raise InvalidSpec(f"P must be {self.M}x{self.M}, got shape {P.shape}")
        if init.shape != (self.M,):
            raise InvalidSpec(f"initial must have length {self.M}")
        if np.any(P < 0) or np.any(init < 0):
            raise InvalidSpec("probabilities must be non-negative")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidSpec("rows of P must sum to 1")
        if abs(init.sum() - 1.0) > 1e-12:
            raise InvalidSpec("initial distribution must sum to 1")
        if self.n < 1:
            raise InvalidSpec(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "initial", init)

    @classmethod
    def from_dict(cls, d: dict, **overrides) -> "MarkovSpec":
        d = {**d, **overrides}
        try:
            return cls(
                M=int(d["M"]),
                P=d["P"],
                initial=d["initial"],
                n=int(d["n"]),
                seed=int(d.get("seed", 0)),
            )
        except KeyError as exc:
            raise InvalidSpec(f"missing key {exc.args[0]!r} in Markov spec") from None

    @classmethod
    def from_json(cls, text: str) -> "MarkovSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "P": self.P.tolist(),
            "initial": self.initial.tolist(),
            "n": self.n,
            "seed": self.seed,
        }


def sticky_chain(M: int, p_stay: float) -> np.ndarray:
    """Transition matrix that stays put with probability p_stay, else jumps uniformly."""
    if M == 1:
        return np.ones((1, 1))
    P = np.full((M, M), (1.0 - p_stay) / (M - 1))
    np.fill_diagonal(P, p_stay)
    return P


def sample_markov(spec: MarkovSpec, source_user: str | None = None,
                  kind: Kind | str = Kind.MIXED) -> ActivitySequence:
    """Draw a length-n path. State ids keep their numeric order; the alphabet
    records which raw states were visited."""
    rng = np.random.default_rng(spec.seed)
    cum = np.cumsum(spec.P, axis=1)
    cum[:, -1] = 1.0
    cum_rows = [row.tolist() for row in cum]
    init_cum = np.cumsum(spec.initial)
    init_cum[-1] = 1.0
    u = rng.random(spec.n).tolist()

    path = [0] * spec.n
    s = bisect.bisect_right(init_cum.tolist(), u[0])
    path[0] = s
    for t in range(1, spec.n):
        s = bisect.bisect_right(cum_rows[s], u[t])
        path[t] = s

    visited, dense = np.unique(np.asarray(path), return_inverse=True)
    return ActivitySequence(dense, tuple(int(v) for v in visited), source_user, kind)


def stationary_distribution(P, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Power iteration on the lazy chain (P + I) / 2, which shares the
    stationary distribution of P but is aperiodic."""
    P = np.asarray(P, dtype=float)
    lazy = 0.5 * (P + np.eye(P.shape[0]))
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = pi @ lazy
        nxt /= nxt.sum()
        if np.abs(nxt @ P - nxt).sum() < tol:
            return nxt
        pi = nxt
    raise NoConvergence(f"power iteration did not reach residual {tol} in {max_iter} steps")


def _h(probs) -> float:
    return -sum(p * math.log2(p) for p in probs if p > 0)


def analytic_entropies(P, pi) -> dict[str, float]:
    """Asymptotic marginal entropy, entropy rate and their difference, in bits."""
    P = np.asarray(P, dtype=float)
    h1 = _h(pi)
    h2 = sum(pj * _h(row) for pj, row in zip(pi, P))
    return {"h1_inf": h1, "h2_inf": h2, "mi_inf": h1 - h2}


def brute_force_report(seq: ActivitySequence | Sequence) -> EntropyReport:
    """Entropy quantities by direct dictionary-of-counts summation."""
    states = list(seq.states.tolist() if isinstance(seq, ActivitySequence) else seq)
    n = len(states)
    if n > ORACLE_MAX_LENGTH:
        raise OracleScaleExceeded(f"oracle limited to {ORACLE_MAX_LENGTH} states, got {n}")
    if n < 2:
        raise InvalidSpec("oracle needs at least 2 states")

    singles = Counter(states)
    pairs = Counter(zip(states[:-1], states[1:]))
    contexts = Counter(states[:-1])
    successors = Counter(states[1:])
    n2 = n - 1

    h1 = _h([c / n for c in singles.values()])
    h2 = 0.0
    for (j, i), c in pairs.items():
        h2 -= (c / n2) * math.log2(c / contexts[j])
    h1a = _h([c / n2 for c in successors.values()])
    m = len(singles)
    return EntropyReport(
        h0=math.log2(m),
        h1=h1,
        h2=h2,
        mi=h1 - h2,
        h1_aligned=h1a,
        mi_aligned=h1a - h2,
        n=n,
        n_transitions=n2,
        alphabet_size=m,
    )


# Synthetic event-log cohorts for end-to-end runs.

DEFAULT_START_TS = 1262304000  # 2010-01-01T00:00:00Z


@dataclass(frozen=True)
class CohortSpec:
    """Per-user individual stream from ``individual``; optional group stream
    from ``group``. Per-user seeds derive from ``seed``; any seed inside the
    stream specs is ignored."""

    users: int
    individual: MarkovSpec
    group: MarkovSpec | None = None
    seed: int = 0
    user_prefix: str = "u"
    start_ts: int = DEFAULT_START_TS

    @classmethod
    def from_dict(cls, d: dict) -> "CohortSpec":
        if "individual" not in d:
            # a bare Markov spec: single stream, one user unless stated
            spec = MarkovSpec.from_dict(d)
            return cls(users=int(d.get("users", 1)), individual=spec, seed=spec.seed,
                       user_prefix=d.get("user_prefix", "u"),
                       start_ts=int(d.get("start_ts", DEFAULT_START_TS)))
        users = int(d.get("users", 1))
        if users < 1:
            raise InvalidSpec(f"users must be >= 1, got {users}")
        return cls(
            users=users,
            individual=MarkovSpec.from_dict(d["individual"]),
            group=MarkovSpec.from_dict(d["group"]) if d.get("group") else None,
            seed=int(d.get("seed", 0)),
            user_prefix=str(d.get("user_prefix", "u")),
            start_ts=int(d.get("start_ts", DEFAULT_START_TS)),
        )

    def to_dict(self) -> dict:
        return {
            "users": self.users,
            "seed": self.seed,
            "user_prefix": self.user_prefix,
            "start_ts": self.start_ts,
            "individual": self.individual.to_dict(),
            "group": self.group.to_dict() if self.group is not None else None,
        }

    def user_id(self, k: int) -> str:
        width = len(str(self.users - 1))
        return f"{self.user_prefix}{k:0{width}d}"


def simulate_user_streams(cohort: CohortSpec, k: int) -> tuple[ActivitySequence, ActivitySequence | None]:
    """Ground-truth (individual, group) sequences of user k."""
    user = cohort.user_id(k)
    ind = sample_markov(
        MarkovSpec(cohort.individual.M, cohort.individual.P, cohort.individual.initial,
                   cohort.individual.n, derive_int_seed(cohort.seed, k, 0)),
        source_user=user, kind=Kind.INDIVIDUAL,
    )
    grp = None
    if cohort.group is not None:
        g = cohort.group
        grp = sample_markov(
            MarkovSpec(g.M, g.P, g.initial, g.n, derive_int_seed(cohort.seed, k, 1)),
            source_user=user, kind=Kind.GROUP,
        )
    return ind, grp


def simulate_events(cohort: CohortSpec) -> list[EventRecord]:
    """Event records for the whole cohort, users in order, each user's two
    streams randomly interleaved on strictly increasing timestamps.

    Individual states are labelled ``p<state>`` with participants ``[user]``;
    group states ``g<state>`` with participants ``[user, <user>-companion]``.
    """
    records = []
    for k in range(cohort.users):
        user = cohort.user_id(k)
        ind, grp = simulate_user_streams(cohort, k)
        tagged = [("p", lab, (user,)) for lab in ind.labels()]
        if grp is not None:
            companion = (user, f"{user}-companion")
            g_tagged = [("g", lab, companion) for lab in grp.labels()]
            rng = np.random.default_rng(derive_seed(cohort.seed, k, 2))
            is_group = np.zeros(len(tagged) + len(g_tagged), dtype=bool)
            is_group[rng.choice(is_group.size, size=len(g_tagged), replace=False)] = True
            it_i, it_g = iter(tagged), iter(g_tagged)
            tagged = [next(it_g) if flag else next(it_i) for flag in is_group]
        else:
            rng = np.random.default_rng(derive_seed(cohort.seed, k, 2))
        steps = rng.integers(1, 3601, size=len(tagged))
        ts = cohort.start_ts + np.cumsum(steps)
        for (prefix, lab, parts), t in zip(tagged, ts.tolist()):
            records.append(EventRecord(user, int(t), f"{prefix}{lab}", parts))
    return records
