"""
Shuffle (permutation) tests for the mutual information, gap statistics and the
two-sample t-test used to compare individual against group activity.

Replicate ``k`` of a bootstrap run draws its permutation from
``SeedSequence(seed, spawn_key=(k,))``, so replicates are independent of each
other and of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .bias_correction import NConvention, bias_terms, apply_correction
from .errors import (
    DegenerateVariance,
    InsufficientReplicates,
    InvalidCount,
    SequenceTooShort,
)
from .rng import check_seed, derive_seed
from .sequence_model import ActivitySequence, fit_models, report_from_models

MIN_REPLICATES = 40


@dataclass(frozen=True)
class BootstrapResult:
    mi_true: float
    replicates: np.ndarray
    p025: float
    p975: float
    reject_null: bool
    gap: float
    seed: int
    R: int
    corrected: bool = True
    aligned: bool = False

    def as_dict(self, with_replicates: bool = False) -> dict:
        out = {
            "mi_true": self.mi_true,
            "p025": self.p025,
            "p975": self.p975,
            "gap": self.gap,
            "reject_null": self.reject_null,
            "seed": self.seed,
            "R": self.R,
            "corrected": self.corrected,
            "aligned": self.aligned,
        }
        if with_replicates:
            out["replicates"] = self.replicates.tolist()
        return out


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    df: float
    p_value: float
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int
    equal_var: bool = True

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class GroupComparison:
    ttest: TTestResult
    mean_individual: float
    mean_group: float
    bin_edges: np.ndarray
    hist_individual: np.ndarray
    hist_group: np.ndarray
    alpha: float
    reject_equal_means: bool

    @property
    def verdict(self) -> str:
        if self.reject_equal_means:
            order = ">" if self.mean_individual > self.mean_group else "<"
            return (
                f"reject equal means at alpha={self.alpha}: "
                f"mean G_individual {order} mean G_group (p={self.ttest.p_value:.3g})"
            )
        return f"cannot reject equal means at alpha={self.alpha} (p={self.ttest.p_value:.3g})"


def shuffle_sequence(seq: ActivitySequence, seed) -> ActivitySequence:
    """Uniformly random permutation of the states; the multiset is unchanged."""
    if len(seq) < 2:
        raise SequenceTooShort(f"need at least 2 states, got {len(seq)}")
    if not isinstance(seed, np.random.SeedSequence):
        seed = check_seed(seed)
    rng = np.random.default_rng(seed)
    return seq._with_states(rng.permutation(seq.states))


def bootstrap_replicates(seq: ActivitySequence, R: int, seed: int) -> Iterator[ActivitySequence]:
    """The R shuffled sequences of a bootstrap run, in replicate order."""
    for k in range(R):
        yield shuffle_sequence(seq, derive_seed(seed, k))


def sequence_mi(
    seq: ActivitySequence,
    corrected: bool = True,
    aligned: bool = False,
    n_convention: NConvention = "split",
) -> float:
    """The MI value a bootstrap test compares: raw or corrected, default or aligned mode."""
    uni, bi = fit_models(seq)
    report = report_from_models(uni, bi, seq.alphabet_size)
    if not corrected:
        return report.mi_aligned if aligned else report.mi
    c = apply_correction(report, bias_terms(uni, bi, n_convention)).corrected
    return c.mi_aligned if aligned else c.mi


def _nearest_rank(sorted_values: np.ndarray, numerator: int, denominator: int) -> float:
    # 1-based rank ceil(q R) with q = numerator / denominator, in integer arithmetic
    rank = -(-numerator * sorted_values.size // denominator)
    return float(sorted_values[rank - 1])


def bootstrap_mi_test(
    seq: ActivitySequence,
    R: int = 1000,
    seed: int = 0,
    corrected: bool = True,
    aligned: bool = False,
    n_convention: NConvention = "split",
) -> BootstrapResult:
    """Compare the sequence's MI with the MI of R shuffled copies.

    The null is rejected when the true MI lies strictly above the 97.5%
    nearest-rank percentile of the shuffled values (one-sided, nominal 2.5%).
    """
    if len(seq) < 2:
        raise SequenceTooShort(f"need at least 2 states, got {len(seq)}")
    if R < MIN_REPLICATES:
        raise InsufficientReplicates(f"R must be >= {MIN_REPLICATES}, got {R}")
    seed = check_seed(seed)
    kw = dict(corrected=corrected, aligned=aligned, n_convention=n_convention)
    mi_true = sequence_mi(seq, **kw)
    reps = np.fromiter(
        (sequence_mi(s, **kw) for s in bootstrap_replicates(seq, R, seed)),
        dtype=float,
        count=R,
    )
    ordered = np.sort(reps)
    p025 = _nearest_rank(ordered, 25, 1000)
    p975 = _nearest_rank(ordered, 975, 1000)
    reps.setflags(write=False)
    return BootstrapResult(
        mi_true=mi_true,
        replicates=reps,
        p025=p025,
        p975=p975,
        reject_null=bool(mi_true > p975),
        gap=mi_true - p975,
        seed=seed,
        R=R,
        corrected=corrected,
        aligned=aligned,
    )


def gap_statistic(result: BootstrapResult) -> float:
    return result.mi_true - result.p975


# Student-t tail via the regularized incomplete beta function (continued
# fraction, modified Lentz).

_CF_MAX_ITER = 500
_CF_EPS = 1e-15
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = _TINY if abs(d) < _TINY else d
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return min(1.0, regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5))


def pooled_t_test(a: Sequence[float], b: Sequence[float], equal_var: bool = True) -> TTestResult:
    """Two-sample t-test; pooled variance by default, Welch with ``equal_var=False``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise InvalidCount(f"each sample needs at least 2 values, got {na} and {nb}")
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if equal_var:
        df = float(na + nb - 2)
        pooled = ((na - 1) * va + (nb - 1) * vb) / df
        if pooled == 0.0:
            raise DegenerateVariance("pooled variance is zero")
        se = math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    else:
        qa, qb = va / na, vb / nb
        if qa + qb == 0.0:
            raise DegenerateVariance("both samples have zero variance")
        se = math.sqrt(qa + qb)
        df = (qa + qb) ** 2 / (qa**2 / (na - 1) + qb**2 / (nb - 1))
    t = (ma - mb) / se
    return TTestResult(
        t_stat=t,
        df=df,
        p_value=student_t_two_sided_p(t, df),
        mean_a=ma,
        mean_b=mb,
        n_a=int(na),
        n_b=int(nb),
        equal_var=equal_var,
    )


def compare_groups(
    gaps_individual: Sequence[float],
    gaps_group: Sequence[float],
    alpha: float = 0.05,
    bins: int = 20,
    equal_var: bool = True,
) -> GroupComparison:
    """t-test on two gap populations plus histograms on shared bin edges."""
    ind = np.asarray(gaps_individual, dtype=float)
    grp = np.asarray(gaps_group, dtype=float)
    tt = pooled_t_test(ind, grp, equal_var=equal_var)
    edges = np.histogram_bin_edges(np.concatenate([ind, grp]), bins=bins)
    return GroupComparison(
        ttest=tt,
        mean_individual=tt.mean_a,
        mean_group=tt.mean_b,
        bin_edges=edges,
        hist_individual=np.histogram(ind, bins=edges)[0],
        hist_group=np.histogram(grp, bins=edges)[0],
        alpha=alpha,
        reject_equal_means=bool(tt.p_value < alpha),
    )
