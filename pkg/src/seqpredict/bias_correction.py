"""
Leading-order (Miller-Madow style) bias terms for the plug-in entropies.

The plug-in entropies are biased low by roughly (M - 1) / (2 N ln 2) bits,
where M is the number of states with nonzero observed probability. The
correction subtracts that (negative) bias. The state counts are the naive
observed counts; no occupancy estimate is attempted.

Sample sizes: the marginal entropy uses the sequence length n. The
conditional entropy and MI terms use the transition count n - 1 by default
(``n_convention="split"``); ``n_convention="length"`` uses n throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

from .errors import InvalidCount, MismatchedProvenance
from .sequence_model import (
    ActivitySequence,
    BigramModel,
    CorrectedEntropies,
    EntropyReport,
    UnigramModel,
    fit_models,
    report_from_models,
)

NConvention = Literal["split", "length"]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class BiasTerms:
    bias_h1: float
    bias_h2: float
    bias_mi: float
    m_bar: int
    m_bar_j: tuple[int, ...]
    n_h1: int
    n_h2: int
    # aligned-mode MI: marginal taken over successor positions
    m_bar_successor: int = 0
    bias_mi_aligned: float = 0.0


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidCount(f"number of observations must be >= 1, got {n}")


def bias_h1(m_bar: int, n: int) -> float:
    _check_n(n)
    if m_bar < 1:
        raise InvalidCount(f"m_bar must be >= 1, got {m_bar}")
    return -(m_bar - 1) / (2.0 * n * _LN2)


def _sum_excess(m_bar_j: Iterable[int]) -> int:
    total = 0
    for m in m_bar_j:
        if m < 1:
            raise InvalidCount(f"every observed context needs m_bar_j >= 1, got {m}")
        total += m - 1
    return total


def bias_h2(m_bar_j: Iterable[int], n: int) -> float:
    _check_n(n)
    return -_sum_excess(m_bar_j) / (2.0 * n * _LN2)


def bias_mi(m_bar: int, m_bar_j: Iterable[int], n: int) -> float:
    _check_n(n)
    if m_bar < 1:
        raise InvalidCount(f"m_bar must be >= 1, got {m_bar}")
    return (_sum_excess(m_bar_j) - (m_bar - 1)) / (2.0 * n * _LN2)


def bias_terms(
    unigram: UnigramModel, bigram: BigramModel, n_convention: NConvention = "split"
) -> BiasTerms:
    """Collect the observed state counts from fitted models and evaluate all terms."""
    if n_convention not in ("split", "length"):
        raise ValueError(f"unknown n_convention {n_convention!r}")
    m_bar = int(np.count_nonzero(unigram.counts))
    per_row = np.count_nonzero(bigram.transition_counts, axis=1)
    m_bar_j = tuple(per_row[bigram.context_counts > 0].tolist())
    m_succ = int(np.count_nonzero(bigram.successor_counts))
    n_h1 = unigram.total
    n_h2 = bigram.n_transitions if n_convention == "split" else unigram.total
    return BiasTerms(
        bias_h1=bias_h1(m_bar, n_h1),
        bias_h2=bias_h2(m_bar_j, n_h2),
        bias_mi=bias_mi(m_bar, m_bar_j, n_h2),
        m_bar=m_bar,
        m_bar_j=m_bar_j,
        n_h1=n_h1,
        n_h2=n_h2,
        m_bar_successor=m_succ,
        bias_mi_aligned=bias_mi(m_succ, m_bar_j, n_h2),
    )


def apply_correction(
    report: EntropyReport, terms: BiasTerms, clamp: bool = False
) -> EntropyReport:
    """Subtract the bias terms from the raw estimates.

    With ``clamp=True`` the corrected MI values are clipped to
    ``[0, corrected h1]``; this is meant for display only.
    """
    if terms.n_h1 != report.n or terms.n_h2 not in (report.n_transitions, report.n):
        raise MismatchedProvenance(
            f"bias terms (n_h1={terms.n_h1}, n_h2={terms.n_h2}) do not match "
            f"report (n={report.n}, transitions={report.n_transitions})"
        )
    if terms.m_bar > report.alphabet_size:
        raise MismatchedProvenance(
            f"m_bar={terms.m_bar} exceeds alphabet size {report.alphabet_size}"
        )
    h1 = report.h1 - terms.bias_h1
    h2 = report.h2 - terms.bias_h2
    mi = report.mi - terms.bias_mi
    mi_a = report.mi_aligned - terms.bias_mi_aligned
    flagged = mi < 0.0 or mi > h1
    if clamp:
        mi = min(max(mi, 0.0), h1)
        mi_a = min(max(mi_a, 0.0), h1)
    corrected = CorrectedEntropies(
        h1=h1, h2=h2, mi=mi, mi_aligned=mi_a, clamped=clamp, flagged=flagged
    )
    return replace(report, corrected=corrected)


def corrected_report(
    seq: ActivitySequence, n_convention: NConvention = "split", clamp: bool = False
) -> EntropyReport:
    """Raw report plus bias-corrected values for one sequence."""
    uni, bi = fit_models(seq)
    report = report_from_models(uni, bi, seq.alphabet_size)
    return apply_correction(report, bias_terms(uni, bi, n_convention), clamp)
