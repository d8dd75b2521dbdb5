"""Predictability of discrete event sequences.

Entropy and mutual information of per-user state sequences, with
leading-order bias correction, shuffle tests, mark-off robustness sweeps and
group-versus-individual comparison.
"""

__version__ = "0.1.0"

from .errors import SeqPredictError
from .sequence_model import (
    ActivitySequence,
    EntropyReport,
    Kind,
    conditional_entropy,
    entropy_report,
    fit_models,
    max_entropy,
    mutual_information,
    plugin_entropy,
)
from .bias_correction import (
    BiasTerms,
    apply_correction,
    bias_h1,
    bias_h2,
    bias_mi,
    bias_terms,
    corrected_report,
)
from .significance import (
    BootstrapResult,
    TTestResult,
    bootstrap_mi_test,
    compare_groups,
    gap_statistic,
    pooled_t_test,
    shuffle_sequence,
)
from .robustness import MarkoffProfile, mark_off, markoff_sweep
from .ingestion import (
    CohortConfig,
    EventRecord,
    build_sequences,
    parse_event_log,
    partition_group_individual,
    read_sequences,
    write_sequences,
)
from .synthetic_oracle import (
    MarkovSpec,
    analytic_entropies,
    brute_force_report,
    sample_markov,
    stationary_distribution,
    sticky_chain,
)
