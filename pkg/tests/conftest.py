import numpy as np
import pytest
from hypothesis import strategies as st

from seqpredict.sequence_model import ActivitySequence
from seqpredict.synthetic_oracle import MarkovSpec, sample_markov, sticky_chain


def S(labels, user=None, kind="mixed"):
    return ActivitySequence.from_labels(labels, source_user=user, kind=kind)


def two_state_chain(p_stay, n, seed, M=2):
    spec = MarkovSpec(M, sticky_chain(M, p_stay), np.full(M, 1.0 / M), n, seed)
    return sample_markov(spec)


def iid_sequence(M, n, seed):
    rng = np.random.default_rng(seed)
    return S(rng.integers(0, M, size=n).tolist())


@st.composite
def label_lists(draw, min_size=2, max_size=60, max_alphabet=6):
    m = draw(st.integers(1, max_alphabet))
    return draw(st.lists(st.integers(0, m - 1), min_size=min_size, max_size=max_size))


@pytest.fixture
def alternating():
    return S([1, 2, 1, 2, 1, 2])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
