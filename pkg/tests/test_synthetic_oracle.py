import json

import numpy as np
import pytest

from seqpredict.bias_correction import corrected_report
from seqpredict.errors import InvalidSpec, NoConvergence, OracleScaleExceeded
from seqpredict.sequence_model import entropy_report, fit_models
from seqpredict.synthetic_oracle import (
    CohortSpec,
    MarkovSpec,
    analytic_entropies,
    brute_force_report,
    sample_markov,
    simulate_user_streams,
    stationary_distribution,
    sticky_chain,
)

from conftest import S, two_state_chain

SYM = [[0.9, 0.1], [0.1, 0.9]]


class TestSampleMarkov:
    def test_absorbing_identity(self):
        seq = sample_markov(MarkovSpec(3, np.eye(3), [1, 0, 0], 20, 1))
        assert seq.states.tolist() == [0] * 20
        assert seq.alphabet == (0,)

    def test_deterministic_cycle(self):
        seq = sample_markov(MarkovSpec(2, [[0, 1], [1, 0]], [1, 0], 9, 5))
        assert seq.states.tolist() == [0, 1, 0, 1, 0, 1, 0, 1, 0]

    def test_transition_frequencies(self):
        seq = sample_markov(MarkovSpec(2, SYM, [0.5, 0.5], 50_000, 3))
        _, bi = fit_models(seq)
        np.testing.assert_allclose(bi.cond_probs, SYM, atol=0.01)

    def test_seed_determinism(self):
        a = sample_markov(MarkovSpec(2, SYM, [0.5, 0.5], 500, 9))
        b = sample_markov(MarkovSpec(2, SYM, [0.5, 0.5], 500, 9))
        c = sample_markov(MarkovSpec(2, SYM, [0.5, 0.5], 500, 10))
        assert a == b and a != c

    def test_unvisited_states_dropped_from_alphabet(self):
        P = [[0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.5, 0.0, 0.5]]
        seq = sample_markov(MarkovSpec(3, P, [1, 0, 0], 200, 0))
        assert seq.alphabet == (0, 2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(M=2, P=[[0.5, 0.6], [0.5, 0.5]], initial=[1, 0], n=5),
            dict(M=2, P=[[1.5, -0.5], [0.5, 0.5]], initial=[1, 0], n=5),
            dict(M=2, P=[[1, 0], [0, 1]], initial=[0.5, 0.4], n=5),
            dict(M=3, P=[[1, 0], [0, 1]], initial=[1, 0, 0], n=5),
            dict(M=2, P=[[1, 0], [0, 1]], initial=[1, 0], n=0),
        ],
    )
    def test_invalid_specs(self, kwargs):
        with pytest.raises(InvalidSpec):
            MarkovSpec(**kwargs)

    def test_json_round_trip(self):
        spec = MarkovSpec(2, SYM, [0.5, 0.5], 100, 4)
        again = MarkovSpec.from_json(json.dumps(spec.to_dict()))
        assert again.to_dict() == spec.to_dict()

    def test_missing_key(self):
        with pytest.raises(InvalidSpec):
            MarkovSpec.from_dict({"M": 2, "P": SYM, "n": 3})


class TestStationary:
    @pytest.mark.parametrize(
        "P, expected",
        [
            ([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5]),
            ([[0.9, 0.1], [0.2, 0.8]], [2 / 3, 1 / 3]),
            (SYM, [0.5, 0.5]),
            ([[0, 1], [1, 0]], [0.5, 0.5]),
            ([[0, 1, 0], [0, 0, 1], [1, 0, 0]], [1 / 3, 1 / 3, 1 / 3]),
        ],
    )
    def test_examples(self, P, expected):
        pi = stationary_distribution(P)
        np.testing.assert_allclose(pi, expected, atol=1e-10)
        np.testing.assert_allclose(pi @ np.asarray(P, float), pi, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_left_eigenvector(self, seed):
        rng = np.random.default_rng(seed)
        P = rng.random((6, 6)) + 0.05
        P /= P.sum(axis=1, keepdims=True)
        w, v = np.linalg.eig(P.T)
        ref = np.real(v[:, np.argmin(np.abs(w - 1))])
        np.testing.assert_allclose(stationary_distribution(P), ref / ref.sum(), atol=1e-10)

    def test_no_convergence(self):
        with pytest.raises(NoConvergence):
            stationary_distribution([[0.999999, 0.000001], [0.000002, 0.999998]], max_iter=5)


class TestAnalytic:
    def test_symmetric_chain(self):
        a = analytic_entropies(SYM, stationary_distribution(SYM))
        assert a["h1_inf"] == pytest.approx(1.0, abs=1e-10)
        assert a["h2_inf"] == pytest.approx(0.468996, abs=1e-6)
        assert a["mi_inf"] == pytest.approx(0.531004, abs=1e-6)

    def test_iid_rows(self):
        pi = np.array([0.2, 0.3, 0.5])
        assert analytic_entropies(np.tile(pi, (3, 1)), pi)["mi_inf"] == pytest.approx(0.0, abs=1e-12)

    def test_permutation_matrix(self):
        P = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        a = analytic_entropies(P, stationary_distribution(P))
        assert a["h2_inf"] == 0.0
        assert a["mi_inf"] == pytest.approx(a["h1_inf"], abs=1e-12)


class TestBruteForce:
    def test_examples(self):
        r = brute_force_report([1, 2, 1, 2])
        assert (r.h1, r.h2) == (1.0, 0.0)
        assert brute_force_report([1, 1, 2]).h2 == pytest.approx(1.0, abs=1e-12)

    def test_scale_limit(self):
        with pytest.raises(OracleScaleExceeded):
            brute_force_report([0, 1] * 5001)

    def test_agrees_on_random_sequences(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            m = int(rng.integers(1, 21))
            seq = S(rng.integers(0, m, size=int(rng.integers(2, 501))).tolist())
            fast, slow = entropy_report(seq), brute_force_report(seq)
            for f in ("h0", "h1", "h2", "mi", "mi_aligned"):
                assert abs(getattr(fast, f) - getattr(slow, f)) <= 1e-12


def test_estimator_consistency_single_seed():
    seq = sample_markov(MarkovSpec(2, SYM, [0.5, 0.5], 50_000, 123))
    c = corrected_report(seq).corrected
    assert c.h2 == pytest.approx(0.468996, abs=0.02)
    assert c.mi == pytest.approx(0.531004, abs=0.02)


def test_sticky_chain_rows():
    P = sticky_chain(4, 0.7)
    np.testing.assert_allclose(P.sum(axis=1), 1.0)
    assert P[0, 0] == 0.7 and P[0, 1] == pytest.approx(0.1)


def test_cohort_streams_are_seeded_per_user():
    cohort = CohortSpec.from_dict(
        {"users": 3, "seed": 5, "individual": {"M": 2, "P": SYM, "initial": [0.5, 0.5], "n": 50},
         "group": {"M": 2, "P": [[0.5, 0.5], [0.5, 0.5]], "initial": [0.5, 0.5], "n": 20}}
    )
    a0, g0 = simulate_user_streams(cohort, 0)
    a1, _ = simulate_user_streams(cohort, 1)
    assert len(a0) == 50 and len(g0) == 20
    assert a0 != a1
    assert simulate_user_streams(cohort, 0)[0] == a0
