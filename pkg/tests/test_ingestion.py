import io

import pytest
from hypothesis import given, settings, strategies as st

from seqpredict.errors import FormatError, SeqPredictError
from seqpredict.ingestion import (
    CohortConfig,
    EventRecord,
    build_sequences,
    parse_event_log,
    parse_timestamp,
    partition_group_individual,
    read_sequences,
    write_event_log_jsonl,
    write_sequences,
)
from seqpredict.sequence_model import ActivitySequence, Kind
from seqpredict.synthetic_oracle import CohortSpec, simulate_events, simulate_user_streams

from conftest import S


def ev(user, ts, state, parts=None):
    return EventRecord(user, ts, state, tuple(parts) if parts else None)


class TestParse:
    def test_jsonl_group_row(self):
        line = b'{"user":"u1","ts":1262304000,"state":"placeA","participants":["u1","u2"]}\n'
        res = parse_event_log(io.BytesIO(line), "jsonl")
        assert res.errors == []
        (rec,) = res.records
        assert (rec.user, rec.timestamp, rec.state_label) == ("u1", 1262304000, "placeA")
        assert rec.is_group

    def test_csv_row_without_participants(self):
        res = parse_event_log("user,ts,state,participants\nu1,1262304000,placeA,\n", "csv")
        (rec,) = res.records
        assert rec.participants is None and not rec.is_group

    def test_csv_semicolon_participants(self):
        res = parse_event_log("user,ts,state,participants\nu1,5,p,u1;u2;u3\n", "csv")
        assert res.records[0].participants == ("u1", "u2", "u3")

    def test_missing_state_is_diagnosed(self):
        text = '{"user":"u1","ts":1}\n{"user":"u1","ts":2,"state":"a"}\n'
        res = parse_event_log(text, "jsonl")
        assert len(res.records) == 1
        assert res.errors[0].line == 1 and "state" in res.errors[0].message

    def test_csv_line_numbers(self):
        text = "user,ts,state\nu1,1,a\nu1,,b\nu1,3,c\n"
        res = parse_event_log(text, "csv")
        assert [e.line for e in res.errors] == [3]
        assert [r.state_label for r in res.records] == ["a", "c"]

    @pytest.mark.parametrize(
        "line",
        [
            "not json",
            "[1, 2]",
            '{"user":"","ts":1,"state":"a"}',
            '{"user":"u1","ts":"yesterday","state":"a"}',
            '{"user":"u1","ts":1,"state":"a","participants":["u2"]}',
            '{"user":"u1","ts":1,"state":"a","participants":"u1"}',
            '{"user":"u1","ts":true,"state":"a"}',
        ],
    )
    def test_bad_jsonl_rows(self, line):
        res = parse_event_log(line + "\n", "jsonl")
        assert res.records == [] and len(res.errors) == 1

    def test_csv_bad_header_is_fatal(self):
        with pytest.raises(FormatError):
            parse_event_log("who,when,what\nu1,1,a\n", "csv")

    def test_non_utf8_is_fatal(self):
        with pytest.raises(FormatError):
            parse_event_log(b"\xff\xfe\x00garbage", "jsonl")

    def test_unknown_format(self):
        with pytest.raises(FormatError):
            parse_event_log("", "xml")

    @pytest.mark.parametrize(
        "raw, expected",
        [
            (1262304000, 1262304000),
            ("1262304000", 1262304000),
            ("2010-01-01T00:00:00Z", 1262304000.0),
            ("2010-01-01T00:00:00", 1262304000.0),
            ("2010-01-01T01:00:00+01:00", 1262304000.0),
        ],
    )
    def test_timestamps(self, raw, expected):
        assert parse_timestamp(raw) == expected


class TestBuildSequences:
    def test_sort_and_relabel(self):
        events = [ev("u1", 3, "A"), ev("u1", 1, "B"), ev("u1", 2, "A")]
        seqs = build_sequences(events, CohortConfig(min_events=2))
        assert seqs["u1"].states.tolist() == [0, 1, 1]
        assert seqs["u1"].alphabet == ("B", "A")

    def test_activity_threshold(self):
        events = [ev("u1", t, "A") for t in range(5)]
        assert build_sequences(events) == {}
        assert CohortConfig().min_events == 1000

    def test_stable_ties(self):
        events = [ev("u1", 5, "X"), ev("u1", 5, "Y"), ev("u1", 1, "Z")]
        seqs = build_sequences(events, CohortConfig(min_events=2))
        assert seqs["u1"].labels() == ["Z", "X", "Y"]

    def test_collapse_policy(self):
        events = [ev("u1", 1, "A"), ev("u1", 1, "A"), ev("u1", 2, "A"), ev("u1", 3, "B")]
        keep = build_sequences(events, CohortConfig(min_events=2))
        collapse = build_sequences(events, CohortConfig(min_events=2, dedup_policy="collapse_equal_timestamps"))
        assert len(keep["u1"]) == 4 and len(collapse["u1"]) == 3

    def test_users_sorted(self):
        events = [ev(u, t, "a") for u in ("zed", "amy") for t in range(3)]
        assert list(build_sequences(events, CohortConfig(min_events=2))) == ["amy", "zed"]

    def test_min_events_validation(self):
        with pytest.raises(SeqPredictError):
            CohortConfig(min_events=1)


class TestPartition:
    def test_group_and_individual(self):
        events = [ev("u1", 1, "a", ["u1", "u2"]), ev("u1", 2, "b", ["u1"]), ev("u1", 3, "c"),
                  ev("u1", 4, "d", ["u1", "u3"])]
        pair = partition_group_individual(events, CohortConfig(min_events=2, split_groups=True))["u1"]
        assert pair.group.labels() == ["a", "d"] and pair.group.kind is Kind.GROUP
        assert pair.individual.labels() == ["b", "c"] and pair.individual.kind is Kind.INDIVIDUAL

    def test_per_stream_filter(self):
        events = [ev("u1", t, f"s{t % 7}", ["u1"]) for t in range(1000)]
        events += [ev("u1", 2000 + t, "g", ["u1", "u9"]) for t in range(3)]
        pair = partition_group_individual(events, CohortConfig(min_events=100, split_groups=True))["u1"]
        assert len(pair.individual) == 1000 and pair.group is None

    def test_requires_split_flag(self):
        with pytest.raises(SeqPredictError):
            partition_group_individual([], CohortConfig(min_events=2))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from("uvw"), st.integers(0, 50), st.sampled_from("abc"), st.booleans()),
                    max_size=80))
    def test_stream_lengths_conserve_events(self, rows):
        events = [ev(u, t, s, [u, "friend"] if g else [u]) for u, t, s, g in rows]
        pairs = partition_group_individual(events, CohortConfig(min_events=2, split_groups=True))
        for user, pair in pairs.items():
            total = sum(1 for e in events if e.user == user)
            n_grp = sum(1 for e in events if e.user == user and e.is_group)
            got = (len(pair.individual) if pair.individual else total - n_grp) + (
                len(pair.group) if pair.group else n_grp)
            assert got == total
            if pair.individual and pair.group:
                assert len(pair.individual) + len(pair.group) == total


class TestSequenceFile:
    def test_round_trip(self):
        seqs = {"u1": S(list("abcab"), user="u1"), "u2": S([5, 5, 6], user="u2")}
        buf = io.StringIO()
        write_sequences(seqs, buf)
        assert buf.getvalue() == "u1\t0 1 2 0 1\nu2\t0 0 1\n"
        assert read_sequences(io.StringIO(buf.getvalue())) == seqs

    @pytest.mark.parametrize("text", ["u1 0 1\n", "u1\t0 x\n", "u1\t0 1\nu1\t0\n", "u1\t0 2\n"])
    def test_bad_files(self, text):
        with pytest.raises(SeqPredictError):
            read_sequences(io.StringIO(text))

    def test_unwritable_user(self):
        with pytest.raises(FormatError):
            write_sequences([S([1, 2], user="a\tb")], io.StringIO())


def test_simulated_log_round_trip():
    cohort = CohortSpec.from_dict({
        "users": 4, "seed": 3,
        "individual": {"M": 3, "P": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]],
                       "initial": [1, 0, 0], "n": 60},
        "group": {"M": 2, "P": [[0.5, 0.5], [0.5, 0.5]], "initial": [0.5, 0.5], "n": 25},
    })
    buf = io.StringIO()
    write_event_log_jsonl(simulate_events(cohort), buf)
    parsed = parse_event_log(buf.getvalue(), "jsonl")
    assert parsed.errors == []
    pairs = partition_group_individual(parsed.records, CohortConfig(min_events=2, split_groups=True))
    for k in range(cohort.users):
        truth_ind, truth_grp = simulate_user_streams(cohort, k)
        pair = pairs[cohort.user_id(k)]
        # first-appearance relabelling of the ground truth
        assert pair.individual.states.tolist() == S(truth_ind.labels()).states.tolist()
        assert pair.group.states.tolist() == S(truth_grp.labels()).states.tolist()
