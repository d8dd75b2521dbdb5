"""
Event-log ingestion: parse JSONL/CSV logs, build per-user state sequences,
split group from individual activity, and read/write the sequence file.

Conversation and check-in logs share one schema; ``state`` is whatever the
caller wants to predict (a partner id, a place id). Absolute times are only
used for ordering.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Mapping

from .errors import FormatError, SeqPredictError
from .sequence_model import ActivitySequence, Kind

log = logging.getLogger(__name__)

CSV_COLUMNS = ("user", "ts", "state", "participants")


class DedupPolicy(str, enum.Enum):
    KEEP_ALL = "keep_all"
    COLLAPSE_EQUAL_TIMESTAMPS = "collapse_equal_timestamps"


@dataclass(frozen=True)
class EventRecord:
    user: str
    timestamp: float
    state_label: str
    participants: tuple[str, ...] | None = None

    @property
    def is_group(self) -> bool:
        return self.participants is not None and len(self.participants) > 1


@dataclass(frozen=True)
class CohortConfig:
    min_events: int = 1000
    split_groups: bool = False
    dedup_policy: DedupPolicy = DedupPolicy.KEEP_ALL

    def __post_init__(self):
        if self.min_events < 2:
            raise SeqPredictError(f"min_events must be >= 2, got {self.min_events}")
        object.__setattr__(self, "dedup_policy", DedupPolicy(self.dedup_policy))


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    records: list[EventRecord] = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)


@dataclass(frozen=True)
class StreamPair:
    individual: ActivitySequence | None
    group: ActivitySequence | None


def parse_timestamp(value) -> float:
    """Epoch seconds from an int/float, a numeric string or an ISO-8601 string.

    Naive ISO times are taken as UTC.
    """
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        return value
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"unparseable timestamp {value!r}")
    text = value.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _make_record(user, ts, state, participants) -> EventRecord:
    if not isinstance(user, str) or not user:
        raise ValueError("missing or empty 'user'")
    if not isinstance(state, str) or not state:
        raise ValueError("missing or empty 'state'")
    if ts is None:
        raise ValueError("missing 'ts'")
    timestamp = parse_timestamp(ts)
    if participants is not None:
        if not isinstance(participants, (list, tuple)) or not all(
            isinstance(p, str) and p for p in participants
        ):
            raise ValueError("'participants' must be a list of non-empty strings")
        participants = tuple(participants)
        if participants and user not in participants:
            raise ValueError(f"participants {list(participants)} do not include user {user!r}")
        if not participants:
            participants = None
    return EventRecord(user, timestamp, state, participants)


def _parse_jsonl(lines: Iterable[str], result: ParseResult) -> None:
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            result.errors.append(RowError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            result.errors.append(RowError(lineno, "expected a JSON object"))
            continue
        try:
            rec = _make_record(obj.get("user"), obj.get("ts"), obj.get("state"),
                               obj.get("participants"))
        except ValueError as exc:
            result.errors.append(RowError(lineno, str(exc)))
            continue
        result.records.append(rec)


def _parse_csv(text: IO[str], result: ParseResult) -> None:
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        return
    header = [h.strip() for h in header]
    missing = [c for c in ("user", "ts", "state") if c not in header]
    if missing:
        raise FormatError(f"CSV header lacks required columns {missing}; got {header}")
    col = {name: header.index(name) for name in CSV_COLUMNS if name in header}
    for row in reader:
        lineno = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))

        def cell(name):
            return row[col[name]].strip() if name in col else ""

        raw_parts = cell("participants")
        parts = [p.strip() for p in raw_parts.split(";")] if raw_parts else None
        try:
            rec = _make_record(cell("user"), cell("ts") or None, cell("state"), parts)
        except ValueError as exc:
            result.errors.append(RowError(lineno, str(exc)))
            continue
        result.records.append(rec)


def parse_event_log(stream: IO[bytes] | IO[str] | bytes | str, format: str = "jsonl") -> ParseResult:
    """Parse an event log. Bad rows land in ``errors`` with their line numbers."""
    if isinstance(stream, (bytes, str)):
        data = stream
    else:
        data = stream.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise FormatError(f"event log is not valid UTF-8: {exc}") from None

    result = ParseResult()
    if format == "jsonl":
        _parse_jsonl(data.splitlines(), result)
    elif format == "csv":
        _parse_csv(io.StringIO(data, newline=""), result)
    else:
        raise FormatError(f"unknown format {format!r}; expected 'jsonl' or 'csv'")
    for err in result.errors:
        log.warning("line %d: %s", err.line, err.message)
    return result


def _by_user(events: Iterable[EventRecord]) -> dict[str, list[EventRecord]]:
    grouped: dict[str, list[EventRecord]] = defaultdict(list)
    for ev in events:
        grouped[ev.user].append(ev)
    return grouped


def _ordered_labels(events: list[EventRecord], policy: DedupPolicy) -> list[str]:
    # sorted() is stable, so equal timestamps keep input order
    ordered = sorted(events, key=lambda ev: ev.timestamp)
    if policy is DedupPolicy.COLLAPSE_EQUAL_TIMESTAMPS:
        kept = []
        for ev in ordered:
            if kept and kept[-1].timestamp == ev.timestamp and kept[-1].state_label == ev.state_label:
                continue
            kept.append(ev)
        ordered = kept
    return [ev.state_label for ev in ordered]


def build_sequences(
    events: Iterable[EventRecord], config: CohortConfig = CohortConfig()
) -> dict[str, ActivitySequence]:
    """One chronologically ordered, densely relabelled sequence per active user.

    Users with fewer than ``config.min_events`` events are dropped. Keys are
    in sorted user order.
    """
    out = {}
    for user, evs in sorted(_by_user(events).items()):
        labels = _ordered_labels(evs, config.dedup_policy)
        if len(labels) < config.min_events:
            continue
        out[user] = ActivitySequence.from_labels(labels, source_user=user, kind=Kind.MIXED)
    return out


def partition_group_individual(
    events: Iterable[EventRecord], config: CohortConfig = CohortConfig(split_groups=True)
) -> dict[str, StreamPair]:
    """Split each user's events into individual and group streams.

    An event is a group event when its participant list names more than one
    user. Each stream is relabelled and filtered by ``min_events`` on its own;
    a user appears in the result if at least one stream survives.
    """
    if not config.split_groups:
        raise SeqPredictError("partition_group_individual requires split_groups=True")
    out = {}
    for user, evs in sorted(_by_user(events).items()):
        streams = {}
        for kind, members in (
            (Kind.INDIVIDUAL, [e for e in evs if not e.is_group]),
            (Kind.GROUP, [e for e in evs if e.is_group]),
        ):
            labels = _ordered_labels(members, config.dedup_policy)
            streams[kind] = (
                ActivitySequence.from_labels(labels, source_user=user, kind=kind)
                if len(labels) >= config.min_events
                else None
            )
        if streams[Kind.INDIVIDUAL] is not None or streams[Kind.GROUP] is not None:
            out[user] = StreamPair(streams[Kind.INDIVIDUAL], streams[Kind.GROUP])
    return out


def write_sequences(seqs: Mapping[str, ActivitySequence] | Iterable[ActivitySequence], stream: IO[str]) -> None:
    """One line per user: ``user<TAB>space-separated dense ids``."""
    items = seqs.values() if isinstance(seqs, Mapping) else seqs
    for seq in items:
        user = seq.source_user
        if not user or any(ch in user for ch in "\t\n\r"):
            raise FormatError(f"user id {user!r} cannot be written to a sequence file")
        stream.write(f"{user}\t{' '.join(map(str, seq.states.tolist()))}\n")


def read_sequences(stream: IO[str]) -> dict[str, ActivitySequence]:
    out = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        user, sep, body = line.partition("\t")
        if not sep or not user:
            raise FormatError(f"line {lineno}: expected 'user<TAB>states'")
        try:
            states = [int(tok) for tok in body.split()]
        except ValueError:
            raise FormatError(f"line {lineno}: state ids must be integers") from None
        if user in out:
            raise FormatError(f"line {lineno}: duplicate user {user!r}")
        out[user] = ActivitySequence(states, source_user=user)
    return out


def write_event_log_jsonl(records: Iterable[EventRecord], stream: IO[str]) -> None:
    for rec in records:
        obj = {"user": rec.user, "ts": rec.timestamp, "state": rec.state_label}
        if rec.participants is not None:
            obj["participants"] = list(rec.participants)
        stream.write(json.dumps(obj, separators=(",", ":")) + "\n")
