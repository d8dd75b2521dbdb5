"""
Command-line front end.

    seqpredict analyze   --input log.jsonl
    seqpredict bootstrap --input log.jsonl --seed 7 --replicates 1000
    seqpredict markoff   --input log.jsonl --rates 0.0:0.9:0.1
    seqpredict compare   --input log.jsonl --min-events 100
    seqpredict simulate  --input cohort.json --output log.jsonl

Reports carry the tool version, the fully resolved configuration and the
seed, and contain nothing time- or host-dependent, so identical inputs give
byte-identical outputs. Exit codes: 0 success, 1 validation, 2 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import __version__
from .bias_correction import corrected_report
from .errors import FormatError, SeqPredictError
from .ingestion import (
    CohortConfig,
    ParseResult,
    build_sequences,
    parse_event_log,
    partition_group_individual,
    read_sequences,
    write_event_log_jsonl,
)
from .rng import check_seed, derive_int_seed, user_key
from .robustness import DEFAULT_RATES, markoff_sweep
from .sequence_model import ActivitySequence
from .significance import bootstrap_mi_test, compare_groups
from .synthetic_oracle import CohortSpec, simulate_events

log = logging.getLogger("seqpredict")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class UsageError(SeqPredictError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    format: str = "jsonl"
    seed: int = 0
    replicates: int = 1000
    rates: tuple[float, ...] = DEFAULT_RATES
    min_events: int = 1000
    corrected: bool = True
    aligned: bool = False
    n_convention: str = "split"
    bins: int = 20
    jobs: int = 1
    output: str | None = None
    output_format: str = "json"

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["rates"] = list(self.rates)
        d.pop("jobs")  # must not influence report bytes
        return d


@dataclass
class Report:
    command: str
    config: RunConfig
    columns: list[str]
    rows: list[dict]
    extra: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    parse_errors: list[dict] = field(default_factory=list)


# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def parse_rates(text: str) -> tuple[float, ...]:
    """``a:b:step`` (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = map(float, parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("rate step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 10) for k in range(max(count, 0)))
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from None


def _seed(text: str) -> int:
    try:
        return check_seed(int(text, 0))
    except (ValueError, SeqPredictError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="event log (or cohort JSON for simulate); '-' for stdin")
    common.add_argument("--format", choices=["jsonl", "csv", "seq"], default="jsonl",
                        help="input format; 'seq' is the user<TAB>ids sequence file")
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument("--replicates", type=int, default=1000)
    common.add_argument("--rates", type=parse_rates, default=DEFAULT_RATES)
    common.add_argument("--min-events", type=int, default=1000)
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--corrected", dest="corrected", action="store_true", default=True)
    grp.add_argument("--raw", dest="corrected", action="store_false")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--aligned", dest="aligned", action="store_true", default=False)
    mode.add_argument("--paper-mode", dest="aligned", action="store_false")
    common.add_argument("--n-convention", choices=["split", "length"], default="split",
                        help="sample size in the conditional/MI bias terms")
    common.add_argument("--bins", type=int, default=20)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--output", help="output path (default stdout)")
    common.add_argument("--output-format", choices=["json", "csv"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="seqpredict", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"seqpredict {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("analyze", "per-user entropies and mutual information"),
        ("bootstrap", "per-user shuffle test of the mutual information"),
        ("markoff", "shuffle test after random deletion, per rate"),
        ("compare", "individual versus group gap statistics with a t-test"),
        ("simulate", "write a synthetic JSONL event log from a cohort spec"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    return parser


# loading

def _read_input(path: str | None) -> bytes:
    if path is None:
        raise UsageError("--input is required")
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _load_events(cfg: RunConfig) -> ParseResult:
    return parse_event_log(_read_input(cfg.input), cfg.format)


def _load_sequences(cfg: RunConfig) -> tuple[dict[str, ActivitySequence], list[dict]]:
    if cfg.format == "seq":
        try:
            text = _read_input(cfg.input).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"sequence file is not valid UTF-8: {exc}") from None
        seqs = read_sequences(io.StringIO(text))
        seqs = {u: s for u, s in sorted(seqs.items()) if len(s) >= cfg.min_events}
        return seqs, []
    parsed = _load_events(cfg)
    seqs = build_sequences(parsed.records, CohortConfig(min_events=cfg.min_events))
    return seqs, [e.__dict__ for e in parsed.errors]


def _pmap(fn: Callable, items: list, jobs: int) -> list:
    # results come back in input order regardless of scheduling
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# per-user workers (top level so they pickle)

def _analyze_one(args):
    seq, n_convention = args
    return corrected_report(seq, n_convention=n_convention)


def _bootstrap_one(args):
    seq, R, seed, corrected, aligned, n_convention = args
    return bootstrap_mi_test(seq, R=R, seed=seed, corrected=corrected, aligned=aligned,
                             n_convention=n_convention)


def _markoff_one(args):
    seq, rates, R, seed, corrected, aligned, n_convention = args
    return markoff_sweep(seq, rates=rates, R=R, seed=seed, corrected=corrected,
                         aligned=aligned, n_convention=n_convention)


def _histograms(values: dict[str, list[float]], bins: int) -> dict:
    pooled = np.concatenate([np.asarray(v, dtype=float) for v in values.values()])
    if pooled.size == 0:
        return {"edges": [], **{k: [] for k in values}}
    edges = np.histogram_bin_edges(pooled, bins=bins)
    out = {"edges": edges.tolist()}
    for k, v in values.items():
        out[k] = np.histogram(np.asarray(v, dtype=float), bins=edges)[0].tolist()
    return out


# commands

def cmd_analyze(cfg: RunConfig) -> Report:
    seqs, errors = _load_sequences(cfg)
    reports = _pmap(_analyze_one, [(s, cfg.n_convention) for s in seqs.values()], cfg.jobs)
    columns = ["user", "n", "M", "h0", "h1", "h2", "mi", "h1_aligned", "mi_aligned",
               "h1_corrected", "h2_corrected", "mi_corrected", "mi_aligned_corrected"]
    rows = []
    for user, r in zip(seqs, reports):
        c = r.corrected
        rows.append(dict(user=user, n=r.n, M=r.alphabet_size, h0=r.h0, h1=r.h1, h2=r.h2,
                         mi=r.mi, h1_aligned=r.h1_aligned, mi_aligned=r.mi_aligned,
                         h1_corrected=c.h1, h2_corrected=c.h2, mi_corrected=c.mi,
                         mi_aligned_corrected=c.mi_aligned))
    hist = _histograms({k: [row[k] for row in rows] for k in ("h0", "h1", "h2")}, cfg.bins)
    return Report("analyze", cfg, columns, rows, extra={"histograms": hist}, parse_errors=errors)


def _user_seed(seed: int, user: str, *key: int) -> int:
    return derive_int_seed(seed, user_key(user), *key)


def cmd_bootstrap(cfg: RunConfig) -> Report:
    seqs, errors = _load_sequences(cfg)
    seeds = {u: _user_seed(cfg.seed, u) for u in seqs}
    results = _pmap(
        _bootstrap_one,
        [(s, cfg.replicates, seeds[u], cfg.corrected, cfg.aligned, cfg.n_convention)
         for u, s in seqs.items()],
        cfg.jobs,
    )
    columns = ["user", "n", "M", "mi_true", "p025", "p975", "gap", "reject_null", "seed"]
    rows = [
        dict(user=u, n=len(s), M=s.alphabet_size, mi_true=r.mi_true, p025=r.p025,
             p975=r.p975, gap=r.gap, reject_null=r.reject_null, seed=r.seed)
        for (u, s), r in zip(seqs.items(), results)
    ]
    rows.sort(key=lambda row: (row["gap"], row["user"]))
    n_rej = sum(row["reject_null"] for row in rows)
    notes = [f"{n_rej} of {len(rows)} users reject the shuffle null at the 97.5% band"]
    return Report("bootstrap", cfg, columns, rows, notes=notes, parse_errors=errors,
                  extra={"rejected": n_rej, "users": len(rows)})


def cmd_markoff(cfg: RunConfig) -> Report:
    seqs, errors = _load_sequences(cfg)
    profiles = _pmap(
        _markoff_one,
        [(s, cfg.rates, cfg.replicates, _user_seed(cfg.seed, u), cfg.corrected,
          cfg.aligned, cfg.n_convention) for u, s in seqs.items()],
        cfg.jobs,
    )
    columns = ["user", "rate", "retained", "mi_true", "p025", "p975", "gap", "reject_null",
               "critical_rate"]
    rows, critical = [], {}
    for u, prof in zip(seqs, profiles):
        critical[u] = prof.critical_rate
        for st in prof.steps:
            r = st.result
            rows.append(dict(user=u, rate=st.rate, retained=st.retained, mi_true=r.mi_true,
                             p025=r.p025, p975=r.p975, gap=r.gap, reject_null=r.reject_null,
                             critical_rate=prof.critical_rate))
    notes = [f"critical rate {u}: {'none' if c is None else c}" for u, c in critical.items()]
    return Report("markoff", cfg, columns, rows, extra={"critical_rate": critical},
                  notes=notes, parse_errors=errors)


def cmd_compare(cfg: RunConfig) -> Report:
    if cfg.format == "seq":
        raise UsageError("compare needs an event log with participants, not a sequence file")
    parsed = _load_events(cfg)
    pairs = partition_group_individual(
        parsed.records, CohortConfig(min_events=cfg.min_events, split_groups=True)
    )
    jobs = []
    for u, pair in pairs.items():
        for key, stream, seq in ((0, "individual", pair.individual), (1, "group", pair.group)):
            if seq is not None:
                jobs.append((u, stream, seq, _user_seed(cfg.seed, u, key)))
    results = _pmap(
        _bootstrap_one,
        [(seq, cfg.replicates, sd, cfg.corrected, cfg.aligned, cfg.n_convention)
         for _, _, seq, sd in jobs],
        cfg.jobs,
    )
    columns = ["user", "stream", "n", "M", "mi_true", "p975", "gap", "reject_null"]
    rows = [
        dict(user=u, stream=stream, n=len(seq), M=seq.alphabet_size, mi_true=r.mi_true,
             p975=r.p975, gap=r.gap, reject_null=r.reject_null)
        for (u, stream, seq, _), r in zip(jobs, results)
    ]
    rows.sort(key=lambda row: (row["stream"] != "individual", row["gap"], row["user"]))
    g_ind = [row["gap"] for row in rows if row["stream"] == "individual"]
    g_grp = [row["gap"] for row in rows if row["stream"] == "group"]
    if len(g_ind) < 2 or len(g_grp) < 2:
        raise SeqPredictError(
            f"need at least 2 qualifying streams per population; got {len(g_ind)} "
            f"individual and {len(g_grp)} group (lower --min-events?)"
        )
    cmp = compare_groups(g_ind, g_grp, bins=cfg.bins)
    extra = {
        "ttest": cmp.ttest.as_dict(),
        "mean_gap_individual": cmp.mean_individual,
        "mean_gap_group": cmp.mean_group,
        "histograms": {
            "edges": cmp.bin_edges.tolist(),
            "individual": cmp.hist_individual.tolist(),
            "group": cmp.hist_group.tolist(),
        },
        "reject_equal_means": cmp.reject_equal_means,
        "verdict": cmp.verdict,
    }
    return Report("compare", cfg, columns, rows, extra=extra, notes=[cmp.verdict],
                  parse_errors=[e.__dict__ for e in parsed.errors])


def cmd_simulate(cfg: RunConfig) -> list:
    try:
        spec = json.loads(_read_input(cfg.input))
    except json.JSONDecodeError as exc:
        raise SeqPredictError(f"cohort config is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise SeqPredictError("cohort config must be a JSON object")
    if cfg.seed is not None:
        spec["seed"] = cfg.seed
    cohort = CohortSpec.from_dict(spec)
    cfg.seed = cohort.seed
    return simulate_events(cohort)


# rendering

def _fmt_csv(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6f}"
    return str(value)


def render(report: Report, output_format: str) -> str:
    meta = {
        "tool": "seqpredict",
        "version": __version__,
        "command": report.command,
        "seed": report.config.seed,
        "config": report.config.as_dict(),
    }
    if output_format == "json":
        doc = {**meta, "columns": report.columns, "rows": report.rows, **report.extra,
               "notes": report.notes, "parse_errors": report.parse_errors}
        return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# seqpredict {__version__} {report.command} seed={report.config.seed}\n")
    buf.write(f"# config={json.dumps(meta['config'], sort_keys=True)}\n")
    for note in report.notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt_csv(row[c]) for c in report.columns])
    return buf.getvalue()


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


_DISPATCH = {
    "analyze": cmd_analyze,
    "bootstrap": cmd_bootstrap,
    "markoff": cmd_markoff,
    "compare": cmd_compare,
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.replicates < 1:
        raise UsageError("--replicates must be positive")
    if ns.min_events < 2:
        raise UsageError("--min-events must be >= 2")
    if ns.bins < 1 or ns.jobs < 1:
        raise UsageError("--bins and --jobs must be positive")
    return RunConfig(
        command=ns.command, input=ns.input, format=ns.format,
        seed=ns.seed if ns.seed is not None or ns.command == "simulate" else 0,
        replicates=ns.replicates, rates=tuple(ns.rates), min_events=ns.min_events,
        corrected=ns.corrected, aligned=ns.aligned, n_convention=ns.n_convention,
        bins=ns.bins, jobs=ns.jobs, output=ns.output, output_format=ns.output_format,
    )


def run(argv: Iterable[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(ns)
        if cfg.command == "simulate":
            records = cmd_simulate(cfg)
            buf = io.StringIO()
            write_event_log_jsonl(records, buf)
            _write_output(buf.getvalue(), cfg.output)
            log.info("wrote %d events (seed %d)", len(records), cfg.seed)
            return EXIT_OK
        report = _DISPATCH[cfg.command](cfg)
        if not report.rows:
            log.warning("no user passed the filters (min_events=%d); empty report", cfg.min_events)
        _write_output(render(report, cfg.output_format), cfg.output)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except SeqPredictError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
