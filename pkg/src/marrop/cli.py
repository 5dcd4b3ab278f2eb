"""Command-line front door.

Subcommands mirror the audit workflow: plan the draw counts, open a
session, run the seeded public draw, record hand counts as batches are
counted, check status, escalate to a full hand count, simulate the risk
property, and emit reports. State lives in ``session.json`` next to the
election CSVs, so the audit directory is the complete record of the
audit.

Every command is a thin wrapper over the library: anything printed or
persisted here is exactly what the underlying modules computed. Exit
codes: 0 success, 1 domain error (bad data, bad state), 2 usage error.
All sampling is explicitly seeded; there is no silent OS-entropy default.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io_formats
from .election import ElectionSpec, HandCount
from .errors import AuditError, ValidationError, WrongBatch
from .kaplan_markov import (
    CERTIFIABLE,
    ESCALATE_FULL_COUNT,
    AuditSession,
    open_session,
)
from .planner import (
    DEFAULT_SCAN_CEILING,
    ZERO_HYPOTHESIS,
    TaintHypothesis,
    compare_plans,
    minimal_draws,
)
from .simulator import TrueTallySet, plant_errors, simulate


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _races_list(text: str) -> list[str]:
    races = [r.strip() for r in text.split(",") if r.strip()]
    if not races:
        raise argparse.ArgumentTypeError("expected a comma-separated race list")
    return races


def _paths(target: str) -> tuple[Path, Path]:
    """Resolve an audit directory or session file to (election_dir, session_path)."""
    p = Path(target)
    if p.suffix == ".json":
        return p.parent, p
    return p, p / "session.json"


def _load_spec(election_dir: Path) -> ElectionSpec:
    return io_formats.load_election(election_dir)


def _load_session(session_path: Path, spec: ElectionSpec) -> AuditSession:
    return io_formats.load_session(session_path, spec)


def _persist(session: AuditSession, session_path: Path) -> None:
    io_formats.write_session(session, session_path)


def _cmd_plan(args) -> int:
    election_dir, _ = _paths(args.election)
    spec = _load_spec(election_dir)
    hypothesis = (
        TaintHypothesis.parse(args.taint_hypothesis)
        if args.taint_hypothesis
        else ZERO_HYPOTHESIS
    )
    table = compare_plans(
        spec,
        args.alpha,
        hypothesis,
        races=args.races,
        ceiling=args.ceiling,
    )
    if args.fwer:
        table = table.filtered({"fwer", "marrop"})
    elif args.pcer:
        table = table.filtered({"pcer", "marrop"})
    sys.stdout.write(table.to_csv() if args.csv else table.to_text())
    return 0


def _cmd_open(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    if session_path.exists():
        raise ValidationError(
            f"{session_path} already exists; move it aside to open a new audit"
        )
    session = open_session(spec, args.races, args.alpha, seed=None)
    _persist(session, session_path)
    print(f"opened audit of races {', '.join(session.audited_races)}")
    print(f"total error bound {session.total_bound:.3f}, risk limit {args.alpha:g}")
    if session.status == CERTIFIABLE:
        print(io_formats.decision_line(session))
    else:
        print(f"next: run the public draw with "
              f"`marrop draw {args.election} --seed SEED --n DRAWS`")
    return 0


def _cmd_draw(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    session = _load_session(session_path, spec)
    session.generate_draws(args.seed, args.n)
    _persist(session, session_path)
    print(f"drew {args.n} batches with seed {args.seed}:")
    for i, batch_id in enumerate(session.draws, start=1):
        print(f"{i:>4}  {batch_id}")
    return 0


def _cmd_record(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    session = _load_session(session_path, spec)
    counts = {c.batch_id: c for c in io_formats.load_hand_counts_csv(args.counts)}
    if not counts:
        raise ValidationError(f"no hand counts found in {args.counts}")
    before = len(session.records)
    consumed = set()
    while session.status != ESCALATE_FULL_COUNT:
        nxt = session.next_batch
        if nxt is None or nxt not in counts:
            break
        session.record_batch(counts[nxt])
        consumed.add(nxt)
    unused = sorted(set(counts) - consumed)
    if unused:
        # nothing recorded is persisted when the file names stray batches
        raise WrongBatch(
            f"counts for batches that are not pending draws: {', '.join(unused)}"
        )
    _persist(session, session_path)
    print(f"recorded {len(session.records) - before} draws "
          f"({len(consumed)} new hand counts)")
    print(io_formats.decision_line(session))
    return 0


def _cmd_status(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    session = _load_session(session_path, spec)
    sys.stdout.write(io_formats.session_report_text(session))
    return 0


def _cmd_escalate(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    session = _load_session(session_path, spec)
    session.escalate()
    _persist(session, session_path)
    print(io_formats.decision_line(session))
    return 0


def _cmd_report(args) -> int:
    election_dir, session_path = _paths(args.election)
    spec = _load_spec(election_dir)
    session = _load_session(session_path, spec)
    if args.json:
        doc = io_formats.session_report_dict(session)
        doc["decision"] = io_formats.decision_line(session)
        print(json.dumps(doc, indent=2))
    else:
        sys.stdout.write(io_formats.session_report_text(session))
    return 0


def _cmd_simulate(args) -> int:
    election_dir, _ = _paths(args.election)
    spec = _load_spec(election_dir)
    races = args.races or list(spec.race_ids)
    if args.flip_race:
        pairs = spec.winner_loser_pairs(args.flip_race)
        w, l = min(pairs, key=lambda wl: spec.totals[wl[0]] - spec.totals[wl[1]])
        margin = spec.totals[w] - spec.totals[l]
        budget = 1.0 + 2.0 / margin  # one whole vote past the tie
        spread = args.spread
        if spread is None:
            spread = sum(
                1
                for b in spec.batches
                if b.has_race(args.flip_race)
                and min(b.votes(w), b.ballot_caps[args.flip_race] - b.votes(l)) > 0
            )
        truth = plant_errors(spec, args.flip_race, budget, spread, args.seed)
    else:
        truth = TrueTallySet(
            counts={
                b.batch_id: HandCount(b.batch_id, dict(b.reported_votes))
                for b in spec.batches
            }
        )
    n = args.n
    if n is None:
        from .bounds import total_error_bound

        total = total_error_bound(spec, races).total
        n = minimal_draws(total, args.alpha)
    report = simulate(
        spec, truth, args.alpha, n, args.trials, args.seed, audited_races=races
    )
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        sys.stdout.write(report.to_text())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(Path(args.data_dir) if args.data_dir else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marrop",
        description="Risk-limiting audit of overlapping races from one batch sample.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="compare audit designs and draw counts")
    plan.add_argument("election", help="election directory (five CSVs)")
    plan.add_argument("--alpha", type=float, required=True, help="risk limit")
    plan.add_argument(
        "--taint-hypothesis",
        default="",
        help="worst acceptable taints, COUNTxVALUE[,...] e.g. 5x0.04",
    )
    plan.add_argument("--races", type=_races_list, default=None)
    model = plan.add_mutually_exclusive_group()
    model.add_argument("--fwer", action="store_true", help="only familywise rows")
    model.add_argument("--pcer", action="store_true", help="only per-race rows")
    plan.add_argument("--csv", action="store_true", help="emit CSV instead of text")
    plan.add_argument("--ceiling", type=_positive_int, default=DEFAULT_SCAN_CEILING)
    plan.set_defaults(func=_cmd_plan)

    opener = sub.add_parser("open", help="open a new audit session")
    opener.add_argument("election", help="audit directory")
    opener.add_argument("--alpha", type=float, required=True)
    opener.add_argument("--races", type=_races_list, required=True)
    opener.set_defaults(func=_cmd_open)

    draw = sub.add_parser("draw", help="run the seeded public batch draw")
    draw.add_argument("election", help="audit directory or session.json path")
    draw.add_argument("--seed", type=int, required=True, help="public ceremony seed")
    draw.add_argument("--n", type=_positive_int, required=True, help="planned draws")
    draw.set_defaults(func=_cmd_draw)

    record = sub.add_parser("record", help="record hand counts for pending draws")
    record.add_argument("election", help="audit directory or session.json path")
    record.add_argument("counts", help="CSV: batch_id,candidate_id,votes")
    record.set_defaults(func=_cmd_record)

    status = sub.add_parser("status", help="show the session state")
    status.add_argument("election", help="audit directory or session.json path")
    status.set_defaults(func=_cmd_status)

    escalate = sub.add_parser("escalate", help="abandon sampling for a full count")
    escalate.add_argument("election", help="audit directory or session.json path")
    escalate.set_defaults(func=_cmd_escalate)

    report = sub.add_parser("report", help="emit the audit report")
    report.add_argument("election", help="audit directory or session.json path")
    report.add_argument("--json", action="store_true")
    report.set_defaults(func=_cmd_report)

    sim = sub.add_parser("simulate", help="measure the empirical certify rate")
    sim.add_argument("election", help="election directory")
    sim.add_argument("--trials", type=_positive_int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--alpha", type=float, default=0.25)
    sim.add_argument("--n", type=_positive_int, default=None,
                     help="planned draws (default: minimal for a clean audit)")
    sim.add_argument("--flip-race", default=None,
                     help="plant one vote past a tie in this race")
    sim.add_argument("--spread", type=_positive_int, default=None,
                     help="batches to spread planted errors over (default: all able)")
    sim.add_argument("--races", type=_races_list, default=None)
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    serve = sub.add_parser("serve", help="run the HTTP audit service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", default=None,
                       help="directory for uploaded elections and sessions")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
