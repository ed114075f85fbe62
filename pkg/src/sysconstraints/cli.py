"""Command-line interface.

Exit codes: 0 success, 2 input validation, 3 channel-model error,
4 negotiation without an acceptable candidate, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys

from .channel import channel_metrics
from .errors import DomainError, NoChannelError, ParseError, SupersetViolation, ValidationError
from .etiquette.machine import DEFAULT_TIMEOUT_TICKS, EXHAUSTED, NO_COMPATIBLE, run_session
from .etiquette.tree import rank_selections
from .info_core import relative_information
from . import sim, specs
from .variation import system_variation

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CHANNEL = 3
EXIT_NO_CANDIDATE = 4
EXIT_IO = 5


class _Output:
    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO()

    def write(self, text: str) -> None:
        self.buf.write(text)

    def flush(self) -> None:
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.buf.getvalue())
        else:
            sys.stdout.write(self.buf.getvalue())


def _num(x: float, precision: str) -> str:
    return repr(float(x)) if precision == "full" else f"{x:.6f}"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_entropy(args, out: _Output) -> int:
    dist = specs.parse_distribution(specs.read_json(args.file))
    ri = relative_information(dist)
    p = args.precision
    if args.format == "csv":
        out.write(_csv([
            ["entropy_bits", "bound_bits", "slack_bits"],
            [_num(ri.entropy_bits, p), _num(ri.bound_bits, p), _num(ri.slack_bits, p)],
        ]))
    else:
        out.write(
            f"entropy={_num(ri.entropy_bits, p)} bound={_num(ri.bound_bits, p)} "
            f"slack={_num(ri.slack_bits, p)}\n"
        )
    return EXIT_OK


def cmd_channel(args, out: _Output) -> int:
    spec = specs.parse_channel(specs.read_json(args.file))
    m = channel_metrics(spec.cs, spec.source, spec.noise)
    p = args.precision
    if args.format == "csv":
        out.write(_csv([
            ["channel_id", "t", "r", "n", "h_a_bits", "h_b_bits", "mi_bits", "mb_bits", "s_bound_bits", "v_bits"],
            [spec.cs.id, spec.cs.t, spec.cs.r, spec.cs.n] + [_num(v, p) for v in m.as_dict().values()],
        ]))
    else:
        out.write(
            f"channel {spec.cs.id} t={spec.cs.t} r={spec.cs.r} n={spec.cs.n}\n"
            f"H(A)={_num(m.h_a_bits, p)} H(B)={_num(m.h_b_bits, p)} MI={_num(m.mi_bits, p)} "
            f"MB={_num(m.mb_bits, p)} S={_num(m.s_bound_bits, p)} V={_num(m.variation_bits, p)}\n"
        )
    if args.plot:
        from .plotting import plot_channel_metrics

        plot_channel_metrics(m, args.plot, title=spec.cs.id)
    return EXIT_OK


def cmd_system(args, out: _Output) -> int:
    report = system_variation(specs.parse_system(specs.read_json(args.file)))
    if args.format == "csv":
        out.write(report.to_csv(args.precision))
    else:
        out.write(report.to_table(args.precision))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv(args.precision))
    if args.plot:
        from .plotting import plot_variation

        plot_variation(report, args.plot)
    return EXIT_OK


def cmd_negotiate(args, out: _Output) -> int:
    left = sim.parse_endpoint(specs.read_json(args.left), "L")
    right = sim.parse_endpoint(specs.read_json(args.right), "R")
    ranking = rank_selections(left.caps, right.caps, args.layer)
    session = run_session(
        left.session_state(args.layer), right.session_state(args.layer), args.timeout_ticks
    )
    p = args.precision
    if args.format == "csv":
        rows = [["rank", "tx_mode", "rx_mode", "s_bits"]]
        rows += [[i, c.tx_mode, c.rx_mode, _num(c.s_bits, p)] for i, c in enumerate(ranking, 1)]
        out.write(_csv(rows))
    else:
        out.write(f"ranking ({left.id} tx -> {right.id} rx):\n")
        for i, c in enumerate(ranking, 1):
            pair = c.tx_mode if c.tx_mode == c.rx_mode else f"{c.tx_mode}->{c.rx_mode}"
            out.write(f"  {i}. {pair} s={_num(c.s_bits, p)}\n")
        if not ranking:
            out.write("  (none)\n")
        out.write(f"transcript ({len(session.transcript)} messages):\n")
        for rec in session.transcript:
            line = f"  t={rec.tick} {rec.direction} {rec.kind}"
            if args.dump_wire:
                line += f" {rec.wire.hex(' ')}"
            out.write(line + "\n")
        if session.selected is not None:
            out.write(f"selected={session.selected}\n")
        else:
            out.write(f"negotiation=Failed reason={session.failure_reason}\n")
    if session.selected is None and session.failure_reason in (NO_COMPATIBLE, EXHAUSTED):
        print(f"error: {session.failure_reason}", file=sys.stderr)
        return EXIT_NO_CANDIDATE
    return EXIT_OK


def cmd_simulate(args, out: _Output) -> int:
    left, right, cfg = sim.parse_scenario(specs.read_json(args.file))
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.timeout_ticks is not None:
        changes["per_phase_timeout"] = args.timeout_ticks
    if args.symbols_csv:
        changes["record_symbols"] = True
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    report = sim.run(left, right, cfg)
    p = args.precision
    if args.format == "csv":
        a = report.analytic
        out.write(_csv([
            ["selected", "analytic_mi_bits", "empirical_mi_bits", "symbols_sent", "symbols_delivered", "failure_reason"],
            [
                "" if report.selected is None else str(report.selected),
                _num(a.mi_bits if a else 0.0, p), _num(report.empirical_mi_bits, p),
                report.symbols_sent, report.symbols_delivered, report.failure_reason or "",
            ],
        ]))
    else:
        out.write(report.to_text(p))
    if args.symbols_csv:
        with open(args.symbols_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.symbols_csv())
    if args.plot:
        from .plotting import plot_simulation

        plot_simulation(report, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--precision", choices=("fixed6", "full"), default="fixed6")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="sysconstraints", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="entropy, bound and slack of a distribution")
    p.add_argument("file")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("channel", parents=[common], help="metrics of one channel spec")
    p.add_argument("file")
    p.add_argument("--plot", metavar="PNG")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("system", parents=[common], help="variation report for a layered system")
    p.add_argument("file")
    p.add_argument("--csv", metavar="PATH", help="also write the CSV report here")
    p.add_argument("--plot", metavar="PNG")
    p.set_defaults(func=cmd_system)

    p = sub.add_parser("negotiate", parents=[common], help="rank and negotiate between two capability files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--dump-wire", action="store_true")
    p.add_argument("--layer")
    p.add_argument("--timeout-ticks", type=int, default=DEFAULT_TIMEOUT_TICKS)
    p.set_defaults(func=cmd_negotiate)

    p = sub.add_parser("simulate", parents=[common], help="negotiate, then transmit over the selected mode")
    p.add_argument("file")
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout-ticks", type=int)
    p.add_argument("--symbols-csv", metavar="PATH")
    p.add_argument("--plot", metavar="PNG")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s"
    )
    out = _Output(args.out)
    try:
        code = args.func(args, out)
        out.flush()
        return code
    except NoChannelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHANNEL
    except (ValidationError, DomainError, ParseError, SupersetViolation) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (TypeError, ValueError, KeyError) as e:
        print(f"error: malformed input: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
