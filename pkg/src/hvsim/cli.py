"""Command line front end. Every subcommand runs one library scenario and
emits its report as text, JSON or CSV; the exit code states the verdict.

Exit codes: 0 when the scenario's claim holds (for strong-fc that means the
inconsistency witness appeared, which is the expected behavior), 1 when a
check fails or a library error surfaces, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .consistency import check_strong_fc, no_go_search, verify_proposition
from .errors import HvsimError
from .experiments import (
    ExperimentConfig,
    born_experiment,
    chsh_experiment,
    column_product_experiment,
    implications_demo,
    replay_table1,
    spin_state,
)
from .expressions import peres_mermin
from .model import HiddenState, substream
from .operators import amplitude_pairs, basis_ket, commutator_norm, identity_scalar, pauli

_WEAK_FC_TAG = 6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvsim",
        description="Deterministic hidden-variable simulator for"
                    " finite-dimensional quantum measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", choices=("text", "json", "csv"), default="text",
                       help="output format (default: text)")
        p.add_argument("--out", metavar="PATH",
                       help="write the report to PATH instead of stdout")
        return p

    def add_seed(p, default=0):
        p.add_argument("--seed", type=int, default=default,
                       help=f"root RNG seed (default: {default})")

    def add_trials(p, default):
        p.add_argument("--trials", type=int, default=default,
                       help=f"number of trials (default: {default})")

    add_command("table1", "replay the scripted three-iteration reference run")

    born = add_command("born", "compare outcome frequencies against Born weights")
    add_seed(born)
    add_trials(born, 100_000)
    born.add_argument("--theta", type=float, default=math.pi / 3,
                      help="spin rotation angle in radians for the"
                           " cos(theta)|0>+sin(theta)|1> state (default: pi/3)")
    born.add_argument("--tolerance-sigma", type=float, default=5.0,
                      help="per-branch sigma tolerance (default: 5)")

    add_command("pm-square", "build the observable square and verify its identities")
    add_command("no-go", "enumerate global +-1 assignments against the square")

    weak = add_command("weak-fc", "sequential-measurement consistency sweep on one line")
    add_seed(weak)
    add_trials(weak, 1000)
    weak.add_argument("--column", type=int, choices=(1, 2, 3), default=3,
                      help="which column of the square to sweep (default: 3)")

    strong = add_command("strong-fc", "single-state functional consistency probe")
    strong.add_argument("--c", type=float, default=0.4,
                        help="hidden scalar to probe at (default: 0.4)")

    impl = add_command("implications",
                       "deduction-vs-direct comparison on the diagonal triple")
    impl.add_argument("--c", type=float, default=0.4,
                      help="hidden scalar for the initial state (default: 0.4)")

    chsh = add_command("chsh", "estimate the four-setting correlation statistic S")
    add_seed(chsh)
    add_trials(chsh, 100_000)
    chsh.add_argument("--sequential", action="store_true",
                      help="measure the two sides one after the other"
                           " (slow cross-check) instead of the joint product")

    line = add_command("column-product",
                       "sequential product sweep along one line of the square")
    add_seed(line)
    add_trials(line, 200)
    line.add_argument("--index", type=int, choices=(1, 2, 3), default=3,
                      help="which line to measure (default: 3)")
    line.add_argument("--axis", choices=("column", "row"), default="column",
                      help="line orientation (default: column)")

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be nonnegative")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be positive")
    if not 0.0 < getattr(args, "c", 0.5) < 1.0:
        parser.error("--c must lie strictly between 0 and 1")
    if getattr(args, "tolerance_sigma", 1.0) <= 0:
        parser.error("--tolerance-sigma must be positive")
    theta = getattr(args, "theta", 0.0)
    if not math.isfinite(theta):
        parser.error("--theta must be finite")


def _ket_string(state, cutoff: float = 1e-9) -> str:
    amps = state.amplitudes
    dim = amps.size
    bits = dim.bit_length() - 1
    binary = 2 ** bits == dim and dim > 1
    terms = []
    for i, z in enumerate(amps):
        if abs(z) <= cutoff:
            continue
        name = format(i, f"0{bits}b") if binary else str(i)
        if abs(z.imag) <= cutoff:
            coeff = f"{z.real:+.4f}"
        else:
            coeff = f"({z.real:.4f}{z.imag:+.4f}j)"
        terms.append(f"{coeff}|{name}>")
    return " ".join(terms) if terms else "0"


def _sign(v) -> str:
    return f"{int(round(v)):+d}"


def _verdict(passed: bool, note: str = "") -> str:
    word = "PASS" if passed else "FAIL"
    return f"result: {word}{f' ({note})' if note else ''}\n"


def _run_table1(args):
    report = replay_table1()
    lines = ["reference replay: 3 iterations, every entry matches the frozen run", ""]
    labels = [[op.label for op in row] for row in peres_mermin().grid]
    for it in report.iterations:
        lines.append(f"iteration {it.index}: c={it.c:g}, state {_ket_string(it.initial_state)}")
        for r in range(3):
            cells = "  ".join(f"{labels[r][c]}={_sign(it.grid[r][c])}" for c in range(3))
            lines.append(f"  {cells}")
        rows = " ".join(f"R{i + 1}={_sign(v)}" for i, v in enumerate(it.row_values))
        cols = " ".join(f"C{j + 1}={_sign(v)}" for j, v in enumerate(it.col_values))
        lines.append(f"  row products: {rows}   column products: {cols}")
        lines.append(f"  measured {it.measured_label} -> {_sign(it.measured_value)},"
                     f" state after collapse: {_ket_string(it.final_state)}")
        lines.append("")
    text = "\n".join(lines) + _verdict(True)
    return report.as_dict(), True, report.csv_rows(), text


def _run_born(args):
    cfg = ExperimentConfig(seed=args.seed, trials=args.trials, theta=args.theta,
                           tolerance_sigma=args.tolerance_sigma)
    state = spin_state(cfg.theta)
    report = born_experiment(cfg, state, pauli("z"),
                             keep_trials=args.format == "csv")
    payload = {"seed": cfg.seed, "theta": cfg.theta, **report.as_dict()}
    lines = [
        f"born statistics for {report.observable_label} on"
        f" cos(theta)|0>+sin(theta)|1>, theta={cfg.theta:g}",
        f"seed={cfg.seed} trials={cfg.trials}",
        f"{'outcome':>8} {'expected':>12} {'observed':>12}",
    ]
    for value in sorted(report.expected_probabilities):
        lines.append(f"{value:>8g} {report.expected(value):>12.6f}"
                     f" {report.frequency(value):>12.6f}")
    lines.append(f"max sigma deviation: {report.max_sigma_deviation:.3f}"
                 f" (tolerance {report.tolerance_sigma:g})")
    text = "\n".join(lines) + "\n" + _verdict(report.passed)
    return payload, report.passed, list(report.trial_rows), text


def _run_pm_square(args):
    square = peres_mermin()
    max_comm = 0.0
    for line_ops in list(square.grid) + [square.column_operators(j) for j in (1, 2, 3)]:
        for i, a in enumerate(line_ops):
            for b in line_ops[i + 1:]:
                max_comm = max(max_comm, commutator_norm(a, b))
    max_identity_gap = 0.0
    for op, value in list(zip(square.rows, square.row_values)) + \
            list(zip(square.cols, square.col_values)):
        scalar = identity_scalar(op.matrix, tol=1e-12)
        max_identity_gap = max(max_identity_gap, abs(scalar - value))
    payload = {
        "grid": [[op.label for op in row] for row in square.grid],
        "row_values": list(square.row_values),
        "col_values": list(square.col_values),
        "max_line_commutator_norm": max_comm,
        "max_identity_deviation": max_identity_gap,
    }
    lines = ["two-qubit observable square"]
    for row in square.grid:
        lines.append("  " + " ".join(op.label for op in row))
    lines.append("row products: " + " ".join(_sign(v) for v in square.row_values))
    lines.append("column products: " + " ".join(_sign(v) for v in square.col_values))
    lines.append(f"max commutator norm within a line: {max_comm:.3e}")
    lines.append(f"max deviation of a line product from its scalar: {max_identity_gap:.3e}")
    text = "\n".join(lines) + "\n" + _verdict(True)
    return payload, True, None, text


def _run_no_go(args):
    result = no_go_search(peres_mermin())
    passed = result.satisfying_assignments == 0
    lines = [
        "global +-1 assignment census over the square",
        f"assignments tested: {result.total_assignments}",
        f"satisfying all six line constraints: {result.satisfying_assignments}",
        f"meeting all row constraints (even parity): {result.parity_even_count}",
        f"meeting all column constraints (odd parity): {result.parity_odd_count}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(passed, "no global assignment exists")
    return result.as_dict(), passed, None, text


def _run_weak_fc(args):
    square = peres_mermin()
    f = square.column_expression(args.column)
    state = basis_ket(4, 0)
    rng = substream(args.seed, _WEAK_FC_TAG)
    summary = verify_proposition(f, state, args.trials, rng,
                                 keep_cases=args.format == "csv")
    payload = {"seed": args.seed, "column": args.column,
               "initial_state": amplitude_pairs(state.amplitudes),
               **summary.as_dict()}
    lines = [
        "weak functional consistency sweep",
        f"expression: {summary.expression} from state {_ket_string(state)}",
        f"seed={args.seed} trials={summary.trials}"
        f" permutations={summary.permutation_count}",
        f"cases: {summary.cases}   passes: {summary.passes}"
        f"   failures: {summary.failures}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(summary.all_passed)
    return payload, summary.all_passed, list(summary.case_rows), text


def _run_strong_fc(args):
    square = peres_mermin()
    f = square.column_expression(3)
    hidden = HiddenState(basis_ket(4, 0), args.c)
    report = check_strong_fc(f, hidden)
    witnessed = not report.holds
    leaf_values = report.details["leaf_values"]
    lines = [
        "strong functional consistency probe",
        f"expression: {report.scenario_label} on {_ket_string(hidden.state)}"
        f" with c={args.c:g}",
        "per-leaf predictions: " + " ".join(
            f"{k}={_sign(v)}" for k, v in leaf_values.items()),
        f"predict(expression operator) = {_sign(report.lhs_value)}",
        f"expression of per-leaf predictions = {_sign(report.rhs_value)}",
        f"holds: {'yes' if report.holds else 'no'}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(witnessed, "inconsistency witnessed")
    return report.as_dict(), witnessed, None, text


def _run_implications(args):
    report = implications_demo(args.c)
    passed = report.post_collapse_consistent and report.non_fc_witnessed
    mismatches = " ".join(
        f"{k}={'yes' if v else 'no'}" for k, v in report.mismatch.items())
    lines = [
        "deduction vs direct prediction on the diagonal triple",
        f"state: {_ket_string(report.initial_state)}, c={report.c:g}",
        "direct predictions: " + " ".join(
            f"{k}={v:g}" for k, v in report.direct.items()),
        f"collapse on C={report.direct['C']:g} leaves"
        f" {_ket_string(report.post_state)}",
        "deduced from the C outcome: " + " ".join(
            f"{k}={v:g}" for k, v in report.deduced.items()),
        f"mismatch with direct: {mismatches}",
        f"post-collapse predictions match the deduced values for all"
        f" {report.sampled_c_count} sampled scalars:"
        f" {'yes' if report.post_collapse_consistent else 'no'}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(passed)
    return report.as_dict(), passed, None, text


def _run_chsh(args):
    cfg = ExperimentConfig(seed=args.seed, trials=args.trials)
    mode = "sequential" if args.sequential else "product"
    report = chsh_experiment(cfg, mode=mode, keep_trials=args.format == "csv")
    payload = {"seed": cfg.seed, **report.as_dict()}
    target = 2.0 * math.sqrt(2.0)
    lines = [
        f"four-setting correlation statistic ({report.mode} mode)",
        f"seed={cfg.seed} trials per setting={report.trials_per_setting}",
        "correlators: " + " ".join(
            f"E[{k}]={v:+.6f}" for k, v in report.correlators.items()),
        f"S = {report.s_value:.6f}   classical bound 2   quantum value"
        f" 2*sqrt(2) = {target:.6f}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(report.exceeds_classical,
                                              "classical bound exceeded")
    return payload, report.exceeds_classical, list(report.trial_rows), text


def _run_column_product(args):
    report = column_product_experiment(index=args.index, trials=args.trials,
                                       seed=args.seed, axis=args.axis,
                                       keep_events=args.format == "csv")
    payload = {"seed": args.seed, **report.as_dict()}
    lines = [
        f"sequential product sweep on {report.axis} {report.index}",
        f"seed={args.seed} trials={report.trials}"
        f" permutations={report.permutation_count}",
        f"forced product value: {_sign(report.forced_value)}",
        f"cases: {report.cases}   passes: {report.passes}"
        f"   failures: {report.failures}",
    ]
    text = "\n".join(lines) + "\n" + _verdict(report.all_passed)
    return payload, report.all_passed, list(report.event_rows), text


_RUNNERS = {
    "table1": _run_table1,
    "born": _run_born,
    "pm-square": _run_pm_square,
    "no-go": _run_no_go,
    "weak-fc": _run_weak_fc,
    "strong-fc": _run_strong_fc,
    "implications": _run_implications,
    "chsh": _run_chsh,
    "column-product": _run_column_product,
}


def _render_csv(rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("trial", "setting", "c", "value"))
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        payload, passed, rows, text = _RUNNERS[args.command](args)
    except HvsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        if rows is None:
            print(f"error: csv output is not available for '{args.command}';"
                  " use --format json or text", file=sys.stderr)
            return 2
        body = _render_csv(rows)
    elif args.format == "json":
        body = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        body = text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(body)
    else:
        try:
            sys.stdout.write(body)
            sys.stdout.flush()
        except BrokenPipeError:
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
