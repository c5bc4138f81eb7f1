"""Functional-consistency checkers and the value-assignment no-go search.

Two notions are checked. Strong consistency evaluates everything on one
frozen hidden state: does predicting f's operator give the same number as
plugging the per-leaf predictions into f? Weak consistency measures the
leaves one after another (with collapse and a fresh hidden scalar each step)
and compares the composed value against predicting f on the initial state.
The no-go search shows why strong consistency must fail somewhere: no global
+-1 assignment to the square's nine observables respects all six row and
column product constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import DimensionMismatchError, NotAnEigenstateError
from .model import HiddenState, MeasurementTrace, measure, predict
from .expressions import ObservableExpression, PeresMerminSquare, eval_operator, eval_real

import numpy as np

VALUE_TOL = 1e-9


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of one functional-consistency comparison."""

    scenario_label: str
    lhs_value: float
    rhs_value: float
    holds: bool
    details: dict

    def as_dict(self) -> dict:
        return {
            "scenario_label": self.scenario_label,
            "lhs_value": float(self.lhs_value),
            "rhs_value": float(self.rhs_value),
            "holds": bool(self.holds),
            "details": self.details,
        }


def _leaf_label(op, position: int) -> str:
    return op.label if op.label is not None else f"leaf{position}"


def check_strong_fc(f: ObservableExpression, hidden: HiddenState,
                    scenario_label: str | None = None) -> ConsistencyReport:
    """Compare predict(f as one operator) with f(per-leaf predictions), both
    on the same hidden state. No collapse, no randomness."""
    if f.dim != hidden.state.dim:
        raise DimensionMismatchError(
            f"expression dimension {f.dim} != state dimension {hidden.state.dim}"
        )
    lhs = predict(eval_operator(f), hidden)
    leaf_values = {op: predict(op, hidden) for op in f.operators}
    rhs = eval_real(f, leaf_values)
    details = {
        "c": float(hidden.c),
        "leaf_values": {
            _leaf_label(op, i): float(leaf_values[op])
            for i, op in enumerate(f.operators)
        },
    }
    return ConsistencyReport(
        scenario_label=scenario_label or f.describe(),
        lhs_value=float(lhs),
        rhs_value=float(rhs),
        holds=abs(lhs - rhs) <= VALUE_TOL,
        details=details,
    )


def check_weak_fc(f: ObservableExpression, initial: HiddenState, permutation,
                  rng, scenario_label: str | None = None) -> ConsistencyReport:
    """Measure the distinct leaves sequentially in the given order and compare
    f(measured values) with predicting f's operator on the initial state.

    The first step consumes the initial hidden scalar; every later step runs
    on the collapsed state re-armed from `rng` (one draw per event).
    """
    ops = f.operators
    permutation = tuple(int(k) for k in permutation)
    if sorted(permutation) != list(range(len(ops))):
        raise ValueError(
            f"permutation {permutation} does not arrange {len(ops)} leaves"
        )
    lhs = predict(eval_operator(f), initial)
    hidden = initial
    records = []
    leaf_values = {}
    for position in permutation:
        op = ops[position]
        record, hidden = measure(op, hidden, rng,
                                 label=_leaf_label(op, position))
        records.append(record)
        leaf_values[op] = record.value
    rhs = eval_real(f, leaf_values)
    trace = MeasurementTrace(tuple(records), seed=None)
    details = {
        "permutation": list(permutation),
        "initial_c": float(initial.c),
        "c_values": [float(r.c_used) for r in records],
        "steps": [r.as_dict() for r in trace.records],
    }
    return ConsistencyReport(
        scenario_label=scenario_label or f.describe(),
        lhs_value=float(lhs),
        rhs_value=float(rhs),
        holds=abs(lhs - rhs) <= VALUE_TOL,
        details=details,
    )


@dataclass(frozen=True)
class PropositionSummary:
    """Aggregate result of sweeping weak consistency over trials x orders."""

    expression: str
    trials: int
    permutation_count: int
    cases: int
    passes: int
    failures: int
    failure_examples: tuple[ConsistencyReport, ...]
    case_rows: tuple = ()

    @property
    def all_passed(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "expression": self.expression,
            "trials": int(self.trials),
            "permutation_count": int(self.permutation_count),
            "cases": int(self.cases),
            "passes": int(self.passes),
            "failures": int(self.failures),
            "all_passed": self.all_passed,
            "failure_examples": [r.as_dict() for r in self.failure_examples],
        }


def verify_proposition(f: ObservableExpression, state, trials: int, rng,
                       max_failure_examples: int = 3,
                       keep_cases: bool = False) -> PropositionSummary:
    """Check weak functional consistency for an eigenstate of f's operator.

    Requires the initial state to be an eigenvector of the evaluated
    expression (that precondition is what pins the predicted value and makes
    the sequential product forced); sweeps every permutation of the leaves
    for each trial, drawing fresh hidden scalars from `rng` throughout.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    op = eval_operator(f)
    amps = state.amplitudes
    expectation = op.expectation(state)
    residual = float(np.linalg.norm(op.matrix @ amps - expectation * amps))
    if residual > 1e-9:
        raise NotAnEigenstateError(
            f"state is not an eigenvector of the expression operator"
            f" (residual {residual:.3e})"
        )
    permutations = list(itertools.permutations(range(len(f.operators))))
    passes = 0
    failures = 0
    examples: list[ConsistencyReport] = []
    rows = []
    case = 0
    for _ in range(trials):
        for permutation in permutations:
            initial = HiddenState.draw(state, rng)
            report = check_weak_fc(f, initial, permutation, rng)
            if report.holds:
                passes += 1
            else:
                failures += 1
                if len(examples) < max_failure_examples:
                    examples.append(report)
            if keep_cases:
                order = ",".join(str(k) for k in permutation)
                rows.append((case, f"perm({order})", float(initial.c),
                             float(report.rhs_value)))
            case += 1
    return PropositionSummary(
        expression=f.describe(),
        trials=trials,
        permutation_count=len(permutations),
        cases=trials * len(permutations),
        passes=passes,
        failures=failures,
        failure_examples=tuple(examples),
        case_rows=tuple(rows),
    )


@dataclass(frozen=True)
class NoGoResult:
    """Census of global +-1 assignments against the six product constraints.

    parity_even_count tallies assignments meeting all three row constraints
    (whose product targets multiply to +1, forcing an even number of -1
    entries in the grid); parity_odd_count tallies the column side (targets
    multiply to -1, forcing an odd count). A nonzero overlap would need a
    grid with both parities at once, hence satisfying_assignments == 0.
    """

    total_assignments: int
    satisfying_assignments: int
    parity_odd_count: int
    parity_even_count: int

    def as_dict(self) -> dict:
        return {
            "total_assignments": int(self.total_assignments),
            "satisfying_assignments": int(self.satisfying_assignments),
            "parity_odd_count": int(self.parity_odd_count),
            "parity_even_count": int(self.parity_even_count),
        }


def no_go_search(square: PeresMerminSquare) -> NoGoResult:
    """Enumerate all 2^9 assignments of +-1 to the square's cells.

    The row/column product targets are taken from the square itself (it
    computes them from its operator products at construction), not from
    constants here.
    """
    row_targets = square.row_values
    col_targets = square.col_values
    total = 0
    satisfying = 0
    rows_ok_count = 0
    cols_ok_count = 0
    for cells in itertools.product((1, -1), repeat=9):
        total += 1
        rows_ok = all(
            cells[3 * i] * cells[3 * i + 1] * cells[3 * i + 2] == row_targets[i]
            for i in range(3)
        )
        cols_ok = all(
            cells[j] * cells[j + 3] * cells[j + 6] == col_targets[j]
            for j in range(3)
        )
        rows_ok_count += rows_ok
        cols_ok_count += cols_ok
        satisfying += rows_ok and cols_ok
    return NoGoResult(
        total_assignments=total,
        satisfying_assignments=satisfying,
        parity_odd_count=cols_ok_count,
        parity_even_count=rows_ok_count,
    )
