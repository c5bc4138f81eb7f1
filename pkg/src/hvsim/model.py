"""Hidden-state dynamics: uniform scalar draw, threshold prediction, collapse.

The model pairs a pure state with one scalar c drawn uniformly from the open
interval (0, 1). Measuring an observable deterministically returns the
smallest eigenvalue a whose cumulative Born weight reaches c,

    value = min { a : c <= sum_{a' <= a} ||P_a' psi||^2 },

then collapses the state onto that branch and re-arms the hidden scalar with a
fresh draw. Averaged over c this reproduces Born statistics exactly; for a
fixed c the outcome is a deterministic function of (psi, c).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchNotFoundError,
    DimensionMismatchError,
    MalformedDecompositionError,
    ZeroProbabilityBranchError,
)
from .operators import (
    HermitianOperator,
    PureState,
    SpectralDecomposition,
    amplitude_pairs,
)

MIN_BRANCH_WEIGHT = 1e-12
COVERAGE_TOL = 1e-8
CHAIN_TOL = 1e-10


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent child generator for the root seed and an index path."""
    parts = (seed, *path)
    for part in parts:
        if int(part) != part or int(part) < 0:
            raise ValueError(f"seed path entries must be nonnegative integers, got {part!r}")
    return np.random.default_rng(tuple(int(p) for p in parts))


def draw_hidden(rng) -> float:
    """One uniform scalar from the open interval (0, 1).

    Accepts anything exposing .random(); numpy generators return values in
    [0, 1), so an exact 0.0 is redrawn to keep zero-weight branches
    unreachable.
    """
    while True:
        u = float(rng.random())
        if 0.0 < u < 1.0:
            return u


def draw_hidden_batch(rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized draw_hidden: `count` scalars, all strictly inside (0, 1)."""
    u = rng.random(count)
    bad = u <= 0.0
    while bad.any():
        u[bad] = rng.random(int(bad.sum()))
        bad = u <= 0.0
    return u


class ScriptedUniforms:
    """Drop-in .random() source replaying a fixed scalar sequence.

    Lets a measurement chain be driven by hand-picked c values (worked
    examples, regression fixtures) through the same code path as a live RNG.
    """

    def __init__(self, values):
        values = [float(v) for v in values]
        for v in values:
            if not 0.0 < v < 1.0:
                raise ValueError(f"scripted values must lie in (0, 1), got {v}")
        self._values = values
        self._next = 0

    def random(self) -> float:
        if self._next >= len(self._values):
            raise RuntimeError("scripted uniform sequence exhausted")
        v = self._values[self._next]
        self._next += 1
        return v

    @property
    def remaining(self) -> int:
        return len(self._values) - self._next


class HiddenState:
    """A pure state plus the scalar that fixes the next measurement outcome."""

    __slots__ = ("state", "c")

    def __init__(self, state, c: float):
        if not isinstance(state, PureState):
            state = PureState(state)
        c = float(c)
        if not 0.0 < c < 1.0:
            raise ValueError(f"hidden scalar must lie strictly inside (0, 1), got {c}")
        self.state = state
        self.c = c

    @classmethod
    def draw(cls, state, rng) -> "HiddenState":
        """Arm a state with a freshly drawn scalar."""
        return cls(state, draw_hidden(rng))

    def __repr__(self) -> str:
        return f"HiddenState(dim={self.state.dim}, c={self.c:.6g})"


@dataclass(frozen=True)
class MeasurementRecord:
    """One measurement event: which observable, under which scalar, and the
    pre/post states around the collapse."""

    observable_label: str
    c_used: float
    value: float
    pre_state: PureState
    post_state: PureState

    def as_dict(self) -> dict:
        return {
            "label": self.observable_label,
            "c": float(self.c_used),
            "value": float(self.value),
            "pre_state": amplitude_pairs(self.pre_state.amplitudes),
            "post_state": amplitude_pairs(self.post_state.amplitudes),
        }


@dataclass(frozen=True)
class MeasurementTrace:
    """An ordered chain of measurement records.

    When `chained` is set (the default) each record's pre-state must equal the
    previous record's post-state entrywise within 1e-10; a trace assembled
    from a genuine sequential run satisfies this by construction.
    """

    records: tuple[MeasurementRecord, ...]
    seed: int | None = None
    chained: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.chained:
            for prev, cur in zip(self.records, self.records[1:]):
                gap = float(np.max(np.abs(
                    cur.pre_state.amplitudes - prev.post_state.amplitudes)))
                if gap > CHAIN_TOL:
                    raise ValueError(
                        f"trace is not chained: a pre-state deviates from the"
                        f" preceding post-state by {gap:.3e}"
                    )

    def __len__(self) -> int:
        return len(self.records)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "records": [r.as_dict() for r in self.records],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def as_decomposition(obs) -> SpectralDecomposition:
    """Coerce an observable argument to its spectral decomposition."""
    if isinstance(obs, SpectralDecomposition):
        return obs
    if isinstance(obs, HermitianOperator):
        return obs.spectrum()
    raise TypeError(
        f"expected HermitianOperator or SpectralDecomposition, got {type(obs).__name__}"
    )


def _cumulative_weights(decomp: SpectralDecomposition, amplitudes) -> np.ndarray:
    w = decomp.weights(amplitudes)
    w = np.where(w < MIN_BRANCH_WEIGHT, 0.0, w)
    cum = np.cumsum(w)
    if cum[-1] < 1.0 - COVERAGE_TOL:
        raise MalformedDecompositionError(
            f"branch weights cover only {cum[-1]:.12f} of the state"
        )
    return cum


def predict(obs, hidden: HiddenState) -> float:
    """Deterministic outcome for measuring `obs` on a hidden state.

    Returns the smallest branch eigenvalue whose cumulative weight reaches
    the hidden scalar. No collapse happens here; predict is a pure function
    of (observable, state, c).
    """
    decomp = as_decomposition(obs)
    if decomp.dim != hidden.state.dim:
        raise DimensionMismatchError(
            f"observable dimension {decomp.dim} != state dimension {hidden.state.dim}"
        )
    cum = _cumulative_weights(decomp, hidden.state.amplitudes)
    index = int(np.searchsorted(cum, hidden.c, side="left"))
    if index >= len(cum):
        index = len(cum) - 1
    return float(decomp.values[index])


def branch_indices(obs, state, cs) -> np.ndarray:
    """Branch index chosen by each hidden scalar in `cs`, vectorized.

    Elementwise this is the same selection rule as predict(); the statistics
    experiments use the index form directly for outcome counting.
    """
    decomp = as_decomposition(obs)
    if not isinstance(state, PureState):
        state = PureState(state)
    if decomp.dim != state.dim:
        raise DimensionMismatchError(
            f"observable dimension {decomp.dim} != state dimension {state.dim}"
        )
    cs = np.asarray(cs, dtype=float)
    if cs.size and not ((cs > 0.0) & (cs < 1.0)).all():
        raise ValueError("all hidden scalars must lie strictly inside (0, 1)")
    cum = _cumulative_weights(decomp, state.amplitudes)
    indices = np.searchsorted(cum, cs, side="left")
    return np.minimum(indices, len(cum) - 1)


def predict_batch(obs, state, cs) -> np.ndarray:
    """predict() over many hidden scalars sharing one state, vectorized."""
    decomp = as_decomposition(obs)
    return decomp.values[branch_indices(decomp, state, cs)]


def update(obs, hidden: HiddenState, value: float) -> PureState:
    """Projective collapse of the hidden state onto the branch for `value`.

    The branch is matched by eigenvalue within the decomposition tolerance;
    collapsing onto a branch the state has no weight on is an error rather
    than a silent NaN.
    """
    decomp = as_decomposition(obs)
    if decomp.dim != hidden.state.dim:
        raise DimensionMismatchError(
            f"observable dimension {decomp.dim} != state dimension {hidden.state.dim}"
        )
    index = decomp.branch_index(value)
    if index is None:
        raise BranchNotFoundError(
            f"no eigenvalue branch matches value {value!r}"
            f" among {list(decomp.values)}"
        )
    projected = decomp.branches[index].projector.matrix @ hidden.state.amplitudes
    weight = float(np.real(np.vdot(projected, projected)))
    if weight <= MIN_BRANCH_WEIGHT:
        raise ZeroProbabilityBranchError(
            f"state carries no weight on the branch with eigenvalue {value!r}"
        )
    return PureState(projected / np.sqrt(weight))


def measure(obs, hidden: HiddenState, rng,
            label: str | None = None) -> tuple[MeasurementRecord, HiddenState]:
    """One measurement event: predict, collapse, re-arm.

    The stored scalar hidden.c decides this event's value; the returned
    HiddenState carries the collapsed state armed with a fresh draw from
    `rng`, so chained calls consume exactly one draw per event.
    """
    decomp = as_decomposition(obs)
    value = predict(decomp, hidden)
    post = update(decomp, hidden, value)
    if label is None:
        label = decomp.label if decomp.label is not None else f"hermitian[{decomp.dim}]"
    record = MeasurementRecord(label, hidden.c, value, hidden.state, post)
    return record, HiddenState(post, draw_hidden(rng))
