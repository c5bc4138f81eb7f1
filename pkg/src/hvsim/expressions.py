"""Polynomial expressions over a mutually commuting family of observables.

An expression tree (Leaf / Sum / Product / Scale) evaluates two ways: to a
single Hermitian operator, and to a real number once each distinct leaf has
been assigned a measured value. Keeping both routes separate is what lets the
consistency checkers compare "measure f(A)" against "f(measured A's)".
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ComplexFactorError,
    DimensionMismatchError,
    MissingLeafValueError,
    NoncommutingLeavesError,
    NonHermitianError,
)
from .operators import (
    COMMUTE_TOL,
    HermitianOperator,
    commutator_norm,
    identity,
    identity_scalar,
    operators_equal,
    pauli,
    tensor,
)

EXPRESSION_HERMITICITY_TOL = 1e-10
REAL_FACTOR_TOL = 1e-12


class Leaf:
    """A single observable appearing in an expression."""

    __slots__ = ("op",)

    def __init__(self, op: HermitianOperator):
        if not isinstance(op, HermitianOperator):
            raise TypeError(f"Leaf expects a HermitianOperator, got {type(op).__name__}")
        self.op = op

    def __repr__(self) -> str:
        return f"Leaf({self.op.label or '?'})"


class Sum:
    __slots__ = ("children",)

    def __init__(self, *children):
        if not children:
            raise ValueError("Sum needs at least one child")
        self.children = tuple(_check_node(c) for c in children)


class Product:
    __slots__ = ("children",)

    def __init__(self, *children):
        if not children:
            raise ValueError("Product needs at least one child")
        self.children = tuple(_check_node(c) for c in children)


class Scale:
    __slots__ = ("factor", "child")

    def __init__(self, factor, child):
        self.factor = complex(factor)
        self.child = _check_node(child)


Node = Leaf | Sum | Product | Scale


def _check_node(node):
    if not isinstance(node, (Leaf, Sum, Product, Scale)):
        raise TypeError(f"expected an expression node, got {type(node).__name__}")
    return node


def _describe(node) -> str:
    if isinstance(node, Leaf):
        return node.op.label if node.op.label is not None else f"op[{node.op.dim}]"
    if isinstance(node, Sum):
        return "(" + " + ".join(_describe(c) for c in node.children) + ")"
    if isinstance(node, Product):
        return "(" + "*".join(_describe(c) for c in node.children) + ")"
    factor = node.factor
    shown = f"{factor.real:g}" if factor.imag == 0 else f"({factor:g})"
    return f"{shown}*{_describe(node.child)}"


class ObservableExpression:
    """A validated expression: leaves commute pairwise, result is Hermitian.

    `operators` lists the distinct leaves in first-appearance order (two leaf
    nodes count as the same observable when operators_equal says so). The
    evaluated matrix is cached, as is its wrapping HermitianOperator, so
    repeated prediction on the same expression reuses one spectral
    decomposition.
    """

    __slots__ = ("root", "operators", "dim", "_matrix", "_leaf_slots", "_operator")

    def __init__(self, root, *, commute_tol: float = COMMUTE_TOL,
                 hermiticity_tol: float = EXPRESSION_HERMITICITY_TOL):
        self.root = _check_node(root)
        distinct: list[HermitianOperator] = []
        leaf_slots: dict[int, int] = {}
        self._collect(self.root, distinct, leaf_slots)
        if not distinct:
            raise ValueError("expression contains no operator leaves")
        dims = {op.dim for op in distinct}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"expression leaves span several dimensions: {sorted(dims)}"
            )
        self.dim = dims.pop()
        for i, a in enumerate(distinct):
            for b in distinct[i + 1:]:
                norm = commutator_norm(a, b)
                if norm > commute_tol:
                    raise NoncommutingLeavesError(
                        f"leaves {a.label or i} and {b.label or '?'} fail to"
                        f" commute (commutator norm {norm:.3e})"
                    )
        matrix = _eval_matrix(self.root)
        deviation = float(np.linalg.norm(matrix - matrix.conj().T))
        if deviation > hermiticity_tol:
            raise NonHermitianError(
                f"expression evaluates to a non-Hermitian matrix"
                f" (deviation {deviation:.3e})"
            )
        matrix = (matrix + matrix.conj().T) / 2.0
        matrix.setflags(write=False)
        self.operators = tuple(distinct)
        self._matrix = matrix
        self._leaf_slots = leaf_slots
        self._operator: HermitianOperator | None = None

    def _collect(self, node, distinct, leaf_slots):
        if isinstance(node, Leaf):
            if id(node) not in leaf_slots:
                for i, seen in enumerate(distinct):
                    if operators_equal(seen, node.op):
                        leaf_slots[id(node)] = i
                        break
                else:
                    leaf_slots[id(node)] = len(distinct)
                    distinct.append(node.op)
        elif isinstance(node, (Sum, Product)):
            for child in node.children:
                self._collect(child, distinct, leaf_slots)
        else:
            self._collect(node.child, distinct, leaf_slots)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def describe(self) -> str:
        return _describe(self.root)

    @classmethod
    def of(cls, op: HermitianOperator) -> "ObservableExpression":
        return cls(Leaf(op))

    @classmethod
    def of_product(cls, *ops: HermitianOperator) -> "ObservableExpression":
        return cls(Product(*(Leaf(op) for op in ops)))

    @classmethod
    def of_sum(cls, *ops: HermitianOperator) -> "ObservableExpression":
        return cls(Sum(*(Leaf(op) for op in ops)))

    def __repr__(self) -> str:
        return f"ObservableExpression({self.describe()})"


def _eval_matrix(node) -> np.ndarray:
    if isinstance(node, Leaf):
        return node.op.matrix
    if isinstance(node, Sum):
        out = _eval_matrix(node.children[0]).copy()
        for child in node.children[1:]:
            out = out + _eval_matrix(child)
        return out
    if isinstance(node, Product):
        out = _eval_matrix(node.children[0])
        for child in node.children[1:]:
            out = out @ _eval_matrix(child)
        return out
    return node.factor * _eval_matrix(node.child)


def eval_operator(f: ObservableExpression) -> HermitianOperator:
    """The single Hermitian operator the whole expression evaluates to."""
    if f._operator is None:
        f._operator = HermitianOperator(f.matrix, label=f.describe())
    return f._operator


def _resolve_leaf_value(mapping, op: HermitianOperator):
    if op in mapping:
        return mapping[op]
    if op.label is not None and op.label in mapping:
        return mapping[op.label]
    for key, value in mapping.items():
        if isinstance(key, HermitianOperator) and operators_equal(key, op):
            return value
    raise MissingLeafValueError(
        f"no value supplied for leaf {op.label or repr(op)}"
    )


def eval_real(f: ObservableExpression, leaf_values) -> float:
    """Evaluate the expression numerically from per-leaf measured values.

    `leaf_values` maps operators (or their labels) to real numbers; equal
    leaves share one value. Scale factors must be real within 1e-12.
    """
    resolved = [
        float(_resolve_leaf_value(leaf_values, op)) for op in f.operators
    ]

    def walk(node) -> float:
        if isinstance(node, Leaf):
            return resolved[f._leaf_slots[id(node)]]
        if isinstance(node, Sum):
            return sum(walk(c) for c in node.children)
        if isinstance(node, Product):
            out = 1.0
            for c in node.children:
                out *= walk(c)
            return out
        if abs(node.factor.imag) > REAL_FACTOR_TOL:
            raise ComplexFactorError(
                f"scale factor {node.factor} is not real within {REAL_FACTOR_TOL}"
            )
        return node.factor.real * walk(node.child)

    return float(walk(f.root))


class PeresMerminSquare:
    """3x3 grid of two-qubit observables whose row and column products are
    scalar, with the column-3 product carrying the opposite sign.

    Every row triple and column triple commutes pairwise, all three row
    products equal +I, the first two column products equal +I and the third
    equals -I. These identities are re-verified at construction to 1e-12.
    """

    __slots__ = ("grid", "rows", "cols", "row_values", "col_values")

    def __init__(self, grid):
        grid = tuple(tuple(row) for row in grid)
        if len(grid) != 3 or any(len(row) != 3 for row in grid):
            raise ValueError("grid must be 3x3")
        for line in _lines(grid):
            for i, a in enumerate(line):
                for b in line[i + 1:]:
                    norm = commutator_norm(a, b)
                    if norm > COMMUTE_TOL:
                        raise NoncommutingLeavesError(
                            f"{a.label} and {b.label} in one line fail to"
                            f" commute (norm {norm:.3e})"
                        )
        rows, row_values = [], []
        for i, row in enumerate(grid):
            op, value = _line_product(row, f"R{i + 1}")
            rows.append(op)
            row_values.append(value)
        cols, col_values = [], []
        for j in range(3):
            col = tuple(grid[i][j] for i in range(3))
            op, value = _line_product(col, f"C{j + 1}")
            cols.append(op)
            col_values.append(value)
        expected = ([1, 1, 1], [1, 1, -1])
        if (row_values, col_values) != expected:
            raise ValueError(
                f"row/column products {row_values}/{col_values} do not show the"
                f" expected parity pattern {expected}"
            )
        self.grid = grid
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.row_values = tuple(row_values)
        self.col_values = tuple(col_values)

    def row_operators(self, index: int) -> tuple[HermitianOperator, ...]:
        """The three grid cells of row `index` (1-based)."""
        return self.grid[_line_index(index)]

    def column_operators(self, index: int) -> tuple[HermitianOperator, ...]:
        """The three grid cells of column `index` (1-based)."""
        j = _line_index(index)
        return tuple(self.grid[i][j] for i in range(3))

    def row_expression(self, index: int) -> ObservableExpression:
        return ObservableExpression.of_product(*self.row_operators(index))

    def column_expression(self, index: int) -> ObservableExpression:
        return ObservableExpression.of_product(*self.column_operators(index))

    def forced_value(self, axis: str, index: int) -> int:
        """The scalar the given line's product is pinned to (+1 or -1)."""
        if axis == "row":
            return self.row_values[_line_index(index)]
        if axis == "column":
            return self.col_values[_line_index(index)]
        raise ValueError(f"axis must be 'row' or 'column', got {axis!r}")


def _line_index(index: int) -> int:
    if index not in (1, 2, 3):
        raise IndexError(f"line index must be 1, 2 or 3, got {index}")
    return index - 1


def _lines(grid):
    for row in grid:
        yield row
    for j in range(3):
        yield tuple(grid[i][j] for i in range(3))


def _line_product(ops, label: str) -> tuple[HermitianOperator, int]:
    matrix = ops[0].matrix @ ops[1].matrix @ ops[2].matrix
    scalar = identity_scalar(matrix, tol=1e-12)
    value = int(round(scalar))
    if abs(scalar - value) > 1e-12 or value not in (-1, 1):
        raise ValueError(f"line product for {label} is {scalar}, expected +1 or -1")
    return HermitianOperator(matrix, label), value


def peres_mermin() -> PeresMerminSquare:
    """The standard two-qubit square built from Pauli tensor products."""
    x, y, z = pauli("x"), pauli("y"), pauli("z")
    one = identity(2)
    grid = (
        (tensor(one, x, "IX"), tensor(x, one, "XI"), tensor(x, x, "XX")),
        (tensor(y, one, "YI"), tensor(one, y, "IY"), tensor(y, y, "YY")),
        (tensor(y, x, "YX"), tensor(x, y, "XY"), tensor(z, z, "ZZ")),
    )
    return PeresMerminSquare(grid)


def implications_operators() -> tuple[HermitianOperator, HermitianOperator, HermitianOperator]:
    """Two commuting +-1-valued diagonal observables and a nondegenerate
    diagonal observable that pins both of their values at once.

    Measuring C (eigenvalues 1..4, all simple) collapses any state onto a
    shared eigenvector of B1 = diag(+1,+1,-1,-1) and B2 = diag(-1,-1,+1,+1),
    so both B values are deducible from the C outcome alone. The interesting
    question is whether the values deduced that way match what direct
    measurement would have produced; the experiments module demos that they
    need not.
    """
    b1 = HermitianOperator(np.diag([1.0, 1.0, -1.0, -1.0]), "B1")
    b2 = HermitianOperator(np.diag([-1.0, -1.0, 1.0, 1.0]), "B2")
    c = HermitianOperator(np.diag([1.0, 2.0, 3.0, 4.0]), "C")
    return b1, b2, c
