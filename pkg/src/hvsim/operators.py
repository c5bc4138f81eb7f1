"""Dense complex linear algebra for finite-dimensional observables.

States are unit vectors in C^d, observables are Hermitian matrices, and a
spectral decomposition groups near-degenerate eigenvalues into branches
carrying orthogonal projectors. Everything here is plain numpy; objects are
treated as immutable after construction (arrays are marked read-only).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, EigensolverError, NonHermitianError

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12
COMMUTE_TOL = 1e-10
EQUALITY_TOL = 1e-10
PROJECTOR_TOL = 1e-10


def _as_complex_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("amplitudes must form a nonempty 1-d sequence")
    arr.setflags(write=False)
    return arr


class ComplexVector:
    """Ordered complex amplitudes, the raw coordinates behind a ket."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        self.amplitudes = _as_complex_vector(amplitudes)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"ComplexVector(dim={self.dim})"


class PureState:
    """Unit-norm state vector. Construction rejects unnormalized input."""

    __slots__ = ("vector",)

    def __init__(self, vector):
        if not isinstance(vector, ComplexVector):
            vector = ComplexVector(vector)
        norm = vector.norm()
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(
                f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}"
            )
        self.vector = vector

    @property
    def amplitudes(self) -> np.ndarray:
        return self.vector.amplitudes

    @property
    def dim(self) -> int:
        return self.vector.dim

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim})"


def normalized(amplitudes) -> PureState:
    """Scale a nonzero amplitude sequence to unit norm and wrap it."""
    arr = np.array(amplitudes, dtype=complex)
    norm = np.linalg.norm(arr)
    if norm < 1e-12:
        raise ValueError("cannot normalize a (numerically) zero vector")
    return PureState(arr / norm)


def basis_ket(dim: int, index: int) -> PureState:
    """Computational basis state |index> in C^dim."""
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return PureState(amps)


class HermitianOperator:
    """Square Hermitian matrix with an optional display label.

    Hermiticity is enforced entrywise at construction (tolerance 1e-12).
    The default-tolerance spectral decomposition is computed lazily and
    cached, since prediction repeatedly needs the same branches.
    """

    __slots__ = ("matrix", "label", "_spectrum")

    def __init__(self, matrix, label: str | None = None):
        arr = np.array(matrix, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"operator matrix must be square, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("operator matrix contains non-finite entries")
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        if deviation > HERMITICITY_TOL:
            raise NonHermitianError(
                f"matrix deviates from Hermiticity by {deviation:.3e}"
                f" (tolerance {HERMITICITY_TOL})"
            )
        arr.setflags(write=False)
        self.matrix = arr
        self.label = label
        self._spectrum = None

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def relabel(self, label: str | None) -> "HermitianOperator":
        return HermitianOperator(self.matrix, label)

    def expectation(self, state) -> float:
        amps = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        return float(np.real(np.vdot(amps, self.matrix @ amps)))

    def spectrum(self, degeneracy_tol: float | None = None) -> "SpectralDecomposition":
        """Spectral decomposition; the default-tolerance result is cached."""
        if degeneracy_tol is not None:
            return spectral(self, degeneracy_tol)
        if self._spectrum is None:
            self._spectrum = spectral(self)
        return self._spectrum

    def __repr__(self) -> str:
        name = self.label if self.label is not None else "?"
        return f"HermitianOperator({name}, dim={self.dim})"


def operators_equal(a: HermitianOperator, b: HermitianOperator,
                    tol: float = EQUALITY_TOL) -> bool:
    """Label equality when both carry labels, else Frobenius distance <= tol."""
    if a.label is not None and b.label is not None:
        return a.label == b.label
    if a.dim != b.dim:
        return False
    return float(np.linalg.norm(a.matrix - b.matrix)) <= tol


_PAULI_MATRICES = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> HermitianOperator:
    """Single-qubit Pauli operator for axis 'x', 'y' or 'z'."""
    key = axis.lower()
    if key not in _PAULI_MATRICES:
        raise ValueError(f"unknown Pauli axis {axis!r}, expected one of x, y, z")
    return HermitianOperator(_PAULI_MATRICES[key], key.upper())


def identity(dim: int) -> HermitianOperator:
    return HermitianOperator(np.eye(dim, dtype=complex), "I")


def tensor(a: HermitianOperator, b: HermitianOperator,
           label: str | None = None) -> HermitianOperator:
    """Kronecker product a (x) b; the first factor owns the slower index."""
    return HermitianOperator(np.kron(a.matrix, b.matrix), label)


def commutator_norm(a: HermitianOperator, b: HermitianOperator) -> float:
    """Frobenius norm of a@b - b@a."""
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"cannot form a commutator across dimensions {a.dim} and {b.dim}"
        )
    return float(np.linalg.norm(a.matrix @ b.matrix - b.matrix @ a.matrix))


def commutes(a: HermitianOperator, b: HermitianOperator,
             tol: float = COMMUTE_TOL) -> bool:
    return commutator_norm(a, b) <= tol


class Branch(NamedTuple):
    """One spectral branch: a distinct eigenvalue and its eigenprojector."""

    eigenvalue: float
    projector: HermitianOperator


class SpectralDecomposition:
    """Ascending distinct eigenvalues with orthogonal projectors summing to I.

    Construction re-checks the resolution-of-identity invariants (projector
    sum, pairwise orthogonality, idempotence, value separation) so that a
    hand-built decomposition gets the same guarantees as a computed one.
    """

    __slots__ = ("branches", "degeneracy_tol", "label", "_values")

    def __init__(self, branches, degeneracy_tol: float, label: str | None = None):
        branches = tuple(
            b if isinstance(b, Branch) else Branch(*b) for b in branches
        )
        if not branches:
            raise ValueError("decomposition needs at least one branch")
        dim = branches[0].projector.dim
        values = np.array([float(b.eigenvalue) for b in branches])
        if np.any(np.diff(values) <= degeneracy_tol):
            raise ValueError(
                "branch eigenvalues must be strictly ascending with gaps above"
                f" the degeneracy tolerance {degeneracy_tol:.3e}"
            )
        for b in branches:
            if b.projector.dim != dim:
                raise DimensionMismatchError("branch projectors differ in dimension")
        total = np.zeros((dim, dim), dtype=complex)
        for i, bi in enumerate(branches):
            pi = bi.projector.matrix
            total += pi
            for j in range(i, len(branches)):
                pj = branches[j].projector.matrix
                target = pi if i == j else 0.0
                if float(np.linalg.norm(pi @ pj - target)) > PROJECTOR_TOL:
                    raise ValueError(
                        f"projectors for branches {i} and {j} are not"
                        " orthogonal idempotents"
                    )
        if float(np.linalg.norm(total - np.eye(dim))) > PROJECTOR_TOL:
            raise ValueError("branch projectors do not sum to the identity")
        values.setflags(write=False)
        self.branches = branches
        self.degeneracy_tol = float(degeneracy_tol)
        self.label = label
        self._values = values

    @property
    def dim(self) -> int:
        return self.branches[0].projector.dim

    @property
    def values(self) -> np.ndarray:
        """Distinct eigenvalues, ascending."""
        return self._values

    def weights(self, state) -> np.ndarray:
        """Born weights ||P_a psi||^2 for each branch, clipped at zero."""
        amps = state.amplitudes if isinstance(state, PureState) else np.asarray(
            state, dtype=complex)
        if amps.shape != (self.dim,):
            raise DimensionMismatchError(
                f"state of shape {amps.shape} does not match dimension {self.dim}"
            )
        w = np.empty(len(self.branches))
        for i, branch in enumerate(self.branches):
            w[i] = np.real(np.vdot(amps, branch.projector.matrix @ amps))
        return np.clip(w, 0.0, None)

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue * projector; equals the source matrix."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for branch in self.branches:
            out += branch.eigenvalue * branch.projector.matrix
        return out

    def branch_index(self, value: float, tol: float | None = None) -> int | None:
        """Index of the branch whose eigenvalue matches, or None."""
        if tol is None:
            tol = max(self.degeneracy_tol, 1e-9)
        gaps = np.abs(self._values - float(value))
        i = int(np.argmin(gaps))
        return i if gaps[i] <= tol else None

    def __repr__(self) -> str:
        vals = ", ".join(f"{v:g}" for v in self._values)
        return f"SpectralDecomposition([{vals}], dim={self.dim})"


def spectral(a: HermitianOperator,
             degeneracy_tol: float | None = None) -> SpectralDecomposition:
    """Eigendecompose with near-degenerate eigenvalues merged into one branch.

    The default tolerance scales with the operator: 1e-9 * max(1, ||a||_F).
    Consecutive gaps at or below the tolerance are chained into one group, and
    each branch takes the group's mean eigenvalue and basis-independent
    projector V V^dagger.
    """
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * max(1.0, float(np.linalg.norm(a.matrix)))
    try:
        eigenvalues, vectors = np.linalg.eigh(a.matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed for {a!r}") from exc
    split_points = np.nonzero(np.diff(eigenvalues) > degeneracy_tol)[0] + 1
    branches = []
    for group in np.split(np.arange(a.dim), split_points):
        block = vectors[:, group]
        projector = block @ block.conj().T
        projector = (projector + projector.conj().T) / 2.0
        branches.append(
            Branch(float(np.mean(eigenvalues[group])), HermitianOperator(projector))
        )
    return SpectralDecomposition(branches, degeneracy_tol, label=a.label)


def identity_scalar(matrix, tol: float = 1e-12) -> float:
    """The s with matrix == s*I, or ValueError if no such scalar exists."""
    arr = np.asarray(matrix, dtype=complex)
    dim = arr.shape[0]
    s = complex(np.trace(arr)) / dim
    if float(np.linalg.norm(arr - s * np.eye(dim))) > tol:
        raise ValueError("matrix is not a scalar multiple of the identity")
    if abs(s.imag) > tol:
        raise ValueError("identity coefficient has a nonzero imaginary part")
    return float(s.real)


def phase_distance(a, b) -> float:
    """Distance between unit vectors after optimal global-phase alignment.

    Computed as ||x - (o/|o|) y|| with o the overlap <y|x>, which aligns the
    phases and subtracts directly; the analytically equal sqrt(2 - 2|o|) form
    cannot resolve distances below sqrt(machine epsilon).
    """
    x = a.amplitudes if isinstance(a, PureState) else np.asarray(a, dtype=complex)
    y = b.amplitudes if isinstance(b, PureState) else np.asarray(b, dtype=complex)
    if x.shape != y.shape:
        raise DimensionMismatchError("states differ in dimension")
    overlap = np.vdot(y, x)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.linalg.norm(x - phase * y))


def same_up_to_phase(a, b, tol: float = 1e-9) -> bool:
    return phase_distance(a, b) <= tol


def haar_state(dim: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return normalized(z)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase-of-R correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator,
                     scale: float = 1.0, label: str | None = None) -> HermitianOperator:
    """GUE-style random Hermitian matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(scale * (g + g.conj().T) / 2.0, label)


def commuting_family(spectra, rng: np.random.Generator) -> list[HermitianOperator]:
    """Hermitian operators sharing one Haar-random eigenbasis.

    Each row of `spectra` lists the eigenvalues (in that shared basis) of one
    returned operator, so the family is mutually commuting by construction.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    dim = spectra.shape[1]
    basis = random_unitary(dim, rng)
    ops = []
    for row in spectra:
        m = basis @ np.diag(row) @ basis.conj().T
        ops.append(HermitianOperator((m + m.conj().T) / 2.0))
    return ops


def amplitude_pairs(amplitudes) -> list[list[float]]:
    """[[re, im], ...] encoding used by the JSON serializers."""
    arr = np.asarray(amplitudes, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in arr]


def pairs_to_amplitudes(pairs) -> np.ndarray:
    """Inverse of amplitude_pairs."""
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)
