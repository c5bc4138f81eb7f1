"""Unit tests for the operator algebra layer."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvsim.errors import DimensionMismatchError, EigensolverError, NonHermitianError
from hvsim.operators import (
    ComplexVector,
    HermitianOperator,
    PureState,
    SpectralDecomposition,
    amplitude_pairs,
    basis_ket,
    commutator_norm,
    commutes,
    commuting_family,
    haar_state,
    identity,
    identity_scalar,
    normalized,
    operators_equal,
    pairs_to_amplitudes,
    pauli,
    phase_distance,
    random_hermitian,
    random_unitary,
    same_up_to_phase,
    spectral,
    tensor,
)

# Frozen single-qubit matrices; the oracle the pauli() constructor is held to.
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MATRIX = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Quadruple-loop Kronecker product, independent of np.kron."""
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(m):
                for l in range(m):
                    out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


class TestStates:
    def test_complex_vector_basics(self):
        v = ComplexVector([1, 1j])
        assert v.dim == 2
        assert v.amplitudes.dtype == complex
        with pytest.raises(ValueError):
            v.amplitudes[0] = 0.0

    def test_complex_vector_rejects_empty_and_matrix(self):
        with pytest.raises(ValueError):
            ComplexVector([])
        with pytest.raises(ValueError):
            ComplexVector([[1, 0], [0, 1]])

    def test_pure_state_requires_unit_norm(self):
        PureState([1.0, 0.0])
        with pytest.raises(ValueError):
            PureState([1.0, 1.0])
        with pytest.raises(ValueError):
            PureState([0.5, 0.5])

    def test_normalized_scales(self):
        state = normalized([3.0, 4.0])
        np.testing.assert_allclose(state.amplitudes, [0.6, 0.8])
        with pytest.raises(ValueError):
            normalized([0.0, 0.0])

    def test_basis_ket(self):
        state = basis_ket(4, 1)
        np.testing.assert_array_equal(state.amplitudes, [0, 1, 0, 0])
        with pytest.raises(IndexError):
            basis_ket(4, 4)
        with pytest.raises(IndexError):
            basis_ket(4, -1)
        with pytest.raises(ValueError):
            basis_ket(0, 0)


class TestHermitianOperator:
    def test_valid_construction(self):
        op = HermitianOperator([[0, 1j], [-1j, 2]], "A")
        assert op.dim == 2
        assert op.label == "A"
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 5.0

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            HermitianOperator([[0, 1], [2, 0]])

    def test_rejects_non_square_and_nonfinite(self):
        with pytest.raises(ValueError):
            HermitianOperator([[1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValueError):
            HermitianOperator([[np.nan, 0], [0, 1]])

    def test_relabel_keeps_matrix(self):
        op = pauli("x")
        renamed = op.relabel("first")
        assert renamed.label == "first"
        np.testing.assert_array_equal(renamed.matrix, op.matrix)

    def test_expectation(self):
        assert pauli("z").expectation(basis_ket(2, 0)) == pytest.approx(1.0)
        assert pauli("z").expectation(basis_ket(2, 1)) == pytest.approx(-1.0)

    def test_spectrum_is_cached(self):
        op = pauli("z")
        assert op.spectrum() is op.spectrum()


class TestPauliAndTensor:
    def test_pauli_matrices_match_oracle(self):
        np.testing.assert_array_equal(pauli("x").matrix, X_MATRIX)
        np.testing.assert_array_equal(pauli("y").matrix, Y_MATRIX)
        np.testing.assert_array_equal(pauli("z").matrix, Z_MATRIX)
        assert pauli("X").label == "X"
        with pytest.raises(ValueError):
            pauli("w")

    def test_pauli_algebra(self):
        for axis in "xyz":
            op = pauli(axis)
            np.testing.assert_allclose(op.matrix @ op.matrix, np.eye(2), atol=1e-15)
            assert abs(np.trace(op.matrix)) < 1e-15

    def test_identity(self):
        op = identity(3)
        np.testing.assert_array_equal(op.matrix, np.eye(3))
        assert op.label == "I"

    def test_tensor_matches_oracle_on_paulis(self):
        for a in "xyz":
            for b in "xyz":
                got = tensor(pauli(a), pauli(b)).matrix
                want = kron_oracle(_PAULIS[a], _PAULIS[b])
                np.testing.assert_array_equal(got, want)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 10_000))
    def test_tensor_matches_oracle_on_random(self, seed):
        rng = np.random.default_rng(seed)
        a = random_hermitian(int(rng.integers(2, 4)), rng)
        b = random_hermitian(int(rng.integers(2, 4)), rng)
        np.testing.assert_allclose(
            tensor(a, b).matrix, kron_oracle(a.matrix, b.matrix), atol=1e-12
        )

    def test_tensor_flips_bell_state_sign(self):
        # YY acting on (|00> + |11>)/sqrt2 gives the opposite state: the
        # frozen matrix makes the sign arithmetic visible.
        yy_oracle = np.array(
            [
                [0, 0, 0, -1],
                [0, 0, 1, 0],
                [0, 1, 0, 0],
                [-1, 0, 0, 0],
            ],
            dtype=complex,
        )
        yy = tensor(pauli("y"), pauli("y"))
        np.testing.assert_array_equal(yy.matrix, yy_oracle)
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        np.testing.assert_allclose(yy.matrix @ bell, -bell, atol=1e-15)

    def test_tensor_basis_ordering(self):
        # First factor owns the slow index: |0>(x)|1> sits at position 1.
        ket01 = np.kron(basis_ket(2, 0).amplitudes, basis_ket(2, 1).amplitudes)
        np.testing.assert_array_equal(ket01, basis_ket(4, 1).amplitudes)


_PAULIS = {"x": X_MATRIX, "y": Y_MATRIX, "z": Z_MATRIX}


class TestCommutation:
    def test_pauli_pairs_do_not_commute(self):
        # [X, Z] = -2iY, whose Frobenius norm is 2*sqrt(2).
        assert not commutes(pauli("x"), pauli("z"))
        assert commutator_norm(pauli("x"), pauli("z")) == pytest.approx(
            2.0 * np.sqrt(2.0)
        )

    def test_commuting_tensor_pairs(self):
        ix = tensor(identity(2), pauli("x"))
        xi = tensor(pauli("x"), identity(2))
        assert commutes(ix, xi)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            commutes(pauli("x"), identity(4))

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 10_000))
    def test_symmetric_and_reflexive(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 6))
        a = random_hermitian(dim, rng)
        b = random_hermitian(dim, rng)
        assert commutes(a, a)
        assert commutes(a, b) == commutes(b, a)


class TestOperatorsEqual:
    def test_label_equality_wins(self):
        a = HermitianOperator(np.eye(2), "same")
        b = HermitianOperator(np.diag([1.0, -1.0]), "same")
        assert operators_equal(a, b)
        assert not operators_equal(a, HermitianOperator(np.eye(2), "other"))

    def test_matrix_fallback_when_unlabeled(self):
        a = HermitianOperator(np.eye(2))
        b = HermitianOperator(np.eye(2) + 1e-12)
        c = HermitianOperator(np.diag([1.0, -1.0]))
        assert operators_equal(a, b)
        assert not operators_equal(a, c)
        assert not operators_equal(a, HermitianOperator(np.eye(3)))


class TestSpectral:
    def test_nondegenerate_diagonal(self):
        decomp = spectral(HermitianOperator(np.diag([3.0, 1.0, 2.0])))
        np.testing.assert_array_equal(decomp.values, [1.0, 2.0, 3.0])
        for value, index in ((1.0, 1), (2.0, 2), (3.0, 0)):
            branch = decomp.branches[decomp.branch_index(value)]
            want = np.zeros((3, 3))
            want[index, index] = 1.0
            np.testing.assert_allclose(branch.projector.matrix, want, atol=1e-12)

    def test_degenerate_tensor_projectors_match_oracle(self):
        # I(x)X has eigenvalues -1, +1, both rank 2. The projectors are
        # I (x) (I -+ X)/2; frozen here as literal matrices.
        p_minus = kron_oracle(np.eye(2, dtype=complex),
                              (np.eye(2) - X_MATRIX) / 2)
        p_plus = kron_oracle(np.eye(2, dtype=complex),
                             (np.eye(2) + X_MATRIX) / 2)
        decomp = spectral(tensor(identity(2), pauli("x")))
        np.testing.assert_array_equal(decomp.values, [-1.0, 1.0])
        np.testing.assert_allclose(decomp.branches[0].projector.matrix, p_minus,
                                   atol=1e-12)
        np.testing.assert_allclose(decomp.branches[1].projector.matrix, p_plus,
                                   atol=1e-12)

    def test_near_degenerate_grouping(self):
        gap = 1e-12
        decomp = spectral(HermitianOperator(np.diag([0.0, gap, 1.0])))
        np.testing.assert_allclose(decomp.values, [gap / 2, 1.0])
        assert np.trace(decomp.branches[0].projector.matrix).real == pytest.approx(2.0)

    def test_custom_tolerance_splits_finer(self):
        op = HermitianOperator(np.diag([0.0, 1e-12, 1.0]))
        decomp = spectral(op, degeneracy_tol=1e-15)
        assert len(decomp.branches) == 3

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 10_000), st.integers(2, 16))
    def test_reconstruction(self, seed, dim):
        rng = np.random.default_rng(seed)
        op = random_hermitian(dim, rng)
        decomp = spectral(op)
        np.testing.assert_allclose(decomp.reconstruct(), op.matrix, atol=1e-9)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 10_000))
    def test_projector_invariant_under_eigenbasis_rotation(self, seed):
        # Rotating the orthonormal basis inside a degenerate eigenspace must
        # leave the branch projector unchanged.
        rng = np.random.default_rng(seed)
        basis = random_unitary(4, rng)
        m = basis @ np.diag([1.0, 1.0, 1.0, 2.0]) @ basis.conj().T
        op = HermitianOperator((m + m.conj().T) / 2)
        branch = spectral(op).branches[0]
        assert np.trace(branch.projector.matrix).real == pytest.approx(3.0)
        vals, vecs = np.linalg.eigh(branch.projector.matrix)
        block = vecs[:, vals > 0.5]
        rotation = random_unitary(block.shape[1], rng)
        rotated = block @ rotation
        rebuilt = rotated @ rotated.conj().T
        assert np.linalg.norm(branch.projector.matrix - rebuilt) <= 1e-9

    def test_weights_on_plus_state(self):
        plus = normalized([1.0, 1.0])
        weights = spectral(pauli("z")).weights(plus)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-12)

    def test_weights_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            spectral(pauli("z")).weights(basis_ket(4, 0))

    def test_eigensolver_failure_is_wrapped(self, monkeypatch):
        def boom(_):
            raise np.linalg.LinAlgError("did not converge")

        monkeypatch.setattr(np.linalg, "eigh", boom)
        with pytest.raises(EigensolverError):
            spectral(pauli("z"))

    def test_manual_decomposition_validation(self):
        p0 = HermitianOperator(np.diag([1.0, 0.0]))
        p1 = HermitianOperator(np.diag([0.0, 1.0]))
        decomp = SpectralDecomposition(
            [(-1.0, p1), (1.0, p0)], degeneracy_tol=1e-9
        )
        assert decomp.dim == 2
        with pytest.raises(ValueError):
            SpectralDecomposition([(1.0, p0)], degeneracy_tol=1e-9)
        with pytest.raises(ValueError):
            SpectralDecomposition([(1.0, p0), (1.0 + 1e-12, p1)], degeneracy_tol=1e-9)
        overlapping = HermitianOperator(np.full((2, 2), 0.5))
        with pytest.raises(ValueError):
            SpectralDecomposition(
                [(0.0, overlapping), (1.0, p0)], degeneracy_tol=1e-9
            )


class TestScalarAndPhase:
    def test_identity_scalar(self):
        assert identity_scalar(2.5 * np.eye(3)) == pytest.approx(2.5)
        with pytest.raises(ValueError):
            identity_scalar(np.diag([1.0, 2.0]))

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 10_000), st.floats(0.0, 2 * np.pi))
    def test_phase_distance_ignores_global_phase(self, seed, angle):
        rng = np.random.default_rng(seed)
        state = haar_state(4, rng)
        rotated = PureState(np.exp(1j * angle) * state.amplitudes)
        assert phase_distance(state, rotated) <= 1e-7
        assert same_up_to_phase(state, rotated, tol=1e-7)

    def test_phase_distance_separates_orthogonal(self):
        assert phase_distance(basis_ket(2, 0), basis_ket(2, 1)) == pytest.approx(
            np.sqrt(2.0)
        )


class TestRandomEnsembles:
    @settings(deadline=None, max_examples=20)
    @given(st.integers(0, 10_000))
    def test_random_unitary_is_unitary(self, seed):
        rng = np.random.default_rng(seed)
        u = random_unitary(5, rng)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(5), atol=1e-10)

    @settings(deadline=None, max_examples=20)
    @given(st.integers(0, 10_000))
    def test_haar_state_normalized(self, seed):
        rng = np.random.default_rng(seed)
        state = haar_state(6, rng)
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0)

    @settings(deadline=None, max_examples=20)
    @given(st.integers(0, 10_000))
    def test_commuting_family_commutes(self, seed):
        rng = np.random.default_rng(seed)
        ops = commuting_family([[1, 2, 3], [-1, 0, 1], [5, 5, 2]], rng)
        assert len(ops) == 3
        for i, a in enumerate(ops):
            for b in ops[i + 1:]:
                assert commutator_norm(a, b) <= 1e-10


def test_amplitude_pairs_round_trip():
    amps = np.array([0.5 + 0.5j, -0.5, 0.0, 0.5j])
    pairs = amplitude_pairs(amps)
    assert pairs[0] == [0.5, 0.5]
    np.testing.assert_array_equal(pairs_to_amplitudes(pairs), amps)
