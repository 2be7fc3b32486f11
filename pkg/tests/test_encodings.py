import numpy as np
import pytest

from qsalab.encodings import (
    amplitude_encode,
    basis_encode,
    entangled_prefix_encoding,
    prepare_input_superposition,
    unitary_with_first_column,
)
from qsalab.errors import ConfigurationError, DegenerateInputError
from qsalab.statevector import RegisterLayout, inner_product


def encode_all(vectors, n):
    return [amplitude_encode(v, n) for v in vectors]


class TestAmplitudeEncode:
    def test_basis_vector(self):
        tok = amplitude_encode([1, 0, 0, 0], 2)
        assert np.allclose(tok.state.amplitudes, [1, 0, 0, 0])
        assert tok.norm == 1.0

    def test_forced_normalization(self):
        tok = amplitude_encode([3.0, 4.0], 1)
        assert np.allclose(tok.state.amplitudes, [0.6, 0.8])
        assert tok.norm == 5.0

    def test_complex_normalization(self):
        tok = amplitude_encode([1.0, 1j], 1)
        assert np.allclose(tok.state.amplitudes, [2 ** -0.5, 1j * 2 ** -0.5])

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            amplitude_encode([0.0, 0.0], 1)

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ConfigurationError):
            amplitude_encode([1.0, 0.0, 0.0], 1)


class TestUnitaryCompletion:
    @pytest.mark.parametrize("dim", [2, 4, 8])
    def test_first_column_and_unitarity(self, dim):
        rng = np.random.default_rng(dim)
        col = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        col /= np.linalg.norm(col)
        u = unitary_with_first_column(col)
        assert np.max(np.abs(u[:, 0] - col)) < 1e-12
        assert np.max(np.abs(u @ u.conj().T - np.eye(dim))) < 1e-12

    def test_basis_first_column(self):
        u = unitary_with_first_column([0.0, 1.0])
        assert np.allclose(u, [[0, 1], [1, 0]])


class TestEntangledPrefixEncoding:
    def test_single_term(self):
        tokens = encode_all([[1, 0]], 1)
        state, weight = entangled_prefix_encoding(tokens, 1)
        assert np.allclose(state.amplitudes, [1, 0, 0, 0])
        assert abs(weight - 1.0) < 1e-12

    def test_orthogonal_tokens_make_bell_pair(self):
        tokens = encode_all([[1, 0], [0, 1]], 1)
        state, weight = entangled_prefix_encoding(tokens, 2)
        expected = np.zeros(4)
        expected[0] = expected[3] = 2 ** -0.5
        assert np.max(np.abs(state.amplitudes - expected)) < 1e-12
        assert abs(weight - 2.0) < 1e-12

    def test_matches_explicit_vector_sum(self):
        # x_1 = |0>, x_2 = (|0>+|1>)/sqrt(2): check against the explicit 4-dim sum
        tokens = encode_all([[1, 0], [2 ** -0.5, 2 ** -0.5]], 1)
        state, weight = entangled_prefix_encoding(tokens, 2)
        raw = np.kron([1, 0], [1, 0]) + np.kron(
            [2 ** -0.5, 2 ** -0.5], [2 ** -0.5, 2 ** -0.5]
        )
        expected_weight = float(np.vdot(raw, raw).real)
        assert abs(weight - expected_weight) < 1e-12
        assert np.max(np.abs(state.amplitudes - raw / np.sqrt(expected_weight))) < 1e-12

    def test_orthonormal_tokens_weight_is_prefix_length(self):
        tokens = encode_all(np.eye(4), 2)
        for j in range(1, 5):
            _, weight = entangled_prefix_encoding(tokens, j)
            assert abs(weight - j) < 1e-12

    def test_reduced_density_matrix_is_maximally_mixed(self):
        # tracing out register B for orthonormal tokens leaves eigenvalues 1/j
        tokens = encode_all(np.eye(4), 2)
        for j in range(1, 5):
            state, _ = entangled_prefix_encoding(tokens, j)
            psi = state.amplitudes.reshape(4, 4)  # [b, a] with A in the low bits
            rho_a = np.tensordot(psi, psi.conj(), axes=([0], [0]))
            eigs = np.sort(np.linalg.eigvalsh(rho_a))[::-1]
            assert np.max(np.abs(eigs[:j] - 1.0 / j)) < 1e-10
            if j < eigs.size:
                assert np.max(np.abs(eigs[j:])) < 1e-10

    def test_out_of_range_prefix(self):
        tokens = encode_all([[1, 0]], 1)
        with pytest.raises(ConfigurationError):
            entangled_prefix_encoding(tokens, 2)
        with pytest.raises(ConfigurationError):
            entangled_prefix_encoding(tokens, 0)

    def test_destructive_interference_rejected(self):
        # a relative phase of i makes the doubled encodings cancel exactly
        tokens = encode_all([[1, 0], [1j, 0]], 1)
        with pytest.raises(DegenerateInputError):
            entangled_prefix_encoding(tokens, 2)


class TestPrepareInputSuperposition:
    def test_single_step_rejected(self):
        tokens = encode_all([[1, 0], [0, 1]], 1)
        with pytest.raises(ConfigurationError):
            prepare_input_superposition(tokens, 1, RegisterLayout.standard(1, 1))
        with pytest.raises(ConfigurationError):
            RegisterLayout.standard(1, 0)

    def test_two_step_state_amplitude_by_amplitude(self):
        # T=2, d=2, tokens |0>, |1>: (|00>|0> + (|00>+|11>)/sqrt(2) |1>)/sqrt(2)
        tokens = encode_all([[1, 0], [0, 1]], 1)
        layout = RegisterLayout.standard(1, 1)
        state = prepare_input_superposition(tokens, 2, layout)
        psi1 = np.kron([1, 0], [1, 0])
        psi2 = (np.kron([1, 0], [1, 0]) + np.kron([0, 1], [0, 1])) / np.sqrt(2)
        expected = (np.kron([1, 0], psi1) + np.kron([0, 1], psi2)) / np.sqrt(2)
        assert np.max(np.abs(state.amplitudes - expected)) < 1e-12

    def test_random_tokens_normalized(self):
        rng = np.random.default_rng(17)
        tokens = encode_all(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)), 2)
        state = prepare_input_superposition(tokens, 4, RegisterLayout.standard(2, 2))
        assert abs(state.squared_norm() - 1.0) < 1e-12

    def test_branches_match_prefix_encodings(self):
        rng = np.random.default_rng(19)
        tokens = encode_all(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)), 2)
        layout = RegisterLayout.standard(2, 2)
        state = prepare_input_superposition(tokens, 4, layout)
        branches = state.amplitudes.reshape(4, 16)  # [c, ab]
        for j in range(1, 5):
            prefix_state, _ = entangled_prefix_encoding(tokens, j)
            branch = branches[j - 1]
            branch = branch / np.linalg.norm(branch)
            assert np.max(np.abs(branch - prefix_state.amplitudes)) < 1e-12

    def test_too_few_tokens(self):
        tokens = encode_all([[1, 0]], 1)
        with pytest.raises(ConfigurationError):
            prepare_input_superposition(tokens, 2, RegisterLayout.standard(1, 1))


class TestBasisEncode:
    def test_zero_index(self):
        state = basis_encode(0, 3)
        assert state.amplitudes[0] == 1.0

    def test_little_endian_index(self):
        state = basis_encode(5, 3)
        assert state.amplitudes[5] == 1.0
        assert abs(state.squared_norm() - 1.0) == 0.0

    def test_orthonormality(self):
        states = [basis_encode(i, 2) for i in range(4)]
        for i, a in enumerate(states):
            for j, b in enumerate(states):
                assert abs(inner_product(a, b) - (1.0 if i == j else 0.0)) < 1e-15

    def test_out_of_range(self):
        with pytest.raises(ConfigurationError):
            basis_encode(8, 3)
        with pytest.raises(ConfigurationError):
            basis_encode(-1, 3)
