import numpy as np
import pytest

from qsalab.errors import ConfigurationError, DegenerateInputError
from qsalab.statevector import (
    HADAMARD,
    PAULI_X,
    OpCounter,
    RegisterLayout,
    StateVector,
    UnitaryBlock,
    all_zeros_expectation,
    apply_controlled_by_register,
    apply_unitary,
    identity_block,
    inner_product,
    sample_expectation,
)


def dense_apply_oracle(amps, matrix, targets, num_qubits):
    """Index-by-index application of a block, independent of the tensordot path."""
    out = np.zeros_like(amps, dtype=complex)
    k = len(targets)
    clear_mask = ~sum(1 << t for t in targets) & ((1 << num_qubits) - 1)
    for b, amp in enumerate(amps):
        if amp == 0:
            continue
        col = sum(((b >> t) & 1) << i for i, t in enumerate(targets))
        rest = b & clear_mask
        for row in range(2 ** k):
            nb = rest | sum(((row >> i) & 1) << t for i, t in enumerate(targets))
            out[nb] += matrix[row, col] * amp
    return out


def random_state(num_qubits, rng):
    amps = rng.normal(size=2 ** num_qubits) + 1j * rng.normal(size=2 ** num_qubits)
    return StateVector.from_amplitudes(amps, normalize=True)


def random_unitary(dim, rng):
    ginibre = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(ginibre)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestStateVector:
    def test_zero_state(self):
        state = StateVector.zero(3)
        assert state.amplitudes[0] == 1.0
        assert np.all(state.amplitudes[1:] == 0)

    def test_length_must_be_power_of_two(self):
        with pytest.raises(ConfigurationError):
            StateVector.from_amplitudes([1.0, 0.0, 0.0])

    def test_normalize_flag(self):
        state = StateVector.from_amplitudes([3.0, 4.0], normalize=True)
        assert np.allclose(state.amplitudes, [0.6, 0.8])
        with pytest.raises(ConfigurationError):
            StateVector.from_amplitudes([3.0, 4.0])
        with pytest.raises(DegenerateInputError):
            StateVector.from_amplitudes([0.0, 0.0], normalize=True)

    def test_amplitudes_are_frozen(self):
        state = StateVector.zero(2)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0


class TestUnitaryBlock:
    def test_rejects_non_unitary(self):
        with pytest.raises(ConfigurationError):
            UnitaryBlock(np.array([[1.0, 0.0], [0.0, 2.0]]), (0,))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            UnitaryBlock(np.eye(2), (0, 1))

    def test_rejects_duplicate_targets(self):
        with pytest.raises(ConfigurationError):
            UnitaryBlock(np.eye(4), (1, 1))


class TestApplyUnitary:
    def test_hadamard_on_zero(self):
        state = apply_unitary(StateVector.zero(1), UnitaryBlock(HADAMARD, (0,)))
        assert np.allclose(state.amplitudes, [2 ** -0.5, 2 ** -0.5])

    def test_identity_is_bit_exact(self):
        rng = np.random.default_rng(11)
        state = random_state(3, rng)
        out = apply_unitary(state, identity_block((0, 1, 2)))
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_x_on_qubit_one_little_endian(self):
        state = apply_unitary(StateVector.zero(2), UnitaryBlock(PAULI_X, (1,)))
        expected = np.zeros(4)
        expected[2] = 1.0
        assert np.allclose(state.amplitudes, expected)

    def test_out_of_range_target(self):
        with pytest.raises(ConfigurationError):
            apply_unitary(StateVector.zero(1), UnitaryBlock(PAULI_X, (1,)))

    @pytest.mark.parametrize("targets", [(0,), (2,), (0, 2), (2, 0), (1, 3, 0)])
    def test_matches_dense_oracle(self, targets):
        rng = np.random.default_rng(hash(targets) % (2 ** 31))
        state = random_state(4, rng)
        matrix = random_unitary(2 ** len(targets), rng)
        out = apply_unitary(state, UnitaryBlock(matrix, targets))
        expected = dense_apply_oracle(state.amplitudes, matrix, targets, 4)
        assert np.max(np.abs(out.amplitudes - expected)) < 1e-12

    def test_norm_preserved_over_random_sequences(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            state = random_state(3, rng)
            for _ in range(6):
                k = int(rng.integers(1, 3))
                targets = tuple(rng.choice(3, size=k, replace=False))
                state = apply_unitary(state, UnitaryBlock(random_unitary(2 ** k, rng), targets))
            assert abs(state.squared_norm() - 1.0) < 1e-10

    def test_composition_equals_dense_product(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            state = random_state(3, rng)
            targets = (0, 2)
            u = random_unitary(4, rng)
            v = random_unitary(4, rng)
            stepwise = apply_unitary(
                apply_unitary(state, UnitaryBlock(u, targets)), UnitaryBlock(v, targets)
            )
            fused = apply_unitary(state, UnitaryBlock(v @ u, targets))
            assert np.max(np.abs(stepwise.amplitudes - fused.amplitudes)) < 1e-12


class TestControlledByRegister:
    def test_definite_control_applies_block(self):
        # control |0>, blocks {0: X, 1: I} on one target
        state = StateVector.zero(2)
        blocks = {0: UnitaryBlock(PAULI_X, (0,)), 1: identity_block((0,))}
        out = apply_controlled_by_register(state, (1,), blocks)
        expected = np.zeros(4)
        expected[1] = 1.0
        assert np.allclose(out.amplitudes, expected)

    def test_cnot_makes_bell_state(self):
        state = apply_unitary(StateVector.zero(2), UnitaryBlock(HADAMARD, (1,)))
        blocks = {0: identity_block((0,)), 1: UnitaryBlock(PAULI_X, (0,))}
        out = apply_controlled_by_register(state, (1,), blocks)
        expected = np.zeros(4, dtype=complex)
        expected[0] = expected[3] = 2 ** -0.5
        assert np.max(np.abs(out.amplitudes - expected)) < 1e-12

    def test_matches_dense_select_matrix(self):
        # random 2-qubit blocks controlled on one qubit of a 3-qubit state
        rng = np.random.default_rng(23)
        state = random_state(3, rng)
        blocks = {j: UnitaryBlock(random_unitary(4, rng), (0, 1)) for j in range(2)}
        out = apply_controlled_by_register(state, (2,), blocks)
        # oracle: sum_j U_j (x) |j><j| built explicitly (control is the high bit)
        select = np.zeros((8, 8), dtype=complex)
        for j in range(2):
            proj = np.zeros((2, 2))
            proj[j, j] = 1.0
            select += np.kron(proj, blocks[j].matrix)
        expected = select @ state.amplitudes
        assert np.max(np.abs(out.amplitudes - expected)) < 1e-12

    def test_missing_block_rejected(self):
        with pytest.raises(ConfigurationError):
            apply_controlled_by_register(StateVector.zero(2), (1,), {0: identity_block((0,))})

    def test_overlapping_targets_rejected(self):
        blocks = {0: identity_block((1,)), 1: identity_block((1,))}
        with pytest.raises(ConfigurationError):
            apply_controlled_by_register(StateVector.zero(2), (1,), blocks)

    def test_counter_records_weighted_dims(self):
        counter = OpCounter()
        state = StateVector.zero(3)
        blocks = {j: identity_block((0, 1)) for j in range(2)}
        apply_controlled_by_register(state, (2,), blocks, counter)
        assert counter.blocks == 2
        assert counter.weighted_dim == 8


class TestExpectations:
    def test_all_zeros_on_basis_states(self):
        assert all_zeros_expectation(StateVector.zero(3)) == 1.0
        other = StateVector.from_amplitudes(np.eye(8)[5])
        assert all_zeros_expectation(other) == 0.0

    def test_uniform_superposition(self):
        m = 3
        state = StateVector.zero(m)
        for q in range(m):
            state = apply_unitary(state, UnitaryBlock(HADAMARD, (q,)))
        assert abs(all_zeros_expectation(state) - 2 ** -m) < 1e-12

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(3)
        state = random_state(4, rng)
        total = all_zeros_expectation(state) + np.sum(np.abs(state.amplitudes[1:]) ** 2)
        assert abs(total - 1.0) < 1e-12

    def test_sampling_certain_and_impossible(self):
        assert sample_expectation(StateVector.zero(2), 100, seed=1) == 1.0
        excited = StateVector.from_amplitudes(np.eye(4)[3])
        assert sample_expectation(excited, 100, seed=1) == 0.0

    def test_sampling_within_three_standard_errors(self):
        state = StateVector.from_amplitudes(np.full(4, 0.5))
        estimate = sample_expectation(state, 10 ** 6, seed=42)
        se = np.sqrt(0.25 * 0.75 / 10 ** 6)
        assert abs(estimate - 0.25) < 3 * se

    def test_sampling_requires_positive_shots(self):
        with pytest.raises(ConfigurationError):
            sample_expectation(StateVector.zero(1), 0, seed=0)

    def test_sampling_error_scales_as_inverse_sqrt_shots(self):
        state = StateVector.from_amplitudes(np.full(4, 0.5))
        shot_grid = [2 ** k for k in range(7, 15)]
        errors = np.zeros(len(shot_grid))
        for seed in range(50):
            for i, shots in enumerate(shot_grid):
                est = sample_expectation(state, shots, seed=seed * 1000 + i)
                errors[i] += abs(est - 0.25)
        errors /= 50
        slope = np.polyfit(np.log(shot_grid), np.log(errors), 1)[0]
        assert abs(slope + 0.5) < 0.1


class TestInnerProduct:
    def test_self_overlap_is_one(self):
        rng = np.random.default_rng(5)
        state = random_state(3, rng)
        assert abs(inner_product(state, state) - 1.0) < 1e-12

    def test_orthogonal_basis_states(self):
        zero = StateVector.zero(1)
        one = StateVector.from_amplitudes([0.0, 1.0])
        assert inner_product(zero, one) == 0.0

    def test_hadamard_column(self):
        plus = apply_unitary(StateVector.zero(1), UnitaryBlock(HADAMARD, (0,)))
        assert abs(inner_product(plus, StateVector.zero(1)) - 2 ** -0.5) < 1e-12

    def test_conjugation_on_first_argument(self):
        a = StateVector.from_amplitudes([1.0, 1j], normalize=True)
        b = StateVector.zero(1)
        assert abs(inner_product(a, b) - np.conj(1j * 0 + 2 ** -0.5)) < 1e-12

    def test_size_mismatch(self):
        with pytest.raises(ConfigurationError):
            inner_product(StateVector.zero(1), StateVector.zero(2))


class TestRegisterLayout:
    def test_standard_layout(self):
        lay = RegisterLayout.standard(2, 1)
        assert lay.a_qubits == (0, 1)
        assert lay.b_qubits == (2, 3)
        assert lay.c_qubits == (4,)
        assert lay.token_dim == 4
        assert lay.num_steps == 2
        assert lay.num_qubits == 5

    def test_rejects_overlap_and_gaps(self):
        with pytest.raises(ConfigurationError):
            RegisterLayout((0, 1), (1, 2), (3,))
        with pytest.raises(ConfigurationError):
            RegisterLayout((0,), (1,), (3,))

    def test_requires_step_register(self):
        with pytest.raises(ConfigurationError):
            RegisterLayout.standard(1, 0)
