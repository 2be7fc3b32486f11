"""A tour of the state-vector core.

Builds small registers, applies gates and register-controlled blocks,
and reads out projector expectations both exactly and by shot sampling.
"""

import numpy as np

from qsalab import (
    StateVector,
    UnitaryBlock,
    all_zeros_expectation,
    apply_controlled_by_register,
    apply_unitary,
    inner_product,
    sample_expectation,
)
from qsalab.statevector import HADAMARD, PAULI_X, identity_block

# Qubit 0 is the least-significant bit of the amplitude index, so applying
# X to qubit 1 of |00> lands on index 2.
state = apply_unitary(StateVector.zero(2), UnitaryBlock(PAULI_X, (1,)))
print("X on qubit 1 of |00> :", np.round(state.amplitudes.real, 3))

# A Hadamard then a register-controlled X is a CNOT; the result is a Bell pair.
state = apply_unitary(StateVector.zero(2), UnitaryBlock(HADAMARD, (1,)))
bell = apply_controlled_by_register(
    state, controls=(1,), blocks={0: identity_block((0,)), 1: UnitaryBlock(PAULI_X, (0,))}
)
print("Bell amplitudes      :", np.round(bell.amplitudes.real, 4))

# The all-zeros projector expectation is the squared amplitude on |0...0>.
print("P(all zeros) exact   :", all_zeros_expectation(bell))
for shots in (100, 10_000, 1_000_000):
    estimate = sample_expectation(bell, shots, seed=7)
    print(f"P(all zeros) {shots:>8} shots:", estimate)

# Overlaps conjugate the first argument.
plus = apply_unitary(StateVector.zero(1), UnitaryBlock(HADAMARD, (0,)))
print("<+|0>                :", inner_product(plus, StateVector.zero(1)))
