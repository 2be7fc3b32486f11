"""Dense little-endian state-vector core.

Registers, gate application, register-controlled blocks, the all-zeros
projector expectation, and shot sampling.  Conventions fixed once for the
whole package:

* Qubit 0 is the least-significant bit of a basis index; the basis state
  with qubit k set contributes ``2**k`` to the amplitude index.
* A :class:`UnitaryBlock` is indexed the same way over its own targets:
  ``targets[0]`` is the least-significant bit of the block matrix index.
* Every operation is a pure function; amplitude arrays are frozen on
  construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateInputError

UNITARY_ATOL = 1e-10

_SQRT2_INV = 1.0 / np.sqrt(2.0)
HADAMARD = np.array([[_SQRT2_INV, _SQRT2_INV], [_SQRT2_INV, -_SQRT2_INV]], dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _qubit_count_for(length: int) -> int:
    m = int(length).bit_length() - 1
    if length <= 0 or 2 ** m != length:
        raise ConfigurationError(f"amplitude array length {length} is not a power of two")
    return m


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over ``2**num_qubits`` little-endian basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.num_qubits:
            raise ConfigurationError(
                f"expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got {amps.size}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @staticmethod
    def zero(num_qubits: int) -> "StateVector":
        """The |0...0> state on ``num_qubits`` qubits."""
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[0] = 1.0
        return StateVector(num_qubits, amps)

    @staticmethod
    def from_amplitudes(values, normalize: bool = False) -> "StateVector":
        """Build a state from raw amplitudes, optionally rescaling to unit norm."""
        arr = np.asarray(values, dtype=complex).reshape(-1)
        m = _qubit_count_for(arr.size)
        if normalize:
            nrm = np.linalg.norm(arr)
            if nrm < 1e-12:
                raise DegenerateInputError("cannot normalize a zero amplitude vector")
            arr = arr / nrm
        elif abs(np.vdot(arr, arr).real - 1.0) > 1e-6:
            raise ConfigurationError(
                "amplitudes are not normalized; pass normalize=True to rescale"
            )
        return StateVector(m, arr)

    def squared_norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class RegisterLayout:
    """Disjoint qubit ranges for the two data registers A, B and the step register C."""

    a_qubits: tuple
    b_qubits: tuple
    c_qubits: tuple

    def __post_init__(self):
        a, b, c = (tuple(int(q) for q in r) for r in (self.a_qubits, self.b_qubits, self.c_qubits))
        object.__setattr__(self, "a_qubits", a)
        object.__setattr__(self, "b_qubits", b)
        object.__setattr__(self, "c_qubits", c)
        if len(a) != len(b) or len(a) < 1:
            raise ConfigurationError("registers A and B must have the same nonzero size")
        if len(c) < 1:
            raise ConfigurationError("register C must hold at least one qubit")
        total = len(a) + len(b) + len(c)
        if set(a) | set(b) | set(c) != set(range(total)) or len(set(a + b + c)) != total:
            raise ConfigurationError("register ranges must be disjoint and cover 0..2n+t-1")

    @staticmethod
    def standard(n: int, t: int) -> "RegisterLayout":
        """A on qubits [0, n), B on [n, 2n), C on [2n, 2n+t)."""
        return RegisterLayout(
            tuple(range(n)), tuple(range(n, 2 * n)), tuple(range(2 * n, 2 * n + t))
        )

    @property
    def n(self) -> int:
        return len(self.a_qubits)

    @property
    def t(self) -> int:
        return len(self.c_qubits)

    @property
    def token_dim(self) -> int:
        return 2 ** self.n

    @property
    def num_steps(self) -> int:
        return 2 ** self.t

    @property
    def num_qubits(self) -> int:
        return 2 * self.n + self.t


@dataclass(frozen=True)
class UnitaryBlock:
    """A dense unitary acting on an ordered list of target qubits."""

    matrix: np.ndarray
    targets: tuple

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "targets", targets)
        mat = np.array(self.matrix, dtype=complex)
        dim = 2 ** len(targets)
        if mat.shape != (dim, dim):
            raise ConfigurationError(
                f"matrix shape {mat.shape} does not match {len(targets)} target qubits"
            )
        if len(set(targets)) != len(targets) or any(q < 0 for q in targets):
            raise ConfigurationError("targets must be distinct non-negative qubit indices")
        defect = np.max(np.abs(mat @ mat.conj().T - np.eye(dim)))
        if defect > UNITARY_ATOL:
            raise ConfigurationError(f"matrix is not unitary (defect {defect:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "UnitaryBlock":
        return UnitaryBlock(self.matrix.conj().T, self.targets)

    def retarget(self, targets: Sequence[int]) -> "UnitaryBlock":
        if len(tuple(targets)) != len(self.targets):
            raise ConfigurationError("retarget must preserve the number of target qubits")
        return UnitaryBlock(self.matrix, tuple(targets))


def identity_block(targets: Sequence[int]) -> UnitaryBlock:
    return UnitaryBlock(np.eye(2 ** len(tuple(targets)), dtype=complex), tuple(targets))


@dataclass
class OpCounter:
    """Tally of applied blocks, weighted by dense block dimension 2**k."""

    blocks: int = 0
    weighted_dim: int = 0

    def record(self, dim: int):
        self.blocks += 1
        self.weighted_dim += int(dim)


def _apply_matrix(amps: np.ndarray, num_qubits: int, matrix: np.ndarray, targets) -> np.ndarray:
    # Reshaped tensor axis j corresponds to qubit (num_qubits - 1 - j).
    k = len(targets)
    psi = amps.reshape([2] * num_qubits)
    axes = [num_qubits - 1 - t for t in reversed(targets)]
    tensor = matrix.reshape([2] * (2 * k))
    out = np.tensordot(tensor, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def apply_unitary(state: StateVector, block: UnitaryBlock, counter: OpCounter | None = None) -> StateVector:
    """Apply ``block`` to its target qubits, identity elsewhere."""
    if any(q >= state.num_qubits for q in block.targets):
        raise ConfigurationError(
            f"block targets {block.targets} exceed register of {state.num_qubits} qubits"
        )
    if counter is not None:
        counter.record(block.dimension)
    return StateVector(state.num_qubits, _apply_matrix(state.amplitudes, state.num_qubits, block.matrix, block.targets))


def apply_controlled_by_register(
    state: StateVector,
    controls: Sequence[int],
    blocks: Mapping[int, UnitaryBlock],
    counter: OpCounter | None = None,
) -> StateVector:
    """Apply ``blocks[j]`` on the subspace where the control register reads j.

    Realizes the select unitary sum_j U_j (x) |j><j| with controls read
    little-endian (``controls[0]`` is the least-significant bit of j).
    Every control value in ``0..2**t - 1`` must map to a block.
    """
    controls = tuple(int(q) for q in controls)
    m = state.num_qubits
    if len(set(controls)) != len(controls) or any(q < 0 or q >= m for q in controls):
        raise ConfigurationError("controls must be distinct in-range qubit indices")
    num_values = 2 ** len(controls)
    missing = [j for j in range(num_values) if j not in blocks]
    if missing:
        raise ConfigurationError(f"no block supplied for control value(s) {missing}")
    extra = [j for j in blocks if not 0 <= j < num_values]
    if extra:
        raise ConfigurationError(f"control value(s) {extra} are unreachable")

    idx = np.arange(2 ** m)
    ctrl_val = np.zeros(2 ** m, dtype=np.int64)
    for i, c in enumerate(controls):
        ctrl_val |= ((idx >> c) & 1) << i

    out = np.zeros(2 ** m, dtype=complex)
    for j in range(num_values):
        block = blocks[j]
        if set(block.targets) & set(controls):
            raise ConfigurationError("controlled blocks must act on qubits disjoint from controls")
        if any(q >= m for q in block.targets):
            raise ConfigurationError("block targets exceed the register")
        masked = np.where(ctrl_val == j, state.amplitudes, 0.0)
        out += _apply_matrix(masked, m, block.matrix, block.targets)
        if counter is not None:
            counter.record(block.dimension)
    return StateVector(m, out)


def all_zeros_expectation(state: StateVector) -> float:
    """Expectation of the projector onto |0...0>, i.e. |<0...0|state>|^2."""
    return float(np.abs(state.amplitudes[0]) ** 2)


def sample_expectation(state: StateVector, shots: int, seed: int) -> float:
    """Fraction of ``shots`` seeded Bernoulli draws that hit the all-zeros outcome."""
    if shots < 1:
        raise ConfigurationError("shots must be a positive integer")
    p = min(max(all_zeros_expectation(state), 0.0), 1.0)
    rng = np.random.default_rng(seed)
    return float(rng.binomial(shots, p)) / shots


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> with conjugation on the first argument."""
    if a.num_qubits != b.num_qubits:
        raise ConfigurationError(
            f"qubit counts differ: {a.num_qubits} vs {b.num_qubits}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))
