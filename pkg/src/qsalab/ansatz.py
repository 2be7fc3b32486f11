"""Layered two-body variational unitaries and the single-qubit phase layer.

The data-register ansatz is hardware-efficient: per layer, Ry(theta)Rz(phi)
on every qubit followed by a linear chain of CNOTs, closed by one final
rotation-only layer.  The step-register layer is a product of Rz rotations.
Both families are differentiated exactly by the two-point shift rule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .statevector import UnitaryBlock


def rotation_y(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_z(phi: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]], dtype=complex
    )


@dataclass(frozen=True)
class AnsatzParams:
    """Angles for an L-layer two-body ansatz on n qubits.

    ``angles`` has shape (num_layers + 1, num_qubits, 2); the trailing axis
    holds the Ry and Rz angle of each qubit, and the extra leading slice is
    the final rotation-only layer.  With ``real_valued`` set, the Rz factors
    are omitted and the unitary stays real.
    """

    num_qubits: int
    num_layers: int
    angles: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        arr = np.array(self.angles, dtype=float)
        expected = (self.num_layers + 1, self.num_qubits, 2)
        if arr.shape != expected:
            raise ConfigurationError(f"angles shape {arr.shape} != {expected}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("angles must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "angles", arr)

    @staticmethod
    def zeros(num_qubits: int, num_layers: int, real_valued: bool = False) -> "AnsatzParams":
        return AnsatzParams(
            num_qubits, num_layers, np.zeros((num_layers + 1, num_qubits, 2)), real_valued
        )

    @staticmethod
    def random(
        num_qubits: int,
        num_layers: int,
        seed,
        spread: float = 0.1,
        real_valued: bool = False,
    ) -> "AnsatzParams":
        """Near-identity initialization, uniform in [-spread, spread]."""
        rng = np.random.default_rng(seed)
        arr = rng.uniform(-spread, spread, size=(num_layers + 1, num_qubits, 2))
        return AnsatzParams(num_qubits, num_layers, arr, real_valued)

    def flat(self) -> np.ndarray:
        return np.array(self.angles, dtype=float).ravel()

    def with_flat(self, values: np.ndarray) -> "AnsatzParams":
        arr = np.asarray(values, dtype=float).reshape(self.angles.shape)
        return replace(self, angles=arr)


@dataclass(frozen=True)
class PhaseLayerParams:
    """One Rz angle per step-register qubit."""

    angles: np.ndarray

    def __post_init__(self):
        arr = np.array(self.angles, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("angles must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "angles", arr)

    @staticmethod
    def zeros(num_qubits: int) -> "PhaseLayerParams":
        return PhaseLayerParams(np.zeros(num_qubits))

    @staticmethod
    def random(num_qubits: int, seed, spread: float = 0.1) -> "PhaseLayerParams":
        rng = np.random.default_rng(seed)
        return PhaseLayerParams(rng.uniform(-spread, spread, size=num_qubits))

    @property
    def num_qubits(self) -> int:
        return self.angles.size

    def with_flat(self, values: np.ndarray) -> "PhaseLayerParams":
        return PhaseLayerParams(np.asarray(values, dtype=float))


def _rotation_layer(layer_angles: np.ndarray, real_valued: bool) -> np.ndarray:
    full = np.eye(1, dtype=complex)
    for q in range(layer_angles.shape[0] - 1, -1, -1):
        mat = rotation_y(layer_angles[q, 0])
        if not real_valued:
            mat = mat @ rotation_z(layer_angles[q, 1])
        full = np.kron(full, mat)
    return full


def _cnot_chain_matrix(num_qubits: int) -> np.ndarray:
    dim = 2 ** num_qubits
    chain = np.eye(dim, dtype=complex)
    for q in range(num_qubits - 1):
        perm = np.zeros((dim, dim), dtype=complex)
        for b in range(dim):
            flipped = b ^ (1 << (q + 1)) if (b >> q) & 1 else b
            perm[flipped, b] = 1.0
        chain = perm @ chain
    return chain


def build_ansatz_unitary(params: AnsatzParams) -> UnitaryBlock:
    """Dense unitary of the layered ansatz, targeting qubits 0..n-1."""
    chain = _cnot_chain_matrix(params.num_qubits)
    u = np.eye(2 ** params.num_qubits, dtype=complex)
    for layer in range(params.num_layers):
        u = chain @ _rotation_layer(params.angles[layer], params.real_valued) @ u
    u = _rotation_layer(params.angles[params.num_layers], params.real_valued) @ u
    return UnitaryBlock(u, tuple(range(params.num_qubits)))


def phase_layer_diagonal(params: PhaseLayerParams) -> np.ndarray:
    """Diagonal of the Rz product over the step register, indexed by basis value."""
    diag = np.ones(1, dtype=complex)
    for q in range(params.num_qubits - 1, -1, -1):
        alpha = params.angles[q]
        diag = np.kron(diag, np.array([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)]))
    return diag


def build_phase_layer(params: PhaseLayerParams) -> UnitaryBlock:
    """Tensor product of per-qubit Rz rotations, targeting qubits 0..t-1."""
    return UnitaryBlock(np.diag(phase_layer_diagonal(params)), tuple(range(params.num_qubits)))


def parameter_shift_gradient(
    loss_fn: Callable[[np.ndarray], float], params: np.ndarray, index: int
) -> float:
    """Two-point shift-rule derivative with respect to ``params[index]``.

    Exact for functions whose parameter enters through a single rotation gate
    with generator eigenvalues +-1/2, which is how every angle in this module
    enters the circuit.
    """
    base = np.asarray(params, dtype=float)
    plus = base.copy()
    minus = base.copy()
    plus[index] += np.pi / 2.0
    minus[index] -= np.pi / 2.0
    return 0.5 * (loss_fn(plus) - loss_fn(minus))
