"""Sequence data: vocabulary, embeddings, and the two generators.

Classical sequences come from seeded sparse Markov chains over a one-hot
vocabulary; quantum sequences are transverse-field Ising trajectories
evolved by exact diagonalization.  Datasets round-trip bit-exactly through
JSON Lines files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateInputError

ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Vocabulary:
    """One-hot words indexed 0..size-1."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ConfigurationError("vocabulary needs at least two words")

    def one_hot(self, index: int) -> np.ndarray:
        if not 0 <= index < self.size:
            raise ConfigurationError(f"word index {index} outside 0..{self.size - 1}")
        vec = np.zeros(self.size)
        vec[index] = 1.0
        return vec


def sinusoidal_shifts(num_positions: int, dim: int, base: float = 100.0) -> np.ndarray:
    """Fixed positional shift vectors: alternating sin/cos of geometric frequencies."""
    positions = np.arange(1, num_positions + 1, dtype=float)[:, None]
    shifts = np.zeros((num_positions, dim))
    half = (dim + 1) // 2
    freqs = base ** (-2.0 * np.arange(half) / dim)
    angles = positions * freqs[None, :]
    shifts[:, 0::2] = np.sin(angles)[:, : shifts[:, 0::2].shape[1]]
    shifts[:, 1::2] = np.cos(angles)[:, : shifts[:, 1::2].shape[1]]
    return shifts


@dataclass(frozen=True)
class EmbeddingMap:
    """Linear embedding plus scaled positional shifts.

    ``matrix`` is d x D (real for classical data, complex for amplitude
    data); ``shifts`` holds one d-vector per position; ``gamma`` scales the
    shifts and is not trained.
    """

    matrix: np.ndarray
    shifts: np.ndarray
    gamma: float

    def __post_init__(self):
        mat = np.array(self.matrix)
        shifts = np.array(self.shifts, dtype=float)
        if mat.ndim != 2 or mat.shape[0] >= mat.shape[1]:
            raise ConfigurationError("embedding must map a larger vocabulary to a smaller d")
        if shifts.ndim != 2 or shifts.shape[1] != mat.shape[0]:
            raise ConfigurationError("shifts must be rows of dimension d")
        mat.setflags(write=False)
        shifts.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "shifts", shifts)

    @property
    def embed_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def vocab_dim(self) -> int:
        return self.matrix.shape[1]

    def with_matrix(self, matrix: np.ndarray) -> "EmbeddingMap":
        return EmbeddingMap(matrix, self.shifts, self.gamma)


def make_embedding(
    vocab_dim: int,
    embed_dim: int,
    num_positions: int,
    seed,
    complex_valued: bool = False,
    gamma: float = 0.1,
) -> EmbeddingMap:
    rng = np.random.default_rng(seed)
    mat = rng.normal(size=(embed_dim, vocab_dim)) / np.sqrt(embed_dim)
    if complex_valued:
        mat = (mat + 1j * rng.normal(size=(embed_dim, vocab_dim)) / np.sqrt(embed_dim)) / np.sqrt(2.0)
    if np.any(np.linalg.norm(mat, axis=0) <= ZERO_NORM_TOL):
        raise ConfigurationError("generated embedding has a zero column")
    return EmbeddingMap(mat, sinusoidal_shifts(num_positions, embed_dim), gamma)


def _as_input_rows(record, vocab_dim: int) -> np.ndarray:
    arr = np.asarray(record)
    if arr.ndim == 1 and not np.iscomplexobj(arr):
        rows = np.zeros((arr.size, vocab_dim))
        rows[np.arange(arr.size), arr.astype(int)] = 1.0
        return rows
    if arr.ndim == 2 and arr.shape[1] == vocab_dim:
        return arr.astype(complex)
    raise ConfigurationError("record must be word indices or (T+1, D) amplitude rows")


def embed_sequence(record, emap: EmbeddingMap) -> tuple[np.ndarray, np.ndarray]:
    """Tokens x_i = E w_i + gamma c_i and their shift-free versions.

    Returns (x, x_shift_free), each of shape (T+1, d); attention inputs use
    x and prediction targets use the shift-free rows.
    """
    rows = _as_input_rows(record, emap.vocab_dim)
    shift_free = rows @ emap.matrix.T
    if emap.shifts.shape[0] < rows.shape[0]:
        raise ConfigurationError("embedding has fewer positional shifts than sequence steps")
    x = shift_free + emap.gamma * emap.shifts[: rows.shape[0]]
    if np.any(np.linalg.norm(shift_free, axis=-1) <= ZERO_NORM_TOL) or np.any(
        np.linalg.norm(x, axis=-1) <= ZERO_NORM_TOL
    ):
        raise DegenerateInputError("a token embeds to the zero vector")
    return x, shift_free


def embed_batch(inputs: np.ndarray, emap: EmbeddingMap) -> tuple[np.ndarray, np.ndarray]:
    """Batched embedding of (S, T+1, D) input rows; see embed_sequence."""
    inputs = np.asarray(inputs)
    shift_free = inputs @ emap.matrix.T
    if emap.shifts.shape[0] < inputs.shape[1]:
        raise ConfigurationError("embedding has fewer positional shifts than sequence steps")
    x = shift_free + emap.gamma * emap.shifts[None, : inputs.shape[1]]
    if np.any(np.linalg.norm(shift_free, axis=-1) <= ZERO_NORM_TOL) or np.any(
        np.linalg.norm(x, axis=-1) <= ZERO_NORM_TOL
    ):
        raise DegenerateInputError("a token embeds to the zero vector")
    return x, shift_free


def _site_operator(op: np.ndarray, site: int, num_qubits: int) -> np.ndarray:
    return np.kron(
        np.kron(np.eye(2 ** (num_qubits - 1 - site)), op), np.eye(2 ** site)
    )


@dataclass(frozen=True)
class IsingModel:
    """Transverse-field Ising Hamiltonian: sum_i X_i + sum_{i<j} J_ij Z_i Z_j."""

    num_qubits: int
    couplings: np.ndarray
    hamiltonian: np.ndarray

    def __post_init__(self):
        j = np.array(self.couplings, dtype=float)
        h = np.array(self.hamiltonian, dtype=complex)
        q = self.num_qubits
        if j.shape != (q, q) or not np.allclose(j, j.T) or np.any(np.diag(j) != 0):
            raise ConfigurationError("couplings must be symmetric with zero diagonal")
        if np.any(j < 0) or np.any(j > 1):
            raise ConfigurationError("couplings must lie in [0, 1]")
        if h.shape != (2 ** q, 2 ** q) or np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ConfigurationError("hamiltonian must be Hermitian of dimension 2**q")
        j.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "couplings", j)
        object.__setattr__(self, "hamiltonian", h)

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits


def build_ising(num_qubits: int, seed) -> IsingModel:
    """Random-coupling Ising model, densely diagonalizable at desk scale."""
    if not 1 <= num_qubits <= 10:
        raise ConfigurationError("num_qubits must lie in 1..10 for dense diagonalization")
    rng = np.random.default_rng(seed)
    couplings = np.zeros((num_qubits, num_qubits))
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ham = np.zeros((2 ** num_qubits, 2 ** num_qubits), dtype=complex)
    for i in range(num_qubits):
        ham += _site_operator(x, i, num_qubits)
    for i in range(num_qubits):
        for j in range(i + 1, num_qubits):
            couplings[i, j] = couplings[j, i] = rng.uniform(0.0, 1.0)
            ham += couplings[i, j] * (
                _site_operator(z, i, num_qubits) @ _site_operator(z, j, num_qubits)
            )
    return IsingModel(num_qubits, couplings, ham)


@dataclass
class SequenceDataset:
    """Uniform-length records: word-index lists or per-step amplitude rows."""

    kind: str
    vocab_dim: int
    num_steps: int
    seed: int
    records: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("classical", "quantum"):
            raise ConfigurationError(f"unknown dataset kind {self.kind!r}")
        length = self.num_steps + 1
        if self.kind == "classical":
            records = [list(int(w) for w in rec) for rec in self.records]
            if any(len(rec) != length for rec in records):
                raise ConfigurationError("all records must have length T+1")
            if any(not 0 <= w < self.vocab_dim for rec in records for w in rec):
                raise ConfigurationError("word index outside the vocabulary")
        else:
            records = [np.array(rec, dtype=complex) for rec in self.records]
            for rec in records:
                if rec.shape != (length, self.vocab_dim):
                    raise ConfigurationError("quantum records must be (T+1, D) amplitude rows")
                if np.any(np.abs(np.linalg.norm(rec, axis=1) - 1.0) > 1e-10):
                    raise ConfigurationError("quantum record steps must have unit norm")
            for rec in records:
                rec.setflags(write=False)
        self.records = records

    def __len__(self) -> int:
        return len(self.records)

    def input_rows(self) -> np.ndarray:
        """(S, T+1, D) stacked one-hot rows or amplitude rows."""
        if self.kind == "classical":
            words = np.array(self.records, dtype=int)
            rows = np.zeros((*words.shape, self.vocab_dim))
            s, t = np.indices(words.shape)
            rows[s, t, words] = 1.0
            return rows
        return np.stack(self.records)


def generate_classical_dataset(
    vocab_dim: int, num_steps: int, count: int, seed: int, order: int = 2
) -> SequenceDataset:
    """Sequences from a seeded sparse row-stochastic Markov chain.

    Each transition row has ``order`` nonzero entries with normalized
    uniform weights; the initial word is uniform.
    """
    if count < 1:
        raise ConfigurationError("count must be at least 1")
    if vocab_dim < 2:
        raise ConfigurationError("vocabulary needs at least two words")
    if not 1 <= order <= vocab_dim:
        raise ConfigurationError("order must lie in 1..vocab_dim")
    rng = np.random.default_rng(seed)
    transition = np.zeros((vocab_dim, vocab_dim))
    for row in range(vocab_dim):
        support = rng.choice(vocab_dim, size=order, replace=False)
        weights = rng.random(order)
        transition[row, support] = weights / weights.sum()
    records = []
    for _ in range(count):
        word = int(rng.integers(vocab_dim))
        seq = [word]
        for _ in range(num_steps):
            word = int(rng.choice(vocab_dim, p=transition[word]))
            seq.append(word)
        records.append(seq)
    metadata = {"generator": {"type": "markov", "order": order, "transition": transition.tolist()}}
    return SequenceDataset("classical", vocab_dim, num_steps, seed, records, metadata)


def generate_quantum_dataset(
    model: IsingModel, num_steps: int, count: int, seed: int
) -> SequenceDataset:
    """Haar-random initial states evolved for unit time steps by eigendecomposition."""
    if count < 1:
        raise ConfigurationError("count must be at least 1")
    rng = np.random.default_rng(seed)
    evals, evecs = np.linalg.eigh(model.hamiltonian)
    records = []
    for _ in range(count):
        psi = rng.normal(size=model.dim) + 1j * rng.normal(size=model.dim)
        psi = psi / np.linalg.norm(psi)
        coords = evecs.conj().T @ psi
        steps = [evecs @ (np.exp(-1j * evals * time) * coords) for time in range(num_steps + 1)]
        records.append(np.stack(steps))
    metadata = {
        "generator": {
            "type": "ising",
            "num_qubits": model.num_qubits,
            "couplings": model.couplings.tolist(),
        }
    }
    return SequenceDataset("quantum", model.dim, num_steps, seed, records, metadata)


def dumps_dataset(dataset: SequenceDataset) -> str:
    """JSON Lines text: a header line followed by one record per line."""
    header = {
        "kind": dataset.kind,
        "D": dataset.vocab_dim,
        "T": dataset.num_steps,
        "seed": dataset.seed,
        "generator": dataset.metadata.get("generator", {}),
    }
    lines = [json.dumps(header)]
    for i, rec in enumerate(dataset.records):
        if dataset.kind == "classical":
            lines.append(json.dumps({"id": i, "words": rec}))
        else:
            steps = [[[float(a.real), float(a.imag)] for a in row] for row in rec]
            lines.append(json.dumps({"id": i, "steps": steps}))
    return "\n".join(lines) + "\n"


def loads_dataset(text: str) -> SequenceDataset:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ConfigurationError("dataset file is empty")
    header = json.loads(lines[0])
    kind = header["kind"]
    records = []
    for line in lines[1:]:
        obj = json.loads(line)
        if kind == "classical":
            records.append(obj["words"])
        else:
            records.append(
                np.array([[complex(re, im) for re, im in row] for row in obj["steps"]])
            )
    metadata = {"generator": header.get("generator", {})}
    return SequenceDataset(kind, header["D"], header["T"], header["seed"], records, metadata)


def save_dataset(dataset: SequenceDataset, path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    text = dumps_dataset(dataset)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def load_dataset(path) -> SequenceDataset:
    with open(path, "r", encoding="utf-8") as handle:
        return loads_dataset(handle.read())
