"""End-to-end optimization for the three sequence models.

Gradient assembly (shift rule for circuit angles, central differences for
everything else), adaptive-moment updates, per-epoch loss reporting, and
versioned JSON checkpoints.  Runs are deterministic for a fixed (config,
seed, dataset) triple: reductions happen in fixed order and the optional
thread pool writes results by index.

Reported quantities: ``train_loss_offset`` is the comparable per-epoch loss
(the interference loss without its additive log T constant, which for the
baselines is the divergence-formula value itself); ``train_loss`` adds the
log T constant back; ``perplexity`` is exp of the offset loss.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .ansatz import AnsatzParams, PhaseLayerParams, build_ansatz_unitary, phase_layer_diagonal
from .classical import LcsaParams, ScsaParams, lcsa_forward_batch, linear_attention_layer, scsa_forward_batch
from .data import EmbeddingMap, SequenceDataset, embed_batch, make_embedding
from .engine import EXPECTATION_FLOOR, QsaInstance, batched_expectations, circuit_expectation, predict_token_state
from .errors import (
    CheckpointFormatError,
    CompatibilityError,
    ConfigurationError,
    NumericFailureError,
    UnsupportedVersionError,
)
from .objectives import PROBABILITY_FLOOR

THREADS_ENV = "QSALAB_THREADS"
CHECKPOINT_VERSION = 1
MODEL_KINDS = ("qsa", "scsa", "lcsa")
CSV_HEADER = "epoch,train_loss_offset,train_loss,perplexity,grad_norm,seconds"


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; defaults match the bundled benchmark tasks."""

    model_kind: str = "qsa"
    epochs: int = 100
    learning_rate: float = 0.05
    embedding_learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    gradient_mode: str = "parameter-shift"
    shots: int | None = None
    embedding_trainable: bool = True
    embed_dim: int = 4
    num_layers: int = 5
    gamma: float = 0.1
    key_dim: int | None = None
    ffn_hidden: int | None = None
    expectation_route: str = "analytic"
    fd_step: float = 1e-4
    record_timing: bool = False

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigurationError(f"model_kind must be one of {MODEL_KINDS}")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be non-negative")
        if self.learning_rate <= 0 or self.embedding_learning_rate <= 0:
            raise ConfigurationError("learning rates must be positive")
        if self.gradient_mode not in ("parameter-shift", "finite-difference"):
            raise ConfigurationError("gradient_mode must be parameter-shift or finite-difference")
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError("shots must be a positive integer when set")
        if self.expectation_route not in ("analytic", "circuit"):
            raise ConfigurationError("expectation_route must be analytic or circuit")
        if self.fd_step <= 0:
            raise ConfigurationError("fd_step must be positive")


@dataclass(frozen=True)
class ModelParams:
    """All trainable state for one model: embedding plus kind-specific parts."""

    model_kind: str
    embedding: EmbeddingMap
    v_params: AnsatzParams | None = None
    w_params: AnsatzParams | None = None
    r_params: PhaseLayerParams | None = None
    scsa: ScsaParams | None = None
    lcsa: LcsaParams | None = None

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigurationError(f"model_kind must be one of {MODEL_KINDS}")
        if self.model_kind == "qsa" and None in (self.v_params, self.w_params, self.r_params):
            raise ConfigurationError("qsa params need v, w, and phase-layer angles")
        if self.model_kind == "scsa" and self.scsa is None:
            raise ConfigurationError("scsa params missing")
        if self.model_kind == "lcsa" and self.lcsa is None:
            raise ConfigurationError("lcsa params missing")


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    train_loss_offset: float
    train_loss: float
    perplexity: float
    grad_norm: float
    seconds: float


@dataclass
class LossReport:
    """Per-epoch training curve and, after evaluation, test-set aggregates."""

    rows: list = field(default_factory=list)
    log_offset: float = 0.0
    clamp_events: int = 0
    test_perplexity_mean: float | None = None
    test_perplexity_stdev: float | None = None
    per_set: list | None = None

    def to_csv_text(self) -> str:
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.epoch},{_fmt(row.train_loss_offset)},{_fmt(row.train_loss)},"
                f"{_fmt(row.perplexity)},{_fmt(row.grad_norm)},{_fmt(row.seconds)}"
            )
        return "\n".join(lines) + "\n"

    def final_loss_offset(self) -> float:
        if not self.rows:
            raise ConfigurationError("report holds no epochs")
        return self.rows[-1].train_loss_offset


def _fmt(value: float) -> str:
    return repr(float(value))


def _to_real_vector(arrays: Sequence[np.ndarray]) -> np.ndarray:
    parts = []
    for arr in arrays:
        arr = np.ascontiguousarray(arr)
        if np.iscomplexobj(arr):
            parts.append(arr.view(np.float64).ravel())
        else:
            parts.append(arr.astype(np.float64).ravel())
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def _from_real_vector(vector: np.ndarray, templates: Sequence[np.ndarray]) -> list:
    out = []
    pos = 0
    for tmpl in templates:
        count = tmpl.size * (2 if np.iscomplexobj(tmpl) else 1)
        chunk = np.ascontiguousarray(vector[pos : pos + count], dtype=np.float64)
        pos += count
        if np.iscomplexobj(tmpl):
            out.append(chunk.view(np.complex128).reshape(tmpl.shape))
        else:
            out.append(chunk.reshape(tmpl.shape))
    return out


class _Adam:
    """Plain adaptive-moment estimation over a flat parameter vector."""

    def __init__(self, size: int, lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def update(self, values: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return values - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def initialize_params(config: TrainConfig, dataset: SequenceDataset) -> ModelParams:
    """Seeded near-identity initialization consistent with the dataset kind."""
    _check_compat(config, dataset)
    children = np.random.SeedSequence(config.seed).spawn(4)
    complex_valued = dataset.kind == "quantum"
    embedding = make_embedding(
        dataset.vocab_dim,
        config.embed_dim,
        dataset.num_steps + 1,
        children[0],
        complex_valued=complex_valued,
        gamma=config.gamma,
    )
    if config.model_kind == "qsa":
        n = int(config.embed_dim).bit_length() - 1
        t = int(dataset.num_steps).bit_length() - 1
        return ModelParams(
            "qsa",
            embedding,
            v_params=AnsatzParams.random(n, config.num_layers, children[1]),
            w_params=AnsatzParams.random(n, config.num_layers, children[2]),
            r_params=PhaseLayerParams.random(t, children[3]),
        )
    if config.model_kind == "scsa":
        return ModelParams(
            "scsa",
            embedding,
            scsa=ScsaParams.random(
                config.embed_dim,
                dataset.vocab_dim,
                children[1],
                key_dim=config.key_dim,
                hidden_dim=config.ffn_hidden,
                complex_valued=complex_valued,
            ),
        )
    return ModelParams(
        "lcsa",
        embedding,
        lcsa=LcsaParams.near_identity(config.embed_dim, children[1], complex_valued=complex_valued),
    )


def _check_compat(config: TrainConfig, dataset: SequenceDataset) -> None:
    if len(dataset) == 0:
        raise ConfigurationError("dataset holds no records")
    if config.embed_dim >= dataset.vocab_dim:
        raise ConfigurationError("embed_dim must be smaller than the vocabulary dimension")
    if config.model_kind == "qsa":
        d, t_steps = config.embed_dim, dataset.num_steps
        if d & (d - 1) or d < 2:
            raise ConfigurationError("qsa needs a power-of-two embed_dim >= 2")
        if t_steps & (t_steps - 1) or t_steps < 2:
            raise ConfigurationError("qsa needs a power-of-two step count >= 2")


class _Adapter:
    """Batched loss/gradient machinery bound to one (params, dataset) pair."""

    def __init__(self, params: ModelParams, dataset: SequenceDataset, config: TrainConfig | None):
        self.kind = params.model_kind
        self.config = config
        self.num_steps = dataset.num_steps
        self.inputs = dataset.input_rows()
        self.template = params
        quantum_data = dataset.kind == "quantum"
        complex_embedding = np.iscomplexobj(params.embedding.matrix)
        if quantum_data != complex_embedding:
            raise CompatibilityError(
                f"{'complex' if complex_embedding else 'real'}-embedding model does not fit "
                f"a {dataset.kind} dataset"
            )
        if params.embedding.vocab_dim != dataset.vocab_dim:
            raise CompatibilityError(
                f"model vocabulary {params.embedding.vocab_dim} != dataset {dataset.vocab_dim}"
            )
        if self.kind == "qsa":
            steps = dataset.num_steps
            if steps & (steps - 1) or steps < 2:
                raise CompatibilityError("qsa model needs a power-of-two step count >= 2")
            self._circuit_templates = [
                np.asarray(params.v_params.angles),
                np.asarray(params.w_params.angles),
                np.asarray(params.r_params.angles),
            ]
        elif self.kind == "scsa":
            p = params.scsa
            self._circuit_templates = [
                np.asarray(p.w_query), np.asarray(p.w_key), np.asarray(p.w_value),
                np.asarray(p.ffn_in), np.asarray(p.ffn_out), np.asarray(p.anti_embed),
            ]
        else:
            p = params.lcsa
            self._circuit_templates = [np.asarray(p.value_map), np.asarray(p.affinity_map)]
        self._embed_templates = [np.asarray(params.embedding.matrix)]

    # parameter vector plumbing -------------------------------------------------

    def circuit_vector(self, params: ModelParams) -> np.ndarray:
        if self.kind == "qsa":
            arrays = [params.v_params.angles, params.w_params.angles, params.r_params.angles]
        elif self.kind == "scsa":
            p = params.scsa
            arrays = [p.w_query, p.w_key, p.w_value, p.ffn_in, p.ffn_out, p.anti_embed]
        else:
            arrays = [params.lcsa.value_map, params.lcsa.affinity_map]
        return _to_real_vector(arrays)

    def embed_vector(self, params: ModelParams) -> np.ndarray:
        return _to_real_vector([params.embedding.matrix])

    def rebuild(self, circuit_vec: np.ndarray, embed_vec: np.ndarray) -> ModelParams:
        embedding = self.template.embedding.with_matrix(
            _from_real_vector(embed_vec, self._embed_templates)[0]
        )
        parts = _from_real_vector(circuit_vec, self._circuit_templates)
        if self.kind == "qsa":
            return replace(
                self.template,
                embedding=embedding,
                v_params=replace(self.template.v_params, angles=parts[0]),
                w_params=replace(self.template.w_params, angles=parts[1]),
                r_params=PhaseLayerParams(parts[2]),
            )
        if self.kind == "scsa":
            return replace(
                self.template,
                embedding=embedding,
                scsa=ScsaParams(*parts),
            )
        return replace(self.template, embedding=embedding, lcsa=LcsaParams(*parts))

    # loss evaluation -----------------------------------------------------------

    def _embedding(self, embed_vec: np.ndarray) -> EmbeddingMap:
        return self.template.embedding.with_matrix(
            _from_real_vector(embed_vec, self._embed_templates)[0]
        )

    def _qsa_expectations(self, circuit_vec: np.ndarray, embed_vec: np.ndarray) -> np.ndarray:
        emap = self._embedding(embed_vec)
        parts = _from_real_vector(circuit_vec, self._circuit_templates)
        v_params = replace(self.template.v_params, angles=parts[0])
        w_params = replace(self.template.w_params, angles=parts[1])
        r_params = PhaseLayerParams(parts[2])
        x, shift_free = embed_batch(self.inputs, emap)
        tok = x[:, : self.num_steps]
        tgt = shift_free[:, 1:]
        tok = tok / np.linalg.norm(tok, axis=-1, keepdims=True)
        tgt = tgt / np.linalg.norm(tgt, axis=-1, keepdims=True)
        if self.config is not None and self.config.expectation_route == "circuit":
            exps = np.array(
                [
                    circuit_expectation(
                        QsaInstance.from_vectors(x[s], shift_free[s, 1:], v_params, w_params, r_params)
                    )
                    for s in range(x.shape[0])
                ]
            )
        else:
            exps = batched_expectations(
                tok, tgt,
                build_ansatz_unitary(v_params).matrix,
                build_ansatz_unitary(w_params).matrix,
                phase_layer_diagonal(r_params),
            )
        if self.config is not None and self.config.shots:
            exps = self._sample(exps, circuit_vec, embed_vec)
        return exps

    def _sample(self, exps: np.ndarray, circuit_vec: np.ndarray, embed_vec: np.ndarray) -> np.ndarray:
        # Seed derived from parameter content keeps shot noise reproducible
        # and thread-safe.
        digest = zlib.crc32(circuit_vec.tobytes()) ^ zlib.crc32(embed_vec.tobytes())
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, digest]))
        clipped = np.clip(exps, 0.0, 1.0)
        return rng.binomial(self.config.shots, clipped) / self.config.shots

    def sequence_losses(self, circuit_vec: np.ndarray, embed_vec: np.ndarray):
        """Per-sequence offset losses and the count of floored probabilities."""
        if self.kind == "qsa":
            exps = self._qsa_expectations(circuit_vec, embed_vec)
            clamped = int(np.sum(exps < EXPECTATION_FLOOR))
            return -np.log(np.maximum(exps, EXPECTATION_FLOOR)), clamped
        emap = self._embedding(embed_vec)
        parts = _from_real_vector(circuit_vec, self._circuit_templates)
        if self.kind == "scsa":
            _, probs = scsa_forward_batch(self.inputs, emap, ScsaParams(*parts))
            ratios = probs
        else:
            x, shift_free = embed_batch(self.inputs, emap)
            values, normalizers = lcsa_forward_batch(x, shift_free, LcsaParams(*parts))
            ratios = values / normalizers
        clamped = int(np.sum(ratios < PROBABILITY_FLOOR))
        ratios = np.clip(ratios, PROBABILITY_FLOOR, 1.0)
        # Divergence-formula loss at alpha = 1/2, without the log T constant
        # the circuit would add.
        losses = -2.0 * np.log(np.sum(np.sqrt(ratios), axis=-1)) + 2.0 * np.log(self.num_steps)
        return losses, clamped

    def mean_loss(self, circuit_vec: np.ndarray, embed_vec: np.ndarray):
        losses, clamped = self.sequence_losses(circuit_vec, embed_vec)
        return float(np.mean(losses)), clamped

    # gradients -----------------------------------------------------------------

    def gradients(self, circuit_vec: np.ndarray, embed_vec: np.ndarray):
        config = self.config
        if config is None:
            raise ConfigurationError("gradients need a training configuration")
        cap = _thread_cap()
        if self.kind == "qsa" and config.gradient_mode == "parameter-shift":
            base = self._qsa_expectations(circuit_vec, embed_vec)
            scale = np.where(base > EXPECTATION_FLOOR, -1.0 / np.maximum(base, EXPECTATION_FLOOR), 0.0)

            def shift_task(i: int) -> float:
                plus = circuit_vec.copy()
                minus = circuit_vec.copy()
                plus[i] += np.pi / 2
                minus[i] -= np.pi / 2
                delta = self._qsa_expectations(plus, embed_vec) - self._qsa_expectations(minus, embed_vec)
                return float(np.mean(scale * delta / 2.0))

            grad_circuit = _map_indices(shift_task, circuit_vec.size, cap)
        else:
            def fd_circuit(i: int) -> float:
                return self._central_difference(circuit_vec, embed_vec, i, True)

            grad_circuit = _map_indices(fd_circuit, circuit_vec.size, cap)

        if config.embedding_trainable:
            def fd_embed(i: int) -> float:
                return self._central_difference(circuit_vec, embed_vec, i, False)

            grad_embed = _map_indices(fd_embed, embed_vec.size, cap)
        else:
            grad_embed = np.zeros(embed_vec.size)
        return grad_circuit, grad_embed

    def _central_difference(self, circuit_vec, embed_vec, index: int, circuit_side: bool) -> float:
        h = self.config.fd_step
        if circuit_side:
            plus, minus = circuit_vec.copy(), circuit_vec.copy()
            plus[index] += h
            minus[index] -= h
            hi, _ = self.mean_loss(plus, embed_vec)
            lo, _ = self.mean_loss(minus, embed_vec)
        else:
            plus, minus = embed_vec.copy(), embed_vec.copy()
            plus[index] += h
            minus[index] -= h
            hi, _ = self.mean_loss(circuit_vec, plus)
            lo, _ = self.mean_loss(circuit_vec, minus)
        return (hi - lo) / (2.0 * h)


def _map_indices(task, size: int, cap: int) -> np.ndarray:
    out = np.zeros(size)
    if cap > 1 and size > 1:
        with ThreadPoolExecutor(max_workers=min(cap, size)) as pool:
            for i, value in enumerate(pool.map(task, range(size))):
                out[i] = value
    else:
        for i in range(size):
            out[i] = task(i)
    return out


def train(config: TrainConfig, dataset: SequenceDataset) -> tuple[ModelParams, LossReport]:
    """Optimize from a seeded initialization; rows cover epochs 0..epochs.

    Row e reports the loss and gradient at the parameters after e updates,
    so row 0 is the untouched initialization and the last row matches a
    forward-only evaluation of the returned parameters.
    """
    _check_compat(config, dataset)
    params = initialize_params(config, dataset)
    log_offset = math.log(dataset.num_steps)
    if config.epochs == 0:
        return params, LossReport(rows=[], log_offset=log_offset)
    adapter = _Adapter(params, dataset, config)
    circuit_vec = adapter.circuit_vector(params)
    embed_vec = adapter.embed_vector(params)
    adam_circuit = _Adam(circuit_vec.size, config.learning_rate, config.beta1, config.beta2, config.epsilon)
    adam_embed = _Adam(embed_vec.size, config.embedding_learning_rate, config.beta1, config.beta2, config.epsilon)
    rows = []
    clamp_total = 0
    for epoch in range(config.epochs + 1):
        started = time.perf_counter()
        loss, clamped = adapter.mean_loss(circuit_vec, embed_vec)
        clamp_total += clamped
        if not math.isfinite(loss):
            raise NumericFailureError(
                f"non-finite loss at epoch {epoch}",
                diagnostic={
                    "epoch": epoch,
                    "loss": repr(loss),
                    "model_kind": config.model_kind,
                    "circuit_norm": float(np.linalg.norm(circuit_vec)),
                    "embedding_norm": float(np.linalg.norm(embed_vec)),
                },
            )
        grad_circuit, grad_embed = adapter.gradients(circuit_vec, embed_vec)
        grad_norm = float(np.sqrt(np.sum(grad_circuit ** 2) + np.sum(grad_embed ** 2)))
        seconds = time.perf_counter() - started if config.record_timing else 0.0
        rows.append(
            EpochRow(epoch, loss, loss + log_offset, math.exp(loss), grad_norm, seconds)
        )
        if epoch == config.epochs:
            break
        circuit_vec = adam_circuit.update(circuit_vec, grad_circuit)
        if config.embedding_trainable:
            embed_vec = adam_embed.update(embed_vec, grad_embed)
    trained = adapter.rebuild(circuit_vec, embed_vec)
    return trained, LossReport(rows=rows, log_offset=log_offset, clamp_events=clamp_total)


def evaluate(params: ModelParams, datasets) -> LossReport:
    """Forward-only losses; aggregates perplexity mean and stdev across sets."""
    if isinstance(datasets, SequenceDataset):
        datasets = [datasets]
    datasets = list(datasets)
    if not datasets or any(len(ds) == 0 for ds in datasets):
        raise ConfigurationError("evaluation needs at least one non-empty dataset")
    per_set = []
    for ds in datasets:
        adapter = _Adapter(params, ds, None)
        loss, clamped = adapter.mean_loss(adapter.circuit_vector(params), adapter.embed_vector(params))
        per_set.append(
            {
                "loss_offset": loss,
                "loss": loss + math.log(ds.num_steps),
                "perplexity": math.exp(loss),
                "clamped": clamped,
            }
        )
    perps = np.array([entry["perplexity"] for entry in per_set])
    report = LossReport(
        rows=[],
        log_offset=math.log(datasets[0].num_steps),
        clamp_events=sum(entry["clamped"] for entry in per_set),
        test_perplexity_mean=float(np.mean(perps)),
        test_perplexity_stdev=float(np.std(perps, ddof=1)) if len(perps) > 1 else 0.0,
        per_set=per_set,
    )
    return report


def predict_topk(params: ModelParams, dataset: SequenceDataset, k: int = 3) -> list:
    """Per sequence and step, the top-k vocabulary indices with their scores.

    Scores are squared overlaps with the embedded vocabulary for qsa/lcsa
    and the softmax vocabulary distribution for scsa.  Ties break toward
    the lowest word index.
    """
    if k < 1:
        raise ConfigurationError("k must be at least 1")
    adapter = _Adapter(params, dataset, None)
    emap = params.embedding
    candidates = emap.matrix.T  # row per word
    cand_norms = np.linalg.norm(candidates, axis=1)
    if np.any(cand_norms <= 1e-12):
        raise ConfigurationError("a vocabulary column embeds to the zero vector")
    cand_unit = candidates / cand_norms[:, None]
    inputs = adapter.inputs
    x, shift_free = embed_batch(inputs, emap)
    results = []
    if params.model_kind == "scsa":
        distributions, _ = scsa_forward_batch(inputs, emap, params.scsa)
    for s in range(inputs.shape[0]):
        steps = []
        if params.model_kind == "qsa":
            instance = QsaInstance.from_vectors(
                x[s], shift_free[s, 1:], params.v_params, params.w_params, params.r_params
            )
        for j in range(1, dataset.num_steps + 1):
            if params.model_kind == "qsa":
                state, _ = predict_token_state(instance, j)
                scores = np.abs(cand_unit.conj() @ state.amplitudes) ** 2
            elif params.model_kind == "lcsa":
                z = linear_attention_layer(list(x[s]), params.lcsa, j)
                z = z / np.linalg.norm(z)
                scores = np.abs(cand_unit.conj() @ z) ** 2
            else:
                scores = distributions[s, j - 1]
            order = np.lexsort((np.arange(scores.size), -scores))[:k]
            steps.append(
                {
                    "position": j + 1,
                    "top": [
                        {"word": int(w), "score": float(scores[w])} for w in order
                    ],
                }
            )
        results.append({"id": s, "steps": steps})
    return results


# checkpoint codec ----------------------------------------------------------------


def config_hash(config: TrainConfig) -> str:
    canonical = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _encode_array(arr: np.ndarray) -> dict:
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        data = np.ascontiguousarray(arr, dtype=np.complex128).view(np.float64).ravel()
        return {"shape": list(arr.shape), "complex": True, "data": [float(v) for v in data]}
    return {
        "shape": list(arr.shape),
        "complex": False,
        "data": [float(v) for v in np.asarray(arr, dtype=np.float64).ravel()],
    }


def _decode_array(obj: dict) -> np.ndarray:
    data = np.array(obj["data"], dtype=np.float64)
    if obj["complex"]:
        return data.view(np.complex128).reshape(obj["shape"])
    return data.reshape(obj["shape"])


def params_to_payload(params: ModelParams) -> dict:
    payload = {
        "model_kind": params.model_kind,
        "embedding": {
            "matrix": _encode_array(params.embedding.matrix),
            "shifts": _encode_array(params.embedding.shifts),
            "gamma": float(params.embedding.gamma),
        },
    }
    if params.model_kind == "qsa":
        payload["qsa"] = {
            "v": _ansatz_payload(params.v_params),
            "w": _ansatz_payload(params.w_params),
            "r": {"angles": _encode_array(params.r_params.angles)},
        }
    elif params.model_kind == "scsa":
        p = params.scsa
        payload["scsa"] = {
            name: _encode_array(getattr(p, name))
            for name in ("w_query", "w_key", "w_value", "ffn_in", "ffn_out", "anti_embed")
        }
    else:
        payload["lcsa"] = {
            "value_map": _encode_array(params.lcsa.value_map),
            "affinity_map": _encode_array(params.lcsa.affinity_map),
        }
    return payload


def _ansatz_payload(p: AnsatzParams) -> dict:
    return {
        "num_qubits": p.num_qubits,
        "num_layers": p.num_layers,
        "real_valued": p.real_valued,
        "angles": _encode_array(p.angles),
    }


def _ansatz_from_payload(obj: dict) -> AnsatzParams:
    return AnsatzParams(
        obj["num_qubits"], obj["num_layers"], _decode_array(obj["angles"]), obj["real_valued"]
    )


def params_from_payload(payload: dict) -> ModelParams:
    emb = payload["embedding"]
    embedding = EmbeddingMap(_decode_array(emb["matrix"]), _decode_array(emb["shifts"]), emb["gamma"])
    kind = payload["model_kind"]
    if kind == "qsa":
        q = payload["qsa"]
        return ModelParams(
            "qsa",
            embedding,
            v_params=_ansatz_from_payload(q["v"]),
            w_params=_ansatz_from_payload(q["w"]),
            r_params=PhaseLayerParams(_decode_array(q["r"]["angles"])),
        )
    if kind == "scsa":
        s = payload["scsa"]
        return ModelParams(
            "scsa",
            embedding,
            scsa=ScsaParams(*[_decode_array(s[name]) for name in
                              ("w_query", "w_key", "w_value", "ffn_in", "ffn_out", "anti_embed")]),
        )
    return ModelParams(
        "lcsa",
        embedding,
        lcsa=LcsaParams(_decode_array(payload["lcsa"]["value_map"]),
                        _decode_array(payload["lcsa"]["affinity_map"])),
    )


def checkpoint_document(params: ModelParams, config: TrainConfig, data_kind: str) -> dict:
    return {
        "version": CHECKPOINT_VERSION,
        "model_kind": params.model_kind,
        "data_kind": data_kind,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "params": params_to_payload(params),
    }


def save_checkpoint(params: ModelParams, config: TrainConfig, data_kind: str, path) -> None:
    text = json.dumps(checkpoint_document(params, config, data_kind), sort_keys=True)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def load_checkpoint(path, expected_kind: str | None = None) -> tuple[ModelParams, dict]:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise CheckpointFormatError("checkpoint is missing its version field")
    if doc["version"] != CHECKPOINT_VERSION:
        raise UnsupportedVersionError(
            f"checkpoint version {doc['version']} is not supported (expected {CHECKPOINT_VERSION})"
        )
    if expected_kind is not None and doc["model_kind"] != expected_kind:
        raise CompatibilityError(
            f"checkpoint holds a {doc['model_kind']} model, expected {expected_kind}"
        )
    params = params_from_payload(doc["params"])
    meta = {key: doc[key] for key in ("model_kind", "data_kind", "config_hash", "seed")}
    return params, meta


def checkpoint_roundtrip(params: ModelParams) -> ModelParams:
    """Serialize through the JSON codec and back; bit-exact by construction."""
    return params_from_payload(json.loads(json.dumps(params_to_payload(params))))
