"""Predicting many-body quantum trajectories.

Generates transverse-field Ising evolutions by exact diagonalization,
verifies their conservation laws, and trains all three models to predict
the next state's amplitudes.
"""

import numpy as np

from qsalab import build_ising, generate_quantum_dataset
from qsalab.trainer import TrainConfig, train

EPOCHS = 15

model = build_ising(4, seed=51)
print("couplings J (symmetric, zero diagonal):")
print(np.round(model.couplings, 3))

dataset = generate_quantum_dataset(model, 4, 300, seed=52)
record = dataset.records[0]
norms = np.linalg.norm(record, axis=1)
energies = [np.vdot(step, model.hamiltonian @ step).real for step in record]
print("step norms           :", np.round(norms, 12))
print("step energies        :", np.round(energies, 10))

print(f"\ntraining on {len(dataset)} trajectories, {EPOCHS} epochs")
for kind in ("qsa", "scsa", "lcsa"):
    config = TrainConfig(model_kind=kind, epochs=EPOCHS, seed=1)
    _, report = train(config, dataset)
    print(
        f"{kind:>6}: loss {report.rows[0].train_loss_offset:.3f} -> "
        f"{report.rows[-1].train_loss_offset:.3f}, perplexity {report.rows[-1].perplexity:.3f}"
    )
