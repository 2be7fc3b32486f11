"""Generative modelling of classical sequences.

Draws a Markov-chain dataset, trains the interference model and the two
classical baselines with the shared alpha = 1/2 loss, and compares their
training curves and held-out perplexities.

A full-quality run uses epochs=100 (see the README); this demo trims the
budget to stay interactive.
"""

from qsalab import generate_classical_dataset
from qsalab.trainer import TrainConfig, evaluate, train

EPOCHS = 25

train_set = generate_classical_dataset(10, 4, 300, seed=7, order=2)
test_sets = [
    generate_classical_dataset(10, 4, 100, seed=s, order=2) for s in (101, 102, 103, 104, 105)
]

print(f"{'model':>6} {'loss@0':>8} {'loss@' + str(EPOCHS):>8} {'perplexity':>10} {'test mean +- sd':>18}")
for kind in ("qsa", "scsa", "lcsa"):
    config = TrainConfig(model_kind=kind, epochs=EPOCHS, seed=1)
    params, report = train(config, train_set)
    held_out = evaluate(params, test_sets)
    print(
        f"{kind:>6} {report.rows[0].train_loss_offset:8.3f} "
        f"{report.rows[-1].train_loss_offset:8.3f} {report.rows[-1].perplexity:10.3f} "
        f"{held_out.test_perplexity_mean:10.3f} +- {held_out.test_perplexity_stdev:.3f}"
    )

print("\nLoss columns are the alpha = 1/2 loss without its additive log T")
print("constant; perplexity is exp of that loss (an uninformed model scores")
print("the vocabulary size, here 10).")
