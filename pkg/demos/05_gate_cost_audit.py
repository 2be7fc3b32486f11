"""Gate-cost models and where each encoding wins.

Prints the per-term counts, fits log-log scaling slopes against sequence
length and token dimension, and tabulates the cheapest variant over a
(T, d) grid.
"""

from qsalab.complexity import (
    count_gates,
    crossover_report,
    default_slope_rows,
)

print("term breakdown at T=16, d=4, D=16, L=5")
for variant in ("qsa-amplitude", "csa", "qsa-basis"):
    count = count_gates(variant, 16, 4, 16, 5)
    terms = ", ".join(f"{k}={v}" for k, v in count.terms.items())
    print(f"  {variant:>14}: total {count.total:>7}  ({terms})")

print("\nfitted log-log slopes (expected dominant exponents in parentheses)")
for row in default_slope_rows():
    print(
        f"  {row['variant']:>14} vs {row['axis']}: slope {row['slope']:.3f} "
        f"(expected {row['expected']:.0f})"
    )

print("\ncheapest variant per (T, d) at D=16, L=5")
t_values = (2, 8, 32, 128, 512, 2048)
d_values = (2, 8, 32, 128, 512, 2048)
rows = {(r["T"], r["d"]): r["winner"] for r in crossover_report(t_values, d_values, 16, 5)}
short = {"qsa-amplitude": "amp", "qsa-basis": "basis", "csa": "csa"}
header = "T \\ d " + "".join(f"{d:>8}" for d in d_values)
print(header)
for t in t_values:
    cells = "".join(f"{short.get(rows[(t, d)], rows[(t, d)]):>8}" for d in d_values)
    print(f"{t:>6}{cells}")

print("\nLong sequences favor amplitude encoding (linear in T); very large")
print("token dimensions favor basis encoding, which never touches d.")
