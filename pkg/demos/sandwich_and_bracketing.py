"""Effective operators bound the disk eigenvalues; boundary tubes bound them from above.

The fitted constants C+ and C- are the smallest for which every eigenvalue
below -0.9 h lies between the perturbed effective operators. The tube
excess over the exact eigenvalue decays exponentially in delta / h^{1/2}.
"""

from robinweyl.weyl_lab import ExperimentConfig, bracketing_experiment, sandwich_experiment

report = sandwich_experiment(ExperimentConfig(h_grid=(0.1, 0.05, 0.02, 0.01)))
for key in ("C_plus", "C_minus", "C_fit", "violations", "violations_without_constants", "residual_constant"):
    print(f"{key:>30}: {report.summary[key]}")

report = bracketing_experiment(ExperimentConfig(h_grid=(0.05,)), [0.3, 0.5, 0.8])
print("\n delta  n  excess / |mu|")
for row in report.rows:
    if row["n"] in (1, 2):
        print(f"{row['delta']:>6} {row['n']:>2}  {row['excess'] / abs(row['mu']):.3e}")
print("fitted log-slopes in delta h^{-1/2}:", [round(s, 3) for s in report.summary["slopes"]])
