"""Counting negative Robin eigenvalues on the unit disk.

On a disk the spectrum separates into angular modes; every mode
m <= h^{-1/2} carries exactly one negative eigenvalue. The count is then
compared with the boundary operators h L (Laplace-Beltrami) and
h^{1/2} L - kappa, and with their phase-space volumes.
"""

from robinweyl.weyl_lab import ExperimentConfig, report_csv, theorem1_experiment, theorem2_experiment
from robinweyl.robin2d import disk_negative_spectrum

h = 0.01
spec = disk_negative_spectrum(1.0, h)
print(f"h={h}: {len(spec)} negative eigenvalues; lowest modes")
for root in spec.meta["roots"][:4]:
    print(f"  m={root.m}: mu/h = {root.eigenvalue / h:.6f} (x{root.multiplicity})")

grid = (1e-2, 1e-3, 1e-4)
print("\nnonpositive eigenvalues against h L <= 1:")
print(report_csv(theorem2_experiment(ExperimentConfig(h_grid=grid))))
print("eigenvalues below -h + h^{3/2} against h^{1/2} L - kappa <= 1:")
print(report_csv(theorem1_experiment(ExperimentConfig(h_grid=grid, E=1.0))))
