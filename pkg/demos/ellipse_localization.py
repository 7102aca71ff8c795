"""Where the ground state of an ellipse lives.

Tube eigenfunctions are computed in boundary coordinates, projected onto
the transverse ground states, and the projection |f(s)| is compared with
the curvature. Pass a directory to save a figure.
"""

import sys

import numpy as np

from robinweyl.geometry import make_ellipse
from robinweyl.robin2d import feshbach_diagnostics, fem_spectrum, tube_solve, RobinProblem

ellipse = make_ellipse(2.0, 1.0)
h = 0.01
# the projection needs delta * max kappa < 1/3, so the tube is thin and its
# Dirichlet wall lifts the eigenvalues well above the full-domain ones
res = tube_solve(ellipse, h, delta=0.15, n_eigs=2, keep_vectors=True)
diag = feshbach_diagnostics(res)
print("tube eigenvalues / h:", res.spectrum.eigenvalues / h)
print("mass outside the transverse ground states:", diag["orth_mass"])
peak = diag["sigma"][np.argmax(np.abs(diag["f"]))]
print(f"|f| peaks at s={peak:.4f}; curvature maxima at s=0 and s={ellipse.length / 2:.4f}")

# the full domain at a coarser h for comparison with the one-well picture
h2 = 0.1
mu = fem_spectrum(RobinProblem(ellipse, h2), 2).eigenvalues
print(f"\nFEM at h={h2}: (mu + h) / h^(3/2) = {(mu + h2) / h2**1.5}, against -max kappa = {-ellipse.kappa_max}")

if len(sys.argv) > 1:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    ax[0].plot(diag["sigma"], ellipse.curvature(diag["sigma"]))
    ax[0].set_ylabel("kappa(s)")
    ax[1].plot(diag["sigma"], np.abs(diag["f"]))
    ax[1].set_ylabel("|f(s)|")
    ax[1].set_xlabel("s")
    fig.tight_layout()
    fig.savefig(f"{sys.argv[1]}/ellipse_localization.png", dpi=120)
