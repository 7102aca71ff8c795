"""From the half-line to a finite interval and a weighted interval.

The transverse problem -u'' on (0, T) with u'(0) = -u(0) and u(T) = 0 has a
single negative eigenvalue -w^2, w = tanh(w T), which approaches the
half-line value -1 exponentially fast. Its positive eigenvalues solve
tan(w T) = w. Tilting the measure by (1 - B tau) moves the ground energy
linearly, with slope -1.
"""

import math

from robinweyl.oned_models import (
    OneDParams,
    ground_energy_slope,
    halfline_ground,
    interval_ground,
    interval_positive_eigenvalues,
    weighted_spectrum,
)

energy, u0 = halfline_ground()
print("half-line ground energy:", energy, " u0(0) =", u0(0.0))

print("\nT      lambda_1 + 1        4 exp(-2T)")
for T in (2.0, 4.0, 6.0, 10.0):
    print(f"{T:<6g} {interval_ground(T) + 1:<19.6e} {4 * math.exp(-2 * T):.6e}")

T = 5.0
print(f"\npositive eigenvalues at T={T:g}, with the window ((n-1) pi/T, (2n-1) pi/2T) for sqrt(lambda_n):")
for n, lam in enumerate(interval_positive_eigenvalues(T, 6), start=2):
    lo, hi = (n - 1) * math.pi / T, (2 * n - 1) * math.pi / (2 * T)
    print(f"  n={n}: sqrt(lambda)={math.sqrt(lam):.6f} in ({lo:.6f}, {hi:.6f})")

print("\nweighted interval, T=20:")
for B in (-1e-2, -1e-3, 1e-3, 1e-2):
    lam = weighted_spectrum(OneDParams(20.0, B)).eigenvalues[0]
    print(f"  B={B:+.0e}: lambda_1={lam:.12f}, (lambda_1 + 1 + B)/B^2 = {(lam + 1 + B) / B**2:.4f}")
print("  d lambda_1 / dB at B=0:", ground_energy_slope(20.0))
