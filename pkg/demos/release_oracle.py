"""Gas released from a 1D trap: exact Hermite-state oracle against the hot-gas model.

Runs the oracle for one (k_B T / hbar omega, w / a0) pair and prints the
efficiency curves side by side.  Larger beams make the hot-gas model more
accurate; at w = 5 a0 its neglect of the free-expansion phase shows.

    python demos/release_oracle.py [kT_over_hw] [w_over_a0]
"""

import sys

import numpy as np

from spinwave.figures import release_comparison

kT = float(sys.argv[1]) if len(sys.argv) > 1 else 20.0
ratio = float(sys.argv[2]) if len(sys.argv) > 2 else 7.3

t, exact, n40, approx = release_comparison(kT, ratio, points=11)
print(f"k_B T / hbar omega = {kT:g}, w / a0 = {ratio:g}")
print(f"{'t (ms)':>8} {'oracle':>10} {'n<=40':>10} {'model':>10}")
for row in zip(t * 1e3, exact, n40, approx):
    print("{:8.2f} {:10.5f} {:10.5f} {:10.5f}".format(*row))
print(f"max relative deviation: {np.max(np.abs(exact - approx) / approx):.3f}")
