"""
Truncated return times converge slowly near d = 0
=================================================

The exact return time on the decoherent star graph is 6 for every sample, but
the truncated value T^(L) gets there slowly when d is small. The decile band
over random hopping vectors shrinks as the horizon grows.

Pass a sample count on the command line (default 200).
"""

import sys

import qrecur as qr

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
spec = qr.EnsembleSpec(
    builder={"family": "star", "M": 6, "hoppings": "random"},
    n_samples=n, seed=3, sweep_values=(0.05, 0.2, 0.5, 1.0), horizons=(700, 7000, None),
)
stats = qr.run_ensemble(spec)

print(f"{'d':>5} {'L':>6} {'lower':>9} {'median':>9} {'upper':>9}")
for p in stats.points:
    L = "inf" if p.horizon is None else p.horizon
    print(f"{p.value:5.2f} {L:>6} {p.lower_decile:9.4f} {p.median:9.4f} {p.upper_decile:9.4f}")
