"""
Population transfer on the complete graph
=========================================

A random CUE unitary is followed by incoherent transfer between one pair of
neighbouring sites. Depending on whether the transfer feeds node 0, drains
it, or happens elsewhere, the median return time falls, explodes or stays
put as the rate d approaches 1.

Pass a sample count on the command line (default 200).
"""

import sys

import qrecur as qr

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
cases = {"away from 0 (target 5)": 5, "toward 0 (target 0)": 0, "elsewhere (target 2)": 2}
grid = (0.1, 0.5, 0.9, 0.99)

for label, target in cases.items():
    spec = qr.EnsembleSpec(
        builder={"family": "transfer", "M": 6, "target": target, "unitary": "cue"},
        n_samples=n, seed=11, sweep_values=grid,
    )
    stats = qr.run_ensemble(spec)
    medians = "  ".join(f"d={p.value}: {p.median:8.3f}" for p in stats.points)
    print(f"{label:<24} {medians}")
