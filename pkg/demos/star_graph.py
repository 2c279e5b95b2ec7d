"""
First-return distributions on a star graph
==========================================

Node 0 is the centre of a six-node star. Without decoherence the walker only
sees the two-level space spanned by |+> and |->, so T = 2. Any amount of
dephasing opens up all six nodes and T jumps to 6, while the distribution
p_t changes shape smoothly.
"""

import numpy as np

import qrecur as qr

spec_rng = qr.make_rng(4)
hoppings = qr.sample_disk(spec_rng, 5)
psi = qr.basis_state(6, 0)

for d in (0.0, 0.1, 0.5):
    ch = qr.star_channel(qr.StarGraphSpec(tuple(hoppings), d))
    series = qr.return_series(ch, psi, 30)
    a, _ = qr.expected_return_spectral(ch, psi)
    head = " ".join(f"{x:.3f}" for x in series.p[:8])
    print(f"d={d}: p_1..p_8 = {head}")
    print(f"       T^(30) = {series.partial_T[-1]:.4f}, exact T = {a.exact_T:.6f}")

# the dark states never touch node 0, which is why they drop out at d = 0
spec = qr.StarGraphSpec(tuple(hoppings))
h = qr.star_hamiltonian(spec)
print("max |H psi_dark| =", max(np.linalg.norm(h @ s) for s in qr.dark_states(spec)))
