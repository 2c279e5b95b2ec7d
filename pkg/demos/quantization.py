"""
Return times are integers for unital walks
==========================================

A walker starts on node 0, the node is checked after every step, and we ask
how long it takes on average until the check succeeds. For channels that are
unital on the part of Hilbert space the walker can reach, the answer is the
dimension of that part.
"""

import numpy as np

import qrecur as qr

psi = qr.basis_state(6, 0)

# a random star graph; without decoherence only |+> and |-> are reachable
for d in (0.0, 0.1, 0.5, 1.0):
    ch = qr.star_channel(qr.random_star_spec(6, d, seed=1))
    a = qr.quantization_verdict(ch, psi)
    print(f"star d={d:<4}  T = {a.exact_T:.10f}   relevant dim = {a.relevant_dim}")

# a random mixture of unitaries on 4 levels is unital as well
rng = np.random.default_rng(0)
mix = qr.QuantumChannel([np.sqrt(w) * qr.cue_unitary(4, rng) for w in (0.3, 0.7)])
a = qr.quantization_verdict(mix, qr.basis_state(4, 0))
print(f"unitary mixture  T = {a.exact_T:.10f}   relevant dim = {a.relevant_dim}")

# population transfer breaks unitality and T is no longer an integer
ch = qr.build_channel({"family": "transfer", "M": 6, "target": 5, "d": 0.5, "unitary": "cue"}, seed=3)
a = qr.quantization_verdict(ch, psi)
print(f"transfer d=0.5   T = {a.exact_T:.10f}   psi-unital = {a.psi_unital}")

# the sum of all conditional states is the projector onto the reachable space
ch = qr.star_channel(qr.random_star_spec(6, 0.2, seed=1))
print("max |sum_t rho_cond(t) - I| =", np.abs(qr.tilde_rho(ch, psi) - np.eye(6)).max())
