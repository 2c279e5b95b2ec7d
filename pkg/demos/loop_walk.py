"""
A loop walk with a nearly trivial unitary
=========================================

The unitary is generated by a weak random Hamiltonian, so almost nothing
happens coherently. Small d keeps the walker at home (p_1 close to 1) and
large d pushes it round the six-site loop (a peak at t = 6). The mean is 6
either way, since loop transfer is unital.
"""

import qrecur as qr

psi = qr.basis_state(6, 0)
for d in (0.05, 0.5, 0.95):
    cfg = {"family": "loop", "M": 6, "d": d,
           "unitary": {"family": "disk_hamiltonian", "radius": 0.1, "seed": 8}}
    ch = qr.build_channel(cfg)
    series = qr.return_series(ch, psi, 12)
    a, _ = qr.expected_return_spectral(ch, psi)
    bars = " ".join(f"{x:.2f}" for x in series.p)
    print(f"d={d:<5} p_t = {bars}   T = {a.exact_T:.8f}")
