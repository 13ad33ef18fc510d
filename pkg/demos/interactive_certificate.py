"""Interaction does not help: a round-by-round look at the certificate.

A random three-round protocol sends qubits both ways. After every round the
joint state is rebuilt from the pair (Lam, {phi_a}) and compared with the
simulator. Tr(Lam Lam^dag) tracks 4^{m_A}: it grows only when Alice sends.
Swapping every one of Alice's gates for a different random unitary leaves Lam
untouched, because Lam is built from Bob's operations alone.
"""

import numpy as np

from eacomm.certificate import certify_prefixes, replace_alice_unitaries
from eacomm.coding import bound_rhs
from eacomm.generators import random_protocol
from eacomm.model import success_probability

p = random_protocol(seed=11, n=3, m_A=2, m_B=2, rounds=3, schmidt="random", structured=False)
print(f"{p.num_qubits} qubits, E={p.E}, rounds: {[r.actor for r in p.rounds]}")
print(f"{'after':>10} {'m_A':>4} {'m_B':>4} {'Tr':>10} {'residual':>10}")
runs = certify_prefixes(p, "101")
labels = ["share"] + [f"{r.actor}" for r in p.rounds]
for lab, (c, res) in zip(labels, runs):
    print(f"{lab:>10} {c.m_A:>4} {c.m_B:>4} {c.trace():>10.6f} {res:>10.1e}")

q = replace_alice_unitaries(p, seed=99)
a, b = certify_prefixes(p, "101")[-1][0], certify_prefixes(q, "101")[-1][0]
print(f"\nLam change after replacing Alice's gates: {np.max(np.abs(a.lam - b.lam)):.1e}")

s = success_probability(p)
print(f"success {s:.4f} <= bound {bound_rhs(p.n, p.m_A):.4f}")
