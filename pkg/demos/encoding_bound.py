"""One-way encodings over shared entanglement never beat 2^(2m) / 2^n.

Random encoders V_x act on Alice's E halves; she sends m of them. Bob's view of
message x is a mixture over 2^(E-m) orthonormal states (for EPR pairs) and is
built here in closed form, then checked against a full statevector run. The
pretty-good measurement gives a concrete decoder whose success is compared
against the bound.
"""

import numpy as np

from eacomm import linalg
from eacomm.coding import (bob_qubits, check_encoding_bound, epr_ensemble, general_ensemble,
                           scheme_protocol)
from eacomm.generators import random_scheme
from eacomm.model import int_to_bits, run_protocol

s = random_scheme(seed=1, E=3, m=1, n=3)
e = epr_ensemble(s, 5)
print(f"E=3, m=1: Bob's state for x=5 mixes {len(e.weights)} states, weights {e.weights}")
print(f"Gram deviation of those states from I: {linalg.gram_deviation(e.states):.1e}")

print("\nPGM success against the bound 4^m / 2^n:")
for m in range(4):
    rep = check_encoding_bound(random_scheme(seed=7, E=3, m=m, n=4))
    print(f"  m={m}: success {rep.success:.4f}  bound {rep.rhs:.4f}  margin {rep.margin:+.4f}")

# A lopsided shared state: the closed form still matches the simulator.
s = random_scheme(seed=3, E=2, m=1, n=2, uniform=False)
print(f"\nnon-uniform Schmidt coefficients {np.round(s.schmidt, 3)}")
p = scheme_protocol(s)
worst = 0.0
for x in range(4):
    ref = linalg.partial_trace(run_protocol(p, int_to_bits(x, 2)).vec, bob_qubits(s))
    worst = max(worst, float(np.max(np.abs(general_ensemble(s, x).density() - ref))))
print(f"largest entry difference vs simulator over all messages: {worst:.1e}")
