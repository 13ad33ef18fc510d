"""Superdense coding: two classical bits per qubit, and why that is the ceiling.

Alice and Bob share m EPR pairs. Alice flips X and/or Z on each of her halves
according to two message bits and sends the halves over. Bob undoes the Bell
basis and reads 2m bits perfectly. Since m_A = m qubits went across, the
bound 2^(2 m_A) / 2^n equals 1 and the protocol sits exactly on it.
"""

from eacomm.certificate import certify_protocol
from eacomm.coding import bell_decoder, bound_report, check_encoding_bound, superdense_protocol, superdense_scheme
from eacomm.dsl import format_protocol
from eacomm.model import messages, success_probability

p = superdense_protocol(1)
print("The one-pair protocol in .qcp form:\n")
print(format_protocol(p))

for m in (1, 2, 3):
    p = superdense_protocol(m)
    r = bound_report(success_probability(p), p.n, p.m_A)
    print(f"m={m}: n={p.n} bits, {p.m_A} qubits sent, success {r.success:.12f}, "
          f"bound {r.rhs}, margin {r.margin:+.1e}")

# The state-form certificate: the joint state is sum_a |a> Lam|phi_a> with
# Tr(Lam Lam^dag) = 4^{m_A}. One qubit sent means a trace of 4.
c, residual = certify_protocol(superdense_protocol(1), "11")
print(f"\nTr(Lam Lam^dag) = {c.trace():.12f} after one sent qubit "
      f"(reconstruction residual {residual:.1e})")

# The same thing seen as a one-shot encoding scheme, decoded with a Bell measurement.
rep = check_encoding_bound(superdense_scheme(1), bell_decoder(1))
print(f"Encoding-scheme view: success {rep.success:.12f}, tight={rep.tight}")
print(f"({len(list(messages(2)))} messages, all decoded with certainty)")
