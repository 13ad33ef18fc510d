"""Inner product: upper bounds from public coins, and a lower bound by reduction.

The public-coin protocol guesses the last t bits of x, saving t bits at the
cost of error 1/2 - 2^(-t-1). Carrying its message by superdense coding halves
the cost again. The lower bound comes from running any clean IP protocol
forwards, phase-kicking the answer, and running it backwards: Bob ends up
holding x itself, so the transmission bound applies.
"""

from eacomm import ip

print("n  t  eps      bits  qubits  success  lower bound")
for n in (2, 3, 4):
    for t in range(1, n + 1):
        c = ip.classical_ip_protocol(n, t)
        q = ip.quantum_ip_protocol(n, t)
        print(f"{n}  {t}  {q.epsilon_target:.5f}  {c.bits:>4}  {q.quantum_qubits:>6}  "
              f"{str(c.min_success):>7}  {q.lower_bound_qubits:>6.3f}")

print("\nReduction from IP to transmission (n=2):")
for eps in (0.0, 0.05, 0.1):
    t, rep = ip.reduction_report(2, eps)
    print(f"  eps={eps}: worst-case recovery {rep.recovery_worst:.6f} "
          f"(expected {rep.expected:.6f}), average {rep.recovery_average:.6f}, "
          f"compiled protocol sends {t.m_A} + {t.m_B} qubits")
