"""Numerical tolerances and resource caps shared by every module."""

from types import SimpleNamespace

TOL = SimpleNamespace(
    unitary=1e-9,
    orthonormal=1e-9,
    norm=1e-9,
    reconstruction=1e-9,
    psd=1e-9,
    pinv_rel=1e-10,
    povm_sum=1e-8,
    certificate=1e-8,
    bound=1e-9,
    tight=1e-6,
)

# Dense statevectors only; 12 qubits is a 4096-dim vector.
MAX_QUBITS = 12

# randomUnitary refuses larger k unless the caller raises the cap.
MAX_RANDOM_UNITARY_QUBITS = 6
