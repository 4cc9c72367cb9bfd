"""Reference numpy implementation of the dense master-equation kernel.

The compiled extension (`_fast`) implements the same function; either one is
selected at import time by `noisyqec._kernels`.

The kernel advances a density matrix through one evolution segment with a
constant Hamiltonian and a Pauli dissipator

    drho/dt = -i[H, rho] + kappa * sum_j (P_j rho P_j - rho)

where each P_j is a (signed) qubit-permutation operator described by an
index permutation and a phase vector: (P rho P)[x, y] =
phase[x] * conj(phase[y]) * rho[perm[x], perm[y]].  Dephasing uses n such
operators per register, isotropic noise 3n, and the noiseless case zero.

Integration is fixed-step fifth-order Runge-Kutta (Dormand-Prince weights,
six stages) with Hermiticity re-symmetrization after every step.
"""

import numpy as np

DOPRI_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
)
DOPRI_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)


def _rhs(rho, H, perms, phase_outers, kappa):
    out = -1j * (H @ rho - rho @ H)
    m = len(perms)
    if m:
        acc = np.zeros_like(rho)
        for j in range(m):
            idx = perms[j]
            acc += phase_outers[j] * rho[np.ix_(idx, idx)]
        out += kappa * acc - (kappa * m) * rho
    return out


def integrate_segment_pauli(rho, H, perms, phases, kappa, dt, n_steps):
    """Advance `rho` by n_steps of size dt; returns a new array."""
    rho = np.array(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    perms = np.asarray(perms, dtype=np.intp).reshape(len(perms), -1)
    phase_outers = [np.outer(p, np.conj(p)) for p in np.asarray(phases, dtype=complex)]
    k = [None] * 6
    for _ in range(n_steps):
        for i in range(6):
            y = rho
            if i:
                y = rho + dt * sum(a * kj for a, kj in zip(DOPRI_A[i], k))
            k[i] = _rhs(y, H, perms, phase_outers, kappa)
        rho = rho + dt * sum(b * kj for b, kj in zip(DOPRI_B, k) if b)
        rho = 0.5 * (rho + rho.conj().T)
    return rho
