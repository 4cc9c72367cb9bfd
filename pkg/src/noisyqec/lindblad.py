"""Lindblad master equation with piecewise-constant Hamiltonians.

drho/dt = -i[H, rho] + sum_j (L_j rho L_j+ - (1/2){L_j+ L_j, rho})

Noise models: per-qubit dephasing (L = sqrt(kappa) sigma_z on each qubit),
isotropic (sqrt(kappa) sigma_x, sigma_y, sigma_z on each qubit), none, or a
custom operator list.

Integration is fixed-step fifth-order Runge-Kutta (Dormand-Prince weights)
with per-step Hermiticity re-symmetrization.  Segments with a nonzero
Hamiltonian run through the dense kernel (compiled when available).  Free
segments (H = 0) under the two Pauli noise models are integrated in the
basis where the generator is diagonal -- the matrix-unit basis for
dephasing, the Pauli-string basis for isotropic noise -- by applying the
same RK5 update elementwise, which is orders of magnitude faster for long
storage times and numerically identical to the dense stepping up to
roundoff.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels._pure import DOPRI_A as _DOPRI_A, DOPRI_B as _DOPRI_B
from .hilbert import PAULIS, embed

DT_MASTER_DEFAULT = 0.01

_AXES = ("x", "y", "z")


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Dissipator description: kind, rate, and the Lindblad operator list."""

    kind: str  # dephasing | isotropic | none | custom
    kappa: float
    n_qubits: int
    lindblad_ops: tuple = ()
    #: (axis, qubit) per operator for the Pauli kinds, () for none/custom
    pauli_terms: tuple = ()

    @classmethod
    def dephasing(cls, kappa: float, n: int) -> "NoiseModel":
        terms = tuple(("z", q) for q in range(n))
        return cls("dephasing", kappa, n, _pauli_ops(kappa, terms, n), terms)

    @classmethod
    def isotropic(cls, kappa: float, n: int) -> "NoiseModel":
        terms = tuple((a, q) for q in range(n) for a in _AXES)
        return cls("isotropic", kappa, n, _pauli_ops(kappa, terms, n), terms)

    @classmethod
    def none(cls, n: int) -> "NoiseModel":
        return cls("none", 0.0, n)

    @classmethod
    def custom(cls, ops, n: int) -> "NoiseModel":
        ops = tuple(np.asarray(op, dtype=complex) for op in ops)
        kappa = 0.0
        return cls("custom", kappa, n, ops)

    def perm_phase(self):
        """Signed-permutation form of the Pauli operator list (see _kernels)."""
        dim = 2**self.n_qubits
        m = len(self.pauli_terms)
        perms = np.zeros((m, dim), dtype=np.int64)
        phases = np.zeros((m, dim), dtype=complex)
        for j, (axis, q) in enumerate(self.pauli_terms):
            perms[j], phases[j] = _pauli_perm_phase(axis, q, self.n_qubits)
        return perms, phases


def _pauli_ops(kappa, terms, n):
    root = math.sqrt(kappa)
    return tuple(root * embed(PAULIS[a], q, n) for a, q in terms)


def _pauli_perm_phase(axis: str, q: int, n: int):
    """perm, phase with (P psi)[x] = phase[x] * psi[perm[x]]."""
    dim = 2**n
    idx = np.arange(dim)
    bit = (idx >> q) & 1
    if axis == "x":
        return idx ^ (1 << q), np.ones(dim, dtype=complex)
    if axis == "y":
        # sigma_y = [[0, i], [-i, 0]]: row x picks column x^mask
        return idx ^ (1 << q), np.where(bit == 0, 1j, -1j).astype(complex)
    if axis == "z":
        return idx.copy(), np.where(bit == 1, 1.0, -1.0).astype(complex)
    raise ValueError(f"unknown Pauli axis {axis!r}")


@dataclass(frozen=True)
class EvolutionSegment:
    """Constant Hamiltonian + noise acting for a fixed duration."""

    hamiltonian: np.ndarray
    duration: float
    noise: NoiseModel

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("segment duration must be >= 0")


def free_segment(duration: float, noise: NoiseModel) -> EvolutionSegment:
    """Zero-Hamiltonian segment (interaction picture between gates)."""
    dim = 2**noise.n_qubits
    return EvolutionSegment(np.zeros((dim, dim), dtype=complex), duration, noise)


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """drho/dt of the master equation (direct operator form)."""
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if rho.shape != H.shape or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: rho {rho.shape}, H {H.shape}")
    out = -1j * (H @ rho - rho @ H)
    for L in noise.lindblad_ops:
        Ld = L.conj().T
        LdL = Ld @ L
        out += L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def rk5_linear_factor(z):
    """Per-step growth factor of the RK5 scheme on y' = (z/dt) y, elementwise.

    Applying one RK5 step to a linear scalar ODE multiplies y by a fixed
    polynomial in z = rate * dt; this evaluates that polynomial.
    """
    z = np.asarray(z)
    k = []
    for i in range(6):
        y = 1.0
        if i:
            y = 1.0 + sum(a * kj for a, kj in zip(_DOPRI_A[i], k))
        k.append(z * y)
    return 1.0 + sum(b * kj for b, kj in zip(_DOPRI_B, k) if b)


def _split_steps(duration: float, dt: float):
    n_full = int(math.floor(duration / dt + 1e-9))
    rem = duration - n_full * dt
    if rem < 1e-12 * max(1.0, abs(duration)):
        rem = 0.0
    return n_full, rem


def _hamming_matrix(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    xor = idx[:, None] ^ idx[None, :]
    count = np.zeros(xor.shape, dtype=float)
    for q in range(n):
        count += (xor >> q) & 1
    return count


def _integrate_free_dephasing(rho, kappa, dt, n_full, rem, n):
    rates = -2.0 * kappa * _hamming_matrix(n)
    out = rho * rk5_linear_factor(rates * dt) ** n_full
    if rem:
        out = out * rk5_linear_factor(rates * rem)
    return out


def _pauli_string_tables(n: int):
    """xormask and phase vector for all 4^n Pauli strings, plus weights.

    String s is read in base 4, digit per qubit (qubit 0 least significant):
    0=identity, 1=x, 2=y, 3=z.
    """
    dim = 2**n
    idx = np.arange(dim)
    masks = np.zeros(4**n, dtype=np.int64)
    phases = np.ones((4**n, dim), dtype=complex)
    weights = np.zeros(4**n, dtype=float)
    for s in range(4**n):
        digits = [(s // 4**q) % 4 for q in range(n)]
        weights[s] = sum(d != 0 for d in digits)
        for q, d in enumerate(digits):
            if d == 0:
                continue
            axis = _AXES[d - 1]
            perm_q, phase_q = _pauli_perm_phase(axis, q, n)
            if axis != "z":
                masks[s] ^= 1 << q
            phases[s] *= phase_q
    return masks, phases, weights


_STRING_CACHE: dict = {}


def _string_tables(n):
    if n not in _STRING_CACHE:
        _STRING_CACHE[n] = _pauli_string_tables(n)
    return _STRING_CACHE[n]


def _integrate_free_isotropic(rho, kappa, dt, n_full, rem, n):
    dim = 2**n
    masks, phases, weights = _string_tables(n)
    idx = np.arange(dim)
    cols = idx[None, :] ^ masks[:, None]
    # coefficients of rho in the orthonormal Pauli-string basis
    coeff = (np.conj(phases) * rho[idx[None, :], cols]).sum(axis=1) / math.sqrt(dim)
    rates = -4.0 * kappa * weights
    coeff = coeff * rk5_linear_factor(rates * dt) ** n_full
    if rem:
        coeff = coeff * rk5_linear_factor(rates * rem)
    out = np.zeros((dim, dim), dtype=complex)
    np.add.at(out, (np.broadcast_to(idx[None, :], cols.shape), cols),
              phases * coeff[:, None] / math.sqrt(dim))
    return out


def _integrate_custom(rho, H, ops, dt, n_full, rem):
    Ls = [np.asarray(L, dtype=complex) for L in ops]
    Lds = [L.conj().T for L in Ls]
    anti = 0.5 * sum(Ld @ L for L, Ld in zip(Ls, Lds))

    def rhs(r):
        out = -1j * (H @ r - r @ H) - (anti @ r + r @ anti)
        for L, Ld in zip(Ls, Lds):
            out += L @ r @ Ld
        return out

    def step(r, h):
        k = []
        for i in range(6):
            y = r
            if i:
                y = r + h * sum(a * kj for a, kj in zip(_DOPRI_A[i], k))
            k.append(rhs(y))
        r = r + h * sum(b * kj for b, kj in zip(_DOPRI_B, k) if b)
        return 0.5 * (r + r.conj().T)

    for _ in range(n_full):
        rho = step(rho, dt)
    if rem:
        rho = step(rho, rem)
    return rho


def integrate_master(rho0: np.ndarray, segments, dt: float = DT_MASTER_DEFAULT) -> np.ndarray:
    """Propagate rho0 through the segments; returns the final density matrix."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rho = np.array(rho0, dtype=complex)
    elapsed = 0.0
    for i_seg, seg in enumerate(segments):
        H = np.asarray(seg.hamiltonian, dtype=complex)
        noise = seg.noise
        n_full, rem = _split_steps(seg.duration, dt)
        h_is_zero = not np.any(H)
        if noise.kind == "custom":
            rho = _integrate_custom(rho, H, noise.lindblad_ops, dt, n_full, rem)
        elif h_is_zero and noise.kind == "dephasing":
            rho = _integrate_free_dephasing(rho, noise.kappa, dt, n_full, rem, noise.n_qubits)
        elif h_is_zero and noise.kind == "isotropic":
            rho = _integrate_free_isotropic(rho, noise.kappa, dt, n_full, rem, noise.n_qubits)
        elif h_is_zero and noise.kind == "none":
            pass
        else:
            perms, phases = noise.perm_phase()
            rho = _kernels.integrate_segment_pauli(rho, H, perms, phases, noise.kappa, dt, n_full)
            if rem:
                rho = _kernels.integrate_segment_pauli(rho, H, perms, phases, noise.kappa, rem, 1)
        elapsed += seg.duration
        if not np.all(np.isfinite(rho)):
            raise IntegrationError(
                f"integrator diverged in segment {i_seg} (t = {elapsed:g})"
            )
    return rho
