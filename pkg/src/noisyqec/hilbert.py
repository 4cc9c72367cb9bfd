"""Dense linear algebra for small multi-qubit registers.

Conventions used throughout the package:

* Basis states of an n-qubit register are ordered lexicographically by the
  integer index whose *least-significant bit is qubit 0*.  A bitstring
  written in code or docs lists qubit 0 first, so ``ket("011")`` has qubit 0
  and qubit 1 set.
* The computational basis is ordered (|0>, |1>) with

      sigma_z |0> = -|0>,   sigma_z |1> = +|1>,

  i.e. the projector onto |1> is (1 + sigma_z)/2.  This is the opposite of
  the textbook Pauli convention but matches the gate Hamiltonians used by
  the encoding networks.  sigma_y is fixed by requiring the cyclic algebra
  sigma_x sigma_y = i sigma_z in this basis, which gives
  sigma_y = [[0, i], [-i, 0]].
"""

import numpy as np

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
#: sigma_- |1> = |0>, sigma_- |0> = 0
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

#: projectors onto |1> ("black" control dot) and |0> ("white" control dot)
PROJ_ONE = 0.5 * (ID2 + SIGMA_Z)
PROJ_ZERO = 0.5 * (ID2 - SIGMA_Z)

PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def n_qubits(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension (must be a power of 2)."""
    n = int(dim).bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def ket(bits: str) -> np.ndarray:
    """Computational basis state from a bitstring listing qubit 0 first."""
    index = 0
    for q, b in enumerate(bits):
        if b not in "01":
            raise ValueError(f"bad bitstring {bits!r}")
        index |= int(b) << q
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[index] = 1.0
    return psi


def zero_state(n: int) -> np.ndarray:
    """|0...0> on n qubits."""
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def embed(op2x2: np.ndarray, target: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator at `target` in an n-qubit register.

    With qubit 0 the least-significant bit this is
    I_{2^(n-1-target)} (x) op (x) I_{2^target}.
    """
    op2x2 = np.asarray(op2x2, dtype=complex)
    if op2x2.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got {op2x2.shape}")
    if not 0 <= target < n:
        raise IndexError(f"qubit {target} out of range for {n} qubits")
    return np.kron(np.eye(2 ** (n - 1 - target)), np.kron(op2x2, np.eye(2**target)))


def partial_trace_keep_first(rho: np.ndarray) -> np.ndarray:
    """Trace out every qubit except qubit 0, returning its 2x2 reduced matrix."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    rest = dim // 2
    if rest * 2 != dim or rest < 1:
        raise ValueError(f"dimension {dim} is not a multiple of 2")
    # index = data + 2 * ancilla
    blocks = rho.reshape(rest, 2, rest, 2)
    return np.einsum("sdse->de", blocks)


def mismatch(rho_reduced: np.ndarray, psi_ini: np.ndarray) -> float:
    """1 - <psi_ini| rho |psi_ini>, clipped into [0, 1] against roundoff."""
    rho_reduced = np.asarray(rho_reduced)
    psi_ini = np.asarray(psi_ini)
    if rho_reduced.shape != (2, 2) or psi_ini.shape != (2,):
        raise ValueError("mismatch expects a 2x2 density matrix and a 2-vector")
    m = 1.0 - float(np.real(psi_ini.conj() @ rho_reduced @ psi_ini))
    return float(min(max(m, 0.0), 1.0))


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian H via eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    if not np.allclose(H, H.conj().T, atol=1e-10):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T
