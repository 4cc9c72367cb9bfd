"""The two error correcting codes as end-to-end pipelines.

The 3-qubit code protects against phase errors (sigma_z) under dephasing
noise; the 5-qubit code corrects an arbitrary single-qubit error under
isotropic noise.  The data qubit is qubit 0; qubits 1..n-1 start in |0>.

A protected run is: encode (gates on, noise on) -> free evolution (H = 0,
noise on) -> decode (noise on) -> measure the ancillas and apply the
outcome-conditioned single-qubit correction -> compare the data qubit with
the initial state.  The measurement/correction pair is applied as the
deterministic channel

    rho -> sum_s Tr_anc[ (C_s x Pi_s) rho (C_s x Pi_s)+ ]

which is the exact ensemble average over measurement outcomes.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .gates import (GateSchedule, decode_schedule_3bit, decode_schedule_5bit,
                    encode_schedule_3bit, encode_schedule_5bit)
from .hilbert import ID2, PAULIS, embed, ket, mismatch
from .lindblad import (DT_MASTER_DEFAULT, EvolutionSegment, NoiseModel,
                       free_segment, integrate_master)
from .trajectories import TrajectoryConfig, run_ensemble

SCENARIO_STORAGE = "storage"
SCENARIO_TRANSMISSION = "transmission"

#: default probe state (|0> + |1>)/sqrt(2): sensitive to both phase flips
#: and bit flips
PSI_PROBE = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)

_CORRECTIONS = {"I": ID2, "x": PAULIS["x"], "y": PAULIS["y"], "z": PAULIS["z"]}


class CodeConsistencyError(RuntimeError):
    """A single error produced no deterministic syndrome or no Pauli fix."""


@dataclass(frozen=True)
class PauliError:
    """Instantaneous single-qubit error applied as a Pauli unitary."""

    qubit: int
    axis: str

    def operator(self, n: int) -> np.ndarray:
        return embed(PAULIS[self.axis], self.qubit, n)


@dataclass(frozen=True)
class CodeSpec:
    n: int
    data_qubit: int
    codewords: tuple  # (|C0>, |C1>) as produced by the encode schedule
    encode: GateSchedule
    decode: GateSchedule
    correction_table: dict  # ancilla outcome int -> correction label
    noise_kind: str  # dephasing (n=3) or isotropic (n=5)
    kappa_n_factor: int  # kappa_n = factor * kappa (2 for n=3, 4 for n=5)

    def kappa_n(self, kappa: float) -> float:
        return self.kappa_n_factor * kappa

    @property
    def delta(self) -> float:
        """Wall time of one full encode + decode stage."""
        return self.encode.total_duration + self.decode.total_duration

    def allowed_errors(self):
        axes = ("z",) if self.noise_kind == "dephasing" else ("x", "y", "z")
        return [PauliError(q, a) for q in range(self.n) for a in axes]

    def noise(self, kappa: float) -> NoiseModel:
        if self.noise_kind == "dephasing":
            return NoiseModel.dephasing(kappa, self.n)
        return NoiseModel.isotropic(kappa, self.n)


def syndrome_bits(outcome: int, n: int) -> str:
    """Ancilla outcome as a bitstring listing qubit 1 first."""
    return "".join(str((outcome >> i) & 1) for i in range(n - 1))


def register_state(psi_in: np.ndarray, n: int) -> np.ndarray:
    """psi_in on the data qubit, ancillas in |0>."""
    full = np.zeros(2**n, dtype=complex)
    full[0] = psi_in[0]
    full[1] = psi_in[1]
    return full


_TEST_STATES = (
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
    np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
    np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0),
)


def derive_correction_table(code: CodeSpec) -> dict:
    """Map every ancilla outcome to the Pauli restoring the data qubit.

    Derived by brute force: for the no-error case and every allowed single
    error, propagate test states through decode(E(encode(.))), require a
    deterministic ancilla outcome, and find the unique correction in
    {1, sigma_x, sigma_y, sigma_z} that restores the data qubit with a
    state-independent phase.  Outcomes not produced by any zero-or-one-error
    history default to the identity.
    """
    n = code.n
    Ue = code.encode.unitary()
    Ud = code.decode.unitary()
    errors = [None] + code.allowed_errors()
    table = {}
    produced_by = {}
    for err in errors:
        E = np.eye(2**n) if err is None else err.operator(n)
        U = Ud @ E @ Ue
        outcome = None
        data_states = []
        for psi in _TEST_STATES:
            phi = U @ register_state(psi, n)
            blocks = phi.reshape(2 ** (n - 1), 2)
            weights = (np.abs(blocks) ** 2).sum(axis=1)
            s = int(np.argmax(weights))
            if weights[s] < 1.0 - 1e-9:
                raise CodeConsistencyError(
                    f"error {err} gives non-deterministic syndrome (max weight {weights[s]:.6f})"
                )
            if outcome is None:
                outcome = s
            elif s != outcome:
                raise CodeConsistencyError(f"error {err}: syndrome depends on the data state")
            data_states.append(blocks[s])
        correction = None
        for label, C in _CORRECTIONS.items():
            amps = [psi.conj() @ (C @ v) for psi, v in zip(_TEST_STATES, data_states)]
            if all(abs(abs(a) - 1.0) < 1e-9 for a in amps) and all(
                abs(a - amps[0]) < 1e-9 for a in amps
            ):
                correction = label
                break
        if correction is None:
            raise CodeConsistencyError(f"error {err}: no Pauli correction restores the data qubit")
        if outcome in produced_by and table[outcome] != correction:
            raise CodeConsistencyError(
                f"syndrome collision: {err} and {produced_by[outcome]} disagree on outcome {outcome}"
            )
        table[outcome] = correction
        produced_by[outcome] = err
    for s in range(2 ** (n - 1)):
        table.setdefault(s, "I")
    return table


def _make_code(n, encode, decode, noise_kind, factor) -> CodeSpec:
    Ue = encode.unitary()
    codewords = (Ue @ ket("0" * n), Ue @ ket("1" + "0" * (n - 1)))
    code = CodeSpec(
        n=n,
        data_qubit=0,
        codewords=codewords,
        encode=encode,
        decode=decode,
        correction_table={},
        noise_kind=noise_kind,
        kappa_n_factor=factor,
    )
    return dataclasses.replace(code, correction_table=derive_correction_table(code))


_CODE_CACHE: dict = {}


def code_3bit() -> CodeSpec:
    """Three-qubit phase-error code under dephasing (kappa_3 = 2 kappa)."""
    if 3 not in _CODE_CACHE:
        _CODE_CACHE[3] = _make_code(3, encode_schedule_3bit(), decode_schedule_3bit(), "dephasing", 2)
    return _CODE_CACHE[3]


def code_5bit() -> CodeSpec:
    """Five-qubit single-error code under isotropic noise (kappa_5 = 4 kappa)."""
    if 5 not in _CODE_CACHE:
        _CODE_CACHE[5] = _make_code(5, encode_schedule_5bit(), decode_schedule_5bit(), "isotropic", 4)
    return _CODE_CACHE[5]


def correction_channel(rho: np.ndarray, code: CodeSpec) -> np.ndarray:
    """Measure the ancillas, correct the data qubit, trace the ancillas out."""
    dim = 2**code.n
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} density matrix, got {rho.shape}")
    blocks = rho.reshape(2 ** (code.n - 1), 2, 2 ** (code.n - 1), 2)
    out = np.zeros((2, 2), dtype=complex)
    for s, label in code.correction_table.items():
        C = _CORRECTIONS[label]
        out += C @ blocks[s, :, s, :] @ C.conj().T
    return out


def mismatch_observable(code: CodeSpec, psi_in: np.ndarray):
    """Per-trajectory mismatch through the correction channel (batched)."""
    corrections = np.stack([
        _CORRECTIONS[code.correction_table[s]] for s in range(2 ** (code.n - 1))
    ])
    # every correction is Hermitian, so <psi_in| C_s (.) = <C_s psi_in| (.)
    target = np.einsum("sde,e->sd", corrections, psi_in).conj()

    def obs(psi_rows):
        v = psi_rows.reshape(len(psi_rows), 2 ** (code.n - 1), 2)
        amp = np.einsum("csd,sd->cs", v, target)
        return 1.0 - (np.abs(amp) ** 2).sum(axis=1)

    return obs


def _pipeline_segments(code: CodeSpec, kappa: float, free_time: float, kappa_prime=None):
    kp = kappa if kappa_prime is None else kappa_prime
    gate_noise = code.noise(kp)
    free_noise = code.noise(kappa)
    segs = [EvolutionSegment(st.matrix, st.duration, gate_noise) for st in code.encode.steps]
    segs.append(free_segment(free_time, free_noise))
    segs += [EvolutionSegment(st.matrix, st.duration, gate_noise) for st in code.decode.steps]
    return segs


def _free_time(code: CodeSpec, T: float, scenario: str) -> float:
    if scenario == SCENARIO_STORAGE:
        if T < code.delta:
            raise ValueError(f"storage requires T >= {code.delta:g} (encode+decode time), got {T:g}")
        return T - code.delta
    if scenario == SCENARIO_TRANSMISSION:
        return T
    raise ValueError(f"unknown scenario {scenario!r}")


def protected_run(psi_in, code: CodeSpec, kappa: float, T: float,
                  scenario: str = SCENARIO_STORAGE, method: str = "master",
                  cfg: TrajectoryConfig = None, dt: float = None,
                  kappa_prime: float = None, n_threads: int = 1,
                  return_stderr: bool = False):
    """Mismatch of the full encode/store/decode/correct pipeline.

    `method` is "master" (deterministic) or "trajectories" (pass `cfg`).
    With return_stderr=True returns (mismatch, stderr); the stderr is 0 for
    the master method.
    """
    psi_in = np.asarray(psi_in, dtype=complex)
    segments = _pipeline_segments(code, kappa, _free_time(code, T, scenario), kappa_prime)
    psi0 = register_state(psi_in, code.n)
    if method == "master":
        rho0 = np.outer(psi0, psi0.conj())
        rho = integrate_master(rho0, segments, dt if dt is not None else DT_MASTER_DEFAULT)
        m = mismatch(correction_channel(rho, code), psi_in)
        return (m, 0.0) if return_stderr else m
    if method == "trajectories":
        if cfg is None:
            cfg = TrajectoryConfig()
        if dt is not None:
            cfg = dataclasses.replace(cfg, dt=dt)
        rho, stderr = run_ensemble(psi0, segments, cfg,
                                   observable=mismatch_observable(code, psi_in),
                                   n_threads=n_threads)
        m = mismatch(correction_channel(rho, code), psi_in)
        return (m, stderr) if return_stderr else m
    raise ValueError(f"unknown method {method!r}")


def unprotected_run(psi_in, noise_kind: str, kappa: float, T: float,
                    dt: float = None) -> float:
    """Mismatch of a bare qubit idling for time T under the given noise."""
    psi_in = np.asarray(psi_in, dtype=complex)
    if noise_kind == "dephasing":
        noise = NoiseModel.dephasing(kappa, 1)
    elif noise_kind == "isotropic":
        noise = NoiseModel.isotropic(kappa, 1)
    elif noise_kind == "none":
        noise = NoiseModel.none(1)
    else:
        raise ValueError(f"unknown noise kind {noise_kind!r}")
    rho0 = np.outer(psi_in, psi_in.conj())
    rho = integrate_master(rho0, [free_segment(T, noise)],
                           dt if dt is not None else DT_MASTER_DEFAULT)
    return mismatch(rho, psi_in)


def instant_error_run(psi_in, code: CodeSpec, error: PauliError,
                      free_time: float = 10.0, at: float = 0.5) -> float:
    """Noiseless pipeline with one instantaneous Pauli error during storage.

    The error fires after fraction `at` of the free-evolution segment; with
    H = 0 and no continuous noise the result is independent of `at`.  The
    pipeline is pure algebra here, so the gates are applied as exact step
    unitaries rather than integrated, keeping the residual at machine
    precision.
    """
    if not 0.0 <= at <= 1.0:
        raise ValueError("at must lie in [0, 1]")
    psi_in = np.asarray(psi_in, dtype=complex)
    psi = register_state(psi_in, code.n)
    psi = code.encode.unitary() @ psi
    psi = error.operator(code.n) @ psi
    psi = code.decode.unitary() @ psi
    rho = np.outer(psi, psi.conj())
    return mismatch(correction_channel(rho, code), psi_in)
