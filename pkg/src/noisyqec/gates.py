"""Gate Hamiltonians and the encode/decode schedules of the two codes.

Every gate is realized by switching on a constant Hamiltonian for one unit
of time (hbar = 1):

* ``h_A``       (pi/2) ((sigma_x - sigma_z)/sqrt(2) + 1), a self-inverse
                basis-mixing gate with e^{-i h_A} = -U_A,
                U_A = [[1, 1], [1, -1]]/sqrt(2).
* ``h_y``       -(pi/4) sigma_y, a pi/2 rotation about y.  In this
                package's sigma_y convention e^{-i h_y} equals the
                transpose of U_y = [[1, 1], [-1, 1]]/sqrt(2); the inverse
                rotation (negated Hamiltonian) produces U_y itself.
* ``h_cphase``  pi times a product of projectors, one per control qubit:
                (1+sigma_z)/2 for a "black" control (condition on |1>),
                (1-sigma_z)/2 for a "white" control (condition on |0>).
                Basis states matching every control pick up a sign flip.

Schedules are ordered lists of such steps.  Decoding runs the encode steps
in reverse order; the phase gates and A gates are their own inverses, while
the y rotations of the 3-bit code are undone with the negated Hamiltonian.
"""

from dataclasses import dataclass

import numpy as np

from .hilbert import PROJ_ONE, PROJ_ZERO, SIGMA_X, SIGMA_Y, SIGMA_Z, embed

BLACK = "black"
WHITE = "white"

_H_A_1Q = (np.pi / 2.0) * ((SIGMA_X - SIGMA_Z) / np.sqrt(2.0) + np.eye(2))
_H_Y_1Q = -(np.pi / 4.0) * SIGMA_Y


@dataclass(frozen=True)
class GateHamiltonian:
    """One schedule step: a Hermitian generator acting for `duration` units."""

    label: str
    matrix: np.ndarray
    duration: float = 1.0
    parts: tuple = ()  # (kind, ((qubit, polarity), ...)) per simultaneous gate

    def describe(self) -> dict:
        return {
            "label": self.label,
            "duration": self.duration,
            "gates": [
                {"kind": kind, "controls": [{"qubit": q, "polarity": p} for q, p in ctrls]}
                for kind, ctrls in self.parts
            ],
        }


@dataclass(frozen=True)
class GateSchedule:
    """Ordered gate steps; total_duration is the wall time of the schedule."""

    steps: tuple

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.steps))

    def unitary(self) -> np.ndarray:
        """Product of the step unitaries (last step leftmost)."""
        from .hilbert import expm_hermitian

        dim = self.steps[0].matrix.shape[0]
        U = np.eye(dim, dtype=complex)
        for s in self.steps:
            U = expm_hermitian(s.matrix, s.duration) @ U
        return U

    def describe(self) -> list:
        """JSON-serializable step list (for docs and golden tests)."""
        return [s.describe() for s in self.steps]


def h_A(target: int, n: int) -> GateHamiltonian:
    """Basis-mixing gate Hamiltonian on one qubit of an n-qubit register."""
    return GateHamiltonian(
        label=f"A{target}",
        matrix=embed(_H_A_1Q, target, n),
        parts=(("A", ((target, None),)),),
    )


def h_y(target: int, n: int) -> GateHamiltonian:
    """y-rotation gate Hamiltonian on one qubit of an n-qubit register."""
    return GateHamiltonian(
        label=f"Y{target}",
        matrix=embed(_H_Y_1Q, target, n),
        parts=(("Y", ((target, None),)),),
    )


def h_cphase(controls, n: int) -> GateHamiltonian:
    """Multi-controlled phase Hamiltonian pi * prod_q P_q.

    `controls` lists (qubit, polarity) pairs with polarity "black"
    (condition on |1>) or "white" (condition on |0>); at least two distinct
    qubits are required.
    """
    controls = tuple(controls)
    qubits = [q for q, _ in controls]
    if len(qubits) < 2:
        raise ValueError("controlled phase needs at least 2 control qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate control qubits in {qubits}")
    H = np.pi * np.eye(2**n, dtype=complex)
    for q, polarity in controls:
        if polarity == BLACK:
            P = PROJ_ONE
        elif polarity == WHITE:
            P = PROJ_ZERO
        else:
            raise ValueError(f"polarity must be 'black' or 'white', got {polarity!r}")
        H = H @ embed(P, q, n)
    label = ("B" if all(p == BLACK for _, p in controls) else
             "C" if all(p == WHITE for _, p in controls) else "M")
    label += "".join(str(q) for q, _ in controls)
    return GateHamiltonian(label=label, matrix=H, parts=(("phase", controls),))


def _combine(*gates: GateHamiltonian) -> GateHamiltonian:
    """Sum simultaneous gates acting on disjoint qubits into one step."""
    matrix = sum(g.matrix for g in gates)
    parts = sum((g.parts for g in gates), ())
    qubit_sets = [set(q for _, ctrls in g.parts for q, _ in ctrls) for g in gates]
    seen = set()
    for qs in qubit_sets:
        if qs & seen:
            raise ValueError("simultaneous gates must act on disjoint qubits")
        seen |= qs
    return GateHamiltonian(
        label="+".join(g.label for g in gates), matrix=matrix, parts=parts
    )


def _negate(gate: GateHamiltonian) -> GateHamiltonian:
    return GateHamiltonian(
        label="-(" + gate.label + ")",
        matrix=-gate.matrix,
        duration=gate.duration,
        parts=tuple(("-" + kind, ctrls) for kind, ctrls in gate.parts),
    )


def encode_schedule_3bit() -> GateSchedule:
    """Five unit-time steps taking (a|0> + b|1>)|00> into the 3-bit code space."""
    n = 3
    return GateSchedule(steps=(
        _combine(h_A(1, n), h_A(2, n)),
        h_cphase([(0, BLACK), (1, BLACK)], n),
        h_cphase([(0, BLACK), (2, BLACK)], n),
        _combine(h_A(1, n), h_A(2, n)),
        _combine(h_y(0, n), h_y(1, n), h_y(2, n)),
    ))


def decode_schedule_3bit() -> GateSchedule:
    """Reverse of the 3-bit encode; the y rotations are undone by negation."""
    steps = list(encode_schedule_3bit().steps)[::-1]
    steps[0] = _negate(steps[0])
    return GateSchedule(steps=tuple(steps))


def encode_schedule_5bit() -> GateSchedule:
    """Ten unit-time steps taking (a|0> + b|1>)|0000> into the 5-bit code space.

    Steps 1-10: A on 1,2,3; phase(0,2,3) all-black; phase(0,2,3) all-white;
    A on 4; phase(0,4); A on 0; phase(0,3) + phase(1,4); phase(0,1) +
    phase(2 black, 4 white); A on 0 + A on 4; phase(0,3).  The dot
    polarities are fixed by requiring the exact codeword identity (see
    tests); the resulting map sends a|0>+b|1> to a|C0>+b|C1> with unit
    overall phase.
    """
    n = 5
    return GateSchedule(steps=(
        _combine(h_A(1, n), h_A(2, n), h_A(3, n)),
        h_cphase([(0, BLACK), (2, BLACK), (3, BLACK)], n),
        h_cphase([(0, WHITE), (2, WHITE), (3, WHITE)], n),
        h_A(4, n),
        h_cphase([(0, BLACK), (4, BLACK)], n),
        h_A(0, n),
        _combine(h_cphase([(0, BLACK), (3, BLACK)], n), h_cphase([(1, BLACK), (4, BLACK)], n)),
        _combine(h_cphase([(0, BLACK), (1, BLACK)], n), h_cphase([(2, BLACK), (4, WHITE)], n)),
        _combine(h_A(0, n), h_A(4, n)),
        h_cphase([(0, BLACK), (3, BLACK)], n),
    ))


def decode_schedule_5bit() -> GateSchedule:
    """Reverse of the 5-bit encode (every step is its own inverse)."""
    return GateSchedule(steps=tuple(encode_schedule_5bit().steps[::-1]))
