"""Gate unitaries, schedules, and the codewords they build.

The codeword oracles below are written out independently of the schedule
code: the 3-bit words are the uniform and parity-signed superpositions, and
the 5-bit words are assembled from the eight GHZ-type triples
|000> +- |111>, |010> +- |101>, |001> +- |110>, |011> +- |100> with fixed
two-qubit tails and signs.  Bitstrings list qubit 0 first.
"""

import numpy as np
import pytest

from noisyqec.gates import (BLACK, WHITE, decode_schedule_3bit,
                            decode_schedule_5bit, encode_schedule_3bit,
                            encode_schedule_5bit, h_A, h_cphase, h_y)
from noisyqec.hilbert import expm_hermitian, ket

U_A = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
U_Y = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)


def test_gate_A_unitary():
    g = h_A(0, 1)
    u = expm_hermitian(g.matrix, g.duration)
    assert np.allclose(u, -U_A, atol=1e-12)
    assert np.allclose(u @ u, np.eye(2), atol=1e-12)


def test_gate_y_unitary():
    g = h_y(0, 1)
    u = expm_hermitian(g.matrix, g.duration)
    assert np.allclose(u, U_Y.T, atol=1e-12)
    # the negated Hamiltonian gives the inverse rotation
    u_inv = expm_hermitian(-g.matrix, g.duration)
    assert np.allclose(u_inv @ u, np.eye(2), atol=1e-12)


def test_cphase_signs():
    g = h_cphase([(0, BLACK), (1, WHITE)], 2)
    u = expm_hermitian(g.matrix, 1.0)
    # only |q0=1, q1=0> (index 1) matches both dots and flips sign
    assert np.allclose(u, np.diag([1.0, -1.0, 1.0, 1.0]), atol=1e-12)
    g = h_cphase([(0, BLACK), (1, BLACK), (2, BLACK)], 3)
    u = expm_hermitian(g.matrix, 1.0)
    expect = np.ones(8)
    expect[7] = -1.0
    assert np.allclose(u, np.diag(expect), atol=1e-12)


def test_cphase_validation():
    with pytest.raises(ValueError):
        h_cphase([(0, BLACK)], 2)
    with pytest.raises(ValueError):
        h_cphase([(0, BLACK), (0, WHITE)], 2)
    with pytest.raises(ValueError):
        h_cphase([(0, BLACK), (1, "grey")], 2)


def test_schedule_shapes():
    enc3, dec3 = encode_schedule_3bit(), decode_schedule_3bit()
    enc5, dec5 = encode_schedule_5bit(), decode_schedule_5bit()
    assert len(enc3.steps) == 5 and enc3.total_duration == 5.0
    assert len(dec3.steps) == 5 and dec3.total_duration == 5.0
    assert len(enc5.steps) == 10 and enc5.total_duration == 10.0
    assert len(dec5.steps) == 10 and dec5.total_duration == 10.0
    for s in enc3.steps + enc5.steps:
        assert s.duration == 1.0
        assert np.allclose(s.matrix, s.matrix.conj().T)


def test_schedule_describe_is_serializable():
    import json

    for sched in (encode_schedule_3bit(), encode_schedule_5bit()):
        text = json.dumps(sched.describe())
        assert "phase" in text and "A" in text


def test_decode_inverts_encode():
    d3 = decode_schedule_3bit().unitary() @ encode_schedule_3bit().unitary()
    assert np.abs(d3 - np.eye(8)).max() < 1e-12
    d5 = decode_schedule_5bit().unitary() @ encode_schedule_5bit().unitary()
    assert np.abs(d5 - np.eye(32)).max() < 1e-12


def codewords_3bit():
    c0 = np.ones(8, dtype=complex) / np.sqrt(8.0)
    signs = np.array([(-1.0) ** bin(i).count("1") for i in range(8)])
    return c0, signs.astype(complex) / np.sqrt(8.0)


def test_codewords_3bit():
    u = encode_schedule_3bit().unitary()
    c0, c1 = codewords_3bit()
    got0 = u @ ket("000")
    got1 = u @ ket("100")
    # the network realizes the second word with an overall minus sign,
    # which the decode network undoes exactly
    assert np.abs(got0 - c0).max() < 1e-12
    assert np.abs(got1 + c1).max() < 1e-12


def codewords_5bit():
    """Code words as signed sums over GHZ triples with two-qubit tails."""
    triples = {1: "000", 3: "010", 5: "001", 7: "011"}

    def block(k, tail, sign):
        # b_k for odd k is (|s> + |sbar>)/sqrt(2); even k flips the relative sign
        s = triples[k if k % 2 else k - 1]
        sbar = "".join("1" if b == "0" else "0" for b in s)
        rel = 1.0 if k % 2 else -1.0
        return [(s + tail, sign), (sbar + tail, sign * rel)]

    def assemble(terms):
        v = np.zeros(32, dtype=complex)
        for bits, sign in terms:
            idx = sum(int(b) << i for i, b in enumerate(bits))
            v[idx] = sign
        return v / np.sqrt(8.0)

    c0 = assemble(block(1, "00", +1) + block(3, "11", -1)
                  + block(5, "01", +1) + block(7, "10", +1))
    c1 = assemble(block(2, "11", -1) + block(4, "00", -1)
                  + block(6, "10", -1) + block(8, "01", +1))
    return c0, c1


def test_codewords_5bit():
    u = encode_schedule_5bit().unitary()
    c0, c1 = codewords_5bit()
    assert abs(np.linalg.norm(c0) - 1.0) < 1e-12
    assert abs(np.linalg.norm(c1) - 1.0) < 1e-12
    assert abs(np.vdot(c0, c1)) < 1e-12
    assert np.abs(u @ ket("00000") - c0).max() < 1e-12
    assert np.abs(u @ ket("10000") - c1).max() < 1e-12


def test_encode_is_linear_on_the_input_qubit():
    rng = np.random.default_rng(11)
    a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    nrm = np.hypot(abs(a), abs(b))
    a, b = a / nrm, b / nrm
    u = encode_schedule_5bit().unitary()
    c0, c1 = codewords_5bit()
    got = u @ (a * ket("00000") + b * ket("10000"))
    assert np.abs(got - (a * c0 + b * c1)).max() < 1e-12
