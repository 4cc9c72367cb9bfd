"""Closed-form success probabilities, crossovers, and optimal schedules.

Expansion-based oracles: the storage crossover fraction is
delta* = 1/n - (n-1)^3 kT / (2 n^2) and the transmission one is
delta* = 1/n - (n-1) kT / 2, both accurate to O((kT)^2); the worked numbers
(root 0.1405..., N ~ 14, failure floors 0.017 / 0.016) come from evaluating
the formulas at the parameter sets quoted in their docstrings.
"""

import math

import numpy as np
import pytest

from noisyqec import analytics as A


def test_success_probabilities_basic():
    assert A.p_snc(2e-3, 0.0) == 1.0
    assert A.p_sc(3, 2e-3, 0.0) == 1.0
    # 3-qubit crossover point: both probabilities are exactly 1/2
    x = math.log(2.0)
    assert abs(A.p_snc(x, 1.0) - 0.5) < 1e-12
    assert abs(A.p_sc(3, x, 1.0) - 0.5) < 1e-12
    # 5-qubit crossover is near kT = 0.14
    assert abs(A.p_snc(0.14, 1.0) - 0.8694) < 1e-3
    assert abs(A.p_snc(0.14, 1.0) - A.p_sc(5, 0.14, 1.0)) < 5e-4


def test_negative_inputs_rejected():
    with pytest.raises(ValueError):
        A.p_snc(-1e-3, 1.0)
    with pytest.raises(ValueError):
        A.p_sc(3, 1e-3, -1.0)
    with pytest.raises(ValueError):
        A.s_sc(3, 1e-3, -1e-3, 1.0, 0.1)


def test_probabilities_in_unit_interval():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.choice([3, 5]))
        kn = 10.0 ** rng.uniform(-5, 0.5)
        kp = 10.0 ** rng.uniform(-5, 0.5)
        T = 10.0 ** rng.uniform(-1, 3)
        delta = rng.uniform(0.0, 1.0)
        N = int(rng.integers(1, 20))
        assert 0.0 <= A.p_snc(kn, T) <= 1.0
        assert 0.0 <= A.p_sc(n, kn, T) <= 1.0
        assert 0.0 <= A.s_sc(n, kn, kp, T, delta) <= 1.0
        assert 0.0 <= A.t_sc(n, kn, kp, T, delta) <= 1.0
        if N * delta < 1.0:
            assert 0.0 <= A.s_Nsc(n, kn, kp, T, delta, N) <= 1.0
        assert 0.0 <= A.t_Nsc(n, kn, kp, T, delta, N) <= 1.0
        assert 0.0 <= A.p_Nsc(n, kn, T, N) <= 1.0
        assert 0.0 <= A.max_failure(n, kn, T, delta) <= 1.0


def test_crossover_roots():
    assert abs(A.crossover_kT(3) - math.log(2.0)) < 1e-9
    assert abs(A.crossover_kT(5) - 0.14) < 0.005
    assert abs(A.crossover_kT(5) - 0.1405538759615968) < 1e-8
    # at the root the two curves cross; correction helps below, hurts above
    c = A.crossover_kT(5)
    assert abs(A.p_sc(5, c, 1.0) - A.p_snc(c, 1.0)) < 1e-9
    assert A.p_sc(5, 0.5 * c, 1.0) > A.p_snc(0.5 * c, 1.0)
    assert A.p_sc(5, 2.0 * c, 1.0) < A.p_snc(2.0 * c, 1.0)


def test_crossover_rejects_codes_without_one():
    # a "code" with n = 2 never does worse than the bare qubit:
    # p_sc(2) - p_snc = e^{-x}(1 - e^{-x}) > 0, so there is no root
    with pytest.raises(ValueError):
        A.crossover_kT(2)
    with pytest.raises(ValueError):
        A.crossover_kT(1)


def test_imperfect_correction_reduces_to_perfect():
    for n in (3, 5):
        kn = 3e-3
        assert abs(A.s_sc(n, kn, kn, 50.0, 0.0) - A.p_sc(n, kn, 50.0)) < 1e-14
        assert abs(A.t_sc(n, kn, kn, 50.0, 0.0) - A.p_sc(n, kn, 50.0)) < 1e-14


def test_storage_delta_domain():
    with pytest.raises(ValueError):
        A.s_sc(3, 1e-3, 1e-3, 10.0, 1.5)
    with pytest.raises(ValueError):
        A.s_sc(3, 1e-3, 1e-3, 10.0, -0.1)
    with pytest.raises(ValueError):
        A.t_sc(3, 1e-3, 1e-3, 10.0, -0.1)
    # transmission tolerates delta > 1 (E+D longer than the channel time)
    assert 0.0 <= A.t_sc(3, 1e-3, 1e-3, 10.0, 1.5) <= 1.0


@pytest.mark.parametrize("n", [3, 5])
@pytest.mark.parametrize("kT", [1e-3, 1e-2])
def test_storage_crossover_expansion(n, kT):
    delta = 1.0 / n - (n - 1) ** 3 * kT / (2.0 * n * n)
    diff = A.s_sc(n, kT, kT, 1.0, delta) - A.p_snc(kT, 1.0)
    assert abs(diff) < kT * kT


@pytest.mark.parametrize("n", [3, 5])
@pytest.mark.parametrize("kT", [1e-3, 1e-2])
def test_transmission_crossover_expansion(n, kT):
    delta = 1.0 / n - (n - 1) * kT / 2.0
    diff = A.t_sc(n, kT, kT, 1.0, delta) - A.p_snc(kT, 1.0)
    assert abs(diff) < kT * kT


def test_t_opt():
    assert A.t_opt(5, 4e-3, 0.0) == 0.0
    assert A.t_opt(5, 0.0, 20.0) == math.inf
    assert abs(A.t_opt(5, 4e-3, 20.0) - 50.0) < 1e-12
    assert abs(A.t_opt(3, 1e-4, 20.0) - math.sqrt(2.0) * A.t_opt(3, 1e-4, 10.0)) < 1e-12


def test_ratio_R():
    # R > 1 exactly when one round of perfect correction helps
    c = A.crossover_kT(3)
    assert A.ratio_R(3, 0.5 * c, 1.0, 0.0) > 1.0
    assert A.ratio_R(3, 2.0 * c, 1.0, 0.0) < 1.0
    with pytest.raises(ValueError):
        A.ratio_R(3, 0.0, 0.0, 0.0)


def test_repeated_correction_reductions():
    kn = 2e-3
    assert abs(A.s_Nsc(5, kn, kn, 50.0, 0.1, 1) - A.s_sc(5, kn, kn, 50.0, 0.1)) < 1e-14
    assert abs(A.t_Nsc(5, kn, kn, 50.0, 0.1, 1) - A.t_sc(5, kn, kn, 50.0, 0.1)) < 1e-14
    assert abs(A.p_Nsc(5, kn, 50.0, 1) - A.p_sc(5, kn, 50.0)) < 1e-14
    with pytest.raises(ValueError):
        A.s_Nsc(5, kn, kn, 50.0, 0.2, 5)  # N*delta = 1
    with pytest.raises(ValueError):
        A.p_Nsc(5, kn, 50.0, 0)


def test_p_Nsc_improves_with_more_corrections():
    vals = [A.p_Nsc(5, 0.1, 1.0, N) for N in (1, 10, 100, 10000)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.99999


def test_worked_example_3bit():
    # n=3, kappa=1e-5 (kappa_3 = 2e-5), Delta=10, T=1e4 -> about 14 cycles
    kn, T, delta = 2e-5, 1e4, 1e-3
    n_star = A.n_opt(3, kn, T, delta)
    assert 14.0 <= n_star <= 14.2
    assert abs(A.max_failure(3, kn, T, delta) - 0.017) < 1e-3
    scan = {N: A.s_Nsc(3, kn, kn, T, delta, N) for N in range(1, 31)}
    assert max(scan, key=scan.get) == 14


def test_worked_example_5bit():
    # n=5, kappa=1e-5 (kappa_5 = 4e-5), Delta=20, T=1e3 -> two cycles
    kn, T, delta = 4e-5, 1e3, 0.02
    assert abs(A.n_opt(5, kn, T, delta) - 2.0) < 0.01
    assert abs(A.max_failure(5, kn, T, delta) - 0.016) < 1e-3


def test_n_opt_identity_and_divergence():
    # T / n_opt equals t_opt with Delta = delta * T
    for (n, kn, T, delta) in ((5, 4e-3, 100.0, 0.2), (3, 2e-5, 1e4, 1e-3)):
        assert abs(T / A.n_opt(n, kn, T, delta) - A.t_opt(n, kn, delta * T)) < 1e-12
    assert A.n_opt(5, 4e-3, 100.0, 0.0) == math.inf


def test_integer_scan_never_beats_failure_floor_by_much():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.choice([3, 5]))
        kT = 10.0 ** rng.uniform(-4, -1.3)
        delta = 10.0 ** rng.uniform(-3.5, -1)
        n_star = A.n_opt(n, kT, 1.0, delta)
        if n_star * delta >= 0.9:
            continue
        Ns = [N for N in range(1, max(3, int(3 * n_star) + 2)) if N * delta < 1.0]
        best = max(A.s_Nsc(n, kT, kT, 1.0, delta, N) for N in Ns)
        improvement = A.max_failure(n, kT, 1.0, delta) - (1.0 - best)
        assert improvement < 5.0 * kT * kT


def test_mismatch_closed_forms():
    kappa, T = 1e-3, 100.0
    assert abs(A.m_nec_analytic("dephasing", kappa, T)
               - 0.5 * (1.0 - math.exp(-2.0 * kappa * T))) < 1e-15
    assert abs(A.m_nec_analytic("isotropic", kappa, T)
               - 0.5 * (1.0 - math.exp(-4.0 * kappa * T))) < 1e-15
    assert abs(A.m_nec_analytic("isotropic", 1.0, 1e4) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        A.m_nec_analytic("thermal", kappa, T)


def test_m_analytic():
    kappa, T, delta = 1e-3, 100.0, 0.2
    expect = 0.5 * (1.0 - A.s_sc(5, 4.0 * kappa, 4.0 * kappa, T, delta))
    assert abs(A.m_analytic(kappa, T, delta) - expect) < 1e-15
    assert A.m_analytic(0.0, 0.0, 0.0) == 0.0
