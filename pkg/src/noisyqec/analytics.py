"""Closed-form success probabilities and optima for periodically corrected qubits.

Conventions: kappa_n is the effective per-qubit error rate of the encoded
register (2*kappa for the 3-qubit dephasing code, 4*kappa for the 5-qubit
isotropic code, with kappa the rate of each Lindblad operator); delta is the
fraction of the total time spent in the encode/decode windows (delta = Delta/T);
primed rates apply during those windows.  "snc"/"sc" suffixes mean success
without / with correction.  All functions are pure scalar maps.
"""

import math

from scipy.optimize import brentq

_NOISE_DECAY = {"dephasing": 2.0, "isotropic": 4.0}


def _check_nonneg(**values):
    for name, value in values.items():
        if value < 0:
            raise ValueError("%s must be nonnegative, got %r" % (name, value))


def _one_cycle_core(n, y):
    # probability of zero or one error among n qubits, each error free with
    # probability e^{-y}
    return n * math.exp(-(n - 1) * y) - (n - 1) * math.exp(-n * y)


def p_snc(kappa_n, T):
    """Probability that a single uncorrected qubit stays error free for T."""
    _check_nonneg(kappa_n=kappa_n, T=T)
    return math.exp(-kappa_n * T)


def p_sc(n, kappa_n, T):
    """Success probability for time T with one instantaneous perfect correction.

    Zero or one error among the n register qubits is a success; two or more
    defeat a single-error-correcting code.
    """
    _check_nonneg(n=n, kappa_n=kappa_n, T=T)
    x = kappa_n * T
    return math.exp(-n * x) + n * math.exp(-(n - 1) * x) * (1.0 - math.exp(-x))


def crossover_kT(n):
    """Root of p_snc = p_sc(n) in kappa_n*T: beyond it correction hurts."""
    if n < 2:
        raise ValueError("n must be at least 2, got %r" % (n,))

    def gap(x):
        return math.exp(-x) - p_sc(n, x, 1.0)

    return brentq(gap, 1e-12, 5.0, xtol=1e-10)


def s_sc(n, kappa_n, kappa_n_prime, T, delta):
    """Storage success: E+D (duration delta*T, rate kappa_n_prime per qubit,
    any error fatal) followed by free storage for (1-delta)*T with one
    perfect correction at the end."""
    _check_nonneg(n=n, kappa_n=kappa_n, kappa_n_prime=kappa_n_prime, T=T)
    if not 0.0 <= delta <= 1.0:
        raise ValueError("storage requires 0 <= delta <= 1, got %r" % (delta,))
    ed = math.exp(-n * kappa_n_prime * T * delta)
    return ed * _one_cycle_core(n, kappa_n * (1.0 - delta) * T)


def t_sc(n, kappa_n, kappa_n_prime, T, delta):
    """Transmission success: as s_sc but the E+D time delta*T is added on top
    of the transmission time T instead of eating into it."""
    _check_nonneg(n=n, kappa_n=kappa_n, kappa_n_prime=kappa_n_prime, T=T,
                  delta=delta)
    ed = math.exp(-n * kappa_n_prime * T * delta)
    return ed * _one_cycle_core(n, kappa_n * T)


def t_opt(n, kappa_n, Delta):
    """Correction interval maximizing the benefit ratio R, sqrt(2*Delta/((n-1)*kappa_n)).

    Limiting values are returned explicitly: 0 for Delta = 0 (correct as often
    as possible), inf for kappa_n = 0.
    """
    _check_nonneg(n=n, kappa_n=kappa_n, Delta=Delta)
    if Delta == 0.0:
        return 0.0
    if kappa_n == 0.0:
        return math.inf
    return math.sqrt(2.0 * Delta / ((n - 1) * kappa_n))


def ratio_R(n, kappa_n, T, delta):
    """Benefit ratio R = (1 - p_snc) / (1 - s_sc) with equal rates in and out
    of the E+D windows; R > 1 means correcting beats not correcting."""
    num = 1.0 - p_snc(kappa_n, T)
    den = 1.0 - s_sc(n, kappa_n, kappa_n, T, delta)
    if den == 0.0:
        raise ValueError("R is undefined when no error can occur (kappa_n*T = 0)")
    return num / den


def _check_cycles(N):
    if N < 1:
        raise ValueError("N must be at least 1, got %r" % (N,))


def p_Nsc(n, kappa_n, T, N):
    """Success with N equally spaced instantaneous perfect corrections."""
    _check_nonneg(n=n, kappa_n=kappa_n, T=T)
    _check_cycles(N)
    return _one_cycle_core(n, kappa_n * T / N) ** N


def s_Nsc(n, kappa_n, kappa_n_prime, T, delta, N):
    """Storage success with N correction cycles, each spending delta*T in E+D."""
    _check_nonneg(n=n, kappa_n=kappa_n, kappa_n_prime=kappa_n_prime, T=T,
                  delta=delta)
    _check_cycles(N)
    if N * delta >= 1.0:
        raise ValueError("storage requires N*delta < 1, got %r" % (N * delta,))
    ed = math.exp(-n * N * kappa_n_prime * T * delta)
    return ed * _one_cycle_core(n, kappa_n * (1.0 / N - delta) * T) ** N


def t_Nsc(n, kappa_n, kappa_n_prime, T, delta, N):
    """Transmission success with N correction cycles."""
    _check_nonneg(n=n, kappa_n=kappa_n, kappa_n_prime=kappa_n_prime, T=T,
                  delta=delta)
    _check_cycles(N)
    ed = math.exp(-n * N * kappa_n_prime * T * delta)
    return ed * _one_cycle_core(n, kappa_n * T / N) ** N


def n_opt(n, kappa_n, T, delta):
    """Optimal number of correction cycles, sqrt((n-1)*kappa_n*T/(2*delta)).

    Real-valued (round for an integer schedule); inf when delta = 0.
    """
    _check_nonneg(n=n, kappa_n=kappa_n, T=T, delta=delta)
    if delta == 0.0:
        return math.inf
    return math.sqrt((n - 1) * kappa_n * T / (2.0 * delta))


def max_failure(n, kappa_n, T, delta):
    """Failure probability at the optimal cycle count,
    n*kappa_n*T*sqrt(2*(n-1)*delta*kappa_n*T) to first order (clipped to 1)."""
    _check_nonneg(n=n, kappa_n=kappa_n, T=T, delta=delta)
    x = kappa_n * T
    return min(1.0, n * x * math.sqrt(2.0 * (n - 1) * delta * x))


def m_nec_analytic(noise_kind, kappa, T):
    """Closed-form mismatch of a single uncorrected qubit started in (|0>+|1>)/sqrt(2)."""
    _check_nonneg(kappa=kappa, T=T)
    try:
        rate = _NOISE_DECAY[noise_kind]
    except KeyError:
        raise ValueError("noise_kind must be one of %s, got %r"
                         % (sorted(_NOISE_DECAY), noise_kind))
    return 0.5 * (1.0 - math.exp(-rate * kappa * T))


def m_analytic(kappa, T, delta):
    """Mismatch estimate for the 5-qubit storage pipeline, (1 - s_sc(5))/2.

    Treats any error during E+D as maximally damaging; kappa is the
    per-operator Lindblad rate (so the per-qubit rate is 4*kappa).
    """
    k5 = 4.0 * kappa
    return 0.5 * (1.0 - s_sc(5, k5, k5, T, delta))
