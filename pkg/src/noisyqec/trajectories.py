"""Stochastic unravelings of the master equation.

Two unravelings are provided, both stepping a normalized state vector:

* quantum jumps: with probability sum_j <L_j+ L_j> dt a jump
  L_j psi / |L_j psi| fires (channel j chosen proportional to <L_j+ L_j>);
  otherwise the state drifts under the non-Hermitian effective Hamiltonian
  H - (i/2) sum_j L_j+ L_j and is renormalized.
* quantum state diffusion: Euler-Maruyama step with drift
  sum_j (<L_j+> L_j - (1/2) L_j+ L_j - (1/2) <L_j+><L_j>) psi dt and
  fluctuation sum_j (L_j - <L_j>) psi dxi_j, where the dxi_j are
  independent complex Gaussians with M dxi = M dxi_i dxi_j = 0 and
  M dxi_i* dxi_j = delta_ij dt; the state is renormalized every step.

In both steppers the Hamiltonian part of one step is applied exactly
(matrix exponential, precomputed per segment), so the no-noise limit
reproduces Schrodinger evolution to machine precision; the noise terms are
first order in dt.

Ensembles average |psi><psi| over trajectories.  Every trajectory owns a
counter-based RNG stream keyed by (master_seed, trajectory_index) and the
per-step draw pattern is fixed (jumps: 2 uniforms per step whether or not a
jump fires; QSD: one (n_ops, 2) normal block per step), so results are
independent of batching and thread count; trajectories are processed in
fixed-size chunks and reduced in chunk order, bit-identically for any
worker-pool size.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hilbert import expm_hermitian
from .lindblad import EvolutionSegment, NoiseModel, _split_steps

DT_TRAJ_DEFAULT = 0.005
UNRAVELING_QSD = "qsd"
UNRAVELING_JUMPS = "quantum_jumps"

#: trajectories per processing chunk; fixed so that results cannot depend on
#: how chunks are distributed over worker threads
_CHUNK = 64
#: steps of pregenerated noise per RNG block
_BLOCK = 256


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float = DT_TRAJ_DEFAULT
    n_trajectories: int = 400
    master_seed: int = 0
    unraveling: str = UNRAVELING_QSD

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.unraveling not in (UNRAVELING_QSD, UNRAVELING_JUMPS):
            raise ValueError(f"unknown unraveling {self.unraveling!r}")


def trajectory_rng(master_seed: int, traj_index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory; independent across indices."""
    return np.random.Generator(np.random.Philox(key=[master_seed, traj_index]))


class _SegmentPlan:
    """Per-segment precomputation shared by all trajectories."""

    def __init__(self, seg: EvolutionSegment, dt: float, unraveling: str):
        H = np.asarray(seg.hamiltonian, dtype=complex)
        dim = H.shape[0]
        noise = seg.noise
        self.n_full, self.rem = _split_steps(seg.duration, dt)
        self.dt = dt
        self.kind = noise.kind
        self.kappa = noise.kappa

        if noise.kind in ("dephasing", "isotropic"):
            self.perms, phases = noise.perm_phase()
            self.phases = phases * math.sqrt(noise.kappa)  # fold sqrt(kappa) into L
            self.m = len(self.perms)
            self.L_stack = None
        elif noise.kind == "none":
            self.perms = np.zeros((0, dim), dtype=np.int64)
            self.phases = np.zeros((0, dim), dtype=complex)
            self.m = 0
            self.L_stack = None
        else:  # custom
            self.L_stack = np.stack([np.asarray(L, complex) for L in noise.lindblad_ops])
            self.m = len(self.L_stack)
            self.perms = None
            self.phases = None

        # Hamiltonian factor of one step (exact); for jumps include the
        # effective-Hamiltonian decay, which matters only for custom noise
        # (for Pauli noise it is a scalar absorbed by renormalization).
        self.U_full_T = np.ascontiguousarray(expm_hermitian(H, dt).T)
        self.U_rem_T = np.ascontiguousarray(expm_hermitian(H, self.rem).T) if self.rem else None
        if unraveling == UNRAVELING_JUMPS and noise.kind == "custom" and self.m:
            Heff = H - 0.5j * sum(L.conj().T @ L for L in self.L_stack)
            self.U_full_T = np.ascontiguousarray(scipy.linalg.expm(-1j * Heff * dt).T)
            if self.rem:
                self.U_rem_T = np.ascontiguousarray(scipy.linalg.expm(-1j * Heff * self.rem).T)

        if unraveling == UNRAVELING_JUMPS and self.m:
            p_bound = noise.kappa * self.m * dt if noise.kind != "custom" else None
            if p_bound is not None and p_bound > 0.1:
                warnings.warn(
                    f"jump probability per step is {p_bound:.3g} > 0.1; reduce dt",
                    stacklevel=2,
                )

    def steps(self):
        """(n_steps, dt, U_T) sub-blocks: the full-step run then the remainder."""
        out = []
        if self.n_full:
            out.append((self.n_full, self.dt, self.U_full_T))
        if self.rem:
            out.append((1, self.rem, self.U_rem_T))
        return out


def _apply_ops(plan, psi_rows):
    """L_j psi for every op and row: returns (rows, m, dim)."""
    if plan.L_stack is not None:
        return np.einsum("mde,ce->cmd", plan.L_stack, psi_rows)
    return plan.phases[None, :, :] * psi_rows[:, plan.perms]


def _qsd_block(plan, psi, dxi, h, U_T):
    """Advance a (rows, dim) batch through len(dxi) QSD steps."""
    m = plan.m
    for s in range(dxi.shape[1]):
        psi = psi @ U_T
        if m:
            A = _apply_ops(plan, psi)                       # (c, m, dim)
            e = np.einsum("cd,cmd->cm", psi.conj(), A)      # <L_j>
            xi = dxi[:, s, :]                               # (c, m)
            drift = np.einsum("cm,cmd->cd", e.conj(), A)
            if plan.L_stack is None:
                ldl = plan.kappa * m * psi
            else:
                LdL_A = np.einsum("mde,cme->cmd", np.conj(np.transpose(plan.L_stack, (0, 2, 1))), A)
                ldl = LdL_A.sum(axis=1)
            drift = drift - 0.5 * ldl - 0.5 * (np.abs(e) ** 2).sum(axis=1)[:, None] * psi
            fluct = np.einsum("cm,cmd->cd", xi, A) - (xi * e).sum(axis=1)[:, None] * psi
            psi = psi + h * drift + fluct
        psi = psi / np.linalg.norm(psi, axis=1)[:, None]
    return psi


def _jump_block(plan, psi, uniforms, h, U_T):
    """Advance a (rows, dim) batch through len(uniforms) jump steps."""
    m = plan.m
    for s in range(uniforms.shape[1]):
        if not m:
            psi = psi @ U_T
            continue
        u1 = uniforms[:, s, 0]
        u2 = uniforms[:, s, 1]
        if plan.L_stack is None:
            p_total = plan.kappa * m * h
            jumped = u1 < p_total
            channel = np.minimum((u2 * m).astype(np.intp), m - 1)
        else:
            A = _apply_ops(plan, psi)
            w = (np.abs(A) ** 2).sum(axis=2)                # (c, m)
            W = w.sum(axis=1)
            jumped = u1 < W * h
            cum = np.cumsum(w, axis=1)
            channel = (cum < (u2 * W)[:, None]).sum(axis=1)
            channel = np.minimum(channel, m - 1)
        out = psi @ U_T
        rows = np.nonzero(jumped)[0]
        if rows.size:
            ch = channel[rows]
            if plan.L_stack is None:
                out[rows] = plan.phases[ch] * psi[rows[:, None], plan.perms[ch]]
            else:
                out[rows] = np.einsum("rde,re->rd", plan.L_stack[ch], psi[rows])
        norms = np.linalg.norm(out, axis=1)
        if np.any(norms == 0):
            raise RuntimeError("jump produced a zero-norm state")
        psi = out / norms[:, None]
    return psi


def jump_step(psi, H, noise: NoiseModel, dt: float, rng) -> np.ndarray:
    """One quantum-jump step of a single normalized state."""
    seg = EvolutionSegment(np.asarray(H, complex), dt, noise)
    plan = _SegmentPlan(seg, dt, UNRAVELING_JUMPS)
    draws = rng.random((1, 1, 2)) if plan.m else np.zeros((1, 1, 2))
    (n_steps, h, U_T), = plan.steps()
    return _jump_block(plan, np.asarray(psi, complex)[None, :], draws, h, U_T)[0]


def qsd_step(psi, H, noise: NoiseModel, dt: float, rng) -> np.ndarray:
    """One quantum-state-diffusion step of a single normalized state."""
    seg = EvolutionSegment(np.asarray(H, complex), dt, noise)
    plan = _SegmentPlan(seg, dt, UNRAVELING_QSD)
    if plan.m:
        xy = rng.standard_normal((plan.m, 2))
        dxi = math.sqrt(dt / 2.0) * (xy[:, 0] + 1j * xy[:, 1])
    else:
        dxi = np.zeros(0, dtype=complex)
    (n_steps, h, U_T), = plan.steps()
    return _qsd_block(plan, np.asarray(psi, complex)[None, :], dxi[None, None, :], h, U_T)[0]


def _default_observable(psi0):
    def obs(psi_rows):
        ov = psi_rows @ psi0.conj()
        return 1.0 - np.abs(ov) ** 2

    return obs


def _run_chunk(psi0, plans, cfg, traj_indices, observable):
    """All segments for one chunk of trajectories; returns (rho_sum, obs)."""
    c = len(traj_indices)
    rngs = [trajectory_rng(cfg.master_seed, int(k)) for k in traj_indices]
    psi = np.tile(np.asarray(psi0, complex), (c, 1))
    for plan in plans:
        qsd = cfg.unraveling == UNRAVELING_QSD
        for n_steps, h, U_T in plan.steps():
            done = 0
            while done < n_steps:
                nb = min(_BLOCK, n_steps - done)
                if plan.m:
                    if qsd:
                        xy = np.stack([r.standard_normal((nb, plan.m, 2)) for r in rngs])
                        draws = math.sqrt(h / 2.0) * (xy[..., 0] + 1j * xy[..., 1])
                    else:
                        draws = np.stack([r.random((nb, 2)) for r in rngs])
                else:
                    draws = np.zeros((c, nb, 0)) if qsd else np.zeros((c, nb, 2))
                if qsd:
                    psi = _qsd_block(plan, psi, draws, h, U_T)
                else:
                    psi = _jump_block(plan, psi, draws, h, U_T)
                done += nb
    rho_sum = np.einsum("cd,ce->de", psi, psi.conj())
    return rho_sum, np.asarray(observable(psi), dtype=float)


def run_ensemble(psi0, segments, cfg: TrajectoryConfig, observable=None, n_threads: int = 1):
    """Average |psi><psi| over cfg.n_trajectories stochastic trajectories.

    Returns (rho_avg, stderr) where stderr is the ensemble standard error of
    the per-trajectory scalar `observable` (default: infidelity of the full
    register state against psi0).  Results are bit-identical for any
    n_threads.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    plans = [_SegmentPlan(seg, cfg.dt, cfg.unraveling) for seg in segments]
    if observable is None:
        observable = _default_observable(psi0)
    K = cfg.n_trajectories
    chunks = [np.arange(lo, min(lo + _CHUNK, K)) for lo in range(0, K, _CHUNK)]

    if n_threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(
                lambda idx: _run_chunk(psi0, plans, cfg, idx, observable), chunks
            ))
    else:
        results = [_run_chunk(psi0, plans, cfg, idx, observable) for idx in chunks]

    dim = psi0.shape[0]
    rho = np.zeros((dim, dim), dtype=complex)
    obs_all = []
    for rho_sum, obs in results:  # fixed chunk order: deterministic reduction
        rho += rho_sum
        obs_all.append(obs)
    rho /= K
    obs_all = np.concatenate(obs_all)
    stderr = float(obs_all.std(ddof=1) / math.sqrt(K)) if K > 1 else float("inf")
    return rho, stderr
