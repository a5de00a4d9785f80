"""Brute-force evolution of qubit x cavity x phonon on a truncated Hilbert space.

This module is an independent check on :mod:`becqfi.dynamics`. It evolves
the interaction-picture Hamiltonian

    H(t) = sum_b |b><b| [E_b + k_b (b e^{-it} + b^dag e^{it})],

where b runs over (qubit, photon number) blocks with

    k_b = chi n + g_ab [qubit = g],
    E_b = (Omega_c - i kappa) n + [qubit = e] (G n + Omega_A - i gamma).

Two propagators are provided. ``evolve_trotter`` uses a time-ordered
midpoint product; ``evolve_magnus`` applies the terminating Magnus
factorization with one dense matrix exponential per block. Each initial
phonon number of the thermal mixture is a separate branch.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh, expm
from scipy.special import eval_genlaguerre, gammaln

from .dynamics import TWO_PI
from .params import EffectiveParams
from .states import DEFAULT_TAIL_TOL, InputState, ThermalMode, TruncationWarning, choose_truncation, fock_amplitudes

PHOTON_GUARD = 5
LEAK_TOL = 1e-6
MAX_PHONON_CUT = 600
KEEP = ("impurity", "cavity", "joint")


class ConvergenceError(RuntimeError):
    """Step refinement did not settle within the allowed number of levels."""


@dataclass(frozen=True)
class FullState:
    """Amplitudes psi[qubit, photon, phonon, branch]; qubit 0 is e, 1 is g.

    Branch j starts from phonon number j and enters mixtures with weight
    ``weights[j]``.
    """

    psi: np.ndarray
    weights: np.ndarray
    t: float

    @property
    def n_max(self) -> int:
        return self.psi.shape[1] - 1

    @property
    def n_cut(self) -> int:
        return self.psi.shape[2] - 1

    def branch_norms(self) -> np.ndarray:
        return np.einsum("snpj,snpj->j", self.psi, self.psi.conj()).real


@dataclass(frozen=True)
class Blocks:
    k: np.ndarray  # displacement strength per block
    E: np.ndarray  # complex diagonal energy per block
    amp: np.ndarray  # initial amplitude c_s <n|phi> per block
    n_max: int


def make_blocks(e: EffectiveParams, s: InputState, c_e0: complex, c_g0: complex, n_max: int) -> Blocks:
    phi = fock_amplitudes(s, n_max)
    phi = phi / np.linalg.norm(phi)
    n = np.arange(n_max + 1, dtype=float)
    k = np.concatenate([e.chi * n, e.chi * n + e.g_ab])
    E = np.concatenate(
        [(e.Omega_c - 1j * e.kappa) * n + e.G * n + e.Omega_A - 1j * e.gamma, (e.Omega_c - 1j * e.kappa) * n]
    )
    amp = np.concatenate([c_e0 * phi, c_g0 * phi])
    return Blocks(k=k, E=E, amp=amp, n_max=n_max)


def default_photon_cut(s: InputState, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    return choose_truncation(s, tail_tol) + PHOTON_GUARD


def _displaced_fock_probs(x: float, j: int, n_hi: int) -> np.ndarray:
    """|<n|D(beta)|j>|^2 for n = 0..n_hi with x = |beta|^2."""
    n = np.arange(n_hi + 1)
    if x == 0.0:
        return (n == j).astype(float)
    hi = np.maximum(n, j)
    lo = np.minimum(n, j)
    L = eval_genlaguerre(lo, hi - lo, x)
    with np.errstate(divide="ignore"):
        logp = -x + (hi - lo) * math.log(x) + gammaln(lo + 1) - gammaln(hi + 1) + 2.0 * np.log(np.abs(L))
    return np.exp(logp)


def max_displacement(t: float, path: bool = True) -> float:
    """|1 - e^{i t'}| at t' = 2 pi t, or its maximum over [0, 2 pi t] if ``path``."""
    tt = TWO_PI * t
    if path:
        return 2.0 * math.sin(min(tt, math.pi) / 2.0)
    return abs(2.0 * math.sin(tt / 2.0))


def phonon_leak(blocks: Blocks, th: ThermalMode, t: float, n_cut_values: np.ndarray, path: bool = True) -> np.ndarray:
    """Amplitude-weighted phonon population beyond each candidate cut.

    Uses the exact displaced-Fock distribution at the displacement reached
    at ``t`` (or the largest one on [0, t] when ``path``); returns
    sum_{b, j} |amp_b| w_j sqrt(tail_bj(N)).
    """
    M = max_displacement(t, path)
    w = th.weights
    n_cut_values = np.asarray(n_cut_values)
    top = int(n_cut_values.max())
    out = np.zeros(len(n_cut_values))
    for a, k in zip(np.abs(blocks.amp), blocks.k):
        if a == 0.0:
            continue
        x = (k * M) ** 2
        for j, wj in enumerate(w):
            if a * wj < 1e-16:
                continue
            spread = 15.0 * math.sqrt((2 * j + 1) * x + 1.0)
            n_hi = max(top + 1, int(x + j + spread + 20))
            p = _displaced_fock_probs(x, j, n_hi)
            tail = np.cumsum(p[::-1])[::-1]  # tail[N] = sum_{n >= N} p_n
            out += a * wj * np.sqrt(tail[n_cut_values + 1])
    return out


def phonon_cutoff(
    e: EffectiveParams,
    s: InputState,
    th: ThermalMode,
    c_e0: complex,
    c_g0: complex,
    t: float,
    n_max: Optional[int] = None,
    leak_tol: float = LEAK_TOL,
    path: bool = True,
) -> int:
    """Smallest phonon cut whose leak metric is below ``leak_tol``.

    Time-stepping needs the whole path to stay resolved (``path=True``);
    the Magnus propagator only needs the final displacement.
    """
    n_max = default_photon_cut(s) if n_max is None else n_max
    blocks = make_blocks(e, s, c_e0, c_g0, n_max)
    lo = max(20, th.n_cut + 1)
    grid = np.arange(lo, MAX_PHONON_CUT + 1)
    leak = phonon_leak(blocks, th, t, grid, path)
    ok = np.nonzero(leak <= leak_tol)[0]
    if len(ok) == 0:
        warnings.warn(f"phonon leak {leak[-1]:.2e} > {leak_tol:g} even at n_cut={MAX_PHONON_CUT}", TruncationWarning)
        return MAX_PHONON_CUT
    return int(grid[ok[0]])


def _initial(blocks: Blocks, th: ThermalMode, n_cut: int) -> np.ndarray:
    J = th.n_cut
    if n_cut < J:
        raise ValueError("phonon cut must cover the thermal branches")
    psi0 = np.zeros((len(blocks.k), n_cut + 1, J + 1), dtype=complex)
    for j in range(J + 1):
        psi0[:, j, j] = blocks.amp
    return psi0


def _as_full(psi_blocks: np.ndarray, blocks: Blocks, th: ThermalMode, t: float) -> FullState:
    B, P, J = psi_blocks.shape
    return FullState(psi_blocks.reshape(2, blocks.n_max + 1, P, J), th.weights, t)


def _resolve(e, s, th, c_e0, c_g0, t, n_max, n_cut, path=True):
    n_max = default_photon_cut(s) if n_max is None else int(n_max)
    if n_cut is None:
        n_cut = phonon_cutoff(e, s, th, c_e0, c_g0, t, n_max, path=path)
    return make_blocks(e, s, c_e0, c_g0, n_max), int(n_cut)


def _joint(psi_blocks: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("apj,bpj,j->ab", psi_blocks, psi_blocks.conj(), w)


def _ladder(n_cut: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n_cut + 1)), 1)


# ---------------------------------------------------------------- Magnus


@dataclass(frozen=True)
class MagnusPropagatorParts:
    """First and second Magnus terms per block at time ``t`` (units of tau).

    F1 = -i E t + k (lam b^dag - lam^* b) and F2 = i k^2 (t - sin t) [b, b^dag],
    with lam = 1 - e^{it}. Higher terms vanish because [H, [H, H]] is
    proportional to [b, [b, b^dag]] = 0.
    """

    k: np.ndarray
    E: np.ndarray
    t: float
    n_cut: int

    @property
    def lam(self) -> complex:
        return 1.0 - np.exp(1j * TWO_PI * self.t)

    @property
    def kerr(self) -> float:
        tt = TWO_PI * self.t
        return tt - math.sin(tt)

    def displacement_generator(self) -> np.ndarray:
        b = _ladder(self.n_cut)
        return self.lam * b.conj().T - np.conj(self.lam) * b

    def F1(self, block: int) -> np.ndarray:
        eye = np.eye(self.n_cut + 1)
        return -1j * self.E[block] * TWO_PI * self.t * eye + self.k[block] * self.displacement_generator()

    def F2(self, block: int) -> np.ndarray:
        b = _ladder(self.n_cut)
        return 1j * self.k[block] ** 2 * self.kerr * (b @ b.conj().T - b.conj().T @ b)


def magnus_parts(e: EffectiveParams, s: InputState, t: float, n_max: int, n_cut: int) -> MagnusPropagatorParts:
    blocks = make_blocks(e, s, 1.0, 0.0, n_max)
    return MagnusPropagatorParts(blocks.k, blocks.E, t, n_cut)


def hamiltonian_block(parts: MagnusPropagatorParts, block: int, t: float) -> np.ndarray:
    """H_b at time t (units of tau) on the truncated phonon space."""
    b = _ladder(parts.n_cut)
    ph = np.exp(-1j * TWO_PI * t)
    return parts.E[block] * np.eye(parts.n_cut + 1) + parts.k[block] * (b * ph + b.conj().T * np.conj(ph))


def commutator_norm(parts: MagnusPropagatorParts, block: int, psi: np.ndarray) -> float:
    """||[F1, F2] psi||."""
    F1, F2 = parts.F1(block), parts.F2(block)
    return float(np.linalg.norm(F1 @ (F2 @ psi) - F2 @ (F1 @ psi)))


def nested_commutator_norm(parts: MagnusPropagatorParts, block: int, times, psi: np.ndarray) -> float:
    """||[H(t1), [H(t2), H(t3)]] psi||, the integrand of the third Magnus term."""
    H1, H2, H3 = (hamiltonian_block(parts, block, u) for u in times)
    C = H2 @ H3 - H3 @ H2
    return float(np.linalg.norm(H1 @ (C @ psi) - C @ (H1 @ psi)))


def evolve_magnus(
    e: EffectiveParams,
    s: InputState,
    th: ThermalMode,
    c_e0: complex,
    c_g0: complex,
    t: float,
    n_max: Optional[int] = None,
    n_cut: Optional[int] = None,
) -> FullState:
    """Apply e^{-iEt} exp[k(lam b^dag - lam^* b)] e^{i k^2 (t - sin t)} per block."""
    blocks, n_cut = _resolve(e, s, th, c_e0, c_g0, t, n_max, n_cut, path=False)
    leak = phonon_leak(blocks, th, t, np.array([n_cut]), path=False)[0]
    if leak > LEAK_TOL:
        warnings.warn(f"displacement tail {leak:.2e} at n_cut={n_cut}", TruncationWarning, stacklevel=2)
    parts = MagnusPropagatorParts(blocks.k, blocks.E, t, n_cut)
    gen = parts.displacement_generator()
    tt = TWO_PI * t
    psi = _initial(blocks, th, n_cut)
    out = np.empty_like(psi)
    for i, (k, E) in enumerate(zip(blocks.k, blocks.E)):
        scalar = np.exp(-1j * E * tt + 1j * k * k * parts.kerr)
        out[i] = scalar * (expm(k * gen) @ psi[i])
    return _as_full(out, blocks, th, t)


# ---------------------------------------------------------------- Trotter


class _Stepper:
    """Midpoint product of exact short-time exponentials.

    With X0 = b + b^dag = V x V^dag and R(t) = e^{itn}, each step is
    e^{-iE dt} R(t_mid) V e^{-i k dt x} V^dag R(t_mid)^dag. Consecutive
    rotations combine to the fixed transfer W = V^dag e^{-i dt n} V, so a
    step is one diagonal multiply and one matrix product.
    """

    def __init__(self, blocks: Blocks, n_cut: int):
        b = _ladder(n_cut)
        self.x, self.V = eigh(b + b.T)
        self.n = np.arange(n_cut + 1, dtype=float)
        self.blocks = blocks

    def run(self, psi0: np.ndarray, t: float, nsteps: int, threads: int = 1) -> np.ndarray:
        tt = TWO_PI * t
        dt = tt / nsteps
        V, n = self.V, self.n
        W = V.conj().T @ (np.exp(-1j * dt * n)[:, None] * V)
        ph = np.exp(-1j * dt * (self.blocks.k[None, :] * self.x[:, None] + self.blocks.E[None, :]))[:, :, None]
        t0 = 0.5 * dt
        t_last = t0 + (nsteps - 1) * dt
        Y = np.transpose(np.exp(-1j * t0 * n)[None, :, None] * psi0, (1, 0, 2))  # phonon, block, branch
        P, B, J = Y.shape
        Y = (V.conj().T @ Y.reshape(P, -1)).reshape(P, B, J)

        def advance(Yc):
            Pc, Bc, Jc = Yc.shape
            for step in range(nsteps):
                Yc = Yc * ph
                if step < nsteps - 1:
                    Yc = (W @ Yc.reshape(Pc, -1)).reshape(Pc, Bc, Jc)
            return Yc

        if threads > 1 and J > 1:
            chunks = np.array_split(np.arange(J), min(threads, J))
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                parts = list(pool.map(lambda idx: advance(np.ascontiguousarray(Y[:, :, idx])), chunks))
            Y = np.concatenate(parts, axis=2)
        else:
            Y = advance(Y)
        Y = (V @ Y.reshape(P, -1)).reshape(P, B, J)
        return np.exp(1j * t_last * n)[None, :, None] * np.transpose(Y, (1, 0, 2))


def trotter_fixed(
    e: EffectiveParams,
    s: InputState,
    th: ThermalMode,
    c_e0: complex,
    c_g0: complex,
    t: float,
    nsteps: int,
    n_max: Optional[int] = None,
    n_cut: Optional[int] = None,
    threads: int = 1,
) -> FullState:
    """Plain midpoint product with a fixed number of steps (no refinement)."""
    blocks, n_cut = _resolve(e, s, th, c_e0, c_g0, t, n_max, n_cut)
    psi = _Stepper(blocks, n_cut).run(_initial(blocks, th, n_cut), t, nsteps, threads)
    return _as_full(psi, blocks, th, t)


def evolve_trotter(
    e: EffectiveParams,
    s: InputState,
    th: ThermalMode,
    c_e0: complex,
    c_g0: complex,
    t: float,
    dt: float = 1.0 / 250,
    *,
    tol: float = 1e-8,
    extrapolate: bool = True,
    max_levels: int = 5,
    n_max: Optional[int] = None,
    n_cut: Optional[int] = None,
    threads: int = 1,
) -> FullState:
    """Time-ordered evolution to ``t`` with step refinement.

    ``dt`` (units of tau) is the coarsest step. The step is halved until two
    successive results differ by less than ``tol`` in the largest element of
    the reduced impurity-cavity matrix. With
    ``extrapolate`` each result is the Richardson combination
    (4 psi_{h/2} - psi_h)/3, valid because the midpoint product is
    time-symmetric and its error is even in the step. The extrapolated
    state is not an exact unitary image; use ``trotter_fixed`` for norm
    checks.
    """
    if t == 0:
        blocks, n_cut = _resolve(e, s, th, c_e0, c_g0, t, n_max, n_cut)
        return _as_full(_initial(blocks, th, n_cut), blocks, th, t)
    blocks, n_cut = _resolve(e, s, th, c_e0, c_g0, t, n_max, n_cut)
    stepper = _Stepper(blocks, n_cut)
    psi0 = _initial(blocks, th, n_cut)
    nsteps = max(2, math.ceil(t / dt))
    raw_prev = stepper.run(psi0, t, nsteps, threads)
    best_prev = None
    diff = math.inf
    for _ in range(max_levels):
        nsteps *= 2
        raw = stepper.run(psi0, t, nsteps, threads)
        best = (4.0 * raw - raw_prev) / 3.0 if extrapolate else raw
        ref = best_prev if extrapolate else raw_prev
        if ref is not None:
            diff = float(np.max(np.abs(_joint(best, th.weights) - _joint(ref, th.weights))))
            if diff < tol:
                return _as_full(best, blocks, th, t)
        raw_prev, best_prev = raw, best
    raise ConvergenceError(f"step refinement stalled: last change {diff:.3e} >= tol {tol:g} at {nsteps} steps")


# ---------------------------------------------------------------- readout


def reduce(fs: FullState, keep: str, normalize: bool = False) -> np.ndarray:
    """Partial trace with the thermal weights folded in.

    ``keep`` is ``"impurity"`` (2x2), ``"cavity"`` (photon matrix) or
    ``"joint"`` (ordered e-block then g-block, each over photons).
    """
    psi, w = fs.psi, fs.weights
    if keep == "impurity":
        rho = np.einsum("snpj,tnpj,j->st", psi, psi.conj(), w)
    elif keep == "cavity":
        rho = np.einsum("smpj,snpj,j->mn", psi, psi.conj(), w)
    elif keep == "joint":
        r4 = np.einsum("smpj,tnpj,j->smtn", psi, psi.conj(), w)
        d = psi.shape[1]
        rho = r4.reshape(2 * d, 2 * d)
    else:
        raise ValueError(f"keep must be one of {KEEP}")
    if normalize:
        rho = rho / np.real(np.trace(rho))
    return rho
