"""Analytic reduced density matrices of the impurity and the cavity.

Times are given in units of tau = 2 pi / omega_m. With omega_m = 1 the
working point tau is 2 pi in dimensionless time.

The thermal decoherence factor used here is exp[-Dk^2 (1 - cos t) coth(b/2)]
with Dk the difference of the two block displacement strengths. Passing
``printed=True`` applies the alternative factor carrying an additional
|lambda|^2; it is kept for comparison only and disagrees with brute-force
evolution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import EffectiveParams
from .states import COHERENT, DEFAULT_TAIL_TOL, InputState, ThermalMode, choose_truncation, fock_amplitudes

TWO_PI = 2.0 * math.pi
# above this decay rate the working-point compensation e^{2 pi gamma} is flagged
GAMMA_COMPENSATION_LIMIT = 0.2


class SingularDerivativeError(ArithmeticError):
    """The logarithmic derivative A is undefined because rho_eg vanishes."""


class DivergenceWarning(RuntimeWarning):
    """A Fisher-type quotient diverged and was reported as +inf."""


class CompensationWarning(UserWarning):
    """The working-point amplitude compensation needs a very unbalanced initial state."""


def working_point_coefficients(gamma: float) -> tuple[complex, complex]:
    """Initial amplitudes (c_e(0), c_g(0)) for which c_e(tau) = c_g(tau).

    The excited amplitude decays as e^{-2 pi gamma} over one period, so it is
    enlarged by the inverse factor before normalization.
    """
    if gamma > GAMMA_COMPENSATION_LIMIT:
        warnings.warn(
            f"gamma = {gamma:g}: compensating factor e^(2 pi gamma) = {math.exp(TWO_PI * gamma):.3g}",
            CompensationWarning,
            stacklevel=2,
        )
    w = math.exp(TWO_PI * gamma)
    norm = math.hypot(w, 1.0)
    return complex(w / norm), complex(1.0 / norm)


def _photon_cut(s: InputState, n_max: Optional[int], tail_tol: float) -> int:
    return choose_truncation(s, tail_tol) if n_max is None else int(n_max)


@dataclass(frozen=True)
class JointElements:
    """Impurity-cavity matrix elements rho_{s s', m n} after tracing out the phonon."""

    ee: np.ndarray
    gg: np.ndarray
    eg: np.ndarray
    t: float

    @property
    def ge(self) -> np.ndarray:
        return self.eg.conj().T

    def full(self) -> np.ndarray:
        """Dense matrix ordered (e, photons) then (g, photons)."""
        return np.block([[self.ee, self.eg], [self.ge, self.gg]])

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.ee) + np.trace(self.gg)))

    def impurity(self) -> np.ndarray:
        return np.array(
            [[np.trace(self.ee), np.trace(self.eg)], [np.trace(self.ge), np.trace(self.gg)]],
            dtype=complex,
        )

    def cavity(self) -> np.ndarray:
        return self.ee + self.gg


def joint_elements(
    e: EffectiveParams,
    s: InputState,
    th: ThermalMode,
    c_e0: complex,
    c_g0: complex,
    t: float,
    n_max: Optional[int] = None,
    printed: bool = False,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> JointElements:
    """Elements at time ``t`` (units of tau) for initial amplitudes c_e0, c_g0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if abs(abs(c_e0) ** 2 + abs(c_g0) ** 2 - 1.0) > 1e-12:
        raise ValueError("|c_e0|^2 + |c_g0|^2 must equal 1")
    N = _photon_cut(s, n_max, tail_tol)
    phi = fock_amplitudes(s, N, tail_tol)
    tt = TWO_PI * t
    m = np.arange(N + 1, dtype=float)[:, None]
    n = np.arange(N + 1, dtype=float)[None, :]
    chi, gab = e.chi, e.g_ab
    kerr = tt - math.sin(tt)
    decoh = (1.0 - math.cos(tt)) * th.coth_half
    if printed:
        decoh *= abs(1.0 - np.exp(1j * tt)) ** 2

    base = np.exp(-e.kappa * (m + n) * tt) * np.outer(phi, phi.conj())
    d = m - n
    sq = m**2 - n**2
    ee = (
        abs(c_e0) ** 2
        * math.exp(-2.0 * e.gamma * tt)
        * base
        * np.exp(-1j * (e.Omega_c + e.G) * d * tt + 1j * chi**2 * sq * kerr - decoh * chi**2 * d**2)
    )
    gg = (
        abs(c_g0) ** 2
        * base
        * np.exp(-1j * e.Omega_c * d * tt + 1j * (chi**2 * sq + 2.0 * chi * gab * d) * kerr - decoh * chi**2 * d**2)
    )
    eg = (
        c_e0
        * np.conj(c_g0)
        * math.exp(-e.gamma * tt)
        * base
        * np.exp(
            -1j * (e.Omega_c * d + e.Omega_A + e.G * m) * tt
            + 1j * (chi**2 * sq - 2.0 * chi * gab * n - gab**2) * kerr
            - decoh * (chi * d - gab) ** 2
        )
    )
    return JointElements(ee=ee, gg=gg, eg=eg, t=t)


@dataclass(frozen=True)
class QubitDensity:
    """Impurity density matrix at tau together with O-derivatives of rho_eg.

    ``d_rho_eg`` and ``d2_rho_eg`` are first and second derivatives with
    respect to O. The constant phase e^{-i 2 pi (Omega_A + g_ab^2)} is
    treated as a known reference and is not differentiated.
    """

    rho_ee: float
    rho_gg: float
    rho_eg: complex
    d_rho_eg: complex
    d2_rho_eg: Optional[complex] = None
    normalized: bool = False

    @property
    def A(self) -> complex:
        if self.rho_eg == 0:
            raise SingularDerivativeError("rho_eg = 0: the logarithmic derivative is undefined")
        return self.d_rho_eg / self.rho_eg

    @property
    def B(self) -> Optional[complex]:
        """Second derivative of rho_eg divided by rho_eg."""
        if self.d2_rho_eg is None:
            return None
        if self.rho_eg == 0:
            raise SingularDerivativeError("rho_eg = 0")
        return self.d2_rho_eg / self.rho_eg

    @property
    def trace(self) -> float:
        return self.rho_ee + self.rho_gg

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho_ee, self.rho_eg], [np.conj(self.rho_eg), self.rho_gg]], dtype=complex)

    def d_matrix(self) -> np.ndarray:
        return np.array([[0.0, self.d_rho_eg], [np.conj(self.d_rho_eg), 0.0]], dtype=complex)

    def d2_matrix(self) -> np.ndarray:
        d2 = 0j if self.d2_rho_eg is None else self.d2_rho_eg
        return np.array([[0.0, d2], [np.conj(d2), 0.0]], dtype=complex)

    def normalize(self) -> "QubitDensity":
        tr = self.trace
        if not tr > 0:
            raise ZeroDivisionError("qubit trace vanished")
        d2 = None if self.d2_rho_eg is None else self.d2_rho_eg / tr
        return QubitDensity(self.rho_ee / tr, self.rho_gg / tr, self.rho_eg / tr, self.d_rho_eg / tr, d2, True)


def phase_angle(e: EffectiveParams) -> float:
    """theta = 2 pi (G + 2 O); the n-photon term of rho_eg carries e^{-i theta n}."""
    return TWO_PI * (e.G + 2.0 * e.O)


def reference_phase(e: EffectiveParams) -> complex:
    """Constant prefactor e^{-i 2 pi (Omega_A + g_ab^2)} of rho_eg."""
    return complex(np.exp(-1j * TWO_PI * (e.Omega_A + e.g_ab**2)))


def generating_sums(e: EffectiveParams, s: InputState) -> tuple[float, complex, complex, complex]:
    """Closed forms of Sum p_n x^n and of Sum p_n x^n e^{-i theta n} with two O-derivatives.

    Returns (diag, S, dS/dO, d2S/dO2) with x = e^{-4 pi kappa}.
    """
    x = math.exp(-2.0 * TWO_PI * e.kappa)
    u = np.exp(-1j * phase_angle(e))
    nbar = s.nbar
    if s.kind == COHERENT:
        diag = math.exp(nbar * (x - 1.0))
        S = np.exp(nbar * (x * u - 1.0))
        A = -2j * TWO_PI * nbar * x * u
        dA = -(2.0 * TWO_PI) ** 2 * nbar * x * u
    else:
        sech = 1.0 / math.sqrt(nbar + 1.0)
        t2 = s.tanh2
        diag = sech / math.sqrt(1.0 - x * x * t2)
        z = t2 * x * x * u * u
        S = sech / np.sqrt(1.0 - z)
        A = -2j * TWO_PI * z / (1.0 - z)
        dA = -2.0 * (2.0 * TWO_PI) ** 2 * z / (1.0 - z) ** 2
    return diag, complex(S), complex(A * S), complex((A * A + dA) * S)


def series_sums(e: EffectiveParams, s: InputState, n_max: int, tail_tol: float = DEFAULT_TAIL_TOL):
    """The same four quantities summed over the Fock distribution up to ``n_max``."""
    p = np.abs(fock_amplitudes(s, n_max, tail_tol)) ** 2
    n = np.arange(n_max + 1, dtype=float)
    w = p * np.exp(-2.0 * TWO_PI * e.kappa * n)
    terms = w * np.exp(-1j * phase_angle(e) * n)
    k = -2j * TWO_PI * n
    return float(np.sum(w)), complex(np.sum(terms)), complex(np.sum(k * terms)), complex(np.sum(k * k * terms))


def impurity_at_tau(
    e: EffectiveParams,
    s: InputState,
    c_e: Optional[complex] = None,
    c_g: Optional[complex] = None,
    *,
    closed_form: bool = True,
    reference_frame: bool = True,
    normalize: bool = True,
    n_max: Optional[int] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> QubitDensity:
    """Qubit state at tau from the decayed amplitudes c_e(tau), c_g(tau).

    Both amplitudes default to 1/sqrt(2), the working point. With
    ``reference_frame`` the constant phase of rho_eg is removed.
    """
    if c_e is None and c_g is None:
        c_e = c_g = complex(math.sqrt(0.5))
    elif c_e is None or c_g is None:
        raise ValueError("give both amplitudes or neither")
    if closed_form:
        diag, S, dS, d2S = generating_sums(e, s)
    else:
        diag, S, dS, d2S = series_sums(e, s, _photon_cut(s, n_max, tail_tol), tail_tol)
    pref = c_e * np.conj(c_g)
    if not reference_frame:
        pref = pref * reference_phase(e)
    q = QubitDensity(
        rho_ee=abs(c_e) ** 2 * diag,
        rho_gg=abs(c_g) ** 2 * diag,
        rho_eg=complex(pref * S),
        d_rho_eg=complex(pref * dS),
        d2_rho_eg=complex(pref * d2S),
    )
    return q.normalize() if normalize else q


def log_derivative_A(
    e: EffectiveParams,
    s: InputState,
    *,
    closed_form: bool = True,
    n_max: Optional[int] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> complex:
    """A = d(rho_eg)/dO / rho_eg at tau."""
    if closed_form:
        _, S, dS, _ = generating_sums(e, s)
    else:
        _, S, dS, _ = series_sums(e, s, _photon_cut(s, n_max, tail_tol), tail_tol)
    if S == 0:
        raise SingularDerivativeError("rho_eg = 0: the logarithmic derivative is undefined")
    return dS / S


def cavity_at_tau(
    e: EffectiveParams,
    s: InputState,
    c_e: Optional[complex] = None,
    c_g: Optional[complex] = None,
    *,
    n_max: Optional[int] = None,
    normalize: bool = True,
    printed: bool = False,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> np.ndarray:
    """Photon-number density matrix at tau after tracing out impurity and phonon.

    ``c_e``, ``c_g`` are the decayed amplitudes at tau (default 1/sqrt(2)).
    The ground-state branch carries e^{i 4 pi O (m - n)}; ``printed=True``
    drops this phase and reproduces the alternative published form, which
    differs by a diagonal unitary and has the same photon statistics.
    """
    if c_e is None and c_g is None:
        c_e = c_g = complex(math.sqrt(0.5))
    elif c_e is None or c_g is None:
        raise ValueError("give both amplitudes or neither")
    N = _photon_cut(s, n_max, tail_tol)
    phi = fock_amplitudes(s, N, tail_tol)
    m = np.arange(N + 1, dtype=float)[:, None]
    n = np.arange(N + 1, dtype=float)[None, :]
    d = m - n
    common = np.exp(-e.kappa * TWO_PI * (m + n) - 1j * TWO_PI * (e.Omega_c * d - e.chi**2 * (m**2 - n**2)))
    if printed:
        branch = abs(c_e) ** 2 * np.exp(-1j * phase_angle(e) * d) + abs(c_g) ** 2
    else:
        branch = abs(c_e) ** 2 * np.exp(-1j * TWO_PI * e.G * d) + abs(c_g) ** 2 * np.exp(2j * TWO_PI * e.O * d)
    rho = common * branch * np.outer(phi, phi.conj())
    if normalize:
        rho = rho / np.real(np.trace(rho))
    return rho
