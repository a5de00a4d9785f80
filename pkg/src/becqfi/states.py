"""Cavity input states and the thermal Bogoliubov mode in the number basis."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

DEFAULT_TAIL_TOL = 1e-12

COHERENT = "coherent"
SQUEEZED = "squeezed"
FAMILIES = (COHERENT, SQUEEZED)


class TruncationWarning(UserWarning):
    """A truncated Fock expansion misses more weight than requested."""


@dataclass(frozen=True)
class InputState:
    """Cavity field preparation.

    ``kind`` is ``"coherent"`` (amplitude ``alpha``) or ``"squeezed"``
    (squeezed vacuum with modulus ``r`` and phase ``theta``).
    """

    kind: str
    alpha: complex = 0j
    r: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown input kind {self.kind!r}; expected one of {FAMILIES}")
        if self.r < 0:
            raise ValueError("squeezing modulus r must be >= 0")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @classmethod
    def coherent(cls, alpha: complex) -> "InputState":
        return cls(COHERENT, alpha=alpha)

    @classmethod
    def squeezed(cls, r: float, theta: float = 0.0) -> "InputState":
        return cls(SQUEEZED, r=r, theta=theta)

    @classmethod
    def from_nbar(cls, kind: str, nbar: float, phase: float = 0.0) -> "InputState":
        """Build a state with mean photon number ``nbar``.

        For coherent input ``phase`` is arg(alpha); for squeezed vacuum it is
        the squeezing phase.
        """
        if nbar < 0:
            raise ValueError("nbar must be >= 0")
        if kind == COHERENT:
            return cls.coherent(math.sqrt(nbar) * complex(math.cos(phase), math.sin(phase)))
        if kind == SQUEEZED:
            return cls.squeezed(math.asinh(math.sqrt(nbar)), phase)
        raise ValueError(f"unknown input kind {kind!r}")

    @property
    def nbar(self) -> float:
        if self.kind == COHERENT:
            return abs(self.alpha) ** 2
        return math.sinh(self.r) ** 2

    @property
    def tanh2(self) -> float:
        """tanh^2 r, written as nbar/(nbar+1) to stay accurate for large r."""
        n = self.nbar
        return n / (n + 1.0)


def photon_distribution(s: InputState, n_max: int) -> np.ndarray:
    """|<n|phi>|^2 for n = 0..n_max."""
    n = np.arange(n_max + 1)
    if s.kind == COHERENT:
        return stats.poisson.pmf(n, s.nbar) if s.nbar > 0 else (n == 0).astype(float)
    p = np.zeros(n_max + 1)
    m = np.arange(n_max // 2 + 1)
    # P(2m) is negative binomial in m with shape 1/2 and success prob sech^2 r
    p[0::2] = stats.nbinom.pmf(m, 0.5, 1.0 / (1.0 + s.nbar)) if s.nbar > 0 else (m == 0)
    return p


def fock_amplitudes(s: InputState, n_max: int, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Number-basis amplitudes <n|phi> for n = 0..n_max.

    Factorials are handled in log space so that large photon numbers do not
    overflow. Odd amplitudes of the squeezed vacuum are exact zeros.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    amps = np.zeros(n_max + 1, dtype=complex)
    if s.kind == COHERENT:
        a = abs(s.alpha)
        if a == 0.0:
            amps[0] = 1.0
        else:
            n = np.arange(n_max + 1)
            log_mag = -0.5 * a * a + n * math.log(a) - 0.5 * gammaln(n + 1)
            amps[:] = np.exp(log_mag) * np.exp(1j * n * np.angle(s.alpha))
    else:
        m = np.arange(n_max // 2 + 1)
        if s.r == 0.0:
            amps[0] = 1.0
        else:
            t = math.tanh(s.r)
            log_mag = (
                -0.5 * math.log(math.cosh(s.r))
                + 0.5 * gammaln(2 * m + 1)
                - m * math.log(2.0)
                - gammaln(m + 1)
                + m * math.log(t)
            )
            # (-e^{-i theta} tanh r)^m
            phase = np.exp(1j * m * (math.pi - s.theta))
            amps[0::2] = np.exp(log_mag) * phase
    weight = float(np.sum(np.abs(amps) ** 2))
    if weight < 1.0 - tail_tol:
        warnings.warn(
            f"Fock truncation at n_max={n_max} keeps weight {weight:.3e} (tail > {tail_tol:g})",
            TruncationWarning,
            stacklevel=2,
        )
    return amps


def _tail_after(s: InputState, n: np.ndarray) -> np.ndarray:
    """Sum_{k > n} |<k|phi>|^2, computed from survival functions (no 1 - cdf cancellation)."""
    if s.kind == COHERENT:
        return stats.poisson.sf(n, s.nbar)
    return stats.nbinom.sf(n // 2, 0.5, 1.0 / (1.0 + s.nbar))


def choose_truncation(s: InputState, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest n_max whose discarded tail weight is below ``tail_tol``.

    Squeezed vacuum always gets an even ``n_max``.
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    if s.nbar == 0.0:
        return 0
    hi = 16
    while _tail_after(s, np.array([hi]))[0] >= tail_tol:
        hi *= 2
    grid = np.arange(hi + 1)
    if s.kind == SQUEEZED:
        grid = grid[::2]
    tails = _tail_after(s, grid)
    return int(grid[np.argmax(tails < tail_tol)])


@dataclass(frozen=True)
class ThermalMode:
    """Thermal state of the Bogoliubov mode, w_n = (1 - e^{-b}) e^{-b n}, b = beta*omega_m."""

    beta_omega_m: float
    tail_tol: float = DEFAULT_TAIL_TOL
    n_cut: int = field(init=False)

    def __post_init__(self):
        if not self.beta_omega_m > 0:
            raise ValueError("beta_omega_m must be > 0")
        # cumulative weight through n is 1 - e^{-b(n+1)}
        n_cut = max(0, math.ceil(-math.log(self.tail_tol) / self.beta_omega_m) - 1)
        while math.exp(-self.beta_omega_m * (n_cut + 1)) >= self.tail_tol:
            n_cut += 1
        while n_cut > 0 and math.exp(-self.beta_omega_m * n_cut) < self.tail_tol:
            n_cut -= 1
        object.__setattr__(self, "n_cut", n_cut)

    @property
    def weights(self) -> np.ndarray:
        n = np.arange(self.n_cut + 1)
        return -math.expm1(-self.beta_omega_m) * np.exp(-self.beta_omega_m * n)

    @property
    def coth_half(self) -> float:
        """coth(beta*omega_m/2) = 2 n_th + 1."""
        return 1.0 / math.tanh(0.5 * self.beta_omega_m)
