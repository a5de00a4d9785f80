"""Quantum and classical Fisher information of the impurity qubit at tau.

Two independent routes to the QFI are provided: the closed split into a
classical part F_c and a quantum part F_q built from r = |rho_eg|/rho_ee and
A, and the symmetric-logarithmic-derivative sum over the numerical
eigendecomposition of the 2x2 state.

At every optimal working point the qubit state is pure and the raw split
is a 0/0 quotient. Inside the guard band r > 1 - PURE_GUARD both routes
switch to the analytic limit, which needs the second derivative of rho_eg.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import DivergenceWarning, QubitDensity, TWO_PI, impurity_at_tau
from .params import EffectiveParams
from .states import COHERENT, FAMILIES, SQUEEZED, InputState

PURE_GUARD = 1e-12
# diagonal mismatch tolerated by formulas that assume rho_ee = rho_gg
WORKING_POINT_TOL = 1e-9
PI2 = math.pi**2


@dataclass(frozen=True)
class FisherReport:
    F_c: float
    F_q: float
    F: float
    F_cl: float = math.nan
    O: float = math.nan
    eigvals: tuple = (math.nan, math.nan)
    flags: tuple = ()

    @property
    def dO_QCR(self) -> float:
        return _bound(self.F, 1)

    @property
    def dO_CR(self) -> float:
        return _bound(self.F_cl, 1)


@dataclass(frozen=True)
class OptimalPoint:
    family: str
    O_star: np.ndarray
    F_star: float
    spacing: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "spacing", 0.5 if self.family == COHERENT else 0.25)


@dataclass(frozen=True)
class TableRow:
    """Optimal classical and quantum QFI parts for one family."""

    family: str
    nbar: float
    kappa: float
    O_star: float
    Fc: float
    Fq: float

    @property
    def F(self) -> float:
        return self.Fc + self.Fq


def _bound(F: float, s_repeats: int) -> float:
    if not F > 0 or math.isnan(F):
        return math.inf
    return 1.0 / math.sqrt(s_repeats * F)


def _check_working_point(q: QubitDensity) -> None:
    if not q.normalized:
        raise ValueError("qubit state must be trace-normalized")
    if abs(q.rho_ee - q.rho_gg) > WORKING_POINT_TOL:
        raise ValueError(f"working point requires rho_ee = rho_gg (got {q.rho_ee:.6g}, {q.rho_gg:.6g})")


def qfi_from_state(q: QubitDensity) -> FisherReport:
    """Closed split F = F_c + F_q for a working-point qubit state."""
    _check_working_point(q)
    if q.rho_eg == 0:
        # the split needs rho_eg / |rho_eg|; fall back to the eigen route
        rep = qfi_eigen(q)
        return FisherReport(math.nan, math.nan, rep.F, eigvals=rep.eigvals, flags=rep.flags + ("rho_eg_zero",))
    r = abs(q.rho_eg) / q.rho_ee
    A = q.A
    F_q = r * r * A.imag**2
    flags = ()
    if r > 1.0 - PURE_GUARD:
        flags = ("pure_limit",)
        F_c = _pure_limit_Fc(A, q.B)
    else:
        F_c = A.real**2 * r * r / (1.0 - r * r)
    lam = (q.rho_ee * (1.0 + r), q.rho_ee * (1.0 - r))
    return FisherReport(F_c, F_q, F_c + F_q, eigvals=lam, flags=flags)


def _pure_limit_Fc(A: complex, B: Optional[complex]) -> float:
    """F_c at r = 1, equal to -Re dA/dO = -Re(B - A^2)."""
    if abs(A.real) > 1e-6 * max(1.0, abs(A)):
        warnings.warn("pure state with Re A != 0: F_c diverges", DivergenceWarning, stacklevel=3)
        return math.inf
    if B is None:
        warnings.warn("pure state without second derivative: F_c reported as inf", DivergenceWarning, stacklevel=3)
        return math.inf
    return -(B - A * A).real


def qfi_eigen(q: QubitDensity) -> FisherReport:
    """QFI from the SLD sum over the numerical eigendecomposition of rho.

    F = sum over lambda_i + lambda_j > 0 of 2 |<i|d rho|j>|^2 / (lambda_i + lambda_j).
    For a (numerically) pure state the vanishing eigenvalue contributes the
    limit 2 d^2 lambda_min, obtained by second-order perturbation theory.
    """
    if not q.normalized:
        raise ValueError("qubit state must be trace-normalized")
    rho = q.matrix()
    lam, V = np.linalg.eigh(rho)
    D = V.conj().T @ q.d_matrix() @ V
    flags = ("rho_eg_zero",) if q.rho_eg == 0 else ()
    F = 0.0
    pure = lam[0] < 0.5 * PURE_GUARD
    for i in range(2):
        for j in range(2):
            s = lam[i] + lam[j]
            if pure and i == j == 0 or s <= 0:
                continue
            F += 2.0 * abs(D[i, j]) ** 2 / s
    if pure:
        flags = flags + ("pure_limit",)
        if q.d2_rho_eg is None:
            warnings.warn("pure state without second derivative: F reported as inf", DivergenceWarning, stacklevel=2)
            F = math.inf
        else:
            D2 = V.conj().T @ q.d2_matrix() @ V
            d2lam = D2[0, 0].real + 2.0 * abs(D[1, 0]) ** 2 / (lam[0] - lam[1])
            F += 2.0 * d2lam
    return FisherReport(math.nan, math.nan, float(F), eigvals=(float(lam[1]), float(lam[0])), flags=flags)


def sigma_x(q: QubitDensity) -> tuple[float, float, Optional[float]]:
    """<sigma_x> and its first two O-derivatives."""
    s = q.rho_eg.real / q.rho_ee
    ds = q.d_rho_eg.real / q.rho_ee
    d2s = None if q.d2_rho_eg is None else q.d2_rho_eg.real / q.rho_ee
    return s, ds, d2s


def _cfi_limit(s: float, ds: float, d2s: Optional[float], scale: float) -> float:
    if abs(ds) > 1e-6 * max(1.0, scale):
        warnings.warn("<sigma_x> = +-1 with nonzero slope: F_cl diverges", DivergenceWarning, stacklevel=3)
        return math.inf
    if d2s is None:
        warnings.warn("<sigma_x> = +-1 without curvature data: F_cl reported as inf", DivergenceWarning, stacklevel=3)
        return math.inf
    return -s * d2s


def cfi_plus_minus(q: QubitDensity) -> float:
    """CFI of the {|+>, |->} projection from the outcome probabilities and A."""
    _check_working_point(q)
    A = q.A
    num = A.real * q.rho_eg.real - A.imag * q.rho_eg.imag
    den = q.rho_ee**2 - q.rho_eg.real**2
    s = q.rho_eg.real / q.rho_ee
    if s * s > 1.0 - PURE_GUARD:
        B = q.B
        d2s = None if B is None else (B * q.rho_eg).real / q.rho_ee
        return _cfi_limit(s, num / q.rho_ee, d2s, abs(A))
    return num * num / den


def cfi_error_propagation(q: QubitDensity) -> float:
    """CFI as (d<sigma_x>/dO)^2 / (Delta sigma_x)^2."""
    _check_working_point(q)
    s, ds, d2s = sigma_x(q)
    var = 1.0 - s * s
    if var < PURE_GUARD:
        return _cfi_limit(s, ds, d2s, abs(q.d_rho_eg) / q.rho_ee)
    return ds * ds / var


def precision_bounds(f: FisherReport, s_repeats: int = 1) -> tuple[float, float]:
    """(dO_QCR, dO_CR) for ``s_repeats`` repetitions; inf where the information is zero."""
    if s_repeats < 1:
        raise ValueError("s_repeats must be >= 1")
    return _bound(f.F, s_repeats), _bound(f.F_cl, s_repeats)


def fisher_report(q: QubitDensity, O: float = math.nan) -> FisherReport:
    """QFI split plus the CFI of the sigma_x measurement."""
    rep = qfi_from_state(q)
    if q.rho_eg == 0:
        F_cl = 0.0 if q.d_rho_eg.real == 0 else cfi_error_propagation(q)
    else:
        F_cl = cfi_plus_minus(q)
    return FisherReport(rep.F_c, rep.F_q, rep.F, F_cl, O, rep.eigvals, rep.flags)


def optimum_lattice(family: str, G: float, m) -> np.ndarray:
    """O* = (m - G)/2 for coherent input, (m - 2G)/4 for squeezed vacuum."""
    m = np.asarray(m, dtype=float)
    if family == COHERENT:
        return (m - G) / 2.0
    if family == SQUEEZED:
        return (m - 2.0 * G) / 4.0
    raise ValueError(f"unknown family {family!r}")


def table1_row(family: str, nbar: float, kappa: float, G: float = 0.0, printed: bool = False) -> TableRow:
    """Optimal F_c*, F_q* in closed form.

    The squeezed F_c* carries a factor e^{8 pi kappa}; ``printed=True``
    omits it, reproducing the published row, which only agrees at kappa = 0.
    """
    if nbar < 0 or kappa < 0:
        raise ValueError("nbar and kappa must be >= 0")
    O_star = float(optimum_lattice(family, G, 0))
    if family == COHERENT:
        x = math.exp(-2.0 * TWO_PI * kappa)
        return TableRow(family, nbar, kappa, O_star, 16 * PI2 * nbar * x, 16 * PI2 * nbar**2 * x * x)
    if family != SQUEEZED:
        raise ValueError(f"unknown family {family!r}")
    Y = math.exp(4.0 * TWO_PI * kappa)
    D = (nbar + 1.0) * Y - nbar
    Fc = 32 * PI2 * nbar * (nbar + 1.0) / D**2
    if not printed:
        Fc *= Y
    return TableRow(family, nbar, kappa, O_star, Fc, 16 * PI2 * nbar**2 / D**2)


def optimal_fisher(family: str, nbar: float, kappa: float, printed: bool = False) -> float:
    return table1_row(family, nbar, kappa, printed=printed).F


def qfi_closed_form(
    family: str,
    nbar: float,
    kappa: float,
    at_optimum: bool = True,
    O: Optional[float] = None,
    G: float = 0.0,
    printed: bool = False,
) -> FisherReport:
    """Closed-form optimum values, otherwise the analytic rho_eg, A chain at ``O``."""
    if at_optimum:
        row = table1_row(family, nbar, kappa, G, printed)
        return FisherReport(row.Fc, row.Fq, row.F, F_cl=row.F, O=row.O_star, eigvals=(1.0, 0.0))
    if O is None:
        raise ValueError("O is required away from the optimum")
    e = EffectiveParams.from_estimand(O, G=G, kappa=kappa)
    q = impurity_at_tau(e, InputState.from_nbar(family, nbar))
    return fisher_report(q, O)


def qfi_ratio(nbar: float, kappa: float, printed: bool = False) -> float:
    """F*_squeezed / F*_coherent at the optimal points."""
    if not nbar > 0 or kappa < 0:
        raise ValueError("need nbar > 0 and kappa >= 0")
    Y = math.exp(4.0 * TWO_PI * kappa)
    D = (nbar + 1.0) * Y - nbar
    num = 3.0 * nbar + 2.0 if printed else 2.0 * (nbar + 1.0) * Y + nbar
    sqrtY = math.exp(2.0 * TWO_PI * kappa)
    return num * sqrtY / (D**2 * (1.0 + nbar / sqrtY))


def optimal_points(family: str, nbar: float, kappa: float, G: float = 0.0, m=range(-2, 3), printed=False):
    return OptimalPoint(family, optimum_lattice(family, G, list(m)), optimal_fisher(family, nbar, kappa, printed))


__all__ = [
    "FAMILIES",
    "FisherReport",
    "OptimalPoint",
    "PURE_GUARD",
    "TableRow",
    "cfi_error_propagation",
    "cfi_plus_minus",
    "fisher_report",
    "optimal_fisher",
    "optimal_points",
    "optimum_lattice",
    "precision_bounds",
    "qfi_closed_form",
    "qfi_eigen",
    "qfi_from_state",
    "qfi_ratio",
    "sigma_x",
    "table1_row",
]
