"""Photon loss: intracavity photon number at tau and the critical loss rate
below which the optimal QFI still reaches nbar^2."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .dynamics import TWO_PI
from .metrology import optimal_fisher
from .states import COHERENT, SQUEEZED

FOUR_PI = 2.0 * TWO_PI
BISECT_XTOL = 1e-12
BISECT_MAXITER = 200


@dataclass(frozen=True)
class CriticalLoss:
    family: str
    nbar: float
    kappa_star: float
    kappa_bisect: float
    printed: bool = False

    @property
    def discrepancy(self) -> float:
        return abs(self.kappa_star - self.kappa_bisect)


def mean_photon_at_tau(family: str, nbar: float, kappa: float) -> float:
    """Sum_n n rho_nn of the (unnormalized) cavity matrix at tau.

    The normalization by the trace is deliberately omitted: with it the
    coherent result would be nbar e^{-4 pi kappa} instead.
    """
    if nbar < 0 or kappa < 0:
        raise ValueError("nbar and kappa must be >= 0")
    x = math.exp(-FOUR_PI * kappa)
    if family == COHERENT:
        return nbar * math.exp(nbar * (x - 1.0) - FOUR_PI * kappa)
    if family == SQUEEZED:
        t2 = nbar / (nbar + 1.0)
        sech = 1.0 / math.sqrt(nbar + 1.0)
        return sech * t2 * math.exp(FOUR_PI * kappa) / (math.exp(2.0 * FOUR_PI * kappa) - t2) ** 1.5
    raise ValueError(f"unknown family {family!r}")


def critical_kappa_closed(family: str, nbar: float, printed: bool = False) -> float:
    if not nbar > 0:
        raise ValueError("the critical loss rate is undefined for nbar = 0")
    pi = math.pi
    if family == COHERENT:
        return math.log(FOUR_PI * nbar / (math.sqrt(4 * pi * pi + nbar * nbar) - 2 * pi)) / FOUR_PI
    if family != SQUEEZED:
        raise ValueError(f"unknown family {family!r}")
    if printed:
        arg = (nbar * nbar + FOUR_PI * math.sqrt(nbar * (3 * nbar + 2))) / (nbar * (nbar + 1))
    else:
        root = math.sqrt(3 * nbar * nbar + 16 * pi * pi)
        arg = (nbar * nbar + 16 * pi * pi + FOUR_PI * root) / (nbar * (nbar + 1))
    return math.log(arg) / (2.0 * FOUR_PI)


def critical_kappa_bisect(family: str, nbar: float, printed: bool = False) -> float:
    """Root of F*(kappa) = nbar^2 on the family's own optimal QFI."""
    if not nbar > 0:
        raise ValueError("the critical loss rate is undefined for nbar = 0")

    def f(k):
        return optimal_fisher(family, nbar, k, printed) - nbar * nbar

    if f(0.0) <= 0:
        raise ValueError("F*(0) <= nbar^2: no critical loss rate")
    hi = 2.0
    while f(hi) > 0:
        hi *= 2.0
    return bisect(f, 0.0, hi, xtol=BISECT_XTOL, maxiter=BISECT_MAXITER)


def critical_kappa(family: str, nbar: float, printed: bool = False) -> CriticalLoss:
    """Closed-form critical loss with an independent bisection root alongside."""
    return CriticalLoss(
        family,
        nbar,
        critical_kappa_closed(family, nbar, printed),
        critical_kappa_bisect(family, nbar, printed),
        printed,
    )
