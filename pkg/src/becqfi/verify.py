"""Oracle-versus-analytic verification suite behind ``becqfi oracle-verify``."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .dynamics import (
    QubitDensity,
    cavity_at_tau,
    impurity_at_tau,
    joint_elements,
    log_derivative_A,
    working_point_coefficients,
)
from .metrology import qfi_eigen, qfi_from_state
from .oracle import default_photon_cut, evolve_magnus, evolve_trotter, reduce, trotter_fixed
from .params import EffectiveParams
from .states import InputState, ThermalMode

REFERENCE = EffectiveParams(chi=0.3, g_ab=0.4, G=-0.1, kappa=0.02, gamma=0.01, beta_omega_m=1.0)
REFERENCE_STATE = InputState.from_nbar("coherent", 2.0)
COTH_BETAS = (0.5, 1.0, 5.0)
FAULT = 1e-3


@dataclass
class Check:
    name: str
    value: float
    tol: float
    relative: bool = False
    informational: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


@dataclass
class Report:
    checks: list
    seconds: float
    fault_injected: bool

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    @property
    def worst(self) -> Optional[Check]:
        bad = [c for c in self.checks if not c.informational and not c.passed]
        return max(bad, key=lambda c: c.value / c.tol) if bad else None

    def summary(self) -> dict:
        worst = self.worst
        return {
            "ok": self.ok,
            "seconds": round(self.seconds, 3),
            "fault_injected": self.fault_injected,
            "worst": None if worst is None else worst.name,
            "checks": [dict(asdict(c), passed=c.passed) for c in self.checks],
        }


def _maxdiff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def fd_log_derivative(e: EffectiveParams, s: InputState, h: float = 1e-6) -> complex:
    """Central difference of log rho_eg in O, on the reference-stripped element."""
    up = impurity_at_tau(e.with_estimand(e.O + h), s, normalize=False).rho_eg
    dn = impurity_at_tau(e.with_estimand(e.O - h), s, normalize=False).rho_eg
    mid = impurity_at_tau(e, s, normalize=False).rho_eg
    return (up - dn) / (2 * h * mid)


def fd_qfi(e: EffectiveParams, s: InputState, h: float = 1e-6) -> float:
    """QFI with d rho_eg / dO replaced by a central difference."""
    q = impurity_at_tau(e, s)
    A = fd_log_derivative(e, s, h)
    return qfi_from_state(QubitDensity(q.rho_ee, q.rho_gg, q.rho_eg, A * q.rho_eg, None, True)).F


def coth_check(beta: float, t: float = 0.5, printed: bool = False) -> float:
    """Max deviation of analytic joint elements from an explicit thermal mixture."""
    e = EffectiveParams(chi=0.3, g_ab=0.4, G=-0.1, kappa=0.02, gamma=0.01, beta_omega_m=beta)
    s = InputState.from_nbar("coherent", 0.5)
    th = ThermalMode(beta)
    c_e, c_g = working_point_coefficients(e.gamma)
    n_max = default_photon_cut(s)
    fs = evolve_magnus(e, s, th, c_e, c_g, t, n_max=n_max)
    ana = joint_elements(e, s, th, c_e, c_g, t, n_max=n_max, printed=printed).full()
    return _maxdiff(reduce(fs, "joint"), ana)


def run(
    e: EffectiveParams = REFERENCE,
    s: InputState = REFERENCE_STATE,
    inject_fault: bool = False,
    times=(0.37, 1.0),
    threads: int = 1,
) -> Report:
    start = time.perf_counter()
    checks: list[Check] = []
    th = ThermalMode(e.beta_omega_m)
    c_e, c_g = working_point_coefficients(e.gamma)
    e_an = replace(e, chi=e.chi * (1 + FAULT)) if inject_fault else e
    n_max = default_photon_cut(s)
    lossless = e.kappa == 0 and e.gamma == 0

    for t in times:
        ft = evolve_trotter(e, s, th, c_e, c_g, t, threads=threads)
        fm = evolve_magnus(e, s, th, c_e, c_g, t, n_max=n_max)
        jt, jm = reduce(ft, "joint"), reduce(fm, "joint")
        ja = joint_elements(e_an, s, th, c_e, c_g, t, n_max=n_max).full()
        checks += [
            Check(f"joint t={t:g}tau analytic vs trotter", _maxdiff(ja, jt), 1e-6),
            Check(f"joint t={t:g}tau analytic vs magnus", _maxdiff(ja, jm), 1e-6),
            Check(f"joint t={t:g}tau magnus vs trotter", _maxdiff(jm, jt), 1e-7),
        ]
        if lossless:
            # the extrapolated Trotter state is not a unitary image; check the plain product
            fp = trotter_fixed(e, s, th, c_e, c_g, t, max(2, math.ceil(250 * t)), n_max=n_max, n_cut=ft.n_cut, threads=threads)
            for label, fs in (("trotter", fp), ("magnus", fm)):
                checks.append(Check(f"unitarity t={t:g}tau {label}", float(np.max(np.abs(fs.branch_norms() - 1))), 1e-10))
        if t == 1.0:
            decay = math.exp(-2 * math.pi * e.gamma)
            q = impurity_at_tau(e_an, s, c_e * decay, c_g, reference_frame=False, normalize=False)
            imp = reduce(ft, "impurity")
            checks.append(Check("impurity at tau vs trotter", _maxdiff(q.matrix(), imp), 1e-6))
            cav = cavity_at_tau(e_an, s, c_e * decay, c_g, n_max=n_max, normalize=False)
            checks.append(Check("cavity at tau vs trotter", _maxdiff(cav, reduce(ft, "cavity")), 1e-6))

    for beta in COTH_BETAS:
        checks.append(Check(f"thermal factor beta={beta:g}", coth_check(beta), 1e-7))
    checks.append(
        Check("thermal factor with extra |lambda|^2 (alternative form)", coth_check(1.0, printed=True), 1e-7, informational=True)
    )

    fd_e = EffectiveParams.from_estimand(0.2, G=-0.1, kappa=0.01)
    fd_s = InputState.squeezed(math.asinh(1.0))
    A = log_derivative_A(fd_e, fd_s)
    checks.append(Check("A vs finite difference", abs(fd_log_derivative(fd_e, fd_s) - A) / abs(A), 1e-6, relative=True))
    F = qfi_eigen(impurity_at_tau(fd_e, fd_s)).F
    checks.append(Check("QFI vs finite-difference QFI", abs(fd_qfi(fd_e, fd_s) - F) / F, 1e-5, relative=True))

    return Report(checks, time.perf_counter() - start, inject_fault)
