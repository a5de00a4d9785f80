"""Acceptance criteria, one test per criterion at the stated tolerances.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
Where published closed forms differ from the exact ones, the discrepancy is
measured and printed next to the verdict.
"""

import math
import time

import numpy as np
import pytest

from becqfi import reproduce, verify
from becqfi.dynamics import cavity_at_tau, impurity_at_tau, joint_elements, working_point_coefficients
from becqfi.loss import critical_kappa, mean_photon_at_tau
from becqfi.metrology import (
    fisher_report,
    optimal_fisher,
    optimum_lattice,
    qfi_eigen,
    qfi_from_state,
    qfi_ratio,
    table1_row,
)
from becqfi.oracle import default_photon_cut, evolve_magnus, evolve_trotter, phonon_cutoff, reduce, trotter_fixed
from becqfi.params import EffectiveParams
from becqfi.states import InputState, ThermalMode

PI2 = math.pi**2
FAMILIES = ("coherent", "squeezed")
G = -0.1


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def oracle_report():
    return verify.run(threads=4)


def check(report, prefix):
    return [c for c in report.checks if c.name.startswith(prefix)]


def test_1_table_rows_equal_state_qfi(verdict, note):
    t0 = time.perf_counter()
    worst = 0.0
    printed_worst = 0.0
    for fam in FAMILIES:
        O = float(optimum_lattice(fam, G, 0))
        for nbar in (0.5, 1, 5, 20):
            for kappa in (0, 0.01, 0.05):
                q = impurity_at_tau(EffectiveParams.from_estimand(O, G=G, kappa=kappa), InputState.from_nbar(fam, nbar))
                F_state = qfi_from_state(q).F
                worst = max(worst, rel(table1_row(fam, nbar, kappa, G).F, F_state), rel(qfi_eigen(q).F, F_state))
                printed_worst = max(printed_worst, rel(table1_row(fam, nbar, kappa, G, printed=True).F, F_state))
    dt = time.perf_counter() - t0
    note(f"published squeezed row (no e^(8 pi kappa) in F_c) deviates up to {printed_worst:.3g} relative")
    verdict("1 closed-form optima vs state QFI", worst <= 1e-8 and dt < 1.0, f"max rel {worst:.2e}, {dt:.3f} s")


def test_2_unit_photon_values(verdict, note):
    coh = optimal_fisher("coherent", 1.0, 0.0)
    sq = optimal_fisher("squeezed", 1.0, 0.0)
    q = impurity_at_tau(EffectiveParams.from_estimand(float(optimum_lattice("squeezed", G, 0)), G=G), InputState.from_nbar("squeezed", 1.0))
    eig = qfi_eigen(q).F
    note(f"eigen route F*/nbar^2 = {eig / PI2:.12g} pi^2 for squeezed nbar = 1; 90 pi^2 off by {rel(90 * PI2, eig):.3f}")
    ok = rel(coh, 32 * PI2) <= 1e-10 and rel(sq, 80 * PI2) <= 1e-10 and rel(eig, 80 * PI2) <= 1e-10 and rel(eig, 90 * PI2) > 0.1
    verdict("2 nbar = 1: 32 pi^2 coherent, 80 pi^2 squeezed (90 pi^2 ruled out)", ok, f"{coh / PI2:.15g}, {sq / PI2:.15g}")


def test_3_oracle_equivalence(verdict, note, oracle_report):
    joint = check(oracle_report, "joint")
    reduced = check(oracle_report, "impurity") + check(oracle_report, "cavity")
    ana = [c for c in joint if "analytic" in c.name] + reduced
    cross = [c for c in joint if "magnus vs trotter" in c.name]
    worst_ana = max(c.value for c in ana)
    worst_cross = max(c.value for c in cross)
    s = verify.REFERENCE_STATE
    th = ThermalMode(verify.REFERENCE.beta_omega_m)
    c_e, c_g = working_point_coefficients(verify.REFERENCE.gamma)
    n_max = default_photon_cut(s)
    cuts = [phonon_cutoff(verify.REFERENCE, s, th, c_e, c_g, t, n_max) for t in (0.37, 1.0)]
    note(f"dims {n_max + 1} photons x {max(cuts) + 1} phonons x 2 (phonon cut from leak bound; 60 is too small)")
    ok = worst_ana <= 1e-6 and worst_cross <= 1e-7 and oracle_report.seconds < 60 and n_max + 1 <= 40
    verdict(
        "3 analytic vs Trotter/Magnus",
        ok,
        f"analytic {worst_ana:.2e}, magnus-trotter {worst_cross:.2e}, suite {oracle_report.seconds:.1f} s",
    )


def test_3_sixty_phonons_insufficient(note):
    """Documents why the phonon space exceeds 60 levels: Trotter drifts beyond tolerance."""
    e, s = verify.REFERENCE, verify.REFERENCE_STATE
    th = ThermalMode(e.beta_omega_m)
    c_e, c_g = working_point_coefficients(e.gamma)
    n_max = default_photon_cut(s)
    ft = evolve_trotter(e, s, th, c_e, c_g, 1.0, n_max=n_max, n_cut=60, threads=4)
    ana = joint_elements(e, s, th, c_e, c_g, 1.0, n_max=n_max).full()
    dev = float(np.max(np.abs(reduce(ft, "joint") - ana)))
    note(f"Trotter at n_cut = 60, t = tau: deviation {dev:.2e}")
    assert dev > 1e-6


def test_4_critical_loss(verdict, note):
    t0 = time.perf_counter()
    worst = 0.0
    ordered = True
    for printed in (False, True):
        for nbar in (0.5, 1, 5, 20, 100):
            a = critical_kappa("coherent", nbar, printed)
            x = critical_kappa("squeezed", nbar, printed)
            worst = max(worst, a.discrepancy, x.discrepancy)
            ordered &= a.kappa_star > x.kappa_star
    dt = time.perf_counter() - t0
    exact, pub = critical_kappa("squeezed", 5.0), critical_kappa("squeezed", 5.0, printed=True)
    note(f"squeezed kappa* at nbar = 5: exact {exact.kappa_star:.6f}, published form {pub.kappa_star:.6f}")
    ok = worst <= 1e-10 and ordered and dt < 1.0
    verdict("4 critical loss closed forms vs bisection (exact and published)", ok, f"max abs {worst:.2e}, {dt:.3f} s")


def test_5_mean_photon_number(verdict, note):
    t0 = time.perf_counter()
    worst = 0.0
    for fam in FAMILIES:
        s = InputState.from_nbar(fam, 5.0)
        for kappa in (0.0, 0.02, 0.1):
            e = EffectiveParams.from_estimand(0.1, G=G, kappa=kappa)
            rho = cavity_at_tau(e, s, normalize=False)
            trace = float(np.sum(np.arange(rho.shape[0]) * np.diag(rho).real))
            worst = max(worst, abs(trace - mean_photon_at_tau(fam, 5.0, kappa)))
    kappas = np.linspace(1e-4, 0.2, 2000)
    ordered = all(mean_photon_at_tau("squeezed", 5.0, k) < mean_photon_at_tau("coherent", 5.0, k) for k in kappas)
    dt = time.perf_counter() - t0
    note(f"coherent nbar = 5, kappa = 0.05: mean photon number {mean_photon_at_tau('coherent', 5.0, 0.05):.6f}")
    verdict("5 mean photon number vs cavity trace", worst <= 1e-8 and ordered and dt < 5.0, f"max abs {worst:.2e}, {dt:.3f} s")


def test_6_qcr_saturation(verdict):
    t0 = time.perf_counter()
    details = []
    ok = True
    for name, fam in (("fig4a", "squeezed"), ("fig4b", "coherent")):
        t = reproduce.figure(name)
        O = np.array([r[0] for r in t.rows])
        qcr = np.array([r[3] for r in t.rows])
        cr = np.array([r[4] for r in t.rows])
        r_min = rel(cr.min(), qcr.min())
        lattice = optimum_lattice(fam, G, range(-4, 5))
        step = O[1] - O[0]
        on_lattice = all(np.min(np.abs(lattice - o)) <= step for o in (O[np.argmin(cr)], O[np.argmin(qcr)]))
        ok &= r_min <= 1e-6 and on_lattice
        details.append(f"{fam} rel {r_min:.1e} at O = {O[np.argmin(cr)]:g}")
    dt = time.perf_counter() - t0
    verdict("6 CR and QCR minima coincide on the optimum lattice", ok and dt < 10.0, "; ".join(details) + f", {dt:.2f} s")


def test_7a_classical_below_quantum(verdict):
    worst = 0.0
    negative = False
    for fam in FAMILIES:
        s = InputState.from_nbar(fam, 5.0)
        for kappa in (1e-9, 0.02):
            for O in np.linspace(0, 1, 1001):
                r = fisher_report(impurity_at_tau(EffectiveParams.from_estimand(O, G=G, kappa=kappa), s))
                negative |= r.F_cl < 0
                worst = max(worst, (r.F_cl - r.F) / r.F)
    # rounding at the pure optima allows a relative excess of order 1e-12
    verdict("7a 0 <= F_cl <= F on 1001-point grids", not negative and worst <= 1e-12, f"max (F_cl - F)/F = {worst:.1e}")


def test_7b_squeezed_phase_independence(verdict):
    worst = 0.0
    for O in np.linspace(0, 1, 101):
        e = EffectiveParams.from_estimand(O, G=G, kappa=0.01)
        ref = fisher_report(impurity_at_tau(e, InputState.from_nbar("squeezed", 5.0, 0.0)))
        for theta in (math.pi / 3, math.pi, 5.0):
            r = fisher_report(impurity_at_tau(e, InputState.from_nbar("squeezed", 5.0, theta)))
            worst = max(worst, abs(r.F - ref.F) / max(1.0, ref.F), abs(r.F_cl - ref.F_cl) / max(1.0, ref.F))
    verdict("7b squeezed results independent of the squeezing phase", worst <= 1e-12, f"max rel {worst:.1e}")


def test_7c_periodicity(verdict):
    worst = 0.0
    for fam, period in (("coherent", 0.5), ("squeezed", 0.25)):
        s = InputState.from_nbar(fam, 5.0)
        for O in np.linspace(0, 1, 201):
            a = qfi_from_state(impurity_at_tau(EffectiveParams.from_estimand(O, G=G, kappa=0.01), s)).F
            b = qfi_from_state(impurity_at_tau(EffectiveParams.from_estimand(O + period, G=G, kappa=0.01), s)).F
            worst = max(worst, abs(a - b) / max(1.0, a))
    verdict("7c F(O) periodic with period 1/2 (coherent) and 1/4 (squeezed)", worst <= 1e-10, f"max rel {worst:.1e}")


def test_7d_finite_differences(verdict, oracle_report):
    fd = check(oracle_report, "A vs finite") + check(oracle_report, "QFI vs finite")
    worst = max(c.value for c in fd)
    verdict("7d finite-difference A and F", worst <= 1e-5, f"max rel {worst:.1e}")


def test_7e_thermal_factor(verdict, note, oracle_report):
    coth = check(oracle_report, "thermal factor beta")
    alt = check(oracle_report, "thermal factor with")
    worst = max(c.value for c in coth)
    note(f"thermal factor carrying an extra |lambda|^2 deviates by {alt[0].value:.3g}")
    verdict("7e thermal factor vs mixture oracle, beta in {0.5, 1, 5}", len(coth) == 3 and worst <= 1e-7, f"max {worst:.1e}")


def test_7f_trotter_order(verdict):
    e = EffectiveParams(chi=0.3, g_ab=0.4, G=G, kappa=0.02, gamma=0.01, beta_omega_m=5.0)
    s = InputState.from_nbar("coherent", 0.5)
    th = ThermalMode(5.0)
    c_e, c_g = working_point_coefficients(e.gamma)
    n_max = default_photon_cut(s)
    ratios = []
    for t in (0.37, 1.0):
        n_cut = phonon_cutoff(e, s, th, c_e, c_g, t, n_max)
        ref = evolve_magnus(e, s, th, c_e, c_g, t, n_max=n_max, n_cut=n_cut).psi
        devs = [
            float(np.max(np.abs(trotter_fixed(e, s, th, c_e, c_g, t, round(t * m), n_max=n_max, n_cut=n_cut).psi - ref)))
            for m in (100, 200, 400)
        ]
        ratios += [a / b for a, b in zip(devs, devs[1:])]
    verdict("7f Trotter error ratio under step halving in [3, 5]", all(3 <= r <= 5 for r in ratios), ", ".join(f"{r:.4f}" for r in ratios))


def test_8_ratio_formula(verdict, note):
    worst = 0.0
    for printed in (False, True):
        for nbar in (0.1, 0.5, 1, 2, 5, 10, 20):
            for kappa in (0, 0.005, 0.01, 0.02, 0.05, 0.1):
                quotient = optimal_fisher("squeezed", nbar, kappa, printed) / optimal_fisher("coherent", nbar, kappa, printed)
                worst = max(worst, rel(qfi_ratio(nbar, kappa, printed), quotient))
    at_unit = qfi_ratio(1.0, 0.0)
    kappas = [i / 10000 for i in range(2001)]
    crossings = set()
    for printed in (False, True):
        for nbar in reproduce.DEFAULT_NBAR_GRID:
            r = np.array([qfi_ratio(nbar, k, printed) for k in kappas]) - 1.0
            crossings.add(int(np.count_nonzero(np.diff(np.sign(r)) != 0)))
    note(f"ratio at nbar = 5, kappa = 0.05: exact {qfi_ratio(5.0, 0.05):.6f}, published form {qfi_ratio(5.0, 0.05, True):.6f}")
    ok = worst <= 1e-10 and abs(at_unit - 2.5) <= 1e-10 and crossings == {1}
    verdict("8 ratio formula, value 2.5 at nbar = 1, single crossing of 1", ok, f"max rel {worst:.1e}, crossings {sorted(crossings)}")
