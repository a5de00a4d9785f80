import math

import pytest

from becqfi.params import PhysicalParams

TWO_PI = 2 * math.pi


def reference_physical(**overrides) -> PhysicalParams:
    kw = dict(
        N=1e5,
        g=TWO_PI * 10e6,
        delta_ac=TWO_PI * -30e9,
        g_ac=TWO_PI * 1e6,
        delta=TWO_PI * 5e9,
        a_AB=3.5e-9,
        m=1.443e-25,
        m_A=2.207e-25,
        ell=1e-7,
        ell_A_perp=0.5e-6,
        ell_B_perp=0.6e-6,
        k=TWO_PI / 780e-9,
        L=20e-6,
        omega_rec=TWO_PI * 3.77e3,
        kappa=TWO_PI * 100,
        gamma=TWO_PI * 50,
        beta_omega_m=1.0,
    )
    kw.update(overrides)
    return PhysicalParams(**kw)


@pytest.fixture
def physical():
    return reference_physical()


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def _record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def note():
    """Record an informational line shown with the acceptance verdicts."""

    def _note(text: str) -> None:
        ACCEPTANCE_LINES.append(f"INFO  {text}")
        print(text)

    return _note
