"""Tabulated data behind the optimal-QFI table and the figures, plus
generic sweeps. Every producer returns a :class:`Table` that the CLI writes
as CSV; nothing here touches the filesystem except :func:`write_csv` and
:func:`write_plot_script`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import QubitDensity, impurity_at_tau, reference_phase
from .loss import critical_kappa, mean_photon_at_tau
from .metrology import (
    cfi_error_propagation,
    fisher_report,
    optimal_fisher,
    qfi_eigen,
    qfi_ratio,
    table1_row,
)
from .oracle import evolve_magnus, reduce
from .params import EffectiveParams
from .states import COHERENT, FAMILIES, SQUEEZED, InputState, ThermalMode

FIGURES = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b")
FIG4_KAPPA = 1e-9
FIG4_NBAR = 5.0
FIG4_G = -0.1


@dataclass
class Table:
    header: list
    rows: list
    meta: dict = field(default_factory=dict)


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(table: Table, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k} = {fmt(v) if not isinstance(v, (list, tuple)) else ','.join(fmt(x) for x in v)}" for k, v in table.meta.items()]
    lines.append(",".join(table.header))
    lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


_PLOT_TEMPLATE = '''"""Plot {name} from {csv}. Requires matplotlib."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
with open(path, encoding="utf-8") as fh:
    reader = csv.reader(line for line in fh if not line.startswith("#"))
    header = next(reader)
    rows = list(reader)
x_col, y_cols, group_col = {x!r}, {ys!r}, {group!r}
ix = header.index(x_col)
groups = defaultdict(list)
for row in rows:
    groups[row[header.index(group_col)] if group_col else ""].append(row)
fig, ax = plt.subplots()
for key, grp in groups.items():
    xs = [float(r[ix]) for r in grp]
    for y in y_cols:
        label = (f"{{group_col}}={{key}} " if group_col else "") + y
        ax.plot(xs, [float(r[header.index(y)]) for r in grp], label=label)
ax.set_xlabel(x_col)
ax.set_yscale({yscale!r})
ax.legend()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''

_PLOT_SPECS = {
    "table1": ("nbar", ["F_over_nbar2"], "family", "linear"),
    "fig2a": ("nbar", ["F_over_nbar2"], "kappa", "linear"),
    "fig2b": ("nbar", ["F_over_nbar2"], "kappa", "linear"),
    "fig2c": ("nbar", ["ratio"], "kappa", "linear"),
    "fig3a": ("kappa", ["nbar_coherent", "nbar_squeezed"], None, "linear"),
    "fig3b": ("nbar", ["kappa_star_coherent", "kappa_star_squeezed"], None, "linear"),
    "fig4a": ("O", ["dO_QCR", "dO_CR"], None, "log"),
    "fig4b": ("O", ["dO_QCR", "dO_CR"], None, "log"),
    "sweep": ("O", ["F", "F_cl"], None, "linear"),
}


def write_plot_script(name: str, csv_path) -> Path:
    csv_path = Path(csv_path)
    x, ys, group, yscale = _PLOT_SPECS[name]
    script = csv_path.with_suffix(".plot.py")
    script.write_text(
        _PLOT_TEMPLATE.format(name=name, csv=csv_path.name, x=x, ys=ys, group=group, yscale=yscale),
        encoding="utf-8",
    )
    return script


def _pool_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _families(family: str):
    if family == "both":
        return list(FAMILIES)
    if family not in FAMILIES:
        raise ValueError(f"family must be coherent, squeezed or both (got {family!r})")
    return [family]


def _base_meta(name: str, printed: bool, **kw) -> dict:
    meta = {"artifact": f"becqfi {__version__}", "product": name, "form": "printed" if printed else "exact"}
    meta.update(kw)
    return meta


# ---------------------------------------------------------------- table


def table1(nbars, kappas, family="both", G=0.0, printed=False, threads=1) -> Table:
    header = ["family", "nbar", "kappa", "O_star", "Fc", "Fq", "F", "F_over_nbar2"]
    jobs = [(f, n, k) for f in _families(family) for n in nbars for k in kappas]

    def row(job):
        f, n, k = job
        r = table1_row(f, n, k, G, printed)
        return [f, n, k, r.O_star, r.Fc, r.Fq, r.F, r.F / n**2 if n > 0 else 0.0]

    meta = _base_meta("table1", printed, G=G, note="F_over_nbar2 is set to 0 for nbar = 0")
    return Table(header, _pool_map(row, jobs, threads), meta)


# ---------------------------------------------------------------- figures


DEFAULT_NBAR_GRID = [i / 10 for i in range(1, 201)]
DEFAULT_FIG2_KAPPAS = [0.0, 0.005, 0.01, 0.02]
DEFAULT_FIG3A_KAPPAS = [i / 1000 for i in range(0, 101)]
DEFAULT_FIG3B_NBARS = [i / 10 for i in range(1, 1001)]


def fig2(family: str, nbars=None, kappas=None, printed=False, threads=1) -> Table:
    nbars = DEFAULT_NBAR_GRID if nbars is None else nbars
    kappas = DEFAULT_FIG2_KAPPAS if kappas is None else kappas
    jobs = [(k, n) for k in kappas for n in nbars]
    rows = _pool_map(lambda j: [j[0], j[1], optimal_fisher(family, j[1], j[0], printed) / j[1] ** 2], jobs, threads)
    return Table(["kappa", "nbar", "F_over_nbar2"], rows, _base_meta(f"F*/nbar^2 ({family})", printed))


def fig2c(nbars=None, kappas=None, printed=False, threads=1) -> Table:
    nbars = DEFAULT_NBAR_GRID if nbars is None else nbars
    kappas = DEFAULT_FIG2_KAPPAS if kappas is None else kappas
    jobs = [(k, n) for k in kappas for n in nbars]
    rows = _pool_map(lambda j: [j[0], j[1], qfi_ratio(j[1], j[0], printed)], jobs, threads)
    return Table(["kappa", "nbar", "ratio"], rows, _base_meta("squeezed/coherent optimal QFI ratio", printed))


def fig3a(kappas=None, nbar=5.0, threads=1) -> Table:
    kappas = DEFAULT_FIG3A_KAPPAS if kappas is None else kappas
    rows = _pool_map(
        lambda k: [k, mean_photon_at_tau(COHERENT, nbar, k), mean_photon_at_tau(SQUEEZED, nbar, k)], kappas, threads
    )
    meta = _base_meta("mean cavity photon number at tau", False, nbar=nbar, note="unnormalized sum n rho_nn")
    return Table(["kappa", "nbar_coherent", "nbar_squeezed"], rows, meta)


def fig3b(nbars=None, printed=False, threads=1) -> Table:
    nbars = DEFAULT_FIG3B_NBARS if nbars is None else nbars

    def row(n):
        a, s = critical_kappa(COHERENT, n), critical_kappa(SQUEEZED, n, printed)
        return [n, a.kappa_star, s.kappa_star, a.kappa_bisect, s.kappa_bisect]

    header = ["nbar", "kappa_star_coherent", "kappa_star_squeezed", "bisect_coherent", "bisect_squeezed"]
    return Table(header, _pool_map(row, nbars, threads), _base_meta("critical loss rate", printed))


def fig4(family: str, O_grid=None, nbar=FIG4_NBAR, G=FIG4_G, kappa=FIG4_KAPPA, threads=1) -> Table:
    O_grid = [i / 1000 for i in range(1001)] if O_grid is None else O_grid
    s = InputState.from_nbar(family, nbar)

    def row(O):
        rep = fisher_report(impurity_at_tau(EffectiveParams.from_estimand(O, G=G, kappa=kappa), s), O)
        return [O, rep.F, rep.F_cl, rep.dO_QCR, rep.dO_CR]

    meta = _base_meta(
        f"precision bounds ({family})",
        False,
        nbar=nbar,
        G=G,
        kappa=kappa,
        note="kappa -> 0 realised as kappa = 1e-9",
    )
    return Table(["O", "F", "F_cl", "dO_QCR", "dO_CR"], _pool_map(row, O_grid, threads), meta)


def figure(name: str, *, nbars=None, kappas=None, O_grid=None, G=None, printed=False, threads=1) -> Table:
    if name == "fig2a":
        return fig2(COHERENT, nbars, kappas, printed, threads)
    if name == "fig2b":
        return fig2(SQUEEZED, nbars, kappas, printed, threads)
    if name == "fig2c":
        return fig2c(nbars, kappas, printed, threads)
    if name == "fig3a":
        return fig3a(kappas, nbars[0] if nbars else 5.0, threads)
    if name == "fig3b":
        return fig3b(nbars, printed, threads)
    if name in ("fig4a", "fig4b"):
        fam = SQUEEZED if name == "fig4a" else COHERENT
        kw = {} if G is None else {"G": G}
        if nbars:
            kw["nbar"] = nbars[0]
        if kappas:
            kw["kappa"] = kappas[0]
        return fig4(fam, O_grid, threads=threads, **kw)
    raise ValueError(f"unknown figure {name!r}; expected one of {FIGURES}")


# ---------------------------------------------------------------- sweep


def _oracle_qubit(e: EffectiveParams, s: InputState, h: float = 1e-4):
    """Impurity state and O-derivatives from Magnus evolution to tau."""
    th = ThermalMode(e.beta_omega_m)
    c = math.sqrt(0.5)

    def rho(O):
        ee = e.with_estimand(O)
        r = reduce(evolve_magnus(ee, s, th, c, c, 1.0), "impurity")
        return r / np.real(np.trace(r)), np.conj(reference_phase(ee))

    (r0, p0), (rp, pp), (rm, pm) = rho(e.O), rho(e.O + h), rho(e.O - h)
    eg0, egp, egm = r0[0, 1] * p0, rp[0, 1] * pp, rm[0, 1] * pm
    return QubitDensity(
        float(r0[0, 0].real),
        float(r0[1, 1].real),
        complex(eg0),
        complex((egp - egm) / (2 * h)),
        complex((egp - 2 * eg0 + egm) / h**2),
        normalized=True,
    )


def sweep(
    family: str,
    O_grid,
    nbar: float,
    kappa: float,
    G: float,
    mode: str = "closed",
    base: EffectiveParams | None = None,
    state: InputState | None = None,
    tail_tol: float = 1e-12,
    threads: int = 1,
) -> Table:
    """Fisher information over an O grid.

    ``mode`` selects closed forms, truncated Fock sums, or Magnus evolution
    of the full system with finite-difference derivatives (eigen route).
    """
    if mode not in ("closed", "series", "oracle"):
        raise ValueError("mode must be closed, series or oracle")
    base = EffectiveParams(G=G, kappa=kappa) if base is None else base
    s = InputState.from_nbar(family, nbar) if state is None else state

    def row(O):
        e = base.with_estimand(O)
        if mode == "oracle":
            q = _oracle_qubit(e, s)
            rep = qfi_eigen(q)
            F_cl = cfi_error_propagation(q)
            return [O, math.nan, math.nan, rep.F, F_cl, _inv_sqrt(rep.F), _inv_sqrt(F_cl)]
        q = impurity_at_tau(e, s, closed_form=(mode == "closed"), tail_tol=tail_tol)
        rep = fisher_report(q, O)
        return [O, rep.F_c, rep.F_q, rep.F, rep.F_cl, rep.dO_QCR, rep.dO_CR]

    meta = _base_meta(f"sweep ({family}, {mode})", False, nbar=nbar, **{k: getattr(base, k) for k in ("chi", "G", "Omega_c", "Omega_A", "kappa", "gamma", "beta_omega_m")})
    return Table(["O", "F_c", "F_q", "F", "F_cl", "dO_QCR", "dO_CR"], _pool_map(row, O_grid, threads), meta)


def _inv_sqrt(F: float) -> float:
    return 1.0 / math.sqrt(F) if F > 0 else math.inf
