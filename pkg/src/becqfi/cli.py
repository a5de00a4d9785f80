"""Command-line entry point: ``becqfi <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import config, reproduce, verify
from .loss import critical_kappa
from .params import EffectiveParams
from .states import DEFAULT_TAIL_TOL

# option name -> (default, parser) used when neither flag nor config supplies a value
DEFAULTS = {
    "nbar": (None, config.parse_list),
    "kappa": (None, config.parse_list),
    "G": (None, float),
    "O_range": (None, config.parse_range),
    "family": ("both", str),
    "mode": ("closed", str),
    "out": ("out", str),
    "tail_tol": (DEFAULT_TAIL_TOL, float),
    "threads": (1, int),
    "form": ("exact", str),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line flags take precedence")
    common.add_argument("--nbar", help="comma-separated mean photon numbers")
    common.add_argument("--kappa", help="comma-separated dimensionless loss rates")
    common.add_argument("--G", help="dimensionless G")
    common.add_argument("--O-range", dest="O_range", help="estimand grid a:b:steps (inclusive)")
    common.add_argument("--family", choices=["coherent", "squeezed", "both"])
    common.add_argument("--mode", choices=["closed", "series", "oracle"])
    common.add_argument("--out", help="output directory")
    common.add_argument("--tail-tol", dest="tail_tol", help="Fock truncation tail tolerance")
    common.add_argument("--threads", help="worker threads for grid evaluation")
    common.add_argument(
        "--form",
        choices=["exact", "printed"],
        help="closed forms: exact (default) or the published variants",
    )
    common.add_argument("--plot-script", action="store_true", help="also write a matplotlib script next to the CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="becqfi", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("table1", parents=[common], help="optimal F_c*, F_q*, F* per family")
    fig = sub.add_parser("figure", parents=[common], help="data behind one figure panel")
    fig.add_argument("name", choices=reproduce.FIGURES)
    sub.add_parser("critical-kappa", parents=[common], help="critical loss rates for the given nbar values")
    sub.add_parser("sweep", parents=[common], help="Fisher information over an O grid")
    ov = sub.add_parser("oracle-verify", parents=[common], help="brute-force check of the analytic results")
    ov.add_argument("--inject-fault", action="store_true", help="perturb chi by 1e-3 in the analytic path only")
    return p


def resolve(args) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    file_values = config.load(args.config) if args.config else {}
    cfg = {}
    for key, (default, parse) in DEFAULTS.items():
        raw = getattr(args, key, None)
        if raw is None:
            raw = file_values.get(key)
        cfg[key] = default if raw is None else parse(raw)
    for key in ("nbar", "kappa"):
        if cfg[key] is not None:
            config.check_grid(cfg[key])
    if cfg["O_range"] is not None:
        config.check_grid(cfg["O_range"])
    if cfg["threads"] < 1:
        raise ValueError("threads must be >= 1")
    cfg["file"] = file_values
    return cfg


def _writable(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()
    return out


def _emit(table, name: str, out: Path, plot: bool) -> Path:
    path = reproduce.write_csv(table, out / f"{name}.csv")
    print(path)
    if plot:
        print(reproduce.write_plot_script(name if name in reproduce._PLOT_SPECS else "sweep", path))
    return path


def _base_params(cfg) -> EffectiveParams:
    fv = cfg["file"]
    base = config.physical_effective(fv) or EffectiveParams()
    over = config.effective_overrides(fv)
    if over:
        O = over.pop("O", None)
        base = replace(base, **over)
        if O is not None:
            base = base.with_estimand(O)
    return base


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    printed = cfg["form"] == "printed"
    out = _writable(Path(cfg["out"]))
    threads = cfg["threads"]

    if args.command == "table1":
        nbars = cfg["nbar"] or [0.0, 1.0, 5.0]
        # the lossless row is always reported alongside the requested rates
        kappas = sorted({0.0, *(cfg["kappa"] or [])})
        table = reproduce.table1(nbars, kappas, cfg["family"], cfg["G"] or 0.0, printed, threads)
        _emit(table, "table1", out, args.plot_script)
    elif args.command == "figure":
        grid = cfg["O_range"]
        table = reproduce.figure(
            args.name,
            nbars=cfg["nbar"],
            kappas=cfg["kappa"],
            O_grid=grid,
            G=cfg["G"],
            printed=printed,
            threads=threads,
        )
        _emit(table, args.name, out, args.plot_script)
    elif args.command == "critical-kappa":
        nbars = cfg["nbar"] or [0.5, 1.0, 5.0, 20.0, 100.0]
        rows = []
        for n in nbars:
            for fam in reproduce._families(cfg["family"]):
                c = critical_kappa(fam, n, printed)
                rows.append([fam, n, c.kappa_star, c.kappa_bisect, c.discrepancy])
        meta = reproduce._base_meta("critical loss rate", printed)
        _emit(reproduce.Table(["family", "nbar", "kappa_star", "kappa_bisect", "abs_diff"], rows, meta), "critical_kappa", out, args.plot_script)
    elif args.command == "sweep":
        base = _base_params(cfg)
        grid = cfg["O_range"] or config.parse_range("0:1:101")
        nbar = (cfg["nbar"] or [5.0])[0]
        kappa = (cfg["kappa"] or [base.kappa])[0]
        G = base.G if cfg["G"] is None else cfg["G"]
        base = replace(base, kappa=kappa, G=G)
        state = config.input_state(cfg["file"])
        fams = reproduce._families(cfg["family"]) if state is None else [state.kind]
        for fam in fams:
            table = reproduce.sweep(fam, grid, nbar, kappa, G, cfg["mode"], base, state, cfg["tail_tol"], threads)
            _emit(table, f"sweep_{fam}_{cfg['mode']}", out, args.plot_script)
    elif args.command == "oracle-verify":
        fv = cfg["file"]
        e = _base_params(cfg) if (config.effective_overrides(fv) or config.physical_effective(fv)) else verify.REFERENCE
        s = config.input_state(fv) or verify.REFERENCE_STATE
        report = verify.run(e, s, inject_fault=args.inject_fault, threads=threads)
        summary = report.summary()
        (out / "oracle_verify.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
        for c in report.checks:
            tag = "info" if c.informational else ("PASS" if c.passed else "FAIL")
            print(f"[{tag}] {c.name}: {c.value:.3e} (tol {c.tol:g})")
        if not report.ok:
            print(f"oracle-verify FAILED; worst offender: {report.worst.name}", file=sys.stderr)
            return 1
        print(f"oracle-verify passed in {report.seconds:.1f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
