"""Command-line entry point: ``squeezebell <command> [options]``.

Exit codes: 0 success, 2 invalid configuration or input, 3 verification
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path

from . import __version__
from .discrimination import parse_rule
from .errors import InvalidConfigurationError, InvalidInputError, VerificationError
from .kernels import Constraint, db_from_r, r_from_db
from .repeater import RepeaterScenario, report as repeater_report
from .schemes import SchemeResult, run_dr, run_sr, table1
from .verify import run_verification

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


def squeezing(text: str) -> float:
    """``"0.72"`` is r; ``"6.27dB"`` is converted to r."""
    s = text.strip()
    try:
        if s.lower().endswith("db"):
            return r_from_db(float(s[:-2]))
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a squeezing value: {text!r}") from None


def angle(text: str) -> float:
    """Radians; a trailing ``pi`` multiplies by π (``"0.3pi"``)."""
    s = text.strip().lower()
    try:
        if s.endswith("pi"):
            head = s[:-2].strip()
            return (float(head) if head else 1.0) * math.pi
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _dump_json(data, path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def _write_rows(rows: list[list], header: list[str], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _manifest(out: Path, command: str, config: dict, outputs: list[Path], inputs=()) -> Path:
    data = {
        "command": command,
        "config": config,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }
    return _dump_json(data, out / f"{command}.manifest.json")


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_scheme(result: SchemeResult, out: Path, stem: str, command: str, config: dict) -> None:
    payload = {"encoding": result.encoding, "params": result.params, "deficit": dict(result.table.deficit)}
    payload.update(result.report.to_dict(result.table))
    files = [_dump_json(payload, out / f"{stem}.json")]
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(result.report.to_csv(result.table), encoding="utf-8")
    files.append(csv_path)
    _manifest(out, command, config, files)
    rep = result.report
    per = "  ".join(f"{k} {100 * v:.2f}%" for k, v in rep.per_state.items())
    print(f"{result.encoding}: overall {100 * rep.overall:.2f}%  ({per})")


def cmd_dr_run(args) -> int:
    result = run_dr(args.r, args.cap, args.rule, args.pnrd, args.pnrd_mode)
    _emit_scheme(result, _outdir(args.out), "dr_report", "dr-run", result.params)
    return EXIT_OK


def cmd_sr_run(args) -> int:
    result = run_sr(args.theta1, args.r, args.constraint, args.cap, args.rule, args.pnrd, args.pnrd_mode, args.r2)
    _emit_scheme(result, _outdir(args.out), "sr_report", "sr-run", result.params)
    return EXIT_OK


def cmd_verify(args) -> int:
    out = _outdir(args.out)
    rep = run_verification(args.cap, args.tol, grid=not args.no_grid)
    path = _dump_json(rep.to_dict(), out / "verify.json")
    _manifest(out, "verify", {"cap": args.cap, "tol": args.tol, "grid": not args.no_grid}, [path])
    print(f"{len(rep.checks)} checks, max discrepancy {rep.max_discrepancy:.3e} (tol {args.tol:g})")
    if not rep.passed:
        for f in rep.failures():
            print(f"  FAIL {f.label} [{f.state}] {f.value:.3e} at {f.worst_pattern}", file=sys.stderr)
        raise VerificationError(f"{len(rep.failures())} checks exceed tolerance")
    return EXIT_OK


def cmd_table1(args) -> int:
    out = _outdir(args.out)
    rows = table1(args.cap, tuple(args.resolutions))
    header = ["encoding", "pnrd", "reference", "merge", "discard", "matches"]
    data = [
        [r["encoding"], r["pnrd"], r["reference"], repr(r["merge"]), repr(r["discard"]), ";".join(r["matches"])] for r in rows
    ]
    files = [_write_rows(data, header, out / "table1.csv"), _dump_json(rows, out / "table1.json")]
    _manifest(out, "table1", {"cap": args.cap, "resolutions": list(args.resolutions)}, files)
    for r in rows:
        ref = "-" if r["reference"] is None else f"{100 * r['reference']:.1f}%"
        print(
            f"{r['encoding']}/{r['pnrd']}: merge {100 * r['merge']:.2f}%  discard {100 * r['discard']:.2f}%  "
            f"reference {ref}  matches {','.join(r['matches']) or 'none'}"
        )
    return EXIT_OK


def _sweep_config(args):
    from .sweep import SweepConfig, load_config

    if args.config:
        cfg = load_config(args.config)
    elif args.full:
        cfg = SweepConfig()
    else:
        cfg = SweepConfig.quick()
    overrides = {k: getattr(args, k) for k in ("workers", "cap", "rule") if getattr(args, k) is not None}
    if overrides:
        d = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
        d.update(overrides)
        cfg = SweepConfig(**d)
    return cfg


def _plot_files(records, out: Path, theta1: float, constraint) -> list[Path]:
    from .plots import line_svg, surface_svg
    from .sweep import slice_for_plot

    files = []
    equal = slice_for_plot(records, "equal", constraint=constraint)
    surface = slice_for_plot(records, "surface", theta1=theta1, constraint=constraint)
    for name, ds, render in (("equal_squeezing", equal, line_svg), ("surface", surface, surface_svg)):
        p = out / f"{name}.csv"
        p.write_text(ds.to_csv(), encoding="utf-8")
        files += [p, render(ds, out / f"{name}.svg")]
    return files


def cmd_sweep(args) -> int:
    from .sweep import find_optimum, run_sweep, write_csv, write_json

    cfg = _sweep_config(args)
    out = _outdir(args.out)
    print(f"sweeping {cfg.size()} points (cap {cfg.cap}, {cfg.rule}, {cfg.workers} workers)")
    result = run_sweep(cfg)
    files = [write_csv(result, out / "sweep.csv"), write_json(result, out / "sweep.json")]
    best = find_optimum(result)
    files.append(_dump_json(best.__dict__, out / "optimum.json"))
    files += _plot_files(result, out, args.theta1, args.constraint)
    _manifest(out, "sweep", cfg.to_dict(), files, [args.config] if args.config else [])
    print(
        f"optimum {100 * best.p_overall:.2f}% at theta1={best.theta1 / math.pi:.2f}pi "
        f"r1={best.r1:g} ({db_from_r(best.r1):.2f} dB) r2={best.r2:g} ({db_from_r(best.r2):.2f} dB) {best.constraint}"
    )
    return EXIT_OK


def cmd_repeater(args) -> int:
    out = _outdir(args.out)
    rows = [repeater_report(RepeaterScenario(args.L, args.L0, p)) for p in args.p_swap]
    header = list(rows[0])
    files = [
        _write_rows([[repr(r[k]) if isinstance(r[k], float) else r[k] for k in header] for r in rows], header, out / "repeater.csv"),
        _dump_json(rows, out / "repeater.json"),
    ]
    _manifest(out, "repeater", {"L": args.L, "L0": args.L0, "p_swap": args.p_swap}, files)
    for r in rows:
        print(f"p_swap={r['p_swap']:g}: rate factor {r['rate_factor']:.6g}, parallel chains {r['parallel_chains']}")
    if len(rows) > 1:
        print(f"improvement {rows[-1]['rate_factor'] / rows[0]['rate_factor']:.3f}x")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .sweep import read_csv

    out = _outdir(args.out)
    records = read_csv(args.input)
    files = _plot_files(records, out, args.theta1, args.constraint)
    _manifest(out, "plot", {"theta1": args.theta1, "constraint": Constraint(args.constraint).value}, files, [args.input])
    print("wrote " + ", ".join(p.name for p in files))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squeezebell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cap=26, out="."):
        p.add_argument("--cap", type=int, default=cap, help="photon truncation per mode")
        p.add_argument("--out", default=out, help="output directory")

    def scheme(p):
        common(p)
        p.add_argument("--rule", type=parse_rule, default="exact", help="exact[:tol] or ratio[:k]")
        p.add_argument("--pnrd", type=int, default=None, help="detector resolution limit")
        p.add_argument("--pnrd-mode", choices=("discard", "merge"), default="discard")

    p = sub.add_parser("dr-run", help="dual-rail scheme")
    scheme(p)
    p.add_argument("--r", type=squeezing, default=None, help="squeezing, r or e.g. 5.72dB (default: critical)")
    p.set_defaults(func=cmd_dr_run)

    p = sub.add_parser("sr-run", help="single-rail scheme")
    scheme(p)
    p.add_argument("--theta1", type=angle, default=0.0, help="radians, or e.g. 0.3pi")
    p.add_argument("--r", type=squeezing, default=None, help="squeezing of both modes (default: critical)")
    p.add_argument("--r2", type=squeezing, default=None, help="second squeezer if different")
    p.add_argument("--constraint", type=Constraint, default=Constraint.OMEGA_PLUS, help="Omega+, Omega-, omega+, omega-")
    p.set_defaults(func=cmd_sr_run)

    p = sub.add_parser("verify", help="cross-check Fock engine against closed forms")
    common(p, cap=10)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--no-grid", action="store_true", help="canonical circuits only")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table1", help="finite-resolution detector table")
    common(p)
    p.add_argument("--resolutions", type=int, nargs="+", default=[2, 5, 10])
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("sweep", help="grid search over single-rail networks")
    p.add_argument("--config", default=None, help="JSON sweep config")
    p.add_argument("--full", action="store_true", help="full default grid instead of the quick preset")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--rule", type=parse_rule, default=None)
    p.add_argument("--theta1", type=angle, default=0.0, help="theta1 of the surface slice")
    p.add_argument("--constraint", type=Constraint, default=Constraint.OMEGA_PLUS, help="constraint of the plot slices")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("repeater", help="repeater rate scaling")
    p.add_argument("--L", type=float, default=5120.0, help="total distance, km")
    p.add_argument("--L0", type=float, default=20.0, help="segment length, km")
    p.add_argument("--p-swap", type=float, nargs="+", default=[0.5, 0.643])
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_repeater)

    p = sub.add_parser("plot", help="plot datasets from a sweep CSV")
    p.add_argument("input", help="sweep CSV")
    p.add_argument("--theta1", type=angle, default=0.0)
    p.add_argument("--constraint", type=Constraint, default=Constraint.OMEGA_PLUS)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigurationError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
