"""Command-line front end: catalog inspection, verification, benchmarks.

Exit codes: 0 on success, 1 when a verification falls short of the claimed
order, 2 for usage errors (unknown names, malformed flags).  All output is
deterministic for fixed flags and seed.  The ``COMMEXP_OUT_DIR`` environment
variable supplies a default directory for CSV exports when ``--out`` names
no path.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import bench, matform, schemes
from .conditions import effective_error, optimize_free_parameter, order_residuals

OUT_DIR_ENV = "COMMEXP_OUT_DIR"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _coeff_str(value) -> str:
    c = complex(value)
    if c.imag != 0.0:
        return f"{c.real:.17g}{c.imag:+.17g}j"
    return f"{c.real:.17g}"


def _default_out(filename: str) -> Path:
    base = os.environ.get(OUT_DIR_ENV, "")
    return Path(base) / filename if base else Path(filename)


# --------------------------------------------------------------------------
# schemes
# --------------------------------------------------------------------------


def _cmd_schemes(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in schemes.catalog_names():
            sch = schemes.catalog_get(name)
            ee = effective_error(sch)
            print(f"{name:<18} order={sch.order}  s={sch.slot_count:<3d} "
                  f"target={sch.target.name:<26} E/s≈{ee.per_exponential:.3f}")
        return 0

    try:
        sch = schemes.catalog_get(args.name)
    except KeyError:
        return _fail(f"unknown scheme {args.name!r}; "
                     f"run 'commexp schemes list' for the catalog")

    if args.action == "show":
        print(f"{sch.name}: order {sch.order}, {sch.slot_count} exponentials, "
              f"family {sch.family}")
        print(f"target {sch.target.name}: "
              + ", ".join(f"w({d},{p})={_coeff_str(v)}"
                          for (d, p), v in sorted(sch.target.terms.items(),
                                                  key=lambda kv: kv[0])))
        if sch.note:
            print(f"note: {sch.note}")
        for i, slot in enumerate(sch.slots):
            print(f"  slot {i:2d}: {slot.generator}  {_coeff_str(slot.coefficient)}")
        return 0

    schemes.save_scheme(sch, args.path)
    print(f"wrote {args.path}")
    return 0


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


def _resolve_scheme_arg(value: str):
    try:
        return schemes.catalog_get(value)
    except KeyError:
        pass
    path = Path(value)
    if path.exists():
        return schemes.load_scheme(path)
    raise KeyError(f"{value!r} is neither a catalog scheme nor a scheme file")


def _cmd_verify(args: argparse.Namespace) -> int:
    try:
        sch = _resolve_scheme_arg(args.scheme)
    except (KeyError, ValueError) as exc:
        return _fail(str(exc.args[0] if exc.args else exc))

    r = sch.order
    report = order_residuals(sch, sch.target, r, args.tol)
    for degree in range(1, r + 1):
        print(f"degree {degree}: max residual {report.max_residual(degree):.3e}")

    if not report.all_satisfied():
        first = report.verified_order + 1
        print(f"{sch.name}: order {r} NOT verified, first failure at degree "
              f"{first} (max residual {report.max_residual(first):.3e}, "
              f"tol {report.tolerance:g})")
        return 1

    ee = effective_error(sch, r)
    note = " (word-coefficient norm)" if ee.word_norm_fallback else ""
    print(f"{sch.name}: order {r} verified, E = {ee.E:.6g}, "
          f"E/s = {ee.per_exponential:.6g}{note}")
    return 0


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------


def _parse_pair(spec: str, seed: int) -> matform.OperatorPair:
    if spec == "pauli":
        return matform.make_pair("pauli")
    if spec.startswith("random:"):
        dim = int(spec.split(":", 1)[1])
        return matform.make_pair("random", dim, seed)
    raise ValueError(f"unknown operator pair {spec!r} (use pauli or random:<dim>)")


def _split_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _write_rows(out: Path, comments: list[str], header: tuple[str, ...],
                rows: list[tuple]) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.figure:
        out = Path(args.out) if args.out else _default_out(f"{args.figure}.csv")
        out.parent.mkdir(parents=True, exist_ok=True)
        bench.export_figure(args.figure, out, seed=args.seed)
        n_rows = sum(1 for line in out.read_text(encoding="utf-8").splitlines()
                     if line and not line.startswith("#"))
        print(f"{args.figure}: wrote {out} ({n_rows} lines incl. headers)")
        return 0

    if not args.schemes:
        return _fail("--custom needs --schemes")
    names = [tok.strip() for tok in args.schemes.split(",") if tok.strip()]
    try:
        for name in names:
            schemes.catalog_get(name)
        pair = _parse_pair(args.pair, args.seed)
    except (KeyError, ValueError) as exc:
        return _fail(str(exc.args[0] if exc.args else exc))
    if (args.n is None) == (args.x is None):
        return _fail("--custom needs exactly one of --n or --x")

    out = Path(args.out) if args.out else _default_out("custom.csv")
    if args.n is not None:
        n_list = [int(tok) for tok in args.n.split(",") if tok.strip()]
        if not n_list or min(n_list) < 1:
            return _fail("--n needs positive step counts")
        rows = []
        for name in names:
            for res in bench.error_curve(name, pair, args.t, n_list):
                rows.append((res.scheme, res.pair, res.t_total, res.n,
                             res.gates, res.error))
        header = ("scheme", "pair", "t_total", "n", "gates", "error")
        comments = [f"custom error curve: t_total={args.t:g}, seed={args.seed}"]
    else:
        x_grid = _split_floats(args.x)
        if not x_grid or args.tol is None:
            return _fail("--x needs a nonempty grid and --tol")
        rows = []
        for name in names:
            for x, gates in bench.gates_for_tolerance(name, pair, x_grid, args.tol):
                rows.append((name, x, args.tol,
                             "not reached" if gates is None else gates))
        header = ("scheme", "x", "tol", "gates")
        comments = [f"custom cost table: tol={args.tol:g}, seed={args.seed}"]

    _write_rows(out, comments, header, rows)
    print(f"custom: wrote {out} ({len(rows)} data rows)")
    return 0


# --------------------------------------------------------------------------
# optimize
# --------------------------------------------------------------------------

# (family constructor, order, parameter label, closed-form minimizer, sign symmetric)
_FAMILIES = {
    "third_order": (schemes.third_order_family, 3, "c5",
                    math.sqrt(2.0 / (math.sqrt(5.0) + 1.0)), True),
    "aor4": (schemes.aor4, 4, "d2", schemes.AOR4_OPTIMAL_D2, False),
}


def _cmd_optimize(args: argparse.Namespace) -> int:
    family, r, label, reference, symmetric = _FAMILIES[args.family]
    parts = args.range.split(":")
    try:
        lo, hi = (float(tok) for tok in parts)
    except ValueError:
        return _fail(f"--range wants a:b with numeric bounds, got {args.range!r}")
    if not lo < hi:
        return _fail(f"empty parameter range {args.range!r}")

    try:
        result = optimize_free_parameter(family, r, (lo, hi))
    except ValueError as exc:
        return _fail(str(exc))

    if symmetric and result.param < 0:
        reference = -reference
    print(f"{args.family}: minimizer {label} = {result.param:.10f}, "
          f"E = {result.E:.8g}")
    print(f"closed-form reference {label}* = {reference:.10f}, "
          f"deviation {abs(result.param - reference):.3e}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commexp",
        description="Product-formula approximations of commutator exponentials.",
        epilog=f"Set {OUT_DIR_ENV} to choose a default directory for CSV exports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_schemes = sub.add_parser("schemes", help="inspect the scheme catalog")
    s_sub = p_schemes.add_subparsers(dest="action", required=True)
    s_sub.add_parser("list", help="one summary line per catalog scheme")
    p_show = s_sub.add_parser("show", help="print slots at full precision")
    p_show.add_argument("name")
    p_export = s_sub.add_parser("export", help="write a scheme file")
    p_export.add_argument("name")
    p_export.add_argument("path")
    p_schemes.set_defaults(func=_cmd_schemes)

    p_verify = sub.add_parser("verify", help="check a scheme against its target")
    p_verify.add_argument("--scheme", required=True,
                          help="catalog name or scheme file path")
    p_verify.add_argument("--tol", type=float, default=1e-10)
    p_verify.set_defaults(func=_cmd_verify)

    p_bench = sub.add_parser("bench", help="run an experiment, write CSV")
    mode = p_bench.add_mutually_exclusive_group(required=True)
    mode.add_argument("--figure", choices=list(bench.FIGURES))
    mode.add_argument("--custom", action="store_true")
    p_bench.add_argument("--schemes", help="comma-separated catalog names")
    p_bench.add_argument("--pair", default="pauli", help="pauli or random:<dim>")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--t", type=float, default=1.0, help="total simulated time")
    p_bench.add_argument("--n", help="comma-separated step counts (error curve)")
    p_bench.add_argument("--x", help="comma-separated x grid (cost table)")
    p_bench.add_argument("--tol", type=float, help="tolerance for the cost table")
    p_bench.add_argument("--out", help="output CSV path")
    p_bench.set_defaults(func=_cmd_bench)

    p_opt = sub.add_parser("optimize", help="minimize E over a free parameter")
    p_opt.add_argument("--family", required=True, choices=sorted(_FAMILIES))
    p_opt.add_argument("--range", required=True, help="parameter range a:b")
    p_opt.set_defaults(func=_cmd_optimize)

    return parser


def _join_range_values(argv: list[str]) -> list[str]:
    """Glue ``--range``'s value on with '=' so negative bounds survive argparse."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--range" and i + 1 < len(argv):
            out.append(f"--range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(_join_range_values(list(argv)))
    except SystemExit as exc:  # argparse exits itself on usage errors / --help
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
