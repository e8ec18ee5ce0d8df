"""Command-line front end.

Exit codes: 0 normal, 1 invalid input, 2 notable mathematical finding (an
exact leading-order cancellation somewhere in the requested scan).  Reports
are deterministic bytes for a fixed configuration, independent of --threads.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import flat as flatmod
from . import oracle as oraclemod
from . import wavetrace
from .lens import LensSpace, components_at
from .reportio import csv_rows, to_json_text

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FINDING = 2


def _parse_p(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad exponent list: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list: {text!r}")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("POISSON_AUDIT_THREADS", "1")))
    except ValueError:
        return 1


def _write(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker count (default: POISSON_AUDIT_THREADS or 1)")
    common.add_argument("--out", default=None,
                        help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    ap = argparse.ArgumentParser(prog="poisson-audit")
    top = ap.add_subparsers(dest="group", required=True)

    lens = top.add_parser("lens", help="lens space analysis").add_subparsers(
        dest="cmd", required=True)
    an = lens.add_parser("analyze", parents=[common],
                         help="per-length table with exact decisions")
    an.add_argument("--q", type=int, required=True)
    an.add_argument("--p", type=_parse_p, required=True)
    an.add_argument("--max-winding", type=int, default=0)

    cs = lens.add_parser("cancel-search", parents=[common],
                         help="scan families for exact cancellations")
    cs.add_argument("--n", type=int, required=True)
    cs.add_argument("--q-min", type=int, default=3)
    cs.add_argument("--q-max", type=int, required=True)
    cs.add_argument("--prime-only", action="store_true")

    lc = lens.add_parser("lemma-check", parents=[common],
                         help="four-cosine vanishing table over odd primes")
    lc.add_argument("--q-max", type=int, required=True)

    spectrum = top.add_parser("spectrum", help="Laplace spectrum oracle").add_subparsers(
        dest="cmd", required=True)
    tr = spectrum.add_parser("trace", parents=[common],
                             help="smoothed wave trace and peak report")
    tr.add_argument("--q", type=int, required=True)
    tr.add_argument("--p", type=_parse_p, required=True)
    tr.add_argument("--epsilons", type=_parse_floats, default=(0.05, 0.03, 0.02))
    tr.add_argument("--cutoff", type=int, default=None,
                    help="eigenvalue cutoff K (default: smallest K with tail < 1e-16)")
    tr.add_argument("--grid", type=int, default=256)
    tr.add_argument("--growth-factor", type=float, default=1.5)

    flat = top.add_parser("flat", help="flat manifolds from Bieberbach data").add_subparsers(
        dest="cmd", required=True)
    fa = flat.add_parser("analyze", parents=[common],
                         help="validate and enumerate the length spectrum")
    fa.add_argument("--input", required=True, help="JSON group description")
    fa.add_argument("--max-length", type=float, required=True)
    fa.add_argument("--densities", action="store_true",
                    help="attach numeric density scalars per component")

    orc = top.add_parser("oracle", help="numeric verification runs").add_subparsers(
        dest="cmd", required=True)
    od = orc.add_parser("dg", parents=[common],
                        help="closed-form vs frame-determinant densities")
    od.add_argument("--q", type=int, required=True)
    od.add_argument("--p", type=_parse_p, required=True)
    oc = orc.add_parser("clean", parents=[common],
                        help="numeric nullity check of the return map")
    oc.add_argument("--q", type=int, required=True)
    oc.add_argument("--p", type=_parse_p, required=True)
    oc.add_argument("--samples", type=int, default=10)
    oc.add_argument("--seed", type=int, default=0)
    return ap


def cmd_lens_analyze(args) -> int:
    lens = LensSpace(args.q, args.p)
    rows = wavetrace.analyze(lens, max_winding=args.max_winding)
    any_zero = any(r["decision"] == wavetrace.ZERO for r in rows)
    report = {
        "lens": {"q": lens.q, "p": list(lens.p), "p_input": list(lens.p_input),
                 "homogeneous": lens.is_homogeneous, "dim": lens.dim},
        "entries": rows,
        "any_zero": any_zero,
    }
    _write(to_json_text(report), args.out)
    return EXIT_FINDING if any_zero else EXIT_OK


def cmd_cancel_search(args) -> int:
    threads = args.threads if args.threads else _default_threads()
    rep = wavetrace.cancellation_search(
        args.n, range(args.q_min, args.q_max + 1),
        prime_only=args.prime_only, threads=threads)
    report = {
        "n": rep.n,
        "q_values": list(rep.q_values),
        "prime_only": rep.prime_only,
        "cells_examined": rep.cells_examined,
        "lengths_examined": rep.lengths_examined,
        "findings": rep.to_jsonable(),
    }
    _write(to_json_text(report), args.out)
    return EXIT_FINDING if rep.findings else EXIT_OK


def cmd_lemma_check(args) -> int:
    rows = []
    for q in range(3, args.q_max + 1):
        if not wavetrace._is_prime(q) or q % 2 == 0:
            continue
        for p in range(1, q):
            hits = [l for l in range(1, q) if wavetrace.lemma_check(q, p, l)]
            rows.append({"q": q, "p": p,
                         "vanishes": len(hits) == q - 1,
                         "vanishes_anywhere": bool(hits),
                         "expected": p == 1 or p == q - 1})
    ok = all(r["vanishes"] == r["expected"] == r["vanishes_anywhere"] for r in rows)
    report = {"q_max": args.q_max, "rows": rows, "matches_prediction": ok}
    if args.format == "csv":
        text = csv_rows(["q", "p", "vanishes", "expected"],
                        [[r["q"], r["p"], r["vanishes"], r["expected"]] for r in rows])
    else:
        text = to_json_text(report)
    _write(text, args.out)
    return EXIT_OK if ok else EXIT_FINDING


def cmd_trace(args) -> int:
    lens = LensSpace(args.q, args.p)
    eps = sorted(args.epsilons, reverse=True)
    cutoff = args.cutoff or oraclemod.required_cutoff(min(eps), lens.n)
    table = oraclemod.laplace_multiplicities(lens, cutoff)
    grid = oraclemod.default_grid(args.grid)
    if args.format == "csv":
        if len(eps) != 1:
            raise ValueError("csv trace output needs exactly one epsilon")
        values = oraclemod.smoothed_trace(table, eps[0], grid)
        text = csv_rows(
            ["t", "re", "im", "abs"],
            [[float(t), float(v.real), float(v.imag), float(abs(v))]
             for t, v in zip(grid, values)])
        _write(text, args.out)
        return EXIT_OK
    rep = oraclemod.peak_report(table, eps, t_grid=grid,
                                growth_factor=args.growth_factor)
    report = {
        "lens": {"q": lens.q, "p": list(lens.p)},
        "cutoff": cutoff,
        "epsilons": list(eps),
        "grid_points": args.grid,
        "rows": rep,
        "all_pass": all(r["pass"] for r in rep),
    }
    _write(to_json_text(report), args.out)
    return EXIT_OK if report["all_pass"] else EXIT_FINDING


def cmd_flat_analyze(args) -> int:
    group = flatmod.load_group(args.input)
    validation = flatmod.validate(group)
    if not validation.valid:
        sys.stderr.write("invalid Bieberbach data:\n")
        for f in validation.failures:
            sys.stderr.write(f"  {f}\n")
        return EXIT_INPUT
    entries = flatmod.length_spectrum_flat(group, args.max_length)
    rows = [flatmod.entry_to_jsonable(e) for e in entries]
    for row, entry in zip(rows, entries):
        diag = flatmod.cleanliness_diagnostic(group, entry)
        row["cleanliness"] = diag
        # flat Morse indices all vanish: the leading sum is a positive sum
        row["decision"] = "NONZERO"
        if args.densities:
            row["densities"] = [
                oraclemod.flat_component_density(group, g.coset_index, entry.length)
                for g in entry.groups
            ]
    report = {
        "input": os.path.basename(args.input),
        "dim": group.dim,
        "point_group_order": validation.point_group_order,
        "max_length": float(args.max_length),
        "lengths": rows,
    }
    if args.format == "csv":
        flat_rows = []
        for row in rows:
            for comp in row["components"]:
                flat_rows.append([row["length_squared"], row["length_float"],
                                  comp["B_index"], comp["fix_dim"], comp["count"]])
        text = csv_rows(["length_squared", "length_float", "B_index", "fix_dim", "count"],
                        flat_rows)
    else:
        text = to_json_text(report)
    _write(text, args.out)
    return EXIT_OK


def cmd_oracle_dg(args) -> int:
    lens = LensSpace(args.q, args.p)
    rows = []
    worst = 0.0
    for l in lens.valid_l():
        for c in components_at(lens, l):
            numeric = oraclemod.numeric_dg(lens, c)
            closed = wavetrace.dg_scalar(c).float_value
            rel = abs(numeric - closed) / closed
            worst = max(worst, rel)
            rows.append({
                "l": l, "class": list(c.members), "orientation": c.orientation,
                "numeric": numeric, "closed_form": closed, "rel_err": rel,
            })
    report = {"lens": {"q": lens.q, "p": list(lens.p)}, "rows": rows,
              "worst_rel_err": worst, "pass": worst < 1e-9}
    _write(to_json_text(report), args.out)
    return EXIT_OK if report["pass"] else EXIT_FINDING


def cmd_oracle_clean(args) -> int:
    lens = LensSpace(args.q, args.p)
    rows = []
    all_pass = True
    for l in lens.valid_l():
        for c in components_at(lens, l):
            rep = oraclemod.cleanliness_check(lens, c, samples=args.samples, seed=args.seed)
            ok = rep["pass"]
            all_pass = all_pass and ok
            rows.append({
                "l": l, "class": list(c.members), "orientation": c.orientation,
                "expected_nullity": rep["expected_nullity"],
                "nullities": [s.nullity for s in rep["samples"]],
                "max_graph_residual": max(s.graph_residual for s in rep["samples"]),
                "pass": ok,
            })
    report = {"lens": {"q": lens.q, "p": list(lens.p)}, "samples": args.samples,
              "rows": rows, "all_pass": all_pass}
    _write(to_json_text(report), args.out)
    return EXIT_OK if all_pass else EXIT_FINDING


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.group == "lens" and args.cmd == "analyze":
            return cmd_lens_analyze(args)
        if args.group == "lens" and args.cmd == "cancel-search":
            return cmd_cancel_search(args)
        if args.group == "lens" and args.cmd == "lemma-check":
            return cmd_lemma_check(args)
        if args.group == "spectrum" and args.cmd == "trace":
            return cmd_trace(args)
        if args.group == "flat" and args.cmd == "analyze":
            return cmd_flat_analyze(args)
        if args.group == "oracle" and args.cmd == "dg":
            return cmd_oracle_dg(args)
        if args.group == "oracle" and args.cmd == "clean":
            return cmd_oracle_clean(args)
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    sys.stderr.write("unknown command\n")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
