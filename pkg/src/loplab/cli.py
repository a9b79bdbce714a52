"""Command-line interface: ``loplab analyze | search | family | export-dot | random-index``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import jsonfmt
from .em import ConvergenceError, em_complete, estimate_random_index, cr_index
from .family import (FamilyParams, family_gap_closed_form, family_gap_via_reduced_system,
                     generate_family)
from .llsm import llsm_exact_edges, llsm_float
from .lop import edge_violations, ranking
from .pcm import (GeneralPcm, NotConnected, OrdinalPcm, ParseError, linear_order_permutation,
                  ordinal_intensity, parse_matrix, parse_pattern, preference_edges, realize, render_dot,
                  render_matrix, render_pattern)
from .search import DEFAULT_B_GRID, SearchTask, default_workers, run_search

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
UNIQUENESS_NOTE = ("weights are unique if and only if the comparison graph is weakly connected; "
                   "connect every alternative to the others through known comparisons")


def _parse_b(text: str):
    value = Fraction(text)
    if value.denominator == 1:
        return int(value)
    return float(value) if "." in text else value


def _int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    return (int(lo), int(hi)) if sep else (int(lo), int(lo))


def _b_grid(text: str) -> tuple:
    if ".." in text:
        lo, hi = _int_range(text)
        return tuple(range(lo, hi + 1))
    return tuple(_parse_b(t) for t in text.split(","))


def _load_input(path: str, fmt: str):
    text = Path(path).read_text() if path != "-" else sys.stdin.read()
    if fmt == "auto":
        first = next((line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")), [])
        fmt = "pattern" if len(first) == 1 else "matrix"
    return (parse_pattern(text), fmt) if fmt == "pattern" else (parse_matrix(text), fmt)


def _cr(completed: GeneralPcm, seed: int, samples: int):
    if completed.n < 3:
        return None, None
    excess = estimate_random_index(completed.n, samples, seed) - completed.n
    return excess, cr_index(completed.to_array(), excess)


def analyze(obj, kind: str, methods: list[str], b=None, rational: bool = True,
            seed: int = 0, ri_samples: int = 10_000) -> dict:
    """Build the analysis report for a pattern (needs b) or a matrix."""
    if kind == "pattern":
        b = 2 if b is None else b
        pcm = realize(OrdinalPcm(obj, b))
        edges = list(obj.edges)
        echo = {"kind": "pattern", "n": obj.n, "b": b, "edges": [list(e) for e in edges]}
    else:
        pcm = obj
        b = ordinal_intensity(pcm)
        echo = {"kind": "matrix", "n": pcm.n, "b": b, "matrix": render_matrix(pcm)}
        edges = None
        if b is not None:
            if linear_order_permutation(pcm, b) is not None:
                edges = preference_edges(pcm, b)
            else:
                echo["note"] = "preferences contain a cycle; linear order preservation does not apply"
    report = {"schema": SCHEMA_VERSION, "input": echo, "methods": {}, "timing": {}}
    for method in methods:
        start = time.perf_counter()
        if method == "llsm":
            w = llsm_float(pcm)
            entry = {"weights": list(w.values)}
            if b is not None and rational:
                coeffs = llsm_exact_edges(pcm.n, preference_edges(pcm, b))
                entry["log_b_coefficients"] = [str(c) for c in coeffs.coeffs]
                entry["common_denominator"] = coeffs.common_denominator
                lop_weights = coeffs
            else:
                lop_weights = w
        else:
            completion = em_complete(pcm)
            w = completion.perron.w
            excess, cr = _cr(completion.completed, seed, ri_samples)
            entry = {"weights": list(w.values), "lambda_max": completion.lambda_max, "cr": cr,
                     "random_index_excess": excess, "random_index_seed": seed,
                     "random_index_samples": ri_samples,
                     "filled": {f"{i + 1},{j + 1}": v for (i, j), v in sorted(completion.filled.items())}}
            lop_weights = w
        entry["ranking"] = [list(g) for g in ranking(lop_weights)]
        if edges is not None:
            violations = edge_violations(edges, lop_weights)
            entry["lop"] = {"satisfied": not violations, "violations": [list(p) for p in violations]}
        else:
            entry["lop"] = None
        report["methods"][method] = entry
        report["timing"][method] = time.perf_counter() - start
    return report


def _exit_code(report: dict) -> int:
    for entry in report["methods"].values():
        if entry["lop"] is not None and not entry["lop"]["satisfied"]:
            return EXIT_VIOLATION
    return EXIT_OK


def _render_text(report: dict) -> str:
    echo = report["input"]
    lines = [f"input: {echo['kind']}, n = {echo['n']}, b = {echo['b']}"]
    if "note" in echo:
        lines.append(f"note: {echo['note']}")
    for method, entry in report["methods"].items():
        lines.append(f"[{method}]")
        lines.append("  weights: " + " ".join(f"{x:.6f}" for x in entry["weights"]))
        if "log_b_coefficients" in entry:
            d = entry["common_denominator"]
            nums = [str(Fraction(c) * d) for c in entry["log_b_coefficients"]]
            lines.append(f"  log-weights: [{', '.join(nums)}] * log(b) / {d}")
        if "lambda_max" in entry:
            lines.append(f"  lambda_max: {entry['lambda_max']:.12g}")
            if entry["cr"] is not None:
                lines.append(f"  CR: {entry['cr']:.6g} (random index excess {entry['random_index_excess']:.6g}, "
                             f"seed {entry['random_index_seed']}; the 0.1 rule of thumb is informational only)")
        lines.append("  ranking: " + " > ".join("=".join(map(str, g)) for g in entry["ranking"]))
        lop = entry["lop"]
        if lop is None:
            lines.append("  LOP: not applicable")
        elif lop["satisfied"]:
            lines.append("  LOP: satisfied")
        else:
            lines.append("  LOP: violated on " + ", ".join(f"{i}->{j}" for i, j in lop["violations"]))
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    obj, kind = _load_input(args.input, args.format)
    methods = ["llsm", "em"] if args.method == "both" else [args.method]
    report = analyze(obj, kind, methods, args.b, not args.no_rational, args.seed, args.ri_samples)
    sys.stdout.write(jsonfmt.dumps(report) + "\n" if args.json else _render_text(report))
    return _exit_code(report)


def cmd_search(args) -> int:
    task = SearchTask(args.n, args.method, _int_range(args.edges) if args.edges else None,
                      args.b_grid, edges_only=args.edges_only)
    if args.resume and not args.out:
        raise ValueError("--resume needs --out for the hit file")
    result = run_search(task, workers=args.threads or default_workers(), out=args.out,
                        journal=args.resume, chunk_bits=args.chunk_bits)
    summary = result.summary()
    if args.out is None:
        summary["hit_ids"] = [h.pattern_id for h in result.hits]
    sys.stdout.write(jsonfmt.dumps(summary) + "\n")
    return EXIT_OK


def cmd_family(args) -> int:
    p = FamilyParams(args.k, args.m)
    pattern = generate_family(p)
    if args.emit == "pattern":
        sys.stdout.write(render_pattern(pattern))
    elif args.emit == "matrix":
        sys.stdout.write(render_matrix(realize(OrdinalPcm(pattern, args.b))))
    elif args.emit == "dot":
        sys.stdout.write(render_dot(pattern))
    if args.gap:
        closed = family_gap_closed_form(p)
        reduced = family_gap_via_reduced_system(p)
        print(f"closed form:    y1 - y2 = {closed} * log(b)  (~ {float(closed):.6g})")
        print(f"reduced system: y1 - y2 = {reduced} * log(b)")
        if closed != reduced:
            print("MISMATCH between closed form and reduced system", file=sys.stderr)
            return EXIT_ERROR
    return EXIT_OK


def cmd_export_dot(args) -> int:
    obj, _ = _load_input(args.input, "pattern")
    sys.stdout.write(render_dot(obj))
    return EXIT_OK


def cmd_random_index(args) -> int:
    value = estimate_random_index(args.n, args.samples, args.seed, workers=args.threads or 1)
    sys.stdout.write(jsonfmt.dumps({"n": args.n, "samples": args.samples, "seed": args.seed,
                                    "mean_lambda_max": value, "excess": value - args.n}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loplab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="weights, CR and linear order preservation for a matrix or pattern")
    p.add_argument("input", help="matrix or pattern file ('-' for stdin)")
    p.add_argument("--format", choices=["auto", "matrix", "pattern"], default="auto")
    p.add_argument("--method", choices=["em", "llsm", "both"], default="both")
    p.add_argument("--b", type=_parse_b, default=None, help="preference intensity for pattern input (default 2)")
    p.add_argument("--rational", action="store_true", help="exact LLSM coefficients (default for ordinal input)")
    p.add_argument("--no-rational", action="store_true", help="float LLSM only")
    out = p.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--text", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for the random index estimate")
    p.add_argument("--ri-samples", type=int, default=10_000)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("search", help="exhaustive search for LLSM violations or EM reversals")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=["llsm", "em"], default="llsm")
    p.add_argument("--edges", help="known-comparison count, 'k' or 'lo..hi'")
    p.add_argument("--b-grid", type=_b_grid, default=DEFAULT_B_GRID, help="'2..9' or '2,3,4'")
    p.add_argument("--edges-only", action="store_true", help="EM: only count flips on compared pairs")
    p.add_argument("--out", help="JSON-lines hit file")
    p.add_argument("--resume", help="journal file; completed chunks recorded there are skipped")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default LOPLAB_THREADS or cores)")
    p.add_argument("--chunk-bits", type=int, default=16)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("family", help="the k, m parametric DAG family")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=_parse_b, default=2)
    p.add_argument("--emit", choices=["pattern", "matrix", "dot"], default=None)
    p.add_argument("--gap", action="store_true", help="print y1 - y2 from the closed form and the reduced system")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("export-dot", help="render a pattern file as a DOT digraph")
    p.add_argument("input")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("random-index", help="Monte Carlo mean Perron root of random reciprocal matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_random_index)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except NotConnected as exc:
        print(f"error: {exc}. {UNIQUENESS_NOTE}", file=sys.stderr)
    except (ParseError, ValueError, OSError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
