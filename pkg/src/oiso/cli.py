"""Command-line front end: JSON in, canonical JSON report out.

Exit codes: 0 for accepted/successful runs, 2 for mathematically rejected
inputs (a report with the certificate or diagnostic is still emitted), 1 for
usage and I/O errors. Reports are canonical (sorted keys, fixed indentation,
sha256 digest of the payload) and contain nothing run-dependent; elapsed time
goes to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, fuzz
from .adequacy import check_adequate
from .classify import classify
from .compactify import (
    AmbiguousBoundaryError,
    NonconvergentNetError,
    compactified_decompose,
    embed,
    limit_points,
)
from .cones import is_order_isomorphism
from .exprs import (
    InconclusiveError,
    IntervalBox,
    decay_check,
    eval_expr,
    local_form,
    parse_sexpr,
    separation_witness,
    to_sexpr,
)
from .recovery import NotOrderIsomorphismError, decompose
from .serialize import (
    build_report,
    canonical_json,
    file_digest,
    load_json,
    parse_compactify_spec,
    parse_family,
    parse_operator,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2


def _input_echo(path: str) -> dict:
    return {"file": os.path.basename(path), "sha256": file_digest(path)}


def _common_settings(args, *names) -> dict:
    return {n.replace("_", "-"): getattr(args, n) for n in names}


def _cmd_decompose(args):
    doc = load_json(args.operator)
    t = parse_operator(doc, args.mode)
    cert = is_order_isomorphism(t, tol=args.tol)
    inputs = {"operator": _input_echo(args.operator)}
    settings = _common_settings(args, "mode", "tol")
    if not cert.accept:
        result = {"accepted": False, "certificate": cert.to_json_dict()}
        return result, EXIT_REJECTED, inputs, settings
    d = decompose(t, tol=args.tol, cert=cert)
    result = {
        "accepted": True,
        "sigma": list(d.sigma),
        "sigma_labels": [[t.codomain.space.labels[y], t.domain.space.labels[x]]
                         for y, x in enumerate(d.sigma)],
        "weight": list(d.weight),
        "residual": d.residual,
        "arithmetic": "rational" if d.exact else "float",
    }
    return result, EXIT_OK, inputs, settings


def _cmd_classify(args):
    doc = load_json(args.operator)
    t = parse_operator(doc, args.mode)
    rep = classify(t, samples=args.samples, seed=args.seed, tol=args.tol)
    inputs = {"operator": _input_echo(args.operator)}
    settings = _common_settings(args, "mode", "tol", "samples", "seed")
    code = EXIT_OK if rep.kind != "rejected" else EXIT_REJECTED
    return rep.to_json_dict(), code, inputs, settings


def _cmd_adequacy(args):
    doc = load_json(args.family)
    fam = parse_family(doc, exact=False)
    rep = check_adequate(fam, tol=args.tol, samples=args.samples, seed=args.seed)
    inputs = {"family": _input_echo(args.family)}
    settings = _common_settings(args, "tol", "samples", "seed")
    code = EXIT_OK if rep.adequate else EXIT_REJECTED
    return rep.to_json_dict(), code, inputs, settings


def _point_dict(p) -> dict:
    return {"label": p.label, "origin": p.origin, "coords": list(p.coords),
            "compact_coords": list(p.compact_coords)}


def _cmd_compactify(args):
    doc = load_json(args.spec)
    x_space, y_space, seqs_x, seqs_y, op = parse_compactify_spec(doc)
    inputs = {"spec": _input_echo(args.spec)}
    settings = _common_settings(args, "tol", "conv_tol", "dedupe_tol")
    try:
        if op is None:
            result = {}
            for key, space, seqs in (("domain", x_space, seqs_x),
                                     ("codomain", y_space, seqs_y)):
                interior = embed(space.samples, space.generators, name=space.name)
                added = limit_points(seqs, space.generators, interior=interior,
                                     conv_tol=args.conv_tol, dedupe_tol=args.dedupe_tol,
                                     name=space.name)
                result[key] = {"interior": [_point_dict(p) for p in interior],
                               "added": [_point_dict(p) for p in added]}
                if y_space is x_space:
                    result = {"domain": result["domain"]}
                    break
            return result, EXIT_OK, inputs, settings
        bd = compactified_decompose(op, x_space, y_space, seqs_x, seqs_y,
                                    tol=args.tol, conv_tol=args.conv_tol,
                                    dedupe_tol=args.dedupe_tol)
        result = {
            "accepted": True,
            "interior": {
                "sigma": list(bd.interior.sigma),
                "sigma_labels": [list(p) for p in bd.interior_labels],
                "weight": list(bd.interior.weight),
                "residual": bd.residual_interior,
            },
            "added": {
                "domain": [_point_dict(p) for p in bd.added_domain],
                "codomain": [_point_dict(p) for p in bd.added_codomain],
                "matching": [list(p) for p in bd.added_matching],
                "weights": list(bd.added_weights),
                "residual": bd.residual_added,
            },
            "bounded_screen": bd.bounded_screen,
        }
        return result, EXIT_OK, inputs, settings
    except NonconvergentNetError as e:
        result = {"accepted": False, "reason": "nonconvergent-net",
                  "sequence": e.seq_name, "coordinate": e.generator,
                  "tail_variation": e.variation, "detail": str(e)}
        return result, EXIT_REJECTED, inputs, settings
    except AmbiguousBoundaryError as e:
        result = {"accepted": False, "reason": "ambiguous-boundary", "detail": str(e)}
        return result, EXIT_REJECTED, inputs, settings
    except NotOrderIsomorphismError as e:
        result = {"accepted": False, "reason": "not-order-isomorphism",
                  "certificate": e.certificate.to_json_dict()}
        return result, EXIT_REJECTED, inputs, settings


def _parse_interval(text: str) -> IntervalBox:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("interval must be 'lo,hi'")
    return IntervalBox(float(parts[0]), float(parts[1]))


def _cmd_example_local_form(args):
    expr = parse_sexpr(args.expr)
    box = _parse_interval(args.interval)
    settings = _common_settings(args, "depth_cap", "tol")
    inputs = {"expr": args.expr, "interval": [box.lo, box.hi]}
    try:
        lf = local_form(expr, box, depth_cap=args.depth_cap, tol=args.tol)
    except InconclusiveError as e:
        result = {"succeeded": False, "reason": "inconclusive", "detail": str(e)}
        return result, EXIT_REJECTED, inputs, settings
    result = {"succeeded": True,
              "interval": [lf.interval.lo, lf.interval.hi],
              "expr": to_sexpr(lf.expr),
              "residual": lf.residual}
    return result, EXIT_OK, inputs, settings


def _cmd_example_decay(args):
    expr = parse_sexpr(args.expr)
    passes = decay_check(expr, t_max=args.t_max, grid=args.grid)
    inputs = {"expr": args.expr}
    settings = {"t-max": args.t_max, "grid": args.grid}
    result = {"passes": passes}
    return result, EXIT_OK if passes else EXIT_REJECTED, inputs, settings


def _cmd_example_witness(args):
    expr = separation_witness(args.a, args.b)
    inputs = {"a": args.a, "b": args.b}
    result = {"expr": to_sexpr(expr),
              "value_at_a": float(eval_expr(expr, args.a)),
              "value_at_b": float(eval_expr(expr, args.b))}
    if args.at is not None:
        result["value_at"] = [args.at, float(eval_expr(expr, args.at))]
    return result, EXIT_OK, inputs, {}


def _fuzz_instance(rng, dim: int, mode: str, perturbation: float, tol: float) -> dict:
    exact = mode == "exact"
    t, sigma, weight = fuzz.random_monomial(rng, dim, exact=exact)
    if perturbation > 0.0:
        m = np.array(t.matrix, dtype=float, copy=True)
        extras = max(1, dim // 4)
        for _ in range(extras):
            y = int(rng.integers(dim))
            x = int(rng.integers(dim))
            if x == int(sigma[y]):
                x = (x + 1) % dim
            m[y, x] += float(rng.uniform(0.5, 1.0)) * perturbation
        t = type(t)(m, domain=t.domain, codomain=t.codomain, basis="point")
    cert = is_order_isomorphism(t, tol=tol)
    out = {"accepted": bool(cert.accept)}
    if not cert.accept:
        out["matched"] = False
        out["residual"] = 0.0
        return out
    d = decompose(t, tol=tol, cert=cert)
    if exact:
        matched = (tuple(int(s) for s in sigma) == d.sigma
                   and all(a == b for a, b in zip(weight, d.weight)))
    else:
        matched = (tuple(int(s) for s in sigma) == d.sigma
                   and bool(np.allclose(weight, d.weight_array(), rtol=1e-9, atol=1e-12)))
    out["matched"] = bool(matched)
    out["residual"] = float(d.residual)
    return out


def _cmd_fuzz(args):
    if args.dim < 1:
        raise ValueError("--dim must be at least 1")
    if args.count < 1:
        raise ValueError("--count must be at least 1")
    if args.perturbation < 0:
        raise ValueError("--perturbation must be nonnegative")
    if args.perturbation > 0 and args.mode == "exact":
        raise ValueError("perturbed fuzzing runs in float mode")
    if args.perturbation > 0 and args.dim < 2:
        raise ValueError("perturbed fuzzing needs dimension at least 2")
    rngs = fuzz.spawn_generators(args.seed, args.count)

    def run(i: int) -> dict:
        return _fuzz_instance(rngs[i], args.dim, args.mode, args.perturbation, args.tol)

    if args.count >= 16:
        with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
            results = list(pool.map(run, range(args.count)))
    else:
        results = [run(i) for i in range(args.count)]

    accepted = sum(1 for r in results if r["accepted"])
    matched = sum(1 for r in results if r["matched"])
    max_residual = max((r["residual"] for r in results), default=0.0)
    failures = []
    if args.perturbation > 0.0:
        # a perturbed instance must be rejected, or visibly non-monomial
        failures = [i for i, r in enumerate(results)
                    if r["accepted"] and r["residual"] <= args.tol]
    else:
        failures = [i for i, r in enumerate(results) if not r["matched"]]
    result = {
        "count": args.count,
        "dim": args.dim,
        "perturbation": args.perturbation,
        "accepted": accepted,
        "acceptance_rate": accepted / args.count,
        "match_rate": matched / args.count,
        "max_residual": max_residual,
        "failures": failures,
    }
    settings = _common_settings(args, "mode", "tol", "seed")
    code = EXIT_OK if not failures else EXIT_REJECTED
    return result, code, {}, settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oiso",
        description="Certify and decompose order isomorphisms on finite function-space models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, mode=True, seed=False, samples=False):
        p.add_argument("--tol", type=float, default=1e-9,
                       help="numerical tolerance (default 1e-9)")
        p.add_argument("--json-out", metavar="PATH",
                       help="also write the report to this path")
        if mode:
            p.add_argument("--mode", choices=("float", "exact"), default="float",
                           help="arithmetic mode; exact refuses float entries")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        if samples:
            p.add_argument("--samples", type=int, default=256,
                           help="probe count for sampled screens (default 256)")

    p = sub.add_parser("decompose",
                       help="certify an operator and recover its point map and weight")
    p.add_argument("operator", help="operator JSON file")
    add_common(p)
    p.set_defaults(func=_cmd_decompose, command_path="decompose")

    p = sub.add_parser("classify",
                       help="decide which classical isomorphism classes an operator lands in")
    p.add_argument("operator", help="operator JSON file")
    add_common(p, seed=True, samples=True)
    p.set_defaults(func=_cmd_classify, command_path="classify")

    p = sub.add_parser("adequacy",
                       help="check the four adequacy flags of a function family")
    p.add_argument("family", help="family JSON file")
    add_common(p, mode=False, seed=True, samples=True)
    p.set_defaults(func=_cmd_adequacy, command_path="adequacy")

    p = sub.add_parser("compactify",
                       help="explore boundary points of sampled spaces, optionally through an operator")
    p.add_argument("spec", help="compactification JSON file")
    add_common(p, mode=False)
    p.add_argument("--conv-tol", type=float, default=1e-3,
                   help="tail-variation convergence screen (default 1e-3)")
    p.add_argument("--dedupe-tol", type=float, default=1e-6,
                   help="added-point deduplication tolerance (default 1e-6)")
    p.set_defaults(func=_cmd_compactify, command_path="compactify")

    p = sub.add_parser("example", help="symbolic example-space utilities")
    esub = p.add_subparsers(dest="example_command", required=True)

    q = esub.add_parser("local-form",
                        help="certify a clamp-free analytic form on a subinterval")
    q.add_argument("--expr", required=True, help="s-expression, e.g. '(clamp (lin (0 2) ((const 1) t)))'")
    q.add_argument("--interval", required=True, help="'lo,hi' within [0,1]")
    q.add_argument("--depth-cap", type=int, default=40,
                   help="bisection depth cap (default 40)")
    q.add_argument("--tol", type=float, default=1e-10,
                   help="pointwise verification tolerance (default 1e-10)")
    q.add_argument("--json-out", metavar="PATH")
    q.set_defaults(func=_cmd_example_local_form, command_path="example.local-form")

    q = esub.add_parser("decay", help="grid check of quadratic decay for analytic expressions")
    q.add_argument("--expr", required=True, help="s-expression over (sinramp ...) nodes")
    q.add_argument("--t-max", type=float, default=1e6)
    q.add_argument("--grid", type=int, default=257)
    q.add_argument("--json-out", metavar="PATH")
    q.set_defaults(func=_cmd_example_decay, command_path="example.decay")

    q = esub.add_parser("witness", help="clamped ramp separating two points of [0,1]")
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--b", type=float, required=True)
    q.add_argument("--at", type=float, default=None, help="also evaluate at this point")
    q.add_argument("--json-out", metavar="PATH")
    q.set_defaults(func=_cmd_example_witness, command_path="example.witness")

    p = sub.add_parser("fuzz", help="seeded round-trip fuzzing of decompose")
    p.add_argument("--dim", type=int, required=True, help="point count per instance")
    p.add_argument("--count", type=int, required=True, help="instance count")
    p.add_argument("--perturbation", type=float, default=0.0,
                   help="off-pattern noise magnitude; should exceed --tol to be informative")
    add_common(p, seed=True)
    p.set_defaults(func=_cmd_fuzz, command_path="fuzz")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        result, code, inputs, settings = args.func(args)
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    report = build_report(args.command_path, result, inputs=inputs, settings=settings)
    text = canonical_json(report)
    sys.stdout.write(text)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"elapsed {time.perf_counter() - started:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
