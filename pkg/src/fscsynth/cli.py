"""Command-line front end.

Every subcommand emits a run report: command, input digests (64-bit
FNV-1a of canonicalized file bytes), elapsed time, and a results
payload; ``--json`` switches the report to a structured form.  Exit
codes: 0 success, 2 validation failure, 1 internal error.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .chain import (
    absorption_probabilities,
    check_proposition1,
    compose_gmc,
    phi_feasible_sets,
    recurrent_classes,
    satisfaction_probability,
    validate_chain,
)
from .dot import export_dot
from .dra import builtin_paper_dra, parse_dra
from .fsc import fsc_to_doc, parse_fsc, softmax_policy, structure_to_doc, uniform_policy
from .ltl import parse_ltl, pretty_print
from .posg import GridSpec, make_grid_posg, parse_posg, posg_to_doc, validate_posg
from .product import build_product, parse_product, product_to_doc, prune_unreachable
from .simulate import estimate_satisfaction
from .synthesis import (
    CandidateSet,
    generate_candidates,
    maxmin_select,
    optimize_parameters,
)


class ValidationFailure(Exception):
    pass


def fnv1a64(data: bytes) -> str:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def _digest_file(path):
    canonical = json.dumps(_load_json(path), sort_keys=True).encode()
    return fnv1a64(canonical)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationFailure(f"missing file: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"{path} is not valid JSON: {exc}")


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load_fsc(path, obs, actions):
    return parse_fsc(_load_json(path), obs, actions)


def _load_pipeline(args):
    product = parse_product(_load_json(args.product))
    c_def = _load_fsc(args.fsc_def, product.obs_def, product.u_def)
    c_adv = _load_fsc(args.fsc_adv, product.obs_adv, product.u_adv)
    return product, c_def, c_adv


# --- subcommand payloads ----------------------------------------------------


def cmd_grid(args):
    spec = GridSpec(
        m=args.m,
        n=args.n,
        unsafe=args.unsafe,
        goal=args.goal,
        p_obs_def=args.p_obs_def,
        p_obs_adv=args.p_obs_adv,
        p_move=args.p_move,
        p_move_attacked=args.p_move_attacked,
        initial=args.initial,
    )
    g = make_grid_posg(spec)
    _write_json(args.output, posg_to_doc(g))
    return {"states": g.n_states, "output": args.output}


def cmd_validate(args):
    g = parse_posg(_load_json(args.model))
    report = validate_posg(g)
    if report:
        raise ValidationFailure("; ".join(report))
    return {"states": g.n_states, "violations": []}


def cmd_product(args):
    g = parse_posg(_load_json(args.model))
    if args.dra == "builtin":
        automaton = builtin_paper_dra()
    else:
        automaton = parse_dra(_load_json(args.dra))
    payload = {}
    if args.ltl:
        formula = parse_ltl(args.ltl, g.ap)
        payload["ltl"] = pretty_print(formula)
    p = build_product(g, automaton)
    if args.prune_unreachable:
        p = prune_unreachable(p)
    _write_json(args.output, product_to_doc(p))
    payload.update({"product_states": p.n_states, "output": args.output})
    return payload


def cmd_compose(args):
    product, c_def, c_adv = _load_pipeline(args)
    chain = compose_gmc(product, c_def, c_adv)
    report = validate_chain(chain)
    if report:
        raise ValidationFailure("; ".join(report))
    doc = {
        "states": chain.n_states,
        "m0": chain.m0,
        "n_product": chain.n_product,
        "n_gdef": chain.n_gdef,
        "n_gadv": chain.n_gadv,
        "pairs": [{"L": sorted(L), "K": sorted(K)} for L, K in chain.pairs],
        "rows": [
            {
                "m": m,
                "to": [
                    {"m2": int(j), "p": float(chain.trans[m, j])}
                    for j in np.nonzero(chain.trans[m])[0]
                ],
            }
            for m in range(chain.n_states)
        ],
    }
    if args.output:
        _write_json(args.output, doc)
    return {"states": chain.n_states, "m0": chain.m0, "output": args.output}


def cmd_analyze(args):
    product, c_def, c_adv = _load_pipeline(args)
    chain = compose_gmc(product, c_def, c_adv)
    report = validate_chain(chain)
    if report:
        raise ValidationFailure("; ".join(report))
    analysis = recurrent_classes(chain, edge_eps=args.edge_eps)
    phi_feasible_sets(chain, analysis)
    probs = absorption_probabilities(chain, analysis)
    ok, witness = check_proposition1(chain, analysis)
    return {
        "states": chain.n_states,
        "classes": [
            {
                "states": [int(m) for m in cls],
                "feasible": bool(analysis.feasible[k]),
                "witness_pair": (
                    int(analysis.witness[k]) if analysis.witness[k] is not None else None
                ),
                "absorption": float(probs[k]),
            }
            for k, cls in enumerate(analysis.classes)
        ],
        "transient": len(analysis.transient),
        "satisfaction": float(
            sum(p for k, p in enumerate(probs) if analysis.feasible[k])
        ),
        "proposition1": ok,
        "proposition1_witness": list(witness) if witness else None,
    }


def cmd_synthesize(args):
    product = parse_product(_load_json(args.product))
    candidates = generate_candidates(
        product, args.g_def, args.g_adv, prune_narrow=args.prune_narrow
    )
    doc = {
        "product": args.product,
        "g_def": args.g_def,
        "g_adv": args.g_adv,
        "exhaustive_adv": args.exhaustive_adv,
        "pairs": [
            {"def": structure_to_doc(d), "adv": structure_to_doc(a)}
            for d, a in candidates.pairs
        ],
    }
    _write_json(args.output, doc)
    return {
        "candidates": len(candidates.pairs),
        "iterations": len(candidates.diagnostics),
        "output": args.output,
    }


def _load_candidates(args):
    doc = _load_json(args.candidates)
    product_path = getattr(args, "product", None) or doc["product"]
    product = parse_product(_load_json(product_path))
    pairs = [
        (
            parse_fsc(e["def"], product.obs_def, product.u_def).structure,
            parse_fsc(e["adv"], product.obs_adv, product.u_adv).structure,
        )
        for e in doc["pairs"]
    ]
    return product, CandidateSet(pairs=pairs), bool(doc.get("exhaustive_adv"))


def cmd_maxmin(args):
    product, candidates, exhaustive = _load_candidates(args)
    if not candidates.pairs:
        raise ValidationFailure("candidate set is empty")
    best, value, response = maxmin_select(
        product, candidates, exhaustive_adv=exhaustive
    )
    return {
        "value": value,
        "defender": structure_to_doc(best),
        "adversary_best_response": structure_to_doc(response),
    }


def cmd_optimize(args):
    product, c_def, c_adv = _load_pipeline(args)
    phi, trace = optimize_parameters(
        product,
        c_def.structure,
        c_adv.structure,
        steps=args.steps,
        step_size=args.step_size,
        fd_eps=args.fd_eps,
        seed=args.seed,
    )
    payload = {"trace": [float(v) for v in trace], "final_value": float(trace[-1])}
    if args.output:
        _write_json(
            args.output, fsc_to_doc(softmax_policy(c_def.structure, phi))
        )
        payload["output"] = args.output
    return payload


def cmd_simulate(args):
    product, c_def, c_adv = _load_pipeline(args)
    estimate, (lo, hi), counts = estimate_satisfaction(
        product, c_def, c_adv, args.runs, args.seed
    )
    payload = {
        "runs": args.runs,
        "seed": args.seed,
        "estimate": estimate,
        "wilson95": [lo, hi],
        "class_counts": [int(c) for c in counts],
    }
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("class,count\n")
            for k, c in enumerate(counts):
                fh.write(f"{k},{int(c)}\n")
        payload["csv"] = args.csv
    return payload


def cmd_export_dot(args):
    product, c_def, c_adv = _load_pipeline(args)
    chain = compose_gmc(product, c_def, c_adv)
    analysis = recurrent_classes(chain)
    phi_feasible_sets(chain, analysis)
    text = export_dot(chain, analysis)
    with open(args.out, "w") as fh:
        fh.write(text)
    return {"out": args.out, "states": chain.n_states}


# --- wiring -----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fscsynth",
        description="Controller synthesis against an adversary in a "
        "partially observable stochastic game",
    )
    parser.add_argument("--json", action="store_true", help="structured report")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="generate the grid benchmark model")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--unsafe", type=int, required=True)
    g.add_argument("--goal", type=int, required=True)
    g.add_argument("--p-obs-def", type=float, default=0.8)
    g.add_argument("--p-obs-adv", type=float, default=0.6)
    g.add_argument("--p-move", type=float, default=0.8)
    g.add_argument("--p-move-attacked", type=float, default=0.6)
    g.add_argument("--initial", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_grid, inputs=[])

    v = sub.add_parser("validate", help="check a game model file")
    v.add_argument("--model", required=True)
    v.set_defaults(func=cmd_validate, inputs=["model"])

    p = sub.add_parser("product", help="build the product with an automaton")
    p.add_argument("--model", required=True)
    p.add_argument("--dra", required=True, help="automaton file, or 'builtin'")
    p.add_argument("--ltl", help="formula to record with the run")
    p.add_argument("--prune-unreachable", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_product, inputs=["model"])

    for name, func in (("compose", cmd_compose), ("analyze", cmd_analyze)):
        c = sub.add_parser(name)
        c.add_argument("--product", required=True)
        c.add_argument("--fsc-def", dest="fsc_def", required=True)
        c.add_argument("--fsc-adv", dest="fsc_adv", required=True)
        if name == "analyze":
            c.add_argument("--edge-eps", type=float, default=0.0)
        else:
            c.add_argument("-o", "--output")
        c.set_defaults(func=func, inputs=["product", "fsc_def", "fsc_adv"])

    s = sub.add_parser("synthesize", help="generate candidate structures")
    s.add_argument("--product", required=True)
    s.add_argument("--g-def", dest="g_def", type=int, required=True)
    s.add_argument("--g-adv", dest="g_adv", type=int, required=True)
    s.add_argument("--prune-narrow", action="store_true")
    s.add_argument("--exhaustive-adv", dest="exhaustive_adv", action="store_true")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_synthesize, inputs=["product"])

    m = sub.add_parser("maxmin", help="pick the best worst-case structure")
    m.add_argument("--candidates", required=True)
    m.add_argument("--product")
    m.set_defaults(func=cmd_maxmin, inputs=["candidates"])

    o = sub.add_parser("optimize", help="finite-difference parameter search")
    o.add_argument("--product", required=True)
    o.add_argument("--fsc-def", dest="fsc_def", required=True)
    o.add_argument("--fsc-adv", dest="fsc_adv", required=True)
    o.add_argument("--steps", type=int, required=True)
    o.add_argument("--step-size", dest="step_size", type=float, default=0.5)
    o.add_argument("--fd-eps", dest="fd_eps", type=float, default=1e-4)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_optimize, inputs=["product", "fsc_def", "fsc_adv"])

    si = sub.add_parser("simulate", help="Monte Carlo satisfaction estimate")
    si.add_argument("--product", required=True)
    si.add_argument("--fsc-def", dest="fsc_def", required=True)
    si.add_argument("--fsc-adv", dest="fsc_adv", required=True)
    si.add_argument("--runs", type=int, required=True)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--csv")
    si.set_defaults(func=cmd_simulate, inputs=["product", "fsc_def", "fsc_adv"])

    d = sub.add_parser("export-dot", help="DOT digraph of the composed chain")
    d.add_argument("--product", required=True)
    d.add_argument("--fsc-def", dest="fsc_def", required=True)
    d.add_argument("--fsc-adv", dest="fsc_adv", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_export_dot, inputs=["product", "fsc_def", "fsc_adv"])

    return parser


def _render_text(report, out):
    print(f"fscsynth {report['command']} (v{report['version']})", file=out)
    for path, digest in report["inputs"].items():
        print(f"  input {path}: fnv1a64 {digest}", file=out)
    for key, val in report["results"].items():
        print(f"  {key}: {val}", file=out)
    print(f"  elapsed: {report['elapsed_s']:.3f}s", file=out)


def run(argv, out=sys.stdout, err=sys.stderr):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.monotonic()
    report = {
        "command": args.command,
        "version": __version__,
        "inputs": {},
        "results": {},
    }
    try:
        for attr in args.inputs:
            path = getattr(args, attr, None)
            if path:
                report["inputs"][path] = _digest_file(path)
        report["results"] = args.func(args)
        code = 0
    except (ValidationFailure, ValueError) as exc:
        report["error"] = str(exc)
        code = 2
    except Exception as exc:  # internal errors
        report["error"] = f"internal error: {exc}"
        code = 1
    report["elapsed_s"] = time.monotonic() - started
    if args.json:
        json.dump(report, out, indent=1, sort_keys=True)
        out.write("\n")
    elif code == 0:
        _render_text(report, out)
    else:
        print(f"error: {report['error']}", file=err)
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
