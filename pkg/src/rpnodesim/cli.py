"""Batch command-line interface: graph generation, embedding, theory
evaluation, and the Monte-Carlo / flip / NDCG / uniform-guarantee studies.

Exit codes: 0 success, 1 usage error, 2 data or numeric error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import (BoundsError, ConfigError, DegenerateError, DomainError,
                     GraphFormatError, NumericError, ResourceLimitError,
                     SamplingError)
from .graph import generate, load_matrix_market, save_matrix_market
from .projection import (ProjectionConfig, embed, export_embedding_csv,
                         normalize_rows, save_embedding)
from .similarity import SimilarityKind
from . import experiments, theory

_DATA_ERRORS = (GraphFormatError, BoundsError, ResourceLimitError, NumericError,
                ConfigError, DomainError, DegenerateError, SamplingError,
                OSError)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("RPNODESIM_THREADS")
    return max(1, int(env)) if env else 1


def _out_stream(path):
    return open(path, "wt", encoding="ascii", newline="\n") if path else sys.stdout


def _emit_json(args, payload: dict) -> None:
    payload.setdefault("seed", args.seed)
    line = json.dumps(payload, sort_keys=True)
    out = _out_stream(args.out)
    try:
        out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _emit_report(args, report) -> None:
    out = _out_stream(args.out)
    try:
        report.to_csv(out)
    finally:
        if out is not sys.stdout:
            out.close()


# -- subcommands ---------------------------------------------------------------


def _cmd_gen(args) -> int:
    kinds = {
        "erdos_renyi": lambda: generate("erdos_renyi", n=_req(args, "n"), p=_req(args, "p"),
                                        seed=args.seed),
        "powerlaw": lambda: generate("powerlaw", n=_req(args, "n"),
                                     exponent=_req(args, "exponent"), seed=args.seed,
                                     min_degree=args.min_degree),
        "powerlaw_hubs": lambda: generate("powerlaw_hubs", n=_req(args, "n"),
                                          exponent=_req(args, "exponent"), seed=args.seed),
        "flip_gadget": lambda: generate("flip_gadget", d_u=_req(args, "du"),
                                        d_v=_req(args, "dv")),
    }
    g = kinds[args.kind]()
    save_matrix_market(g, args.out)
    print(f"wrote {args.out}: n={g.n} entries={g.nnz} seed={args.seed}")
    return 0


def _req(args, name):
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for kind {args.kind}")
    return value


def _cmd_embed(args) -> int:
    g = load_matrix_market(args.graph, symmetrize=args.symmetrize)
    cfg = ProjectionConfig(family=args.family, coeffs=tuple(args.coeffs), q=args.q,
                           seed=args.seed)
    x = embed(g, cfg, threads=_threads(args))
    if args.normalize:
        x = normalize_rows(x)
    if args.csv:
        export_embedding_csv(x, args.out)
    else:
        save_embedding(x, args.out)
    print(f"wrote {args.out}: {x.n}x{x.q} family={args.family} normalized={x.normalized} seed={args.seed}")
    return 0


_THEORY_OPS = ("student_t_sf", "normal_sf", "dot_t_asymptotic", "dot_a_asymptotic",
               "cosine_asymptotic", "jl_min_q_dot", "jl_min_q_cosine",
               "flip_probability", "sign_change_probability", "dot_tail_bound",
               "cosine_concentration_bound", "sigma_interval")


def _cmd_theory(args) -> int:
    op = args.op
    inputs: dict
    if op == "student_t_sf":
        value = theory.student_t_sf(_req(args, "x"), _req(args, "q"))
        inputs = {"x": args.x, "q": args.q}
    elif op == "normal_sf":
        value = theory.normal_sf(_req(args, "x"))
        inputs = {"x": args.x}
    elif op == "dot_t_asymptotic":
        p = theory.dot_t_asymptotic(_req(args, "n_uu"), _req(args, "n_vv"),
                                    _req(args, "n_uv"), _req(args, "d_u"),
                                    _req(args, "d_v"), _req(args, "q"))
        value = {"mean": p.mean, "variance": p.variance}
        inputs = {"n_uu": args.n_uu, "n_vv": args.n_vv, "n_uv": args.n_uv,
                  "d_u": args.d_u, "d_v": args.d_v, "q": args.q}
    elif op == "dot_a_asymptotic":
        p = theory.dot_a_asymptotic(_req(args, "n_uu"), _req(args, "n_vv"),
                                    _req(args, "n_uv"), _req(args, "q"))
        value = {"mean": p.mean, "variance": p.variance}
        inputs = {"n_uu": args.n_uu, "n_vv": args.n_vv, "n_uv": args.n_uv, "q": args.q}
    elif op == "cosine_asymptotic":
        p = theory.cosine_asymptotic(_req(args, "rho"), _req(args, "q"))
        value = {"mean": p.mean, "variance": p.variance}
        inputs = {"rho": args.rho, "q": args.q}
    elif op == "jl_min_q_dot":
        value = theory.jl_min_q_dot(_req(args, "epsilon"), _req(args, "delta"),
                                    _req(args, "k"))
        inputs = {"epsilon": args.epsilon, "delta": args.delta, "k": args.k}
    elif op == "jl_min_q_cosine":
        value = theory.jl_min_q_cosine(_req(args, "epsilon"), _req(args, "delta"),
                                       _req(args, "k"))
        inputs = {"epsilon": args.epsilon, "delta": args.delta, "k": args.k}
    elif op == "flip_probability":
        r = theory.flip_probability(_req(args, "cos"), _req(args, "q"))
        value = {"probability": r.probability, "saturated": r.saturated}
        inputs = {"cos": args.cos, "q": args.q}
    elif op == "sign_change_probability":
        r = theory.sign_change_probability(_req(args, "rho"), _req(args, "q"))
        value = {"probability": r.probability, "saturated": r.saturated}
        inputs = {"rho": args.rho, "q": args.q}
    elif op == "dot_tail_bound":
        b = theory.dot_tail_bound(args.epsilon, _req(args, "q"), side=args.side,
                                  source=args.source, rho=args.rho, t=args.t)
        value = {"bound": b.bound, "vacuous": b.vacuous, "side": b.side,
                 "source": b.source}
        inputs = {"epsilon": args.epsilon, "t": args.t, "rho": args.rho, "q": args.q}
    elif op == "cosine_concentration_bound":
        b = theory.cosine_concentration_bound(_req(args, "epsilon"), _req(args, "q"))
        value = {"bound": b.bound, "vacuous": b.vacuous}
        inputs = {"epsilon": args.epsilon, "q": args.q}
    else:  # sigma_interval
        p = theory.NormalParams(_req(args, "mean"), _req(args, "variance"))
        lo, hi = theory.sigma_interval(p, args.k_sigma)
        value = {"lo": lo, "hi": hi}
        inputs = {"mean": args.mean, "variance": args.variance, "k_sigma": args.k_sigma}
    _emit_json(args, {"op": op, "inputs": inputs, "value": value})
    return 0


def _cmd_mc(args) -> int:
    g = load_matrix_market(args.graph, symmetrize=args.symmetrize)
    kind = SimilarityKind.parse(args.kind)
    res = experiments.monte_carlo_similarity(g, args.u, args.v, kind, args.q,
                                             args.trials, args.seed,
                                             threads=_threads(args))
    report = experiments.ExperimentReport(
        experiment="mc",
        columns=["u", "v", "kind", "sample_mean", "sample_variance", "ks",
                 "theory_mean", "theory_variance", "trials"],
        seed=args.seed,
        metadata={"q": args.q, "graph": args.graph},
    )
    report.add(args.u, args.v, kind.value, res.mean, res.variance, res.ks,
               res.theory.mean, res.theory.variance, res.trials)
    _emit_report(args, report)
    return 0


def _cmd_flip(args) -> int:
    g = load_matrix_market(args.graph, symmetrize=args.symmetrize)
    kind = SimilarityKind.parse(args.kind)
    res = experiments.flip_rate(g, args.w, args.u, args.v, kind, args.q, args.trials,
                                args.seed, threads=_threads(args))
    report = experiments.ExperimentReport(
        experiment="flip",
        columns=["w", "u", "v", "kind", "empirical", "predicted", "flips",
                 "trials", "swapped", "cos_w_diff", "saturated"],
        seed=args.seed,
        metadata={"q": args.q, "graph": args.graph},
    )
    report.add(args.w, args.u, args.v, kind.value, res.empirical, res.predicted,
               res.flips, res.trials, res.swapped, res.cos_w_diff, res.saturated)
    _emit_report(args, report)
    return 0


def _cmd_ndcg(args) -> int:
    g = load_matrix_market(args.graph, symmetrize=args.symmetrize)
    kinds = tuple(SimilarityKind.parse(tok) for tok in args.kinds.split(","))
    cfg = experiments.NdcgConfig(k=args.K, q=args.q, seed=args.seed, m=args.m,
                                 kinds=kinds)
    report = experiments.ndcg_experiment(g, cfg)
    _emit_report(args, report)
    return 0


def _cmd_jl(args) -> int:
    g = load_matrix_market(args.graph, symmetrize=args.symmetrize)
    report = experiments.jl_violation_study(g, args.epsilon, args.delta, args.bound,
                                            args.draws, args.seed)
    _emit_report(args, report)
    return 0


# -- parser ----------------------------------------------------------------------


def _add_common(p, out_default=None, out_required=False):
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker thread cap (default: RPNODESIM_THREADS or 1)")
    p.add_argument("--out", default=out_default, required=out_required,
                   help="output path" + ("" if out_required else " (default stdout)"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpnodesim",
                     description="Random-projection node similarity toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="generate a synthetic graph")
    p.add_argument("--kind", required=True,
                   choices=["erdos_renyi", "powerlaw", "powerlaw_hubs", "flip_gadget"])
    p.add_argument("--n", type=int, help="node count")
    p.add_argument("--p", type=float, help="edge probability (erdos_renyi)")
    p.add_argument("--exponent", type=float, help="power-law exponent")
    p.add_argument("--min-degree", dest="min_degree", type=int, default=1,
                   help="minimum degree for the powerlaw kind")
    p.add_argument("--du", type=int, help="hub degree (flip_gadget)")
    p.add_argument("--dv", type=int, help="low node degree (flip_gadget)")
    _add_common(p, out_required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("embed", help="embed a graph and save the matrix")
    p.add_argument("--graph", required=True)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--family", choices=["A", "T"], default="A")
    p.add_argument("--coeffs", type=lambda s: [float(x) for x in s.split(",")],
                   default=[1.0], help="polynomial coefficients a1,a2,...")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--csv", action="store_true", help="write CSV instead of binary")
    _add_common(p, out_required=True)
    p.set_defaults(fn=_cmd_embed)

    p = sub.add_parser("theory", help="evaluate a closed-form quantity as JSON")
    p.add_argument("--op", required=True, choices=_THEORY_OPS)
    p.add_argument("--x", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--cos", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--side", choices=list(theory.SIDES), default="two_sided")
    p.add_argument("--source", choices=list(theory.DOT_BOUND_SOURCES),
                   default="this_paper_dot")
    p.add_argument("--n-uu", dest="n_uu", type=int)
    p.add_argument("--n-vv", dest="n_vv", type=int)
    p.add_argument("--n-uv", dest="n_uv", type=int)
    p.add_argument("--d-u", dest="d_u", type=int)
    p.add_argument("--d-v", dest="d_v", type=int)
    p.add_argument("--mean", type=float)
    p.add_argument("--variance", type=float)
    p.add_argument("--k-sigma", dest="k_sigma", type=float, default=3.0)
    _add_common(p)
    p.set_defaults(fn=_cmd_theory)

    p = sub.add_parser("mc", help="Monte-Carlo check of a similarity distribution")
    p.add_argument("--graph", required=True)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(fn=_cmd_mc)

    p = sub.add_parser("flip", help="empirical vs predicted order-flip rate")
    p.add_argument("--graph", required=True)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--w", type=int, default=0)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--v", type=int, default=1)
    p.add_argument("--kind", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=20_000)
    _add_common(p)
    p.set_defaults(fn=_cmd_flip)

    p = sub.add_parser("ndcg", help="stratified ranking quality experiment")
    p.add_argument("--graph", required=True)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--kinds", default="dotA,dotT,cosine")
    _add_common(p)
    p.set_defaults(fn=_cmd_ndcg)

    p = sub.add_parser("jl", help="uniform-guarantee violation study")
    p.add_argument("--graph", required=True)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--bound", choices=["dot", "cosine"], required=True)
    p.add_argument("--draws", type=int, default=100)
    _add_common(p)
    p.set_defaults(fn=_cmd_jl)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except _DATA_ERRORS as exc:
        print(f"rpnodesim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
