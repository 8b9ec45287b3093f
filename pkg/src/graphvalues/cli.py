"""Command-line front end.

stdout carries only the JSON or CSV artifact; diagnostics go to stderr.
Exit codes: 0 success, 2 bad input, 3 solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings

import numpy as np

from .errors import GraphValuesError, NoConvergence
from .explain import gstarx_explain, top_k
from .graph import Graph
from .mc import McConfig, compute_hn_mc
from .metrics import compute_metrics
from .oracle import linear_weights
from .payoff import ToyMPModel, baseline_expectation, gstarx_char_fn, load_payoff_table
from .values import ValueVector, compute_hn, cshapley_vector, myerson, shapley_exact

log = logging.getLogger("graphvalues")

METHODS = ("shapley", "hn", "hn-mc", "myerson", "cshapley")
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3


class InputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_graph(path) -> Graph:
    return Graph.from_dict(_read_json(path))


def load_model(path) -> ToyMPModel:
    return ToyMPModel.from_dict(_read_json(path))


def load_baseline(path, model) -> np.ndarray:
    """Baseline from ``{"f0": [...]}``, ``{"graphs": [...]}`` or a bare list of graphs."""
    data = _read_json(path)
    if isinstance(data, dict) and "f0" in data:
        return np.asarray(data["f0"], dtype=float)
    graphs = data["graphs"] if isinstance(data, dict) else data
    return baseline_expectation(model, [Graph.from_dict(d) for d in graphs])


def build_game(args, g: Graph):
    """Game from ``--payoff`` or ``--model``; the second element is the model, if any."""
    if args.payoff:
        v = load_payoff_table(_read_json(args.payoff))
        if v.n != g.n:
            raise InputError(f"payoff table has {v.n} players, graph has {g.n} nodes")
        return v, None, None
    model = load_model(args.model)
    f0 = load_baseline(args.f0, model) if args.f0 else None
    if f0 is None:
        log.warning("no --f0 dataset given; baseline expectation defaults to zero")
    v, _ = gstarx_char_fn(model, g, f0, args.target)
    return v, model, f0


def run_method(method: str, g: Graph, v, args) -> ValueVector:
    if method == "shapley":
        return shapley_exact(v, threads=args.threads)
    if method == "hn":
        return compute_hn(g, v, args.tau, args.tol, args.max_squarings, threads=args.threads)
    if method == "hn-mc":
        cfg = McConfig(m=args.m, samples=args.samples or g.n, seed=args.seed, tau=args.tau)
        return compute_hn_mc(g, v, cfg)
    if method == "myerson":
        return myerson(g, v, threads=args.threads)
    if method == "cshapley":
        return cshapley_vector(g, v, threads=args.threads)
    raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def cmd_score(args) -> int:
    g = load_graph(args.graph)
    v, _, _ = build_game(args, g)
    res = run_method(args.method, g, v, args)
    print(res.to_json(args.digits))
    return 0


def cmd_explain(args) -> int:
    g = load_graph(args.graph)
    model = load_model(args.model)
    f0 = load_baseline(args.f0, model) if args.f0 else None
    if f0 is None:
        log.warning("no --f0 dataset given; baseline expectation defaults to zero")
    report = gstarx_explain(g, model, f0, tau=args.tau, m=args.m, samples=args.samples,
                            gamma=args.gamma, seed=args.seed, target=args.target,
                            with_metrics=args.metrics, threads=args.threads)
    print(report.to_json(args.digits))
    return 0


def cmd_compare(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise InputError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    g = load_graph(args.graph)
    v, model, f0 = build_game(args, g)
    results = [run_method(m, g, v, args) for m in methods]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", *methods])
    fmt = (lambda x: repr(float(x))) if args.digits is None else (lambda x: repr(round(float(x), args.digits)))
    for i in range(g.n):
        w.writerow([i, *(fmt(r.phi[i]) for r in results)])
    if args.gamma is not None:
        if model is None:
            raise InputError("--gamma metrics need --model")
        c_star = int(np.argmax(model.forward(g, node=args.target)))
        blocks = []
        for r in results:
            sel, _ = top_k(r, args.gamma)
            mask = sum(1 << i for i in sel)
            blocks.append(compute_metrics(model, g, mask, c_star, r, f0, args.target).to_dict())
        for key in ("fidelity", "inv_fidelity", "sparsity", "h_fidelity", "entropy_sparsity"):
            w.writerow([f"metric:{key}", *(fmt(b[key]) if b[key] is not None else "" for b in blocks)])
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_oracle(args) -> int:
    solvers = {
        "shapley": lambda g, v: shapley_exact(v),
        "hn": lambda g, v: compute_hn(g, v, args.tau),
        "myerson": myerson,
    }
    g = load_graph(args.graph)
    g.check_node(args.node)
    weights = linear_weights(g, args.node, solvers[args.solver])
    order = sorted(weights, key=lambda s: (len(s), sorted(s)))
    out = {json.dumps(sorted(s)): weights[s] for s in order}
    print(json.dumps({"node": args.node, "solver": args.solver, "weights": out}, indent=2))
    return 0


def _common(p: argparse.ArgumentParser):
    p.add_argument("--graph", required=True, help="graph JSON")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--m", type=int, default=10, help="max sampled subgraph size")
    p.add_argument("--samples", type=int, default=None, help="Monte-Carlo samples (default n)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f0", help="dataset JSON for the baseline expectation")
    p.add_argument("--target", type=int, default=None, help="read out this node instead of pooling")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-squarings", type=int, default=60)
    p.add_argument("--digits", type=int, default=None, help="round floats in the output")


def _game_source(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--payoff", help="payoff-table JSON")
    src.add_argument("--model", help="toy model JSON")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphvalues",
                                     description="Structure-aware cooperative-game attributions for graph nodes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="value vector for one method")
    _common(p)
    _game_source(p)
    p.add_argument("--method", choices=METHODS, default="hn")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("explain", help="run the explanation pipeline")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--metrics", action="store_true")
    p.set_defaults(func=cmd_explain, digits=10)

    p = sub.add_parser("compare", help="side-by-side CSV of several methods")
    _common(p)
    _game_source(p)
    p.add_argument("--methods", default="shapley,hn,myerson")
    p.add_argument("--gamma", type=float, default=None, help="also emit metric rows (needs --model)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="dump brute-force weights on marginal contributions")
    p.add_argument("--graph", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--solver", choices=("shapley", "hn", "myerson"), default="hn")
    p.add_argument("--tau", type=float, default=0.01)
    p.set_defaults(func=cmd_oracle)
    return parser


def _log_to_stderr(verbose: bool) -> None:
    # own handler rather than basicConfig, which is a no-op once the root logger has handlers
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if verbose else logging.WARNING)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    _log_to_stderr(args.verbose)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            return args.func(args)
        except NoConvergence as exc:
            log.error("%s", exc)
            return EXIT_NO_CONVERGENCE
        except (InputError, GraphValuesError, ValueError, KeyError, TypeError) as exc:
            log.error("%s", exc)
            return EXIT_INPUT
        finally:
            for w in caught:
                log.warning("%s: %s", w.category.__name__, w.message)


if __name__ == "__main__":
    sys.exit(main())
