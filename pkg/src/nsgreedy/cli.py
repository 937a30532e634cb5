"""Command-line experiment runner.

Every command writes one CSV table, to ``--out/<command>.csv`` or to stdout,
and exits 0 when its checks pass, 1 when one fails and 2 on usage or input
errors.  All randomness flows from ``--seed``; ``--jobs`` only changes how
work is spread over processes, never the bytes written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import ggm
from .bounds import bound_curvature, bound_weak, lemma1_constants
from .errors import NSGreedyError
from .greedy import brute_force_opt, greedy_maximize, lemma1_violations
from .instances import random_instance
from .matroids import (GraphicMatroid, PartitionMatroid, UniformMatroid, matroid_from_dict,
                       verify_axioms)
from .seeding import derive_seed
from .sets import certify
from .visibility import (METHODS, BroadcastScenario, analytic_report, constant_scenario,
                         edge_set_hash, random_scenario, select_baseline,
                         toy_scenario, visibility_objective, visibility_per_edge)
from .visibility.simulate import realization_visibility

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _pmap(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _load_config(path):
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"cannot read config file: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from None


# -- axioms -------------------------------------------------------------------

def default_matroids():
    """Named suite of textbook matroids, each on at most 7 elements."""
    suite = [(f"uniform_7_{k}", UniformMatroid(7, k)) for k in (0, 1, 3, 7)]
    suite += [
        ("partition_7", PartitionMatroid([0, 0, 0, 1, 1, 2, 2], [2, 1, 1])),
        ("partition_5", PartitionMatroid([0, 0, 1, 1, 1], [1, 2])),
        ("partition_zero_cap", PartitionMatroid([0, 1, 1, 2], [0, 1, 2])),
        ("graphic_triangle", GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)])),
        ("graphic_k4", GraphicMatroid.complete(4)),
        ("graphic_4cycle_chord", GraphicMatroid(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])),
        ("graphic_parallel", GraphicMatroid(3, [(0, 1), (0, 1), (1, 2), (2, 0), (1, 2)])),
        ("empty", UniformMatroid(0, 0)),
    ]
    return suite


def _axiom_row(item):
    name, m = item
    rep = verify_axioms(m)
    cx = ""
    if rep.heredity_counterexample:
        y, x = rep.heredity_counterexample
        cx = f"heredity: {list(y)} independent but {list(x)} is not"
    elif rep.exchange_counterexample:
        x, y = rep.exchange_counterexample
        cx = f"exchange: no z in {list(y)} extends {list(x)}"
    return [name, m.kind, m.n, rep.non_emptiness, rep.heredity, rep.exchange, rep.ok, cx]


def cmd_axioms(args, config):
    if config is None:
        suite = default_matroids()
    else:
        specs = config.get("matroids") if isinstance(config, dict) else None
        if not specs:
            raise UsageError("config has no 'matroids' entries")
        suite = []
        for k, spec in enumerate(specs):
            name = spec.get("name", f"matroid_{k}")
            suite.append((name, matroid_from_dict(spec)))
    rows = _pmap(_axiom_row, suite, args.jobs)
    header = ["name", "kind", "n", "non_emptiness", "heredity", "exchange", "ok", "counterexample"]
    return _csv(header, rows), all(r[6] for r in rows)


# -- certify --------------------------------------------------------------------

def _certify_row(task):
    master, idx, n_min, n_max = task
    ins = random_instance(master, idx, n_min, n_max)
    f, m = ins.f, ins.matroid
    cert = certify(f)
    _, opt = brute_force_opt(f, m)
    trace = greedy_maximize(f, m)
    r = m.rank()
    g = trace.final_value
    slack = 1e-12 * max(1.0, abs(opt))
    bc = bound_curvature(cert.alpha) if cert.alpha < 1 else 0.0
    curv_ok = g >= bc * opt - slack
    if r >= 3 and cert.gamma > 0:
        bw = bound_weak(cert.gamma, r)
        weak_ok = g >= bw * opt - slack
        a_star, theta = lemma1_constants(cert.gamma, r)
        lemma_ok = not lemma1_violations(trace, opt, a_star, theta)
    else:
        bw, weak_ok, lemma_ok = "", True, True
    ratio_ok = cert.gamma >= 1 - cert.alpha - 1e-9
    return [idx, ins.kind, ins.n, r, cert.gamma, cert.alpha, opt, g, bw, bc,
            weak_ok, curv_ok, lemma_ok and ratio_ok and cert.monotone]


def cmd_certify(args, config):
    config = config or {}
    R = int(config.get("instances", 200))
    n_min, n_max = int(config.get("n_min", 3)), int(config.get("n_max", 10))
    if R < 0:
        raise UsageError("instances must be >= 0")
    if n_max > 12:
        raise UsageError("n_max is capped at 12 (exhaustive ratio scans)")
    tasks = [(args.seed, i, n_min, n_max) for i in range(R)]
    rows = _pmap(_certify_row, tasks, args.jobs)
    header = ["instance_id", "kind", "n", "rank", "gamma_bf", "alpha_bf", "opt", "greedy_value",
              "bound_weak", "bound_curv", "weak_ok", "curv_ok", "lemma1_ok"]
    ok = all(r[10] and r[11] and r[12] for r in rows)
    return _csv(header, rows), ok


# -- visibility -------------------------------------------------------------------

def _scenario(config, fallback):
    if config is None:
        return fallback
    try:
        return BroadcastScenario.from_dict(config)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid scenario: {exc}") from None


def _edge_label(sc, edges):
    return ";".join(f"{i}>{j}" for i, j in sc.edge_ids(edges))


def _vis_opt(args, config):
    sc = _scenario(config, random_scenario(args.seed))
    f, m = visibility_objective(sc)
    trace = greedy_maximize(f, m)
    picks = [("greedy", sorted(trace.selected))]
    picks += [(meth, select_baseline(sc, meth, args.seed)) for meth in METHODS]
    rows = [[name, f(sel), len(sel), edge_set_hash(sc, sel), _edge_label(sc, sel)]
            for name, sel in picks]
    return _csv(["method", "value", "n_edges", "edge_set_hash", "edges"], rows), True


def _sim_chunk(task):
    sc_dict, edges, seed, lo, hi = task
    sc = BroadcastScenario.from_dict(sc_dict)
    return [realization_visibility(sc, edges, derive_seed(seed, "realization", ell))
            for ell in range(lo, hi)]


def _vis_sim(args, config):
    cfg = dict(config) if config else {}
    n = int(cfg.pop("n_realizations", 5000))
    edge_pairs = cfg.pop("edges", None)
    sc = _scenario(cfg or None, constant_scenario())
    edges = list(range(sc.n_edges)) if edge_pairs is None else sc.edge_index(edge_pairs)
    if n < 1:
        raise UsageError("n_realizations must be >= 1")
    step = max(1, math.ceil(n / (4 * max(1, args.jobs))))
    tasks = [(sc.to_dict(), edges, args.seed, lo, min(n, lo + step)) for lo in range(0, n, step)]
    per_real = np.array([r for chunk in _pmap(_sim_chunk, tasks, args.jobs) for r in chunk])
    analytic = analytic_report(sc, edges)
    h = edge_set_hash(sc, edges)
    rows = []
    for k, j in enumerate(sc.feeds):
        rows.append([j, h, "analytic", analytic.per_feed[j], 0])
        rows.append([j, h, "empirical", float(per_real[:, k].mean()), n])
    totals = per_real.sum(axis=1)
    u_hat = float(totals.mean())
    rows.append(["total", h, "analytic", analytic.total, 0])
    rows.append(["total", h, "empirical", u_hat, n])
    se = float(totals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    err = abs(u_hat - analytic.total)
    ok = err <= 4.0 * se + 1e-12 or err <= 0.05 * analytic.total
    return _csv(["feed", "edge_set_hash", "method", "value", "n"], rows), ok


def _vis_toy(args, config):
    sc = _scenario(config, toy_scenario())
    f, m = visibility_objective(sc)
    trace = greedy_maximize(f, m)
    picks = [("greedy", sorted(trace.selected))]
    picks += [(meth, select_baseline(sc, meth, args.seed)) for meth in METHODS]
    rows = []
    values = {}
    for name, sel in picks:
        share = visibility_per_edge(sc, sel)
        values[name] = f(sel)
        chosen = set(sc.edge_ids(sel))
        for i in sc.broadcasters:
            for j in sc.feeds:
                rows.append([name, i, j, (i, j) in chosen, share.get((i, j), 0.0)])
    ok = values["greedy"] >= values["CP"] - 1e-12 * max(1.0, abs(values["CP"]))
    return _csv(["method", "broadcaster", "feed", "selected", "visibility"], rows), ok


def cmd_visibility(args, config):
    return {"opt": _vis_opt, "sim": _vis_sim, "toy": _vis_toy}[args.mode](args, config)


# -- ggm --------------------------------------------------------------------------

def _ggm_task(task):
    master, n, N, rep, tree_kind, rho = task
    if tree_kind == "chain":
        truth = ggm.TreeStructure.chain(n)
        cov = ggm.chain_covariance(n, rho)
    else:
        truth = ggm.random_tree(n, derive_seed(master, "ggm:tree", rep))
        _, cov = ggm.make_tree_model(truth, derive_seed(master, "ggm:model", rep))
    samples = ggm.sample_gaussian(cov, N, derive_seed(master, f"ggm:samples:{N}", rep))
    out = []
    for name, fit in (("greedy", ggm.greedy_tree_fit), ("mst", ggm.mst_baseline)):
        tree = fit(samples)
        out.append([N, rep, name, ggm.nll(tree, samples), ggm.edge_error(tree, truth)])
    return out


def cmd_ggm(args, config):
    config = config or {}
    n = int(config.get("n", 10))
    sizes = [int(x) for x in config.get("sizes", [100, 500, 2000, 20000])]
    reps = int(config.get("reps", 20))
    tree_kind = config.get("tree", "random")
    rho = float(config.get("rho", 0.6))
    if n < 1 or reps < 1 or not sizes or min(sizes) < 1:
        raise UsageError("need n >= 1, reps >= 1 and positive sample sizes")
    if tree_kind not in ("random", "chain"):
        raise UsageError("tree must be 'random' or 'chain'")
    tasks = [(args.seed, n, N, rep, tree_kind, rho) for N in sizes for rep in range(reps)]
    results = _pmap(_ggm_task, tasks, args.jobs)
    rows = [r for pair in results for r in pair]
    ok = True
    means = []
    for N in sizes:
        for name in ("greedy", "mst"):
            sel = [r for r in rows if r[0] == N and r[2] == name]
            means.append([N, "mean", name, float(np.mean([r[3] for r in sel])),
                          float(np.mean([r[4] for r in sel]))])
    # greedy and Kruskal reach the same likelihood (ties may swap edges)
    for g, m in zip(rows[0::2], rows[1::2]):
        if abs(g[3] - m[3]) > 1e-9 * max(1.0, abs(m[3])):
            ok = False
    errs = [r[4] for r in means if r[2] == "greedy"]
    order = np.argsort(sizes, kind="stable")
    errs_sorted = [errs[k] for k in order]
    ok = ok and all(b <= a + 1e-12 for a, b in zip(errs_sorted, errs_sorted[1:]))
    return _csv(["N", "rep", "method", "nll", "edge_errors"], rows + means), ok


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (scenario file for visibility)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", help="directory for the CSV output (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p = argparse.ArgumentParser(prog="nsgreedy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("axioms", parents=[common], help="exhaustive matroid axiom checks")
    sub.add_parser("certify", parents=[common], help="greedy vs brute force on random instances")
    v = sub.add_parser("visibility", parents=[common], help="feed visibility experiments")
    v.add_argument("mode", choices=("opt", "sim", "toy"))
    sub.add_parser("ggm", parents=[common], help="tree GGM fits across sample sizes")
    return p


COMMANDS = {"axioms": cmd_axioms, "certify": cmd_certify,
            "visibility": cmd_visibility, "ggm": cmd_ggm}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("nsgreedy: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = _load_config(args.config)
        text, ok = COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"nsgreedy: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NSGreedyError, KeyError, TypeError, ValueError) as exc:
        print(f"nsgreedy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        name = args.command if args.command != "visibility" else f"visibility_{args.mode}"
        (out / f"{name}.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"nsgreedy {args.command}: check failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
