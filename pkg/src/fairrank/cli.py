"""Command-line interface.

Exit status: 0 on success, 1 on a usage error, 2 on a data or solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .audit import fairness_level
from .bvn import bvn_decompose
from .errors import FairRankError
from .experiments import (
    export_results,
    genre_experiment,
    load_movielens,
    relevance_experiment,
    synthetic_movielens,
    synthetic_scores,
    tradeoff_curve,
)
from .fixtures import EXAMPLE2_WEIGHTS, example2_distribution
from .lp import build_lp, lp_objective, solve_lp
from .merit import EmpiricalMeritDistribution
from .policies import RankingDistribution
from .topk import check_topk, dkw_sample_size, exact_topk, monte_carlo_topk, robustify
from .utility import make_weights

log = logging.getLogger("fairrank")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _unit(name):
    def check(text):
        v = float(text)
        if not 0 <= v <= 1:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1], got {v}")
        return v
    return check


def _positive(kind):
    def check(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
        return v
    return check


def _nonneg_float(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _add_source(p, q_files: bool = False):
    g = p.add_argument_group("merit source")
    g.add_argument("--example2", action="store_true", help="built-in three-agent instance")
    g.add_argument("--model", metavar="JSON", help="merit model file (empirical, dirichlet or gaussian)")
    if q_files:
        g.add_argument("--q", metavar="CSV", help="top-k matrix, rows = agents")
        g.add_argument("--merits", metavar="VEC", help="expected merits, inline 'a,b,c' or a file")


def _add_sampling(p):
    p.add_argument("--exact", action="store_true", help="exact top-k (empirical models only)")
    p.add_argument("--samples", type=_positive(int), help="Monte Carlo sample count")
    p.add_argument("--kappa", type=_positive(float), default=1.0,
                   help="confidence exponent for automatic sample sizing (default 1)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairrank", description="Fair ranking under uncertain merit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("topk", help="top-k membership probabilities -> CSV")
    _add_source(p)
    _add_sampling(p)
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="target additive error when sizing samples (default 0.01)")
    p.add_argument("--scale", type=float, default=1.0, help="multiply the printed matrix by this")
    p.add_argument("--out", metavar="CSV")

    p = sub.add_parser("solve", help="phi-fair LP -> marginals CSV, lottery JSON, fairness report")
    _add_source(p, q_files=True)
    _add_sampling(p)
    p.add_argument("--phi", type=_unit("phi"), required=True)
    p.add_argument("--epsilon", type=_nonneg_float, default=0.0,
                   help="robustify q against this additive estimation error")
    p.add_argument("--weights", default=None, help="dcg | reciprocal | precision:K | list (default dcg)")
    p.add_argument("--method", choices=["highs", "simplex"], default="highs")
    p.add_argument("--out-dir", default=".", metavar="DIR")
    p.add_argument("--figure", metavar="PATH", help="also draw a heatmap of the marginals")

    p = sub.add_parser("audit", help="fairness level of marginals or a lottery against q")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--marginals", metavar="CSV")
    g.add_argument("--lottery", metavar="JSON")
    p.add_argument("--q", metavar="CSV")
    p.add_argument("--example2", action="store_true", help="audit against the built-in q")
    p.add_argument("--out", metavar="JSON")

    p = sub.add_parser("sample", help="draw rankings from a lottery")
    p.add_argument("--lottery", metavar="JSON", required=True)
    p.add_argument("--count", type=_positive(int), default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("tradeoff", help="LP vs mixing over a phi grid")
    _add_source(p, q_files=True)
    _add_sampling(p)
    p.add_argument("--weights", default=None)
    p.add_argument("--grid-step", type=_positive(float), default=0.05)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--method", choices=["highs", "simplex"], default="highs")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--figure", metavar="PATH", help="also render the curve to this file")

    p = sub.add_parser("movielens", help="genre tradeoff experiment")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--data-dir", metavar="DIR", help="directory with ML-100K u.data and u.item")
    g.add_argument("--synthetic", action="store_true", help="use the synthetic stand-in dataset")
    p.add_argument("--genre", default="Comedy")
    p.add_argument("--items", type=_positive(int), default=40)
    p.add_argument("--subsample", type=_unit("subsample"), default=0.10)
    p.add_argument("--s", type=_positive(float), default=1.0, help="prior strength")
    p.add_argument("--runs", type=_positive(int), default=20)
    p.add_argument("--samples", type=_positive(int), default=50_000)
    p.add_argument("--grid-step", type=_positive(float), default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("exposure", help="OPT vs Thompson-sampling exposure experiment")
    p.add_argument("--scores", metavar="CSV", help="users x items relevance matrix (default: synthetic)")
    p.add_argument("--users", type=_positive(int), default=400, help="synthetic users")
    p.add_argument("--items", type=_positive(int), default=100, help="synthetic items")
    p.add_argument("--gamma", type=_positive(float), default=2.0)
    p.add_argument("--epsilon", type=_positive(float), default=0.1)
    p.add_argument("--users-per-arm", type=_positive(int), default=200)
    p.add_argument("--top-t", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="JSON")
    p.add_argument("--figure", metavar="PATH")
    return parser


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _grid(step: float) -> list:
    count = int(round(1 / step))
    if abs(count * step - 1) > 1e-9:
        raise UsageError(f"--grid-step {step} does not divide 1")
    return [round(i * step, 12) for i in range(count + 1)]


def _model(args):
    if args.example2 and args.model:
        raise UsageError("give either --example2 or --model, not both")
    if args.example2:
        return example2_distribution()
    if args.model:
        return fio.read_model(args.model)
    return None


def _topk(model, args):
    if args.exact or (isinstance(model, EmpiricalMeritDistribution) and args.samples is None):
        if not isinstance(model, EmpiricalMeritDistribution):
            raise UsageError("--exact needs an empirical merit model")
        return exact_topk(model)
    m = args.samples or dkw_sample_size(model.n, args.kappa, args.epsilon)
    log.info("estimating top-k probabilities from %d samples", m)
    return monte_carlo_topk(model, m, args.seed)


def _instance(args):
    """(q, expected merits, weights) from the merit-source flags."""
    model = _model(args)
    if model is not None:
        if args.q or args.merits:
            raise UsageError("--q/--merits cannot be combined with a merit model")
        q = _topk(model, args)
        expected = model.expected()
    elif args.q and args.merits:
        q = check_topk(fio.read_matrix(args.q))
        expected = fio.read_vector(args.merits)
    else:
        raise UsageError("need --example2, --model, or both --q and --merits")
    n = q.shape[0]
    if args.weights is None:
        w = EXAMPLE2_WEIGHTS if args.example2 else make_weights("dcg", n)
    else:
        kind = args.weights
        if "," in kind or Path(kind).exists():
            kind = fio.read_vector(kind)
        w = make_weights(kind, n)
    return q, expected, w


def cmd_topk(args) -> int:
    model = _model(args)
    if model is None:
        raise UsageError("need --example2 or --model")
    if args.samples is None and not args.exact and not 0 < args.epsilon < 1:
        raise UsageError("--epsilon must lie in (0, 1)")
    q = _topk(model, args)
    _emit(fio.matrix_to_csv(q * args.scale), args.out)
    return 0


def cmd_solve(args) -> int:
    q, expected, w = _instance(args)
    q_lp = robustify(q, args.epsilon) if args.epsilon > 0 else q
    inst = build_lp(q_lp, expected, w, args.phi)
    P = solve_lp(inst, method=args.method)
    lottery = bvn_decompose(P)
    report = fairness_level(lottery.marginals(), q)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "q.csv").write_text(fio.matrix_to_csv(q))
    (out / "marginals.csv").write_text(fio.matrix_to_csv(P))
    (out / "lottery.json").write_text(lottery.to_json())
    (out / "report.json").write_text(report.to_json())
    if args.figure:
        from .plotting import marginal_heatmaps

        marginal_heatmaps({f"LP, phi={args.phi:g}": P}, args.figure)
    summary = {"phi": args.phi, "objective": lp_objective(inst, P), "phi_star": report.phi_star,
               "rankings": len(lottery), "out_dir": str(out)}
    print(json.dumps(summary, indent=2))
    return 0


def cmd_audit(args) -> int:
    if args.marginals:
        P = fio.read_matrix(args.marginals)
    else:
        try:
            P = RankingDistribution.from_json(Path(args.lottery).read_text()).marginals()
        except OSError as exc:
            raise FairRankError(f"cannot read {args.lottery}: {exc}") from exc
    if args.example2 == bool(args.q):
        raise UsageError("give exactly one of --q or --example2")
    q = exact_topk(example2_distribution()) if args.example2 else check_topk(fio.read_matrix(args.q))
    _emit(fairness_level(P, q).to_json() + "\n", args.out)
    return 0


def cmd_sample(args) -> int:
    try:
        lottery = RankingDistribution.from_json(Path(args.lottery).read_text())
    except OSError as exc:
        raise FairRankError(f"cannot read {args.lottery}: {exc}") from exc
    for r in lottery.sample(args.count, args.seed):
        print(",".join(map(str, r)))
    return 0


def _write_table(table, args) -> None:
    if args.format == "svg":
        if not args.out:
            raise UsageError("--format svg needs --out")
        export_results(table, "svg", args.out)
    elif args.out:
        export_results(table, args.format, args.out)
    else:
        sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_json() + "\n")
    if args.figure:
        from .plotting import tradeoff_figure

        tradeoff_figure(table, args.figure)


def cmd_tradeoff(args) -> int:
    q, expected, w = _instance(args)
    table = tradeoff_curve(q, expected, w, _grid(args.grid_step), method=args.method,
                           metadata={"seed": args.seed, "n": int(q.shape[0])})
    _write_table(table, args)
    return 0


def cmd_movielens(args) -> int:
    if args.synthetic:
        dataset = synthetic_movielens(seed=args.seed)
    else:
        d = Path(args.data_dir)
        dataset = load_movielens(d / "u.data", d / "u.item")
    table = genre_experiment(dataset, args.genre, n_items=args.items, subsample=args.subsample,
                             s=args.s, phi_grid=_grid(args.grid_step), mc_samples=args.samples,
                             runs=args.runs, seed=args.seed)
    _write_table(table, args)
    return 0


def cmd_exposure(args) -> int:
    if args.scores:
        try:
            S = np.loadtxt(args.scores, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise FairRankError(f"cannot read scores from {args.scores}: {exc}") from exc
    else:
        S = synthetic_scores(args.users, args.items, seed=args.seed)
    result = relevance_experiment(S, args.gamma, args.epsilon, args.users_per_arm, args.top_t, args.seed)
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args.out)
    if args.figure:
        from .plotting import exposure_histogram

        exposure_histogram(result, args.figure)
    return 0


COMMANDS = {
    "topk": cmd_topk,
    "solve": cmd_solve,
    "audit": cmd_audit,
    "sample": cmd_sample,
    "tradeoff": cmd_tradeoff,
    "movielens": cmd_movielens,
    "exposure": cmd_exposure,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fairrank: error: {exc}", file=sys.stderr)
        return 1
    except FairRankError as exc:
        print(f"fairrank: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
