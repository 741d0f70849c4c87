"""Command-line interface: ``ivkkt <command> --problem <name|path> ...``.

Exit codes: 0 certified / success, 1 usage or input error, 2 violated,
3 certified but a hypothesis probe failed, 4 multiplier search infeasible.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .calculus import (
    DerivativeError,
    GeodesicRay,
    convexity_probe,
    cw_convexity_probe,
    dir_deriv,
    gh_dir_deriv,
    lu_convexity_probe,
    pseudoconvexity_probe,
)
from .expr import EvalError, constant_value
from .kkt import (
    CERTIFIED,
    HYP_UNVERIFIED,
    SHAPE_ERROR,
    TOL,
    VIOLATED,
    Certificate,
    InfeasibleCandidateError,
    ProbeSet,
    ShapeError,
    search_multipliers,
    verify,
)
from .manifold import InvalidPointError, parse_point
from .oracle import GridTooLargeError, classify, grid_for
from .problem import ProblemFileError, ProblemSpec, load_problem, registry_names
from .sampling import DEFAULT_SEED, Box, sample_pairs, sample_points

EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, EXIT_HYPOTHESES, EXIT_INFEASIBLE = 0, 1, 2, 3, 4
STATUS_EXIT = {CERTIFIED: EXIT_OK, VIOLATED: EXIT_VIOLATED, HYP_UNVERIFIED: EXIT_HYPOTHESES, SHAPE_ERROR: EXIT_USAGE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the usage code 1 (2 means "violated")."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _problem(args) -> ProblemSpec:
    prob = load_problem(args.problem)
    if getattr(args, "box", None):
        prob.box = Box.parse(args.box)
        prob.__post_init__()
    return prob


def _point(prob: ProblemSpec, text: str):
    return parse_point(prob.manifold, text, evaluate=constant_value)


def _candidate(prob: ProblemSpec, args):
    if args.candidate:
        return _point(prob, args.candidate)
    if prob.candidate is None:
        raise UsageError("no --candidate given and the problem declares none")
    return prob.candidate


def _probes(prob, pbar, args) -> ProbeSet:
    return ProbeSet.sample(prob, pbar, args.probes, args.seed, args.scope)


def cmd_check(args) -> int:
    prob = _problem(args)
    pbar = _candidate(prob, args)
    if args.certificate:
        cert = Certificate.parse(args.certificate)
        if args.theorem and cert.theorem != args.theorem:
            raise UsageError(f"--theorem {args.theorem} conflicts with certificate tag {cert.theorem}")
    else:
        cert = prob.certificate(args.theorem)
        if cert is None:
            what = f"for {args.theorem} " if args.theorem else ""
            raise UsageError(f"problem {prob.name} declares no certificate {what}(use --certificate)")
    probes = _probes(prob, pbar, args)
    verdict = verify(
        prob, pbar, cert, probes, args.tol, hypotheses=not args.no_hypotheses, n_pairs=args.pairs, n_alphas=args.alphas
    )
    print(f"problem: {prob.summary()}")
    print(f"candidate: {prob.manifold.format_point(pbar)}")
    print(f"certificate: {cert.format()}")
    print(verdict.report())
    return STATUS_EXIT[verdict.status]


def cmd_search(args) -> int:
    prob = _problem(args)
    pbar = _candidate(prob, args)
    probes = _probes(prob, pbar, args)
    c = None if args.c is None else args.c - 1
    result = search_multipliers(prob, pbar, args.theorem, probes, args.eps_lambda, args.tol, c, args.bound)
    print(f"problem: {prob.summary()}")
    print(f"candidate: {prob.manifold.format_point(pbar)}")
    print(f"probes: {probes.label()}")
    for line in result.tried:
        print(f"  tried {line}")
    if result.feasible:
        print(f"certificate: {result.certificate.format()}")
        print("")
        print("status=found")
        print(f"certificate={result.certificate.format()}")
        return EXIT_OK
    print(f"infeasible: {result.message}")
    print("")
    print("status=infeasible")
    return EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    prob = _problem(args)
    pbar = _candidate(prob, args)
    grid = grid_for(prob, args.grid, seed=args.seed if args.jitter else None, pbar=pbar)
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    verdict = classify(prob, pbar, grid, classes, args.strong_mode)
    print(f"problem: {prob.summary()}")
    print(f"candidate: {prob.manifold.format_point(pbar)}")
    print(f"seed: {args.seed} ({'jittered' if args.jitter else 'regular'} grid)")
    print(verdict.table(prob.manifold))
    if args.target:
        if args.target not in verdict.results:
            raise UsageError(f"--target {args.target} is not among the requested classes")
        return EXIT_OK if verdict.holds(args.target) else EXIT_VIOLATED
    return EXIT_OK


def cmd_derivs(args) -> int:
    prob = _problem(args)
    pbar = _candidate(prob, args)
    m = prob.manifold
    targets = [_point(prob, t) for t in args.target or []]
    if args.random:
        targets += sample_points(m, prob.box, args.random, args.seed)
    if not targets:
        raise UsageError("give at least one --target point or --random N")
    print(f"problem: {prob.summary()}")
    print(f"candidate: {m.format_point(pbar)}")
    kv = []
    for k, q in enumerate(targets, 1):
        w = m.log(pbar, q)
        ray = GeodesicRay(m, pbar, w)
        print(f"target {k}: {m.format_point(q)}")
        rows = []
        for f in prob.objectives:
            dl = dir_deriv(f.lower, pbar, w, ray=ray)
            du = dir_deriv(f.upper, pbar, w, ray=ray)
            gh = gh_dir_deriv(f, pbar, w, ray=ray)
            rows += [(f.lower.name, f"{dl:.12g}"), (f.upper.name, f"{du:.12g}"), (f"{f.name}^gH", str(gh))]
        for g in prob.constraints:
            rows.append((g.name, f"{dir_deriv(g, pbar, w, ray=ray):.12g}"))
        width = max(len(n) for n, _ in rows)
        for name, val in rows:
            print(f"  {name:<{width}}  {val}")
        kv.append(f"target{k}={m.format_point(q)}")
        kv += [f"target{k}.{name}={val}" for name, val in rows]
    print("")
    print("\n".join(kv))
    return EXIT_OK


def cmd_props(args) -> int:
    prob = _problem(args)
    m = prob.manifold
    pairs = sample_pairs(m, prob.box, args.pairs, args.alphas, args.seed, extra=prob.pairs)
    reports = []
    for f in prob.objectives:
        reports.append(lu_convexity_probe(f, pairs))
        reports.append(cw_convexity_probe(f, pairs))
    for g in prob.constraints:
        rep = convexity_probe(g, pairs)
        rep.name = f"{g.name} convexity"
        reports.append(rep)
    pbar = prob.candidate if not args.candidate else _point(prob, args.candidate)
    if pbar is not None:
        pts = sample_points(m, prob.box, args.probes, args.seed)
        for f in prob.objectives:
            for comp in "LU":
                reports.append(pseudoconvexity_probe(f.component(comp), pbar, pts, strict=True))
        for g in prob.constraints:
            reports.append(pseudoconvexity_probe(g, pbar, pts, strict=True))
    print(f"problem: {prob.summary()}")
    print(f"seed: {args.seed}, pairs: {len(pairs.pairs)} x {len(pairs.alphas)} alphas")
    if pbar is not None:
        print(f"pseudo-convexity at: {m.format_point(pbar)}")
    for r in reports:
        print("  " + r.summary())
    print("")
    for r in reports:
        print(f"{r.name.replace(' ', '_')}={r.verdict}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in registry_names():
        prob = load_problem(name)
        certs = ", ".join(c.theorem for c in prob.certificates) or "none"
        print(f"{prob.summary()}; certificates: {certs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--problem", required=True, help="registry name or path to a problem file")
    common.add_argument("--box", help="override the sampling box, e.g. 0.5:2,0.5:2")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    cand = _Parser(add_help=False)
    cand.add_argument("--candidate", help="candidate point, e.g. '(1, 1)' or 'sym[1, 0, 1]'")

    probe = _Parser(add_help=False)
    probe.add_argument("--probes", type=int, default=500, help="number of sampled probe points")
    probe.add_argument("--scope", choices=("domain", "feasible"), default="domain")
    probe.add_argument("--tol", type=float, default=TOL)

    pairs = _Parser(add_help=False)
    pairs.add_argument("--pairs", type=int, default=200)
    pairs.add_argument("--alphas", type=int, default=9)

    p = _Parser(prog="ivkkt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common, cand, probe, pairs], help="verify a certificate")
    s.add_argument("--theorem")
    s.add_argument("--certificate", help="e.g. 'theorem=T32a lamL=1,1 lamU=1,1 mu=1,7,0,0,4.5'")
    s.add_argument("--no-hypotheses", action="store_true", help="skip hypothesis probes")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("search", parents=[common, cand, probe], help="search for certifying multipliers")
    s.add_argument("--theorem", required=True)
    s.add_argument("--c", type=int, help="objective index (1-based) for single-index theorems")
    s.add_argument("--bound", help="bound selector L/U/C/W for T37/T38")
    s.add_argument("--eps-lambda", type=float, default=1e-6)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("oracle", parents=[common, cand], help="grid Pareto classification")
    s.add_argument("--grid", type=int, default=101)
    s.add_argument("--classes", default="lu,cw")
    s.add_argument("--strong-mode", choices=("tuple", "point"), default="tuple")
    s.add_argument("--jitter", action="store_true", help="jitter interior grid nodes using --seed")
    s.add_argument("--target", help="exit 2 if this class is refuted")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("derivs", parents=[common, cand], help="directional derivative table")
    s.add_argument("--target", action="append", help="target point (repeatable)")
    s.add_argument("--random", type=int, default=0, help="add N seeded random targets from the box")
    s.set_defaults(func=cmd_derivs)

    s = sub.add_parser("props", parents=[common, cand, pairs], help="convexity and pseudo-convexity probes")
    s.add_argument("--probes", type=int, default=500)
    s.set_defaults(func=cmd_props)

    s = sub.add_parser("list", help="list built-in problems")
    s.set_defaults(func=cmd_list)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        UsageError,
        ProblemFileError,
        ShapeError,
        InvalidPointError,
        InfeasibleCandidateError,
        GridTooLargeError,
        DerivativeError,
        EvalError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
