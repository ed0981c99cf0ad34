"""Command-line entry point: ``imprec <subcommand> ...``.

Exit status is 0 on success, 1 on domain errors (bad PDDL, unreachable
goals, invalid plans) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .datasets import DegradeSpec, NoPlan, PoolTooSmall, StateSpaceGuardExceeded, degrade, sample_observations
from .evaluation import (
    aggregate,
    default_timeout,
    landmark_f1_correlation,
    load_dataset,
    roc_points,
    run_all,
    write_csv,
    write_roc,
)
from .graphs import BuildFailure, build_graph, CLASSICAL, OPTIMISTIC
from .grounding import goal_mask
from .landmarks import GoalUnreachable, extract_incomplete, extract_ordered_complete
from .pddl import (
    PddlError,
    fmt_literal,
    parse_atom_list,
    parse_domain,
    parse_problem,
    parse_recognition_bundle,
    serialize_domain,
)
from .recognizers import HEURISTICS, HeuristicConfig, parse_kinds, recognize
from .strips import (
    GoalNotSatisfied,
    StepNotApplicable,
    StripsError,
    completion_count,
    normalize_atom,
    validate_optimistic_plan,
)

log = logging.getLogger("imprec")

DOMAIN_ERRORS = (PddlError, StripsError, GoalUnreachable, BuildFailure, NoPlan, PoolTooSmall,
                 StateSpaceGuardExceeded, FileNotFoundError, IsADirectoryError)


class DomainError(Exception):
    pass


# -- argument helpers -------------------------------------------------------------


def _kinds(text: str) -> str:
    try:
        return parse_kinds(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _percent(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError("percent must lie in 0..100")
    return value


def resolve_bundle(text: str) -> Path:
    """A bundle path; falls back to the bundles shipped with the package by name."""
    path = Path(text)
    if path.is_dir():
        return path
    from . import bundled

    try:
        return bundled(path.name)
    except FileNotFoundError:
        raise DomainError(f"no such bundle: {text}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DomainError(f"cannot read {path}: {e.strerror}") from None


def _emit(args, payload, human: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _require_seed(args) -> None:
    if args.strict and args.seed is None:
        raise UsageError("--seed is required in --strict mode")


class UsageError(Exception):
    pass


# -- subcommands --------------------------------------------------------------------


def _load_bundle(args):
    return parse_recognition_bundle(resolve_bundle(args.bundle), args.domain)


def cmd_recognize(args) -> int:
    problem = _load_bundle(args)
    cfg = HeuristicConfig(args.heuristic, args.kinds, args.theta, args.strict_islandmark)
    res = recognize(problem, cfg)
    payload = res.to_json()
    payload["config"] = {"heuristic": cfg.heuristic, "kinds": cfg.kinds, "theta": str(cfg.theta)}
    payload["hypotheses"] = [",".join(map(fmt_literal, h)) for h in problem.hypotheses]
    lines = [f"{cfg.label}  theta={cfg.theta}"]
    for i, h in enumerate(payload["hypotheses"]):
        mark = "*" if i in res.returned else " "
        tag = "  (hidden)" if i == problem.hidden_goal else ""
        lines.append(f"{mark} {i:>2}  {float(res.scores[i]):.4f}  {h}{tag}")
    lines.append(f"returned {sorted(res.returned)}  spread {res.spread}  hit {res.hit}")
    if res.all_unreachable:
        lines.append("warning: no hypothesis is reachable")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_extract(args) -> int:
    problem = _load_bundle(args)
    task = problem.ground()
    indices = [args.hypothesis] if args.hypothesis is not None else range(len(problem.hypotheses))
    out, lines = [], []
    for i in indices:
        if not 0 <= i < len(problem.hypotheses):
            raise UsageError(f"hypothesis index {i} out of range")
        goal = goal_mask(task, problem.hypotheses[i])
        entry = {"index": i}
        try:
            if args.complete:
                ls = extract_ordered_complete(task.known_projection(), goal, args.strict_islandmark)
            else:
                ls = extract_incomplete(task, goal, args.strict_islandmark)
            entry.update(ls.to_json(task))
        except GoalUnreachable:
            entry.update(goal=sorted(task.names(goal)), unreachable=True)
        if args.dump_graph:
            mode = CLASSICAL if args.complete else OPTIMISTIC
            src = task.known_projection() if args.complete else task
            try:
                g = build_graph(src, mode, goal)
            except BuildFailure as e:
                g = e.graph
            entry["graph"] = g.to_json(task)
        out.append(entry)
        lines.append(f"goal {i}: {' '.join(entry['goal'])}")
        if entry.get("unreachable"):
            lines.append("  unreachable")
            continue
        lines.append("  definite: " + " ".join(entry["definite"]))
        lines.append("  possible: " + " ".join(entry["possible"]))
        if "graph" in entry:
            for lvl, facts in enumerate(entry["graph"]["fact_levels"]):
                lines.append(f"  F{lvl}: {' '.join(facts)}")
    _emit(args, {"goals": out}, "\n".join(lines))
    return 0


def cmd_gen_incomplete(args) -> int:
    _require_seed(args)
    seed = 0 if args.seed is None else args.seed
    domain = parse_domain(_read(args.domain))
    variants = degrade(domain, DegradeSpec(args.percent, seed, args.variants, args.mix))
    texts = [serialize_domain(v) for v in variants]
    written = []
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for k, text in enumerate(texts):
            path = out / f"domain-{args.percent:02d}-{k}.pddl"
            path.write_text(text, encoding="utf-8")
            written.append(str(path))
    payload = {
        "percent": args.percent,
        "seed": seed,
        "variants": [
            {"completions": str(completion_count(v)), "file": written[k] if written else None,
             **({} if written else {"domain": texts[k]})}
            for k, v in enumerate(variants)
        ],
    }
    human = "\n".join(written) if written else "\n".join(texts)
    _emit(args, payload, human)
    return 0


def cmd_sample_obs(args) -> int:
    _require_seed(args)
    if args.plan:
        plan = [normalize_atom(l) for l in _read(args.plan).splitlines() if l.split(";")[0].strip()]
    elif args.bundle:
        plan = list(_load_bundle(args).observations)
    else:
        raise UsageError("give --plan or --bundle")
    obs = sample_observations(plan, args.percent, args.seed)
    if args.out:
        Path(args.out).write_text("".join(o + "\n" for o in obs), encoding="utf-8")
    _emit(args, {"percent": args.percent, "seed": args.seed, "observations": obs}, "\n".join(obs))
    return 0


def _configs(args) -> list[HeuristicConfig]:
    out = []
    for h in args.heuristic or list(HEURISTICS):
        if h.endswith("_baseline"):
            out.append(HeuristicConfig(h, "D", args.theta, args.strict_islandmark))
        else:
            for k in args.kinds or ["DPO"]:
                out.append(HeuristicConfig(h, k, args.theta, args.strict_islandmark))
    return list(dict.fromkeys(out))


def cmd_evaluate(args) -> int:
    problems = load_dataset(args.dataset)
    if not problems:
        raise DomainError(f"no bundles found under {args.dataset}")
    timeout = args.timeout if args.timeout is not None else default_timeout()
    outcomes = run_all(problems, _configs(args), timeout, args.jobs)
    rows = aggregate(outcomes)
    if args.csv:
        write_csv(rows, args.csv)
    if args.roc:
        write_roc(roc_points(outcomes, aggregate=args.roc_aggregate), args.roc)
    corr = landmark_f1_correlation(rows)
    payload = {
        "rows": [r.as_dict() for r in rows],
        "correlation": {c: {k: float(v) for k, v in d.items()} for c, d in corr.items()},
        "timed_out": sum(o.timed_out for o in outcomes),
        "failed": sum(o.error is not None for o in outcomes),
    }
    head = f"{'config':<22}{'inc':>5}{'obs':>5}{'n':>5}{'acc':>7}{'spread':>8}{'P':>7}{'R':>7}{'F1':>7}"
    lines = [head]
    for r in rows:
        lines.append(
            f"{r.config:<22}{r.incompleteness_percent:>5}{r.observability_percent:>5}{r.n_problems:>5}"
            f"{float(r.accuracy):>7.3f}{float(r.spread):>8.3f}{float(r.precision):>7.3f}"
            f"{float(r.recall):>7.3f}{float(r.f1):>7.3f}"
        )
    lines.append(f"timed out: {payload['timed_out']}  failed: {payload['failed']}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_validate_plan(args) -> int:
    if args.bundle:
        problem = _load_bundle(args)
        task = problem.ground(keep=())
        if args.goal:
            goal = goal_mask(task, parse_atom_list(args.goal))
        elif problem.hidden_goal is not None:
            goal = goal_mask(task, problem.hypotheses[problem.hidden_goal])
        else:
            goal = 0
    elif args.domain and args.problem:
        from .grounding import ground

        domain = parse_domain(_read(args.domain))
        prob = parse_problem(_read(args.problem), domain)
        goal_lits = parse_atom_list(args.goal) if args.goal else (prob.goal or ())
        task = ground(domain, prob.objects, prob.init, goals=[goal_lits])
        goal = goal_mask(task, goal_lits)
    else:
        raise UsageError("give --bundle, or --domain with --problem")

    if args.plan:
        steps = [l for l in _read(args.plan).splitlines() if l.split(";")[0].strip()]
    else:
        steps = [s for s in (args.actions or "").split(",") if s.strip()]
    steps = [normalize_atom(s) for s in steps]
    try:
        trace = validate_optimistic_plan(task, steps, goal, strict=args.strict_preconditions)
    except StepNotApplicable as e:
        _emit(args, {"valid": False, "error": "StepNotApplicable", "step": e.index, "action": e.action},
              f"invalid: step {e.index} {e.action} is not applicable")
        return 1
    except GoalNotSatisfied as e:
        states = [sorted(task.names(s)) for s in e.trace]
        _emit(args, {"valid": False, "error": "GoalNotSatisfied", "trace": states},
              "invalid: goal not satisfied\n" + "\n".join("  {" + ",".join(s) + "}" for s in states))
        return 1
    states = [sorted(task.names(s)) for s in trace]
    human = "valid\n" + "\n".join(f"  s{k} = {{{', '.join(s)}}}" for k, s in enumerate(states))
    _emit(args, {"valid": True, "trace": states}, human)
    return 0


def cmd_completions(args) -> int:
    if args.domain:
        domain = parse_domain(_read(args.domain))
    elif args.bundle:
        domain = _load_bundle(args).domain
    else:
        raise UsageError("give --domain or --bundle")
    n = completion_count(domain)
    _emit(args, {"completions": str(n), "k": n.bit_length() - 1}, str(n))
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--strict", action="store_true", help="CI mode: randomized commands need --seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="imprec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"imprec {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def bundle_args(sp, required=True):
        sp.add_argument("--bundle", required=required, help="bundle directory (or a bundled name)")
        sp.add_argument("--domain", help="use this domain file instead of the bundle's")

    r = sub.add_parser("recognize", parents=[common], help="rank the hypotheses of a bundle")
    bundle_args(r)
    r.add_argument("--heuristic", choices=HEURISTICS, default="gc_enhanced")
    r.add_argument("--kinds", type=_kinds, default="DPO", help="landmark kinds, a string over D, P, O")
    r.add_argument("--theta", type=_fraction, default=Fraction(0))
    r.add_argument("--strict-islandmark", action="store_true", help="also drop the fact from I in the landmark test")
    r.set_defaults(func=cmd_recognize)

    e = sub.add_parser("extract-landmarks", parents=[common], help="definite/possible landmarks per goal")
    bundle_args(e)
    e.add_argument("--hypothesis", type=int, help="only this hypothesis index")
    e.add_argument("--complete", action="store_true", help="ordered extraction over the known-only model")
    e.add_argument("--strict-islandmark", action="store_true")
    e.add_argument("--dump-graph", action="store_true", help="include the relaxed planning graph levels")
    e.set_defaults(func=cmd_extract)

    g = sub.add_parser("gen-incomplete", parents=[common], help="degrade a complete domain")
    g.add_argument("--domain", required=True)
    g.add_argument("--percent", type=_percent, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--variants", type=int, default=3)
    g.add_argument("--mix", action="store_true", help="fill half of each target with added literals")
    g.add_argument("--out", help="directory for domain-<percent>-<k>.pddl files")
    g.set_defaults(func=cmd_gen_incomplete)

    s = sub.add_parser("sample-obs", parents=[common], help="sample an observation subsequence")
    s.add_argument("--plan", help="file with one action per line")
    bundle_args(s, required=False)
    s.add_argument("--percent", type=_percent, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample_obs)

    v = sub.add_parser("evaluate", parents=[common], help="batch metrics over a dataset of bundles")
    v.add_argument("--dataset", required=True, help="directory searched recursively for bundles")
    v.add_argument("--heuristic", action="append", choices=HEURISTICS)
    v.add_argument("--kinds", action="append", type=_kinds)
    v.add_argument("--theta", type=_fraction, default=Fraction(0))
    v.add_argument("--strict-islandmark", action="store_true")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--timeout", type=float, help="seconds per problem (default $IMPREC_TIMEOUT_SECS or 120)")
    v.add_argument("--csv")
    v.add_argument("--roc", help="write ROC points as JSON")
    v.add_argument("--roc-aggregate", action="store_true", help="mean point per domain and incompleteness")
    v.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("validate-plan", parents=[common], help="replay a plan optimistically")
    bundle_args(c, required=False)
    c.add_argument("--problem", help="problem file (with --domain)")
    c.add_argument("--plan", help="file with one action per line")
    c.add_argument("--actions", help="comma-separated actions, e.g. 'a,b,c'")
    c.add_argument("--goal", help="comma-separated goal atoms; default the hidden goal")
    c.add_argument("--strict-preconditions", action="store_true", help="possible preconditions also gate")
    c.set_defaults(func=cmd_validate_plan)

    n = sub.add_parser("completions", parents=[common], help="size of the completion set")
    bundle_args(n, required=False)
    n.set_defaults(func=cmd_completions)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"imprec: error: {e}", file=sys.stderr)
        return 2
    except (DomainError, *DOMAIN_ERRORS) as e:
        print(f"imprec: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
