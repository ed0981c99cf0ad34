"""Degrading domains, sampling observations, and a brute-force planner.

Randomness comes from :class:`numpy.random.Generator` over PCG64, seeded via
``SeedSequence``, so a given seed reproduces the same output everywhere.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .pddl import LiftedDomain, Operator, RecognitionProblem
from .strips import (
    GroundedTask,
    IncompleteAction,
    State,
    apply_complete,
    apply_optimistic,
    applicable,
    bits,
    mask_of,
)


class PoolTooSmall(ValueError):
    pass


class NoPlan(Exception):
    pass


class StateSpaceGuardExceeded(Exception):
    pass


def make_rng(seed) -> np.random.Generator:
    """A PCG64 generator from an int, a ``SeedSequence`` or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


# -- degradation ----------------------------------------------------------

CATEGORIES = (("pre", "poss_pre"), ("add", "poss_add"), ("delete", "poss_del"))


@dataclass(frozen=True)
class DegradeSpec:
    percent: int
    seed: int = 0
    variants: int = 3
    mix: bool = False

    def __post_init__(self):
        if not 0 <= self.percent <= 100:
            raise ValueError("percent must lie in 0..100")
        if self.variants < 1:
            raise ValueError("variants must be positive")


def target_size(percent, pool: int) -> int:
    return math.ceil(Fraction(percent) * pool / 100)


def literal_pool(domain: LiftedDomain, known: str) -> list[tuple[int, tuple]]:
    """``(operator index, literal)`` pairs of one known list across the domain."""
    return [(i, lit) for i, op in enumerate(domain.operators) for lit in getattr(op, known)]


def _fresh_literals(domain: LiftedDomain, op: Operator) -> list[tuple]:
    """Atoms over ``op``'s parameters whose types fit the predicate signature."""
    out = []
    params = list(op.parameters)
    for pred, args in sorted(domain.predicates.items()):
        choices = [[v for v, t in params if domain.is_subtype(t, at)] for _, at in args]
        for combo in itertools.product(*choices):
            out.append((pred, *combo))
    return out


def _additive_candidates(domain: LiftedDomain, ops: list[dict], known: str, poss: str):
    """Literals that may be added to ``poss`` without moving anything."""
    out = []
    for i, op in enumerate(domain.operators):
        taken = set(ops[i][known]) | set(ops[i][poss])
        if known == "pre":
            # delete effects that are not preconditions come first
            for lit in op.delete:
                if lit not in taken:
                    out.append((i, lit))
                    taken.add(lit)
        if known == "pre":
            clash = set()
        else:
            # an atom cannot be a possible add and a possible delete of one operator
            other = "delete" if known == "add" else "add"
            clash = set(ops[i][other]) | set(ops[i]["poss_" + ("del" if other == "delete" else "add")])
        for lit in _fresh_literals(domain, op):
            if lit not in taken and lit not in clash:
                out.append((i, lit))
                taken.add(lit)
    return out


def degrade_once(domain: LiftedDomain, percent: int, rng: np.random.Generator, mix: bool = False) -> LiftedDomain:
    for op in domain.operators:
        if not op.is_complete:
            raise ValueError(f"operator {op.name} already has possible annotations")
    ops = [{k: list(getattr(op, k)) for k in Operator.LISTS} for op in domain.operators]
    for known, poss in CATEGORIES:
        pool = literal_pool(domain, known)
        target = target_size(percent, len(pool))
        if target > len(pool):
            raise PoolTooSmall(f"{known}: need {target} literals but the pool has {len(pool)}; lower the percentage")
        n_add = 0
        if mix and target:
            extra = _additive_candidates(domain, ops, known, poss)
            n_add = min(target // 2, len(extra))
            for j in sorted(rng.choice(len(extra), size=n_add, replace=False)) if n_add else ():
                i, lit = extra[j]
                ops[i][poss].append(lit)
        n_move = target - n_add
        for j in sorted(rng.choice(len(pool), size=n_move, replace=False)) if n_move else ():
            i, lit = pool[j]
            ops[i][known].remove(lit)
            ops[i][poss].append(lit)
    new_ops = [op.replace(**{k: tuple(v) for k, v in o.items()}) for op, o in zip(domain.operators, ops)]
    return domain.replace_operators(new_ops)


def degrade(domain: LiftedDomain, spec: DegradeSpec) -> list[LiftedDomain]:
    """One incomplete variant per child seed of ``spec.seed``."""
    children = np.random.SeedSequence(spec.seed).spawn(spec.variants)
    return [degrade_once(domain, spec.percent, make_rng(c), spec.mix) for c in children]


# -- observations -----------------------------------------------------------


def sample_observations(plan: Sequence[str], percent, seed=None) -> list[str]:
    """Uniform order-preserving subsequence of ``ceil(percent * len(plan) / 100)`` steps."""
    plan = list(plan)
    if percent >= 100:
        return plan
    k = target_size(percent, len(plan))
    if k == 0:
        return []
    idx = sorted(make_rng(seed).choice(len(plan), size=k, replace=False))
    return [plan[i] for i in idx]


# -- brute-force planner ------------------------------------------------------


def bfs_plan(
    task: GroundedTask,
    goal: int | None = None,
    max_facts: int | None = 24,
    max_states: int | None = None,
    strict: bool = False,
) -> list[str]:
    """Shortest plan by breadth-first search.

    Complete tasks use the classical successor; tasks with possible lists
    use the optimistic one.  Actions are expanded in signature order, so the
    result is deterministic.
    """
    goal = task.goal if goal is None else goal
    if max_facts is not None and len(task.facts) > max_facts:
        raise StateSpaceGuardExceeded(f"{len(task.facts)} facts exceeds the guard of {max_facts}")
    complete = task.is_complete
    actions = sorted(task.actions, key=lambda a: a.name)
    succ = apply_complete if complete else (lambda s, a: apply_optimistic(s, a, strict))
    start = task.init
    if start & goal == goal:
        return []
    parent: dict[State, tuple[State, str] | None] = {start: None}
    frontier = deque([start])
    while frontier:
        s = frontier.popleft()
        for a in actions:
            if not applicable(s, a, strict):
                continue
            n = succ(s, a)
            if n in parent:
                continue
            parent[n] = (s, a.name)
            if n & goal == goal:
                plan = []
                while parent[n] is not None:
                    n, name = parent[n]
                    plan.append(name)
                return plan[::-1]
            if max_states is not None and len(parent) > max_states:
                raise StateSpaceGuardExceeded(f"more than {max_states} states")
            frontier.append(n)
    raise NoPlan()


# -- random tasks for property tests and demos ---------------------------------


def random_complete_task(rng, n_facts: int = 8, n_actions: int = 6) -> GroundedTask:
    """A small random complete STRIPS task over facts ``(f0) .. (fN)``."""
    rng = make_rng(rng)
    facts = tuple(f"(f{i})" for i in range(n_facts))
    actions = []
    for j in range(n_actions):
        ids = rng.permutation(n_facts)
        n_pre = int(rng.integers(0, 3))
        n_add = int(rng.integers(1, 3))
        pre = ids[:n_pre]
        add = ids[n_pre:n_pre + n_add]
        dels = [f for f in pre if rng.random() < 0.5]
        actions.append(IncompleteAction(f"(a{j})", pre=mask_of(pre), add=mask_of(add), delete=mask_of(dels)))
    init = mask_of(int(i) for i in rng.choice(n_facts, size=int(rng.integers(1, 4)), replace=False))
    return GroundedTask(facts, tuple(actions), init)


def degrade_task(task: GroundedTask, percent, rng) -> GroundedTask:
    """Move ``percent`` of each ground pool (pre, add, delete) into possible lists.

    The grounded counterpart of :func:`degrade_once`, for tasks with no
    lifted domain behind them.
    """
    rng = make_rng(rng)
    fields = [dict(pre=a.pre, add=a.add, delete=a.delete, poss_pre=0, poss_add=0, poss_del=0)
              for a in task.actions]
    for known, poss in CATEGORIES:
        pool = [(i, f) for i, a in enumerate(task.actions) for f in bits(getattr(a, known))]
        k = target_size(percent, len(pool))
        for j in sorted(rng.choice(len(pool), size=k, replace=False)) if k else ():
            i, f = pool[j]
            fields[i][known] &= ~(1 << f)
            fields[i][poss] |= 1 << f
    actions = tuple(IncompleteAction(a.name, **fl, operator=a.operator) for a, fl in zip(task.actions, fields))
    return GroundedTask(task.facts, actions, task.init, task.goal, task.objects)


def reachable_states(task: GroundedTask, limit: int = 5000) -> list[State]:
    seen = {task.init}
    order = [task.init]
    frontier = deque([task.init])
    while frontier and len(seen) < limit:
        s = frontier.popleft()
        for a in task.actions:
            if applicable(s, a):
                n = apply_complete(s, a) if a.is_complete else apply_optimistic(s, a)
                if n not in seen:
                    seen.add(n)
                    order.append(n)
                    frontier.append(n)
    return order


def _non_subset(goals: list[int], g: int) -> bool:
    return all(g & h != g and g & h != h for h in goals)


def random_recognition_instance(rng, n_facts: int = 8, n_actions: int = 6, n_hyps: int = 3, tries: int = 200):
    """``(task, hypotheses, hidden index, plan)`` with pairwise non-subset goals.

    The hidden goal is a reachable non-initial fact set; the plan is the BFS
    plan for it.  Other hypotheses need not be reachable.
    """
    rng = make_rng(rng)
    for _ in range(tries):
        task = random_complete_task(rng, n_facts, n_actions)
        states = [s for s in reachable_states(task) if s & ~task.init]
        if not states:
            continue
        # BFS order is by depth; the deeper half gives longer plans
        s = states[int(rng.integers(len(states) // 2, len(states)))]
        new = list(bits(s & ~task.init))
        old = list(bits(s & task.init))
        size = int(rng.integers(1, min(3, len(new)) + 1))
        hidden = mask_of(int(f) for f in rng.choice(new, size=size, replace=False))
        if old and rng.random() < 0.5:
            hidden |= 1 << int(rng.choice(old))
        goals = [hidden]
        for _ in range(50):
            if len(goals) == n_hyps:
                break
            size = int(rng.integers(1, 4))
            g = mask_of(int(f) for f in rng.choice(n_facts, size=size, replace=False))
            if _non_subset(goals, g):
                goals.append(g)
        if len(goals) < 2:
            continue
        order = rng.permutation(len(goals))
        goals = [goals[i] for i in order]
        hidden_idx = int(np.where(order == 0)[0][0])
        plan = bfs_plan(task, goals[hidden_idx])
        return task, goals, hidden_idx, plan
    raise RuntimeError("could not generate an instance")


# -- a small blocks dataset ---------------------------------------------------


BLOCKS_DOMAIN = """
(define (domain blocks)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block)
               (handempty) (holding ?x - block))
  (:action pickup
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action putdown
    :parameters (?x - block)
    :precondition (and (holding ?x))
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
"""


def _random_towers(rng, blocks: list[str]) -> list[list[str]]:
    order = [blocks[i] for i in rng.permutation(len(blocks))]
    towers: list[list[str]] = []
    for b in order:
        if towers and rng.random() < 0.55:
            towers[int(rng.integers(len(towers)))].append(b)
        else:
            towers.append([b])
    return towers


def _tower_atoms(towers) -> list[tuple]:
    atoms = [("handempty",)]
    for t in towers:
        atoms.append(("ontable", t[0]))
        atoms.extend(("on", up, down) for down, up in zip(t, t[1:]))
        atoms.append(("clear", t[-1]))
    return atoms


def _word_goal(rng, blocks: list[str], length: int) -> tuple:
    word = [blocks[i] for i in rng.choice(len(blocks), size=length, replace=False)]
    atoms = [("clear", word[0]), ("ontable", word[-1])]
    atoms += [("on", up, down) for up, down in zip(word, word[1:])]
    return tuple(sorted(atoms))


def blocks_problems(rng, n: int, n_blocks: int = 5, n_hyps: int = 3):
    """Random blocks recognition problems with full plans as observations.

    Hypotheses are stacked "words" of 2-3 blocks that do not already hold
    initially; the hidden goal's BFS plan becomes the observation sequence.
    """
    from .grounding import goal_mask, ground
    from .pddl import parse_domain

    rng = make_rng(rng)
    domain = parse_domain(BLOCKS_DOMAIN)
    blocks = [chr(ord("a") + i) for i in range(n_blocks)]
    objects = tuple((b, "block") for b in blocks)
    out = []
    while len(out) < n:
        init = tuple(sorted(_tower_atoms(_random_towers(rng, blocks))))
        hyps: list[tuple] = []
        for _ in range(100):
            if len(hyps) == n_hyps:
                break
            g = _word_goal(rng, blocks, int(rng.integers(2, 4)))
            if set(g) <= set(init):
                continue
            if all(not set(g) <= set(h) and not set(h) <= set(g) for h in hyps):
                hyps.append(g)
        if len(hyps) < n_hyps:
            continue
        hidden = int(rng.integers(n_hyps))
        task = ground(domain, objects, init, goals=hyps)
        plan = bfs_plan(task, goal_mask(task, hyps[hidden]), max_facts=None)
        out.append(RecognitionProblem(domain, objects, init, tuple(hyps), hidden, tuple(plan)))
    return out


@dataclass(frozen=True)
class EvalProblem:
    """A recognition problem tagged with the experiment cell it belongs to."""

    problem: RecognitionProblem
    domain_name: str = ""
    incompleteness: int = 0
    observability: int = 100
    name: str = ""


def mini_blocks_dataset(
    seed: int = 2024,
    n_base: int = 12,
    incompleteness: Sequence[int] = (20, 40, 60, 80),
    observability: Sequence[int] = (10, 30, 50, 70, 100),
    variants: int = 3,
    n_blocks: int = 5,
) -> list[EvalProblem]:
    """Base problems x observability levels, each run against every degraded variant.

    Observations come from plans in the complete domain; recognition then
    sees only the degraded model.
    """
    from .pddl import parse_domain

    base = blocks_problems(seed, n_base, n_blocks)
    complete = parse_domain(BLOCKS_DOMAIN)
    observed = []
    for k, p in enumerate(base):
        for obs in observability:
            o = sample_observations(p.observations, obs, seed=[seed, k, obs])
            observed.append((f"p{k:02d}-o{obs}", obs, p, tuple(o)))
    out = []
    for pct in incompleteness:
        domains = degrade(complete, DegradeSpec(pct, seed=seed + pct, variants=variants))
        for v, dom in enumerate(domains):
            for name, obs, p, o in observed:
                q = RecognitionProblem(dom, p.objects, p.init, p.hypotheses, p.hidden_goal, o, name)
                out.append(EvalProblem(q, "blocks", pct, obs, f"{name}-i{pct}-v{v}"))
    return out
