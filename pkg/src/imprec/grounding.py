"""Instantiate a lifted domain over a set of objects."""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .pddl import LiftedDomain, Literal, fmt_literal
from .strips import GroundedTask, IncompleteAction, mask_of, normalize_atom


def objects_of_type(domain: LiftedDomain, objects: Iterable[tuple[str, str]]) -> dict[str, list[str]]:
    """Map every declared type (and ``object``) to the objects that belong to it."""
    pool = list(dict.fromkeys(list(domain.constants) + list(objects)))
    types = {"object", *domain.types, *domain.types.values(), *(t for _, t in pool)}
    return {t: sorted({o for o, ot in pool if domain.is_subtype(ot, t)}) for t in types}


def _subst(lits: Sequence[Literal], binding: dict[str, str]) -> list[str]:
    return [fmt_literal((l[0], *(binding.get(a, a) for a in l[1:]))) for l in lits]


def ground_operator(op, by_type: dict[str, list[str]]):
    """Yield ``(signature, {list name: [atom, ...]})`` for every typed assignment."""
    names = [p for p, _ in op.parameters]
    domains = [by_type.get(t, []) for _, t in op.parameters]
    for combo in itertools.product(*domains):
        binding = dict(zip(names, combo))
        sig = "(" + " ".join([op.name, *combo]) + ")"
        yield sig, {k: _subst(getattr(op, k), binding) for k in op.LISTS}


def ground(
    domain: LiftedDomain,
    objects: Iterable[tuple[str, str]],
    init: Iterable[Literal],
    goals: Iterable[Iterable[Literal]] = (),
    keep: Iterable[str] = (),
    prune: bool = True,
) -> GroundedTask:
    """Ground ``domain``; actions unreachable under optimistic relaxation are dropped.

    ``goals`` contributes atoms to the fact table even when unreachable.
    Actions named in ``keep`` (observations) always survive pruning.
    """
    by_type = objects_of_type(domain, objects)
    init_atoms = {fmt_literal(l) for l in init}
    goal_atoms = {fmt_literal(l) for g in goals for l in g}
    keep = {normalize_atom(k) for k in keep}

    candidates = []
    for op in domain.operators:
        for sig, lists in ground_operator(op, by_type):
            candidates.append((op.name, sig, lists))

    if prune:
        reached = set(init_atoms)
        alive = [False] * len(candidates)
        changed = True
        while changed:
            changed = False
            for i, (_, sig, lists) in enumerate(candidates):
                if not alive[i] and reached.issuperset(lists["pre"]):
                    alive[i] = True
                    changed = True
                    reached.update(lists["add"], lists["poss_add"])
        candidates = [c for i, c in enumerate(candidates) if alive[i] or c[1] in keep]

    atoms = set(init_atoms) | goal_atoms
    for _, _, lists in candidates:
        for v in lists.values():
            atoms.update(v)
    facts = tuple(sorted(atoms))
    index = {f: i for i, f in enumerate(facts)}

    def m(xs):
        return mask_of(index[x] for x in xs)

    def make(op_name, sig, lists):
        masks = {k: m(v) for k, v in lists.items()}
        # distinct lifted literals can collapse onto one atom; known wins
        masks["poss_pre"] &= ~masks["pre"]
        masks["poss_add"] &= ~masks["add"]
        masks["poss_del"] &= ~masks["delete"]
        return IncompleteAction(sig, operator=op_name, **masks)

    actions = tuple(make(*c) for c in sorted(candidates, key=lambda c: c[1]))
    all_objects = tuple(dict.fromkeys(list(domain.constants) + list(objects)))
    return GroundedTask(facts, actions, m(init_atoms), 0, all_objects, domain)


def goal_mask(task: GroundedTask, goal: Iterable[Literal]) -> int:
    return task.state(fmt_literal(l) for l in goal)
