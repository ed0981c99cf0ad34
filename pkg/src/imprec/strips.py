"""Grounded STRIPS tasks with possible (uncertain) preconditions and effects.

States and fact sets are Python ints used as bitsets: fact ``i`` is true in
state ``s`` iff ``s >> i & 1``.  Fact ids are dense indices into
:attr:`GroundedTask.facts`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

State = int


class StripsError(Exception):
    """Base class for task-level semantic errors."""


class NotApplicable(StripsError):
    pass


class NotComplete(StripsError):
    pass


class UnknownAction(StripsError):
    pass


class StepNotApplicable(StripsError):
    def __init__(self, index: int, action: str):
        super().__init__(f"step {index} ({action}) is not applicable")
        self.index = index
        self.action = action


class GoalNotSatisfied(StripsError):
    def __init__(self, trace: list[State]):
        super().__init__("final state does not satisfy the goal")
        self.trace = trace


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << int(i)
    return m


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class IncompleteAction:
    """A ground action.  All fact lists are bitsets over the task's fact table.

    ``operator`` names the lifted operator the action was instantiated from,
    if any; it is what completion counting keys on.
    """

    name: str
    pre: int = 0
    add: int = 0
    delete: int = 0
    poss_pre: int = 0
    poss_add: int = 0
    poss_del: int = 0
    operator: str | None = None

    def __post_init__(self):
        if self.pre & self.poss_pre or self.add & self.poss_add or self.delete & self.poss_del:
            raise ValueError(f"{self.name}: a fact is both known and possible in the same list")

    @property
    def is_complete(self) -> bool:
        return not (self.poss_pre or self.poss_add or self.poss_del)

    @property
    def optimistic_add(self) -> int:
        return self.add | self.poss_add

    def known_projection(self) -> IncompleteAction:
        return IncompleteAction(self.name, self.pre, self.add, self.delete, operator=self.operator)


@dataclass(frozen=True)
class GroundedTask:
    """``facts[i]`` is the printable name of fact ``i``, e.g. ``"(on a b)"``."""

    facts: tuple[str, ...]
    actions: tuple[IncompleteAction, ...]
    init: State
    goal: State = 0
    objects: tuple[tuple[str, str], ...] = ()
    domain: object | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        limit = 1 << len(self.facts)
        for m in (self.init, self.goal):
            if m >= limit:
                raise ValueError("fact reference out of range")
        for a in self.actions:
            if max(a.pre, a.add, a.delete, a.poss_pre, a.poss_add, a.poss_del) >= limit:
                raise ValueError(f"{a.name}: fact reference out of range")

    # -- lookup helpers -------------------------------------------------

    @property
    def fact_index(self) -> dict[str, int]:
        idx = self.__dict__.get("_fact_index")
        if idx is None:
            idx = {f: i for i, f in enumerate(self.facts)}
            object.__setattr__(self, "_fact_index", idx)
        return idx

    @property
    def action_index(self) -> dict[str, int]:
        idx = self.__dict__.get("_action_index")
        if idx is None:
            idx = {a.name: i for i, a in enumerate(self.actions)}
            object.__setattr__(self, "_action_index", idx)
        return idx

    def fact_id(self, name: str) -> int:
        return self.fact_index[normalize_atom(name)]

    def state(self, names: Iterable[str]) -> State:
        return mask_of(self.fact_id(n) for n in names)

    def names(self, mask: int) -> set[str]:
        return {self.facts[i] for i in bits(mask)}

    def action(self, name: str) -> IncompleteAction:
        try:
            return self.actions[self.action_index[normalize_atom(name)]]
        except KeyError:
            raise UnknownAction(name) from None

    @property
    def is_complete(self) -> bool:
        return all(a.is_complete for a in self.actions)

    def with_goal(self, goal: State) -> GroundedTask:
        return GroundedTask(self.facts, self.actions, self.init, goal, self.objects, self.domain)

    def known_projection(self) -> GroundedTask:
        """The task with every possible precondition and effect dropped."""
        return GroundedTask(
            self.facts,
            tuple(a.known_projection() for a in self.actions),
            self.init,
            self.goal,
            self.objects,
            None,
        )


def normalize_atom(text: str) -> str:
    """Canonical spelling of a ground atom or action signature: ``(on a b)``."""
    inner = text.strip()
    if inner.startswith("(") and inner.endswith(")"):
        inner = inner[1:-1]
    return "(" + " ".join(inner.lower().split()) + ")"


def applicable(state: State, action: IncompleteAction, strict: bool = False) -> bool:
    """Known preconditions gate applicability; ``strict`` also demands possible ones."""
    need = action.pre | action.poss_pre if strict else action.pre
    return state & need == need


def apply_optimistic(state: State, action: IncompleteAction, strict: bool = False) -> State:
    """Most-optimistic successor: possible adds happen, possible deletes do not."""
    if not applicable(state, action, strict):
        raise NotApplicable(action.name)
    return (state & ~action.delete) | action.add | action.poss_add


def apply_complete(state: State, action: IncompleteAction) -> State:
    if not action.is_complete:
        raise NotComplete(action.name)
    if not applicable(state, action):
        raise NotApplicable(action.name)
    return (state | action.add) & ~action.delete


def validate_optimistic_plan(
    task: GroundedTask,
    plan: Sequence[str],
    goal: State | None = None,
    strict: bool = False,
) -> list[State]:
    """Replay ``plan`` under optimistic semantics and return states s0..sn."""
    goal = task.goal if goal is None else goal
    actions = [task.action(name) for name in plan]
    state = task.init
    trace = [state]
    for i, a in enumerate(actions):
        if not applicable(state, a, strict):
            raise StepNotApplicable(i, a.name)
        state = apply_optimistic(state, a, strict)
        trace.append(state)
    if state & goal != goal:
        raise GoalNotSatisfied(trace)
    return trace


def completion_count(model) -> int:
    """Size of the completion set, ``2**K``.

    ``model`` is a lifted domain (anything with ``operators``) or a
    :class:`GroundedTask`.  Grounded tasks that still carry their lifted
    domain are counted at operator level.
    """
    operators = getattr(model, "operators", None)
    if operators is None and getattr(model, "domain", None) is not None:
        operators = model.domain.operators
    if operators is not None:
        k = sum(len(op.poss_pre) + len(op.poss_add) + len(op.poss_del) for op in operators)
        return 2**k
    logger.warning("no operator provenance; counting possible literals over ground actions")
    k = sum(popcount(a.poss_pre) + popcount(a.poss_add) + popcount(a.poss_del) for a in model.actions)
    return 2**k


def make_task(
    facts: Sequence[str],
    actions: Iterable[dict],
    init: Iterable[str],
    goal: Iterable[str] = (),
) -> GroundedTask:
    """Build a task from plain names; handy for tests and small hand-built examples.

    Each action dict has ``name`` and any of ``pre, add, delete, poss_pre,
    poss_add, poss_del`` as iterables of fact names.
    """
    facts = tuple(normalize_atom(f) for f in facts)
    index = {f: i for i, f in enumerate(facts)}

    def m(names):
        return mask_of(index[normalize_atom(n)] for n in names)

    built = []
    for spec in actions:
        built.append(
            IncompleteAction(
                normalize_atom(spec["name"]),
                **{k: m(spec.get(k, ())) for k in ("pre", "add", "delete", "poss_pre", "poss_add", "poss_del")},
            )
        )
    return GroundedTask(facts, tuple(built), m(init), m(goal))
