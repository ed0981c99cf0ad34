"""Leveled relaxed planning graphs, classical and optimistic."""

from __future__ import annotations

from dataclasses import dataclass, field

from .strips import GroundedTask, bits

CLASSICAL = "classical"
OPTIMISTIC = "optimistic"


class BuildFailure(Exception):
    """Fixpoint reached before the goal.  ``graph`` holds the partial build."""

    def __init__(self, graph: LeveledGraph):
        super().__init__("goal unreachable in the relaxed planning graph")
        self.graph = graph


@dataclass
class LeveledGraph:
    mode: str
    fact_levels: list[int] = field(default_factory=list)
    action_levels: list[int] = field(default_factory=list)  # bitsets over action ids
    first_level_of: dict[int, int] = field(default_factory=dict)
    action_level_of: dict[int, int] = field(default_factory=dict)
    achievers_of: dict[int, tuple[int, ...]] = field(default_factory=dict)
    goal_reached: bool = False

    @property
    def last(self) -> int:
        return self.fact_levels[-1]

    def actions_up_to(self, level: int) -> int:
        if level < 0 or not self.action_levels:
            return 0
        return self.action_levels[min(level, len(self.action_levels) - 1)]

    def to_json(self, task: GroundedTask) -> dict:
        return {
            "mode": self.mode,
            "goal_reached": self.goal_reached,
            "fact_levels": [sorted(task.names(f)) for f in self.fact_levels],
            "action_levels": [[task.actions[i].name for i in bits(a)] for a in self.action_levels],
        }


def adds_for(action, mode: str) -> int:
    return action.add | action.poss_add if mode == OPTIMISTIC else action.add


def build_graph(
    task: GroundedTask,
    mode: str = OPTIMISTIC,
    goal: int | None = None,
    excluded_achievers_of: int | None = None,
    strict: bool = False,
    exclude_from_init: bool = False,
) -> LeveledGraph:
    """Build levels until ``goal`` holds (or the fixpoint if ``goal`` is None).

    In optimistic mode only known preconditions gate an action unless
    ``strict`` is set; possible add effects always fire.  In classical mode
    possible lists are ignored entirely.
    """
    goal = task.goal if goal is None else goal
    optimistic = mode == OPTIMISTIC
    init = task.init
    pending = []
    for i, a in enumerate(task.actions):
        add = adds_for(a, mode)
        if excluded_achievers_of is not None and add >> excluded_achievers_of & 1:
            continue
        need = a.pre | a.poss_pre if (strict and optimistic) else a.pre
        pending.append((i, need, add))
    if excluded_achievers_of is not None and exclude_from_init:
        init &= ~(1 << excluded_achievers_of)

    g = LeveledGraph(mode)
    facts, acts = init, 0
    for f in bits(facts):
        g.first_level_of[f] = 0
    while True:
        level = len(g.fact_levels)
        g.fact_levels.append(facts)
        if facts & goal == goal:
            g.goal_reached = True
            break
        grown = facts
        rest = []
        for i, need, add in pending:
            if facts & need == need:
                acts |= 1 << i
                g.action_level_of[i] = level
                grown |= add
            else:
                rest.append((i, need, add))
        pending = rest
        g.action_levels.append(acts)
        if grown == facts:
            break
        for f in bits(grown & ~facts):
            g.first_level_of[f] = level + 1
        facts = grown

    achievers: dict[int, list[int]] = {}
    for i in bits(acts):
        for f in bits(adds_for(task.actions[i], mode)):
            achievers.setdefault(f, []).append(i)
    g.achievers_of = {f: tuple(v) for f, v in achievers.items()}
    if not g.goal_reached and goal is not None:
        raise BuildFailure(g)
    return g


def build_rpg(task: GroundedTask, goal: int | None = None) -> LeveledGraph:
    """Classical delete relaxation; possible annotations are ignored."""
    return build_graph(task, CLASSICAL, goal)


def build_orpg(
    task: GroundedTask,
    excluded_achievers_of: int | None = None,
    goal: int | None = None,
    strict: bool = False,
    exclude_from_init: bool = False,
) -> LeveledGraph:
    """Optimistic relaxation: known preconditions gate, possible adds always fire."""
    return build_graph(task, OPTIMISTIC, goal, excluded_achievers_of, strict, exclude_from_init)


def reachable_facts(task: GroundedTask, mode: str = OPTIMISTIC) -> int:
    """Every fact the relaxation can reach; builds to the fixpoint."""
    full = (1 << len(task.facts)) - 1
    try:
        g = build_graph(task, mode, goal=full)
    except BuildFailure as e:
        g = e.graph
    return g.last


def is_landmark(
    f: int,
    task: GroundedTask,
    goal: int | None = None,
    mode: str = OPTIMISTIC,
    strict: bool = False,
) -> bool:
    """Deletion test: ``f`` is a landmark if removing its achievers cuts the goal off.

    With ``strict`` the fact is also removed from the initial state, so facts
    of ``I`` can qualify.  Goal facts are landmarks by definition.
    """
    goal = task.goal if goal is None else goal
    if goal >> f & 1:
        return True
    try:
        build_graph(task, mode, goal, excluded_achievers_of=f, exclude_from_init=strict)
    except BuildFailure:
        return True
    return False
