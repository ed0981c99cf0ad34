"""Fact landmark extraction and evidence tracking.

Two extractors share one back-chaining core:

* :func:`extract_incomplete` works on the optimistic graph and sorts
  landmarks into *definite* (witnessed by a known add effect) and
  *possible* (witnessed only by a possible add effect).
* :func:`extract_ordered_complete` works on the classical graph of the
  known-only projection and also records, for every landmark, the groups of
  facts that must hold together right before one of its achievers fires.
  Those groups, plus one singleton per goal fact, are the landmark *nodes*
  used by the baseline heuristics.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .graphs import CLASSICAL, OPTIMISTIC, BuildFailure, adds_for, build_graph, is_landmark
from .strips import GroundedTask, UnknownAction, bits

KINDS = "DPO"


class GoalUnreachable(Exception):
    pass


@dataclass
class LandmarkSet:
    """Landmarks of one goal.  Fact sets are bitmasks."""

    goal: int
    definite: int = 0
    possible: int = 0
    overlooked: int = 0
    together: list[int] = field(default_factory=list)
    # fact -> groups generated while processing it (ordered extraction only)
    orders: dict[int, list[int]] | None = None

    def kind(self, k: str) -> int:
        return {"D": self.definite, "P": self.possible, "O": self.overlooked}[k]

    @property
    def all(self) -> int:
        return self.definite | self.possible | self.overlooked

    def nodes(self) -> list[int]:
        """Landmark nodes: one per goal fact, then each distinct together-group."""
        out = [1 << g for g in bits(self.goal)]
        seen = set(out)
        for grp in self.together:
            if grp not in seen:
                seen.add(grp)
                out.append(grp)
        return out

    def predecessors(self, fact: int) -> list[int]:
        return (self.orders or {}).get(fact, [])

    def to_json(self, task: GroundedTask) -> dict:
        out = {
            "goal": sorted(task.names(self.goal)),
            "definite": sorted(task.names(self.definite)),
            "possible": sorted(task.names(self.possible)),
        }
        if self.overlooked:
            out["overlooked"] = sorted(task.names(self.overlooked))
        if self.orders is not None:
            out["nodes"] = [sorted(task.names(n)) for n in self.nodes()]
        return out


class _LandmarkOracle:
    """Memoised :func:`is_landmark` for one (task, goal, mode)."""

    def __init__(self, task, goal, mode, strict):
        self.task, self.goal, self.mode, self.strict = task, goal, mode, strict
        self.cache: dict[int, bool] = {}

    def __call__(self, f: int) -> bool:
        if f not in self.cache:
            if not self.strict and self.task.init >> f & 1:
                # facts of I reached by back-chaining are taken as landmarks directly
                self.cache[f] = True
            else:
                self.cache[f] = is_landmark(f, self.task, self.goal, self.mode, self.strict)
        return self.cache[f]


def _back_chain(task: GroundedTask, goal: int, mode: str, strict: bool) -> LandmarkSet:
    try:
        graph = build_graph(task, mode, goal)
    except BuildFailure:
        raise GoalUnreachable(sorted(task.names(goal))) from None
    oracle = _LandmarkOracle(task, goal, mode, strict)

    definite, possible = goal, 0
    seen = goal
    heap = list(bits(goal))
    heapq.heapify(heap)
    orders: dict[int, list[int]] = {}
    together: list[int] = []
    while heap:
        l = heapq.heappop(heap)
        level = graph.first_level_of[l]
        if level == 0:
            continue
        groups = orders.setdefault(l, [])
        for ai in bits(graph.actions_up_to(level - 1)):
            a = task.actions[ai]
            if not adds_for(a, mode) >> l & 1:
                continue
            grp = 0
            for f in bits(a.pre):
                if oracle(f):
                    grp |= 1 << f
            if a.add >> l & 1:
                definite |= grp
            else:
                possible |= grp
            if grp and grp not in groups:
                groups.append(grp)
                if grp not in together:
                    together.append(grp)
            for f in bits(grp & ~seen):
                heapq.heappush(heap, f)
            seen |= grp
    return LandmarkSet(goal, definite, possible & ~definite, 0, together, orders)


def extract_incomplete(task: GroundedTask, goal: int | None = None, strict: bool = False) -> LandmarkSet:
    """Definite and possible landmarks over the optimistic graph."""
    goal = task.goal if goal is None else goal
    ls = _back_chain(task, goal, OPTIMISTIC, strict)
    ls.orders = None
    return ls


def extract_ordered_complete(task: GroundedTask, goal: int | None = None, strict: bool = False) -> LandmarkSet:
    """Landmarks and their predecessor groups over the classical graph.

    Possible annotations are ignored, so on an incomplete task this is the
    extraction of its known-only projection.
    """
    goal = task.goal if goal is None else goal
    return _back_chain(task, goal, CLASSICAL, strict)


def extract_overlooked(
    task: GroundedTask,
    goal: int,
    obs_action,
    known: LandmarkSet,
    strict: bool = False,
) -> int:
    """Facts of an observed action that extraction missed but that are landmarks."""
    candidates = (obs_action.pre | obs_action.add | obs_action.poss_add) & ~known.all
    found = 0
    for f in bits(candidates):
        if is_landmark(f, task, goal, OPTIMISTIC, strict):
            found |= 1 << f
    return found


# -- evidence -------------------------------------------------------------


@dataclass
class Achieved:
    """Achieved landmarks of one goal.  ``nodes`` is set only for ordered sets."""

    definite: int = 0
    possible: int = 0
    overlooked: int = 0
    nodes: frozenset[int] | None = None

    def kind(self, k: str) -> int:
        return {"D": self.definite, "P": self.possible, "O": self.overlooked}[k]


@dataclass
class AchievedLandmarks:
    per_goal: dict[int, Achieved]


def observed_facts(action) -> int:
    return action.pre | action.add | action.poss_add


def resolve_observations(task: GroundedTask, observations: Iterable) -> list:
    out = []
    for o in observations:
        if isinstance(o, str):
            try:
                o = task.action(o)
            except UnknownAction:
                from .pddl import UnresolvableObservation

                raise UnresolvableObservation(o) from None
        out.append(o)
    return out


def required_facts(node: int, goal: int) -> int:
    """Facts of a node that need evidence; goal facts in a group count for their own subgoal."""
    if node & (node - 1) == 0:
        return node
    rest = node & ~goal
    return rest or node


def _mark_with_predecessors(ls: LandmarkSet, node: int, marked: set[int]):
    stack = [node]
    while stack:
        n = stack.pop()
        if n in marked:
            continue
        marked.add(n)
        for f in bits(required_facts(n, ls.goal)):
            stack.extend(ls.predecessors(f))


def achieved_nodes(ls: LandmarkSet, evidence: int) -> frozenset[int]:
    marked: set[int] = set()
    for n in ls.nodes():
        if required_facts(n, ls.goal) & ~evidence == 0:
            _mark_with_predecessors(ls, n, marked)
    return frozenset(marked)


def compute_achieved(
    task: GroundedTask,
    hypotheses: Sequence[int],
    observations: Iterable,
    landmark_sets: Sequence[LandmarkSet],
    harvest: bool = False,
    strict: bool = False,
) -> AchievedLandmarks:
    """Replay ``observations`` against every hypothesis' landmarks.

    Sets with ``orders`` use node evidence with predecessor inference.  The
    others are tracked per fact; with ``harvest`` the overlooked landmarks
    are mined on the fly and stored in the landmark set (which is mutated).
    """
    obs = resolve_observations(task, observations)
    per_goal = {}
    for gi, (goal, ls) in enumerate(zip(hypotheses, landmark_sets)):
        if ls is None:
            continue
        if ls.orders is not None:
            evidence = task.init
            for o in obs:
                evidence |= observed_facts(o)
            nodes = achieved_nodes(ls, evidence)
            facts = 0
            for n in nodes:
                facts |= n
            per_goal[gi] = Achieved(definite=facts & ls.definite, nodes=nodes)
            continue
        got = ls.all & task.init
        for o in obs:
            seen = observed_facts(o)
            if harvest:
                new = extract_overlooked(task, goal, o, ls, strict)
                ls.overlooked |= new
                got |= new
            got |= ls.all & seen
        per_goal[gi] = Achieved(got & ls.definite, got & ls.possible, got & ls.overlooked)
    return AchievedLandmarks(per_goal)


# -- uniqueness -------------------------------------------------------------


def uniqueness_values(landmark_sets: Iterable[LandmarkSet | None], kinds: str = KINDS) -> dict[tuple[str, int], Fraction]:
    """Per-kind inverse frequency of each fact across the goals."""
    counts: dict[tuple[str, int], int] = {}
    for ls in landmark_sets:
        if ls is None:
            continue
        for k in kinds:
            for f in bits(ls.kind(k)):
                counts[k, f] = counts.get((k, f), 0) + 1
    return {key: Fraction(1, n) for key, n in counts.items()}


def node_uniqueness(landmark_sets: Iterable[LandmarkSet | None]) -> dict[int, Fraction]:
    """Pooled inverse frequency of each landmark node across the goals."""
    counts: dict[int, int] = {}
    for ls in landmark_sets:
        if ls is None:
            continue
        for n in ls.nodes():
            counts[n] = counts.get(n, 0) + 1
    return {n: Fraction(1, c) for n, c in counts.items()}


def subgoal_nodes(ls: LandmarkSet, g: int) -> list[int]:
    """Nodes needed for the single goal fact ``g``; other goal facts are not expanded."""
    start = 1 << g
    out, seen = [], set()
    stack = [start]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        out.append(n)
        for f in bits(n):
            if f != g and ls.goal >> f & 1:
                continue
            stack.extend(ls.predecessors(f))
    return out
