"""Landmark-based goal recognition heuristics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .landmarks import (
    KINDS,
    Achieved,
    GoalUnreachable,
    LandmarkSet,
    compute_achieved,
    extract_incomplete,
    extract_ordered_complete,
    node_uniqueness,
    subgoal_nodes,
    uniqueness_values,
)
from .strips import GroundedTask, bits, popcount

logger = logging.getLogger(__name__)

HEURISTICS = ("gc_baseline", "uniq_baseline", "gc_enhanced", "uniq_enhanced")


def parse_kinds(text: str) -> str:
    """Normalise an ablation mask such as ``"dpo"`` to ``"DPO"``."""
    letters = text.upper()
    bad = set(letters) - set(KINDS)
    if bad or not letters:
        raise ValueError(f"landmark kinds must be a non-empty string over D, P, O (got {text!r})")
    return "".join(k for k in KINDS if k in letters)


@dataclass(frozen=True)
class HeuristicConfig:
    heuristic: str = "gc_enhanced"
    kinds: str = KINDS
    theta: Fraction = Fraction(0)
    strict_islandmark: bool = False

    def __post_init__(self):
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        kinds = "D" if self.is_baseline else parse_kinds(self.kinds)
        object.__setattr__(self, "kinds", kinds)
        theta = Fraction(self.theta)
        if theta < 0:
            raise ValueError("theta must be non-negative")
        object.__setattr__(self, "theta", theta)

    @property
    def is_baseline(self) -> bool:
        return self.heuristic.endswith("_baseline")

    @property
    def label(self) -> str:
        return self.heuristic if self.is_baseline else f"{self.heuristic}[{self.kinds}]"


@dataclass
class RecognitionResult:
    scores: dict[int, Fraction]
    returned: list[int]
    hidden: int | None = None
    all_unreachable: bool = False
    landmark_counts: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    @property
    def hit(self) -> bool:
        return self.hidden is not None and self.hidden in self.returned

    @property
    def spread(self) -> int:
        return len(self.returned)

    def to_json(self) -> dict:
        return {
            "scores": {str(i): float(s) for i, s in sorted(self.scores.items())},
            "scores_exact": {str(i): str(s) for i, s in sorted(self.scores.items())},
            "returned": sorted(self.returned),
            "spread": self.spread,
            "hidden": self.hidden,
            "hit": self.hit,
            "all_unreachable": self.all_unreachable,
        }


def _ratio(num, den) -> Fraction:
    return Fraction(num) / Fraction(den) if den else Fraction(0)


# -- scores -----------------------------------------------------------------


def score_gc_enhanced(ls: LandmarkSet, ach: Achieved, kinds: str = KINDS) -> Fraction:
    num = sum(popcount(ach.kind(k)) for k in kinds)
    den = sum(popcount(ls.kind(k)) for k in kinds)
    return _ratio(num, den)


def score_uniq_enhanced(
    ls: LandmarkSet, ach: Achieved, uniq: dict[tuple[str, int], Fraction], kinds: str = KINDS
) -> Fraction:
    num = sum((uniq[k, f] for k in kinds for f in bits(ach.kind(k))), Fraction(0))
    den = sum((uniq[k, f] for k in kinds for f in bits(ls.kind(k))), Fraction(0))
    return _ratio(num, den)


def score_gc_baseline(ls: LandmarkSet, ach: Achieved) -> Fraction:
    """Mean over goal facts of the achieved share of that fact's landmark nodes."""
    goal_facts = list(bits(ls.goal))
    if not goal_facts:
        return Fraction(0)
    total = Fraction(0)
    for g in goal_facts:
        nodes = subgoal_nodes(ls, g)
        hit = sum(1 for n in nodes if n in ach.nodes)
        if nodes:
            total += Fraction(hit, len(nodes))
        elif (1 << g) in ach.nodes:
            total += 1
    return total / len(goal_facts)


def score_uniq_baseline(ls: LandmarkSet, ach: Achieved, uniq: dict[int, Fraction]) -> Fraction:
    nodes = ls.nodes()
    num = sum((uniq[n] for n in nodes if n in ach.nodes), Fraction(0))
    den = sum((uniq[n] for n in nodes), Fraction(0))
    return _ratio(num, den)


# -- recognition --------------------------------------------------------------


def extract_all(task: GroundedTask, hypotheses: Sequence[int], cfg: HeuristicConfig) -> list[LandmarkSet | None]:
    sets = []
    for goal in hypotheses:
        try:
            if cfg.is_baseline:
                sets.append(extract_ordered_complete(task, goal, cfg.strict_islandmark))
            else:
                sets.append(extract_incomplete(task, goal, cfg.strict_islandmark))
        except GoalUnreachable:
            sets.append(None)
    return sets


def score_all(
    task: GroundedTask,
    hypotheses: Sequence[int],
    observations: Sequence,
    cfg: HeuristicConfig,
    landmark_sets: list[LandmarkSet | None] | None = None,
) -> tuple[dict[int, Fraction], list[LandmarkSet | None]]:
    """Scores for every hypothesis; unreachable ones score 0.

    Enhanced heuristics with ``O`` in the mask mine overlooked landmarks
    into the returned landmark sets.
    """
    if cfg.is_baseline:
        task = task.known_projection()
    sets = landmark_sets if landmark_sets is not None else extract_all(task, hypotheses, cfg)
    harvest = not cfg.is_baseline and "O" in cfg.kinds
    achieved = compute_achieved(task, hypotheses, observations, sets, harvest, cfg.strict_islandmark)
    scores: dict[int, Fraction] = {}
    if cfg.heuristic == "uniq_baseline":
        uniq_nodes = node_uniqueness(sets)
    elif cfg.heuristic == "uniq_enhanced":
        uniq = uniqueness_values(sets, cfg.kinds)
    for i, ls in enumerate(sets):
        if ls is None:
            scores[i] = Fraction(0)
            continue
        ach = achieved.per_goal[i]
        if cfg.heuristic == "gc_baseline":
            scores[i] = score_gc_baseline(ls, ach)
        elif cfg.heuristic == "uniq_baseline":
            scores[i] = score_uniq_baseline(ls, ach, uniq_nodes)
        elif cfg.heuristic == "gc_enhanced":
            scores[i] = score_gc_enhanced(ls, ach, cfg.kinds)
        else:
            scores[i] = score_uniq_enhanced(ls, ach, uniq, cfg.kinds)
    return scores, sets


def select(scores: dict[int, Fraction], reachable: Sequence[bool], theta: Fraction) -> tuple[list[int], bool]:
    live = [i for i in scores if reachable[i]]
    if not live:
        return sorted(scores), True
    top = max(scores[i] for i in live)
    return [i for i in sorted(live) if scores[i] >= top - theta], False


def recognize_task(
    task: GroundedTask,
    hypotheses: Sequence[int],
    observations: Sequence,
    cfg: HeuristicConfig = HeuristicConfig(),
    hidden: int | None = None,
) -> RecognitionResult:
    scores, sets = score_all(task, hypotheses, observations, cfg)
    returned, none_reachable = select(scores, [s is not None for s in sets], cfg.theta)
    if none_reachable and scores:
        logger.debug("no hypothesis is reachable; returning all of them")
    counts = {
        i: (popcount(ls.definite), popcount(ls.possible), popcount(ls.overlooked))
        for i, ls in enumerate(sets)
        if ls is not None
    }
    return RecognitionResult(scores, returned, hidden, none_reachable, counts)


def recognize(problem, cfg: HeuristicConfig = HeuristicConfig()) -> RecognitionResult:
    """Rank the hypotheses of a :class:`~imprec.pddl.RecognitionProblem`."""
    from .grounding import goal_mask

    task = problem.ground()
    hyps = [goal_mask(task, h) for h in problem.hypotheses]
    return recognize_task(task, hyps, problem.observations, cfg, problem.hidden_goal)
