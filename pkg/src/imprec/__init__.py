"""Goal recognition over incomplete STRIPS domains with landmark heuristics."""

from importlib import resources
from pathlib import Path

from .strips import (
    GroundedTask,
    IncompleteAction,
    applicable,
    apply_complete,
    apply_optimistic,
    completion_count,
    make_task,
    validate_optimistic_plan,
)
from .pddl import parse_domain, parse_problem, parse_recognition_bundle, serialize_domain
from .grounding import ground
from .graphs import BuildFailure, build_orpg, build_rpg, is_landmark
from .landmarks import (
    LandmarkSet,
    compute_achieved,
    extract_incomplete,
    extract_ordered_complete,
    extract_overlooked,
    uniqueness_values,
)
from .recognizers import HeuristicConfig, RecognitionResult, recognize, recognize_task

__all__ = [
    "GroundedTask",
    "IncompleteAction",
    "applicable",
    "apply_complete",
    "apply_optimistic",
    "completion_count",
    "make_task",
    "validate_optimistic_plan",
    "parse_domain",
    "parse_problem",
    "parse_recognition_bundle",
    "serialize_domain",
    "ground",
    "BuildFailure",
    "build_orpg",
    "build_rpg",
    "is_landmark",
    "LandmarkSet",
    "compute_achieved",
    "extract_incomplete",
    "extract_ordered_complete",
    "extract_overlooked",
    "uniqueness_values",
    "HeuristicConfig",
    "RecognitionResult",
    "recognize",
    "recognize_task",
    "bundled",
]

__version__ = "0.1.0"


def bundled(name: str) -> Path:
    """Path of a recognition bundle shipped with the package, e.g. ``"blocks-words"``."""
    path = Path(str(resources.files("imprec") / "data" / name))
    if not path.is_dir():
        raise FileNotFoundError(name)
    return path
