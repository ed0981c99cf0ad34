"""
A small incomplete domain, end to end
=====================================

Four facts on the main path (p, q, r, g) and a distractor goal h.  Some
preconditions and effects are only *possibly* there, so a recognizer has
to reason over every completion of the model at once.
"""

from imprec import (
    HeuristicConfig,
    LandmarkSet,
    build_orpg,
    build_rpg,
    bundled,
    completion_count,
    extract_incomplete,
    extract_overlooked,
    make_task,
    parse_recognition_bundle,
    recognize,
    validate_optimistic_plan,
)

problem = parse_recognition_bundle(bundled("abstract-p1"))
task = problem.ground()
print("facts:", task.facts)
print("actions:", [a.name for a in task.actions])

# Five possible literals across four operators: 2**5 candidate models.
print("completions:", completion_count(problem.domain))

# The optimistic replay assumes possible adds fire and possible deletes don't.
trace = validate_optimistic_plan(task, ["(a)", "(c)"], goal=task.state(["(g)"]))
print("optimistic trace:", [sorted(task.names(s)) for s in trace])

# Relaxed graphs: the known-only RPG versus the optimistic ORPG.
g = task.state(["(g)"])
rpg = build_rpg(task.known_projection(), g)
orpg = build_orpg(task, goal=g)
print("RPG fact levels:", [sorted(task.names(f)) for f in rpg.fact_levels])
print("ORPG fact levels:", [sorted(task.names(f)) for f in orpg.fact_levels])

# Landmarks for g split into definite and possible.
ls = extract_incomplete(task, g)
print("definite:", sorted(task.names(ls.definite)))
print("possible:", sorted(task.names(ls.possible)))

# Harvesting: suppose an extractor only knew {p, q, g}.  Observing (a)
# offers r as a candidate, and the deletion test confirms it.
small = make_task(
    ["p", "q", "r", "g"],
    [
        dict(name="a", pre=["p", "q"], poss_pre=["r"], poss_add=["r"], poss_del=["p"]),
        dict(name="b", pre=["p"], add=["r"], delete=["p"], poss_del=["q"]),
        dict(name="c", pre=["r"], poss_pre=["q"], add=["g"]),
    ],
    init=["p", "q"],
    goal=["g"],
)
partial = LandmarkSet(goal=small.goal, definite=small.state(["p", "q", "g"]))
found = extract_overlooked(small, small.goal, small.action("(a)"), partial)
print("overlooked after observing (a):", sorted(small.names(found)))

# Finally rank the two hypotheses, baseline first.
for name in ("gc_baseline", "gc_enhanced", "uniq_enhanced"):
    res = recognize(problem, HeuristicConfig(name))
    scores = {i: str(s) for i, s in res.scores.items()}
    print(f"{name:14s} scores={scores} returned={res.returned} hit={res.hit}")
