"""
Spelling words with blocks
==========================

Three candidate words, a short observed prefix, and a domain where some
operators carry possible literals.  We compare the landmark kinds each
heuristic can use.
"""

import dataclasses

from imprec import HeuristicConfig, bundled, extract_incomplete, parse_recognition_bundle, recognize
from imprec.grounding import goal_mask

problem = parse_recognition_bundle(bundled("blocks-words"))
task = problem.ground()
print(f"{len(task.facts)} facts, {len(task.actions)} ground actions")
print("observed:", problem.observations)

for i, hyp in enumerate(problem.hypotheses):
    ls = extract_incomplete(task, goal_mask(task, hyp))
    mark = "*" if i == problem.hidden_goal else " "
    print(f"{mark} H{i}: {len(list(ls.nodes()))} nodes, "
          f"{bin(ls.definite).count('1')} definite, {bin(ls.possible).count('1')} possible")

# The kinds string picks which landmark categories count toward a score.
configs = [
    HeuristicConfig("gc_baseline"),
    HeuristicConfig("uniq_baseline"),
    HeuristicConfig("gc_enhanced", kinds="D"),
    HeuristicConfig("gc_enhanced", kinds="DP"),
    HeuristicConfig("gc_enhanced"),
    HeuristicConfig("uniq_enhanced"),
]
for cfg in configs:
    res = recognize(problem, cfg)
    row = "  ".join(f"H{i}={float(s):.3f}" for i, s in sorted(res.scores.items()))
    print(f"{cfg.label:22s} {row}  -> {res.returned}")

# A positive threshold widens the returned set to near-ties.
res = recognize(problem, HeuristicConfig("gc_enhanced", theta="1/5"))
print("theta=0.2 returns", res.returned)

# With only the first two steps seen, the words are harder to tell apart.
short = dataclasses.replace(problem, observations=problem.observations[:2])
for cfg in (HeuristicConfig("gc_baseline"), HeuristicConfig("gc_enhanced")):
    res = recognize(short, cfg)
    print(f"2 obs, {cfg.label:18s}", {i: round(float(s), 3) for i, s in res.scores.items()}, "->", res.returned)
