"""
Degrading a domain and scoring a heuristic sweep
================================================

Start from complete blocks-world, hide a share of its literals behind
"possible" annotations, then evaluate recognizers on the result.
"""

import numpy as np

from imprec import completion_count, parse_domain, serialize_domain
from imprec.datasets import BLOCKS_DOMAIN, DegradeSpec, degrade, mini_blocks_dataset, sample_observations
from imprec.evaluation import evaluate, landmark_f1_correlation, mean_f1_by
from imprec.recognizers import HeuristicConfig

complete = parse_domain(BLOCKS_DOMAIN)
print("complete domain, completions:", completion_count(complete))

# Each variant comes from its own child seed, so runs are reproducible.
for pct in (20, 60):
    variants = degrade(complete, DegradeSpec(pct, seed=7, variants=2))
    print(f"{pct}%: completions per variant", [completion_count(d) for d in variants])
text = serialize_domain(degrade(complete, DegradeSpec(40, seed=7, variants=1))[0])
print("\n".join(text.splitlines()[:15]))

# Observations keep plan order; the count is ceil(percent * len / 100).
plan = ["(unstack d b)", "(putdown d)", "(unstack e a)", "(stack e d)", "(pickup r)", "(stack r e)"]
for pct in (10, 50, 100):
    print(f"{pct:3d}% observed:", sample_observations(plan, pct, seed=1))

# A small grid: 4 base problems, 2 observability levels, 2 incompleteness levels.
problems = mini_blocks_dataset(seed=11, n_base=4, incompleteness=(20, 60), observability=(30, 100), variants=1)
configs = [HeuristicConfig("gc_baseline"), HeuristicConfig("gc_enhanced"), HeuristicConfig("uniq_enhanced")]
rows = evaluate(problems, configs)

for key in ("incompleteness_percent", "observability_percent"):
    print("mean F1 by", key)
    for (cfg, level), f1 in sorted(mean_f1_by(rows, key).items()):
        print(f"  {cfg:20s} {level:4d}  {float(f1):.3f}")

# Landmark counts vs F1, one Pearson value per kind.  With only two
# incompleteness groups every defined value is +1 or -1; zero marks a constant count.
for cfg, corr in landmark_f1_correlation(rows).items():
    print(cfg, {k: (v if isinstance(v, float) else float(v)) for k, v in corr.items()})

spread = np.array([float(r.spread) for r in rows])
print("mean spread over rows:", spread.mean().round(3))
