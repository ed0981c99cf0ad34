"""Batch evaluation and metrics: accuracy, spread, precision, recall, F1, ROC."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .datasets import EvalProblem
from .recognizers import HeuristicConfig, recognize

DEFAULT_TIMEOUT = 120.0


class LengthMismatch(ValueError):
    pass


def default_timeout() -> float:
    env = os.environ.get("IMPREC_TIMEOUT_SECS")
    return float(env) if env else DEFAULT_TIMEOUT


@dataclass(frozen=True)
class Outcome:
    """Result of one (problem, config) run."""

    name: str
    domain_name: str
    incompleteness: int
    observability: int
    config: str
    n_hypotheses: int
    returned: tuple[int, ...] = ()
    hidden: int | None = None
    landmark_counts: tuple[float, float, float] = (0.0, 0.0, 0.0)
    seconds: float = 0.0
    timed_out: bool = False
    error: str | None = None

    @property
    def hit(self) -> bool:
        return self.hidden is not None and self.hidden in self.returned

    @property
    def ok(self) -> bool:
        return not self.timed_out and self.error is None


@dataclass(frozen=True)
class EvalRow:
    domain_name: str
    incompleteness_percent: int
    observability_percent: int
    config: str
    n_problems: int
    accuracy: Fraction
    spread: Fraction
    precision: Fraction
    recall: Fraction
    f1: Fraction
    mean_landmark_counts: tuple[float, float, float]
    wallclock_per_problem: float
    n_timed_out: int = 0
    n_failed: int = 0

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("accuracy", "spread", "precision", "recall", "f1"):
            d[k] = float(d[k])
        d["mean_landmark_counts"] = list(self.mean_landmark_counts)
        return d


@dataclass(frozen=True)
class RocPoint:
    tpr: Fraction
    fpr: Fraction
    label: str


# -- metrics ----------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    n: int
    accuracy: Fraction
    spread: Fraction
    precision: Fraction
    recall: Fraction
    f1: Fraction


def confusion(returned: Iterable[int], hidden: int | None) -> tuple[int, int, int]:
    """Per-problem (TP, FP, FN) with a single hidden goal."""
    returned = set(returned)
    tp = int(hidden in returned)
    return tp, len(returned) - tp, 1 - tp


def metrics(results: Iterable[tuple[Iterable[int], int | None]]) -> Metrics:
    """Aggregate ``(returned, hidden)`` pairs; precision and recall use summed counts."""
    n = tp = fp = fn = size = 0
    for returned, hidden in results:
        returned = list(returned)
        a, b, c = confusion(returned, hidden)
        tp, fp, fn = tp + a, fp + b, fn + c
        size += len(set(returned))
        n += 1
    if n == 0:
        zero = Fraction(0)
        return Metrics(0, zero, zero, zero, zero, zero)
    p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return Metrics(n, Fraction(tp, n), Fraction(size, n), p, r, f1)


def _exact_sqrt(x: Fraction) -> Fraction | None:
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def pearson(xs: Sequence, ys: Sequence) -> Fraction | float:
    """Sample Pearson correlation, exact when the result is rational; 0 on zero variance."""
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} != {len(ys)}")
    if len(xs) < 2:
        raise LengthMismatch("need at least two points")
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return Fraction(0)
    root = _exact_sqrt(sxx * syy)
    if root is not None:
        return sxy / root
    return float(sxy) / math.sqrt(sxx * syy)


def roc_point(returned: Iterable[int], hidden: int | None, n_hypotheses: int) -> tuple[Fraction, Fraction]:
    returned = set(returned)
    hit = int(hidden in returned)
    tpr = Fraction(hit)
    fpr = Fraction(len(returned) - hit, n_hypotheses - 1) if n_hypotheses > 1 else Fraction(0)
    return tpr, fpr


def roc_points(outcomes: Iterable[Outcome], aggregate: bool = False) -> list[RocPoint]:
    """One point per problem, or per-(domain, incompleteness, config) means."""
    points = []
    groups: dict[tuple, list[tuple[Fraction, Fraction]]] = {}
    for o in outcomes:
        if not o.ok:
            continue
        tpr, fpr = roc_point(o.returned, o.hidden, o.n_hypotheses)
        label = f"{o.config}@{o.incompleteness}%"
        if aggregate:
            groups.setdefault((o.domain_name, o.incompleteness, o.config), []).append((tpr, fpr))
        else:
            points.append(RocPoint(tpr, fpr, f"{o.name}:{label}"))
    for (dom, inc, cfg), pts in sorted(groups.items()):
        n = len(pts)
        points.append(RocPoint(sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n, f"{dom}:{cfg}@{inc}%"))
    return points


# -- running ------------------------------------------------------------------


def run_one(ep: EvalProblem, cfg: HeuristicConfig, timeout: float | None = None) -> Outcome:
    """Recognise one problem.  The timeout is checked after the run finishes."""
    timeout = default_timeout() if timeout is None else timeout
    base = dict(
        name=ep.name or ep.problem.name,
        domain_name=ep.domain_name or ep.problem.domain.name,
        incompleteness=ep.incompleteness,
        observability=ep.observability,
        config=cfg.label,
        n_hypotheses=len(ep.problem.hypotheses),
        hidden=ep.problem.hidden_goal,
    )
    start = time.perf_counter()
    try:
        res = recognize(ep.problem, cfg)
    except Exception as e:  # recorded per row, never raised
        return Outcome(**base, seconds=time.perf_counter() - start, error=f"{type(e).__name__}: {e}")
    elapsed = time.perf_counter() - start
    counts = list(res.landmark_counts.values())
    mean = tuple(sum(c[k] for c in counts) / len(counts) if counts else 0.0 for k in range(3))
    return Outcome(**base, returned=tuple(res.returned), landmark_counts=mean,
                   seconds=elapsed, timed_out=elapsed > timeout)


def _run_star(args):
    return run_one(*args)


def run_all(
    problems: Sequence[EvalProblem],
    configs: Sequence[HeuristicConfig],
    timeout: float | None = None,
    jobs: int = 1,
) -> list[Outcome]:
    work = [(ep, cfg, timeout) for cfg in configs for ep in problems]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_star, work, chunksize=max(1, len(work) // (jobs * 8))))
    return [run_one(*w) for w in work]


def aggregate(outcomes: Iterable[Outcome]) -> list[EvalRow]:
    """One row per (domain, incompleteness, observability, config)."""
    groups: dict[tuple, list[Outcome]] = {}
    for o in outcomes:
        groups.setdefault((o.domain_name, o.incompleteness, o.observability, o.config), []).append(o)
    rows = []
    for (dom, inc, obs, cfg), items in sorted(groups.items()):
        ok = [o for o in items if o.ok]
        m = metrics((o.returned, o.hidden) for o in ok)
        lm = tuple(sum(o.landmark_counts[k] for o in ok) / len(ok) if ok else 0.0 for k in range(3))
        wall = sum(o.seconds for o in ok) / len(ok) if ok else 0.0
        rows.append(EvalRow(dom, inc, obs, cfg, len(ok), m.accuracy, m.spread, m.precision, m.recall,
                            m.f1, lm, wall, sum(o.timed_out for o in items),
                            sum(o.error is not None for o in items)))
    return rows


def evaluate(
    problems: Sequence[EvalProblem],
    configs: Sequence[HeuristicConfig],
    timeout_per_problem: float | None = None,
    jobs: int = 1,
) -> list[EvalRow]:
    return aggregate(run_all(problems, configs, timeout_per_problem, jobs))


def mean_f1_by(rows: Iterable[EvalRow], key: str) -> dict[tuple, Fraction]:
    """Mean row F1 grouped by config and ``key`` (an EvalRow attribute)."""
    acc: dict[tuple, list[Fraction]] = {}
    for r in rows:
        acc.setdefault((r.config, getattr(r, key)), []).append(r.f1)
    return {k: sum(v) / len(v) for k, v in acc.items()}


def landmark_f1_correlation(rows: Sequence[EvalRow]) -> dict[str, dict[str, Fraction | float]]:
    """Per config: Pearson of mean D/P/O counts vs mean F1 over (domain, incompleteness) groups."""
    out = {}
    for cfg in sorted({r.config for r in rows}):
        groups: dict[tuple, list[EvalRow]] = {}
        for r in rows:
            if r.config == cfg:
                groups.setdefault((r.domain_name, r.incompleteness_percent), []).append(r)
        if len(groups) < 2:
            continue
        f1s, counts = [], [[], [], []]
        for items in groups.values():
            f1s.append(sum(r.f1 for r in items) / len(items))
            for k in range(3):
                counts[k].append(Fraction(sum(r.mean_landmark_counts[k] for r in items) / len(items)))
        out[cfg] = {kind: pearson(counts[k], f1s) for k, kind in enumerate("DPO")}
    return out


# -- reports ------------------------------------------------------------------

CSV_FIELDS = [
    "domain_name", "incompleteness_percent", "observability_percent", "config", "n_problems",
    "accuracy", "spread", "precision", "recall", "f1", "mean_D", "mean_P", "mean_O",
    "wallclock_per_problem", "n_timed_out", "n_failed",
]


def write_csv(rows: Iterable[EvalRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in rows:
            d = r.as_dict()
            d["mean_D"], d["mean_P"], d["mean_O"] = d.pop("mean_landmark_counts")
            w.writerow(d)


def write_roc(points: Iterable[RocPoint], path) -> None:
    Path(path).write_text(
        json.dumps([{"label": p.label, "tpr": float(p.tpr), "fpr": float(p.fpr)} for p in points], indent=2) + "\n",
        encoding="utf-8",
    )


def load_dataset(root) -> list[EvalProblem]:
    """Every bundle below ``root``; an optional ``meta.json`` tags its experiment cell."""
    from .pddl import parse_recognition_bundle

    out = []
    for hyps in sorted(Path(root).rglob("hyps.dat")):
        d = hyps.parent
        meta = {}
        if (d / "meta.json").exists():
            meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
        prob = parse_recognition_bundle(d)
        name = str(d.relative_to(root)) if d != Path(root) else d.name
        out.append(EvalProblem(prob, meta.get("domain", prob.domain.name), int(meta.get("incompleteness", 0)),
                               int(meta.get("observability", 100)), name))
    return out


def write_dataset(problems: Iterable[EvalProblem], root) -> None:
    from .pddl import write_recognition_bundle

    for ep in problems:
        d = Path(root) / ep.name
        write_recognition_bundle(d, ep.problem)
        meta = {"domain": ep.domain_name, "incompleteness": ep.incompleteness, "observability": ep.observability}
        (d / "meta.json").write_text(json.dumps(meta) + "\n", encoding="utf-8")
