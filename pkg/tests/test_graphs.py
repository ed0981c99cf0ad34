import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import example21_task
from imprec.datasets import make_rng, random_complete_task, degrade_task
from imprec.graphs import (
    CLASSICAL,
    OPTIMISTIC,
    BuildFailure,
    build_graph,
    build_orpg,
    build_rpg,
    is_landmark,
    reachable_facts,
)
from imprec.grounding import goal_mask
from imprec.strips import make_task
from oracles import reachable, relaxed_closure, relaxed_landmark


def names(task, graph):
    return [task.names(f) for f in graph.fact_levels]


def test_orpg_example21(ex21):
    g = build_orpg(ex21)
    assert names(ex21, g) == [{"(p)", "(q)"}, {"(p)", "(q)", "(r)"}, {"(p)", "(q)", "(r)", "(g)"}]
    assert {ex21.actions[i].name for i in range(3) if g.actions_up_to(0) >> i & 1} == {"(a)", "(b)"}
    assert g.first_level_of[ex21.fact_id("g")] == 2


def test_rpg_on_known_projection_of_example21(ex21):
    # hand-listed levels: F0={p,q}, A0={a,b} (a adds nothing known), F1={p,q,r}, then c fires
    g = build_rpg(ex21.known_projection())
    assert names(ex21, g) == [{"(p)", "(q)"}, {"(p)", "(q)", "(r)"}, {"(p)", "(q)", "(r)", "(g)"}]
    assert g.actions_up_to(0) == 0b011
    assert g.achievers_of[ex21.fact_id("r")] == (1,)


def test_excluding_achievers_of_r_fails(ex21):
    with pytest.raises(BuildFailure) as e:
        build_orpg(ex21, excluded_achievers_of=ex21.fact_id("r"))
    assert not e.value.graph.last >> ex21.fact_id("g") & 1


def test_goal_in_init_single_level():
    t = example21_task(goal=["p", "q"])
    assert len(build_rpg(t).fact_levels) == 1
    assert len(build_orpg(t).fact_levels) == 1


def test_excluding_unachievable_init_fact_changes_nothing(ex21):
    # q is never added, so removing its achievers removes nothing
    assert build_orpg(ex21, excluded_achievers_of=ex21.fact_id("q")).fact_levels == build_orpg(ex21).fact_levels


def test_blocks_goal_reached(blocks_bundle):
    task = blocks_bundle.ground()
    goal = goal_mask(task, [("on", "r", "e")])
    g = build_rpg(task, goal)
    assert g.goal_reached and g.first_level_of[task.fact_id("(on r e)")] >= 1
    assert reachable(task, {"(on r e)"})


def test_is_landmark_examples(ex21):
    g = 1 << ex21.fact_id("g")
    assert is_landmark(ex21.fact_id("r"), ex21, g)
    assert is_landmark(ex21.fact_id("g"), ex21, g)


def test_inert_fact_is_not_a_landmark():
    t = make_task(["p", "g", "x"], [dict(name="a", pre=["p"], add=["g"])], init=["p"], goal=["g"])
    assert not is_landmark(t.fact_id("x"), t)


def test_strict_test_can_flag_init_facts(ex21):
    g = 1 << ex21.fact_id("g")
    p = ex21.fact_id("p")
    assert not is_landmark(p, ex21, g)
    assert is_landmark(p, ex21, g, strict=True)


def test_unreachable_goal_fails():
    t = make_task(["p", "g"], [], init=["p"], goal=["g"])
    with pytest.raises(BuildFailure):
        build_rpg(t)


def test_dump_is_json_ready(ex21):
    import json

    d = build_orpg(ex21).to_json(ex21)
    assert json.loads(json.dumps(d))["action_levels"][0] == ["(a)", "(b)"]


tasks = st.builds(
    lambda seed, n, m, pct: degrade_task(random_complete_task(make_rng(seed), n, m), pct, seed),
    st.integers(0, 2**32 - 1), st.integers(3, 12), st.integers(1, 8), st.sampled_from([0, 20, 50]),
)


@settings(max_examples=150, deadline=None)
@given(tasks)
def test_levels_monotone_and_bounded(task):
    for mode in (CLASSICAL, OPTIMISTIC):
        try:
            g = build_graph(task, mode, goal=(1 << len(task.facts)) - 1)
        except BuildFailure as e:
            g = e.graph
        assert g.fact_levels[0] == task.init
        for a, b in zip(g.fact_levels, g.fact_levels[1:]):
            assert a & b == a
        for a, b in zip(g.action_levels, g.action_levels[1:]):
            assert a & b == a
        assert len(g.fact_levels) <= len(task.facts) + 1


@settings(max_examples=150, deadline=None)
@given(tasks)
def test_orpg_dominates_rpg(task):
    assert reachable_facts(task, CLASSICAL) & ~reachable_facts(task, OPTIMISTIC) == 0
    full = (1 << len(task.facts)) - 1
    levels = []
    for mode in (CLASSICAL, OPTIMISTIC):
        try:
            levels.append(build_graph(task, mode, goal=full).fact_levels)
        except BuildFailure as e:
            levels.append(e.graph.fact_levels)
    rpg, orpg = levels
    for i, f in enumerate(rpg):
        o = orpg[min(i, len(orpg) - 1)]
        assert f & ~o == 0


@settings(max_examples=150, deadline=None)
@given(tasks)
def test_reachable_facts_matches_set_closure(task):
    for optimistic, mode in ((True, OPTIMISTIC), (False, CLASSICAL)):
        assert task.names(reachable_facts(task, mode)) == relaxed_closure(task, optimistic)


@settings(max_examples=120, deadline=None)
@given(tasks, st.data())
def test_is_landmark_matches_delete_free_enumeration(task, data):
    reach = relaxed_closure(task)
    goal_names = data.draw(st.sets(st.sampled_from(sorted(reach)), min_size=1, max_size=2))
    goal = task.state(goal_names)
    for f, name in enumerate(task.facts):
        assert is_landmark(f, task, goal) == relaxed_landmark(task, name, goal_names), name
        assert is_landmark(f, task, goal, strict=True) == relaxed_landmark(task, name, goal_names, strict=True)


@settings(max_examples=60, deadline=None)
@given(tasks)
def test_deterministic(task):
    a = build_orpg(task, goal=0)
    b = build_orpg(task, goal=0)
    assert a == b
