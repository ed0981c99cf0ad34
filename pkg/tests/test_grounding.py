from imprec.datasets import BLOCKS_DOMAIN
from imprec.grounding import goal_mask, ground, objects_of_type
from imprec.pddl import parse_domain

BLOCKS = parse_domain(BLOCKS_DOMAIN)
OBJECTS = [("a", "block"), ("b", "block")]
INIT = [("ontable", "a"), ("ontable", "b"), ("clear", "a"), ("clear", "b"), ("handempty",)]


def test_typed_objects():
    d = parse_domain("""(define (domain t) (:requirements :typing) (:types car truck - vehicle place)
      (:predicates (at ?v - vehicle ?p - place)))""")
    by = objects_of_type(d, [("c", "car"), ("t", "truck"), ("x", "place")])
    assert by["vehicle"] == ["c", "t"] and by["car"] == ["c"] and by["object"] == ["c", "t", "x"]


def test_blocks_grounding_counts():
    task = ground(BLOCKS, OBJECTS, INIT, prune=False)
    # pickup/putdown per block, stack/unstack per ordered pair including x = y
    assert len(task.actions) == 2 + 2 + 4 + 4
    assert task.facts == tuple(sorted(task.facts))
    assert all(a.operator in {"pickup", "putdown", "stack", "unstack"} for a in task.actions)


def test_pruning_keeps_reachable_and_observed():
    pruned = ground(BLOCKS, OBJECTS, INIT)
    names = {a.name for a in pruned.actions}
    assert "(pickup a)" in names and "(stack a b)" in names
    # without handempty nothing can ever be picked up
    stuck = [("ontable", "a"), ("clear", "a")]
    assert ground(BLOCKS, OBJECTS, stuck).actions == ()
    kept = ground(BLOCKS, OBJECTS, stuck, keep=["(pickup a)"])
    assert [a.name for a in kept.actions] == ["(pickup a)"]


def test_goal_atoms_enter_the_fact_table():
    task = ground(BLOCKS, OBJECTS, INIT, goals=[[("on", "a", "a")]])
    assert goal_mask(task, [("on", "a", "a")]) == 1 << task.fact_id("(on a a)")


def test_known_wins_when_literals_collapse():
    d = parse_domain("""(define (domain c) (:predicates (p ?x) (q))
      (:action a :parameters (?x ?y) :precondition (and (p ?x)) :effect (q) (:poss-precondition (p ?y))))""")
    task = ground(d, [("o", "object")], [("p", "o")])
    (act,) = task.actions
    assert act.name == "(a o o)" and act.poss_pre == 0 and act.pre == 1 << task.fact_id("(p o)")
