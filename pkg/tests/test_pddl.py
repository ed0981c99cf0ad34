import dataclasses

import pytest

from imprec import bundled
from imprec.datasets import BLOCKS_DOMAIN, DegradeSpec, degrade
from imprec.pddl import (
    ArityMismatch,
    HiddenGoalNotInHypotheses,
    LiftedDomain,
    MissingFile,
    ParseError,
    UndeclaredPredicate,
    UnresolvableObservation,
    parse_atom_list,
    parse_domain,
    parse_problem,
    parse_recognition_bundle,
    serialize_domain,
    serialize_problem,
    write_recognition_bundle,
)

ABSTRACT = (bundled("abstract-p1") / "domain.pddl").read_text()


def test_blocks_domain_is_complete():
    d = parse_domain(BLOCKS_DOMAIN)
    assert len(d.operators) == 4
    assert all(op.is_complete for op in d.operators)
    assert d.operator("stack").parameters == (("?x", "block"), ("?y", "block"))


def test_annotation_blocks_populate_possible_lists():
    a = parse_domain(ABSTRACT).operator("a")
    assert a.pre == (("p",), ("q",))
    assert a.poss_pre == (("r",),)
    assert a.poss_add == (("r",),)
    assert a.poss_del == (("p",),)
    assert a.add == () and a.delete == ()


def test_unclosed_annotation_reports_line():
    text = "(define (domain x)\n (:predicates (p))\n (:action a :parameters ()\n  :precondition (and)\n  (:poss-effect (p)\n"
    with pytest.raises(ParseError) as e:
        parse_domain(text)
    assert e.value.line is not None and e.value.line >= 1


def test_undeclared_predicate():
    text = "(define (domain x) (:predicates (p)) (:action a :parameters () :precondition (q) :effect (p)))"
    with pytest.raises(UndeclaredPredicate):
        parse_domain(text)


def test_arity_mismatch_points_at_literal():
    text = "(define (domain x)\n(:predicates (p ?a))\n(:action a :parameters (?a)\n :precondition (p ?a ?a) :effect (p ?a)))"
    with pytest.raises(ArityMismatch) as e:
        parse_domain(text)
    assert e.value.line == 4


def test_unbound_variable_rejected():
    text = "(define (domain x) (:predicates (p ?a)) (:action a :parameters () :precondition (p ?z) :effect (and)))"
    with pytest.raises(ParseError):
        parse_domain(text)


def test_known_and_possible_clash_is_parse_error():
    text = "(define (domain x) (:predicates (p)) (:action a :parameters () :precondition (p) :effect (and) (:poss-precondition (p))))"
    with pytest.raises(ParseError):
        parse_domain(text)


def test_comments_ignored():
    text = "; header\n(define (domain x) ; trailing\n (:predicates (p)))"
    assert parse_domain(text).predicates == {"p": ()}


@pytest.mark.parametrize("text", [ABSTRACT, BLOCKS_DOMAIN])
def test_round_trip(text):
    d = parse_domain(text)
    assert parse_domain(serialize_domain(d)) == d


def test_round_trip_degraded_blocks():
    for d in degrade(parse_domain(BLOCKS_DOMAIN), DegradeSpec(40, seed=3, mix=True)):
        back = parse_domain(serialize_domain(d))
        assert back == d
        sizes = lambda x: sum(len(getattr(op, f)) for op in x.operators for f in ("poss_pre", "poss_add", "poss_del"))
        assert sizes(back) == sizes(d) > 0


def test_zero_operator_domain():
    d = LiftedDomain("empty")
    text = serialize_domain(d)
    assert parse_domain(text) == d


def test_problem_placeholder_and_round_trip():
    p = parse_problem((bundled("blocks-words") / "template.pddl").read_text())
    assert p.goal is None
    assert ("on", "d", "b") in p.init
    assert parse_problem(serialize_problem(p)) == p


def test_atom_list():
    assert parse_atom_list("(on a b), (ontable  B)") == (("on", "a", "b"), ("ontable", "b"))


def test_blocks_bundle(blocks_bundle):
    assert len(blocks_bundle.hypotheses) == 3
    assert blocks_bundle.hidden_goal == 0
    assert len(blocks_bundle.observations) == 6
    assert ("on", "r", "e") in blocks_bundle.hypotheses[0]


def _copy_bundle(tmp_path, name="abstract-p1"):
    src = bundled(name)
    dst = tmp_path / name
    dst.mkdir()
    for f in src.iterdir():
        (dst / f.name).write_text(f.read_text())
    return dst


def test_bundle_hidden_goal_must_be_a_hypothesis(tmp_path):
    d = _copy_bundle(tmp_path)
    (d / "real_hyp.dat").write_text("(q)\n")
    with pytest.raises(HiddenGoalNotInHypotheses):
        parse_recognition_bundle(d)


def test_bundle_missing_file(tmp_path):
    d = _copy_bundle(tmp_path)
    (d / "obs.dat").unlink()
    with pytest.raises(MissingFile):
        parse_recognition_bundle(d)


def test_bundle_bad_observation(tmp_path):
    d = _copy_bundle(tmp_path)
    (d / "obs.dat").write_text("(fly)\n")
    with pytest.raises(UnresolvableObservation):
        parse_recognition_bundle(d)


def test_bundle_empty_observations_rank_by_init(tmp_path):
    from imprec.recognizers import HeuristicConfig, recognize

    d = _copy_bundle(tmp_path)
    (d / "obs.dat").write_text("")
    prob = parse_recognition_bundle(d)
    assert prob.observations == ()
    # only p and q (true in I) count: g has {p,r,g} definite and {q} possible, h has {q,h}
    res = recognize(prob, HeuristicConfig("gc_enhanced"))
    assert res.scores[0] == pytest.approx(2 / 4)
    assert res.scores[1] == pytest.approx(1 / 2)


def test_write_then_read_bundle(tmp_path, blocks_bundle):
    write_recognition_bundle(tmp_path / "b", blocks_bundle)
    back = parse_recognition_bundle(tmp_path / "b")
    assert dataclasses.replace(back, name=blocks_bundle.name) == blocks_bundle
