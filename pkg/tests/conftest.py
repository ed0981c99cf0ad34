import dataclasses

import pytest

from imprec import bundled, make_task, parse_recognition_bundle

# criterion number -> (title, passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def example21_task(goal=("g",)):
    """Four facts, three incomplete actions; the running abstract example."""
    return make_task(
        ["p", "q", "r", "g"],
        [
            dict(name="a", pre=["p", "q"], poss_pre=["r"], poss_add=["r"], poss_del=["p"]),
            dict(name="b", pre=["p"], add=["r"], delete=["p"], poss_del=["q"]),
            dict(name="c", pre=["r"], poss_pre=["q"], add=["g"]),
        ],
        init=["p", "q"],
        goal=goal,
    )


@pytest.fixture
def ex21():
    return example21_task()


@pytest.fixture(scope="session")
def abstract_bundle():
    return parse_recognition_bundle(bundled("abstract-p1"))


@pytest.fixture(scope="session")
def blocks_bundle():
    return parse_recognition_bundle(bundled("blocks-words"))


@pytest.fixture(scope="session")
def blocks_two_obs(blocks_bundle):
    """The word scenario after only (unstack e a) and (stack e d)."""
    return dataclasses.replace(blocks_bundle, observations=("(unstack e a)", "(stack e d)"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
