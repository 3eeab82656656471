"""Timed-plan validation, state queries, and the applicability oracle."""

from decimal import Decimal

import pytest

from planwhy import parser, grounding, planner, simulate
from planwhy.simulate import (PlanStep, TimedPlan, applicable_actions,
                              completed_prefix_state, initial_state, state_at,
                              state_sequence, validate)

from conftest import load_plan, read

MAKESPANS = {
    "plan1.txt": Decimal("62.000"),
    "plan2.txt": Decimal("62.000"),
    "plan3.txt": Decimal("104.000"),
    "plan4.txt": Decimal("186.000"),
    "plan5.txt": Decimal("104.000"),
}


@pytest.mark.parametrize("name", sorted(MAKESPANS))
def test_reference_plans_validate(name, task_p1, task_p2):
    task = task_p2 if name == "plan4.txt" else task_p1
    plan = load_plan(name)
    report = validate(task, plan)
    assert report.valid, report.violation
    assert report.makespan == MAKESPANS[name]
    assert report.metric("makespan") == MAKESPANS[name]
    assert report.metric("step-count") == len(plan.steps)
    # minimized total-time metric equals the makespan here
    assert report.metric("metric") == MAKESPANS[name]


def test_missing_precondition_detected(task_p1):
    plan = load_plan("plan1.txt")
    # drop the first board: the dependent load/drive chain loses its driver
    broken = TimedPlan(steps=plan.steps[1:])
    report = validate(task_p1, broken)
    assert not report.valid
    assert report.violation is not None
    assert report.violation.time is not None


def test_wrong_duration_detected(task_p1):
    plan = load_plan("plan1.txt")
    s0 = plan.steps[0]
    bad = TimedPlan(steps=(PlanStep(s0.start, s0.action, Decimal("11")),)
                    + plan.steps[1:])
    report = validate(task_p1, bad)
    assert not report.valid
    assert "duration" in report.violation.message


def test_unknown_action_detected(task_p1):
    plan = TimedPlan(steps=(PlanStep(Decimal("0"), ("fly", "t1"), Decimal("1")),))
    report = validate(task_p1, plan)
    assert not report.valid


def test_goal_not_reached(task_p1):
    plan = load_plan("plan1.txt")
    prefix = TimedPlan(steps=plan.steps[:-1])
    assert not validate(task_p1, prefix).valid
    assert validate(task_p1, prefix, require_goal=False).valid


def test_overall_condition_enforced(task_p1):
    # drive-truck requires (driving d t) over all; skip the board first
    plan = TimedPlan(steps=(
        PlanStep(Decimal("0"), ("drive-truck", "t1", "a", "b", "d1"),
                 Decimal("30")),))
    report = validate(task_p1, plan, require_goal=False)
    assert not report.valid


def test_timed_initial_literal_applied(logistics_domain):
    text = """
    (define (problem til-gate) (:domain driverlog)
      (:objects d1 - driver t1 - truck a - location)
      (:init (at d1 a) (at 5 (at t1 a)) (empty t1))
      (:goal (and (driving d1 t1))))
    """
    prob = parser.parse_problem(text, logistics_domain)
    task = grounding.ground(logistics_domain, prob)
    early = TimedPlan(steps=(
        PlanStep(Decimal("0"), ("board-truck", "d1", "t1", "a"), Decimal("10")),))
    assert not validate(task, early).valid
    late = TimedPlan(steps=(
        PlanStep(Decimal("5.001"), ("board-truck", "d1", "t1", "a"), Decimal("10")),))
    assert validate(task, late).valid


def test_state_at_start(task_p1):
    plan = load_plan("plan1.txt")
    s = state_at(task_p1, plan, 0)
    assert s.facts == initial_state(task_p1).facts
    assert s.time == Decimal("0")


def test_state_at_mid_plan(task_p1):
    plan = load_plan("plan1.txt")
    # step 2 = load p2 t1 at t=10: boards have finished, loads have not begun
    s = state_at(task_p1, plan, 2)
    assert ("driving", "d2", "t1") in s.facts
    assert ("driving", "d1", "t2") in s.facts
    assert ("at", "p1", "a") in s.facts
    assert ("in", "p2", "t1") not in s.facts


def test_completed_prefix_state(task_p1):
    plan = load_plan("plan1.txt")
    s = completed_prefix_state(task_p1, plan, 4)
    # the whole loading phase is settled before the drives
    assert ("in", "p1", "t2") in s.facts
    assert ("in", "p2", "t1") in s.facts
    assert s.time == Decimal("20")


def brute_force_applicable(task, facts):
    out = []
    for ga in task.actions:
        if set(ga.cond_start) <= facts and set(ga.cond_overall) <= facts:
            out.append(ga)
    return out


def test_applicable_actions_against_oracle(task_p1):
    plan = load_plan("plan1.txt")
    for k in range(len(plan.steps)):
        s = state_at(task_p1, plan, k)
        got = applicable_actions(task_p1, s)
        assert [a.key for a in got] == [a.key for a in
                                        brute_force_applicable(task_p1, s.facts)]


def test_applicable_actions_exclude(task_p1):
    s = initial_state(task_p1)
    ga = task_p1.action(("board-truck", "d1", "t1", "a"))
    got = applicable_actions(task_p1, s, exclude=ga)
    assert ga.key not in [a.key for a in got]


def test_state_sequence_matches_plan_length(task_p1):
    plan = load_plan("plan1.txt")
    seq = state_sequence(task_p1, plan)
    assert len(seq) == len(plan.steps) + 1
    assert seq[0] == initial_state(task_p1).facts
    assert set(task_p1.goal) <= seq[-1]


def test_plan_steps_sorted_on_construction():
    a = PlanStep(Decimal("5"), ("x",), Decimal("1"))
    b = PlanStep(Decimal("1"), ("y",), Decimal("1"))
    plan = TimedPlan(steps=(a, b))
    assert plan.steps == (b, a)
    assert plan.makespan == Decimal("6")
