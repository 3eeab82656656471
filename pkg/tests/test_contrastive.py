"""Compilations, weakest preconditions, rescheduling, and the four
"why not?" strategies with their outcome taxonomy."""

import os
import stat
from decimal import Decimal

import pytest

from planwhy import grounding, parser, planner, simulate
from planwhy.contrastive import (classify_behavior, compile_force_action,
                                 compile_time_window, compress_schedule,
                                 plan_segments, replan_after,
                                 replan_from_initial, weakest_conditions)
from planwhy.errors import PlanningError
from planwhy.planner import PlannerConfig, parse_plan
from planwhy.printer import print_domain, print_problem
from planwhy.simulate import PlanStep, TimedPlan, completed_prefix_state

from conftest import load_plan, read


def _parse(dom, prob):
    d = parser.parse_domain(read(dom))
    p = parser.parse_problem(read(prob), d)
    return d, p


# --- compilations -----------------------------------------------------------

def test_compile_force_action_structure(logistics_domain, logistics_p1, task_p1):
    alt = task_p1.action(("load-truck", "p1", "t1", "a"))
    comp = compile_force_action(logistics_domain, logistics_p1, alt)
    assert comp.applied_predicate == "applied-load-truck"
    op = comp.domain.operator("user-action-load-truck")
    base = logistics_domain.operator("load-truck")
    assert op.cond_start == base.cond_start
    assert op.cond_overall == base.cond_overall
    # the marker lands with the at-end effects
    assert any(e.atom[0] == "applied-load-truck" for e in op.eff_end)
    assert ("applied-load-truck", "p1", "t1", "a") in comp.problem.goal
    # compiled model still parses/prints
    d2 = parser.parse_domain(print_domain(comp.domain))
    parser.parse_problem(print_problem(comp.problem), d2)


def test_compile_force_action_solution_contains_marker(
        logistics_domain, logistics_p1, task_p1, builtin_config):
    alt = task_p1.action(("load-truck", "p1", "t1", "a"))
    comp = compile_force_action(logistics_domain, logistics_p1, alt)
    ctask = grounding.ground(comp.domain, comp.problem)
    res = planner.plan_builtin(ctask, builtin_config)
    assert res.status == "solved"
    assert sum(1 for s in res.plan.steps
               if s.action == ("user-action-load-truck", "p1", "t1", "a")) >= 1
    assert simulate.validate(ctask, res.plan).valid


def test_compile_time_window_structure(logistics_domain, logistics_p1, task_p1):
    alt = task_p1.action(("load-truck", "p1", "t1", "a"))
    comp = compile_time_window(logistics_domain, logistics_p1, alt,
                               Decimal("10"), Decimal("20"))
    op = comp.domain.operator("user-action-load-truck")
    assert (comp.window_predicate,) in op.cond_start
    times = [(t.time, t.literal.positive) for t in comp.problem.tils
             if t.literal.atom == (comp.window_predicate,)]
    assert (Decimal("10"), True) in times
    assert (Decimal("20"), False) in times


def test_compile_time_window_rejects_empty_window(logistics_domain,
                                                  logistics_p1, task_p1):
    alt = task_p1.action(("load-truck", "p1", "t1", "a"))
    with pytest.raises(PlanningError):
        compile_time_window(logistics_domain, logistics_p1, alt,
                            Decimal("20"), Decimal("10"))


def test_compile_window_plan_starts_inside_open_interval(
        logistics_domain, logistics_p1, task_p1, builtin_config):
    alt = task_p1.action(("load-truck", "p1", "t1", "a"))
    comp = compile_time_window(logistics_domain, logistics_p1, alt,
                               Decimal("10"), Decimal("20"))
    ctask = grounding.ground(comp.domain, comp.problem)
    res = planner.plan_builtin(ctask, builtin_config)
    assert res.status == "solved"
    starts = [s.start for s in res.plan.steps
              if s.action[0] == "user-action-load-truck"]
    assert starts
    for t in starts:
        assert Decimal("10") < t < Decimal("20")


# --- weakest preconditions --------------------------------------------------

def test_weakest_conditions_empty_suffix_is_goal(task_p1):
    assert weakest_conditions(task_p1, ()) == frozenset(task_p1.goal)


def test_weakest_conditions_hand_computed(task_p1):
    steps = (
        PlanStep(Decimal("0"), ("load-truck", "p1", "t1", "a"), Decimal("10")),
        PlanStep(Decimal("10"), ("drive-truck", "t1", "a", "b", "d1"),
                 Decimal("30")),
        PlanStep(Decimal("40"), ("unload-truck", "p1", "t1", "b"), Decimal("10")),
    )
    need = weakest_conditions(task_p1, steps)
    assert ("at", "p1", "a") in need
    assert ("at", "t1", "a") in need
    assert ("driving", "d1", "t1") in need
    assert ("link", "a", "b") in need
    # produced internally, so not required up front
    assert ("in", "p1", "t1") not in need
    assert ("at", "t1", "b") not in need
    # goal fact achieved by the suffix itself
    assert ("at", "p1", "b") not in need
    # the other goal is untouched and must already hold
    assert ("at", "p2", "c") in need


def test_weakest_conditions_delete_cancels_support(task_p1):
    # after unloading, re-loading needs the package back at the location;
    # the unload provides it, so only the first load's needs surface
    steps = (
        PlanStep(Decimal("0"), ("load-truck", "p1", "t1", "a"), Decimal("10")),
        PlanStep(Decimal("10"), ("unload-truck", "p1", "t1", "a"), Decimal("10")),
        PlanStep(Decimal("20"), ("load-truck", "p1", "t1", "a"), Decimal("10")),
    )
    need = weakest_conditions(task_p1, steps)
    assert ("at", "p1", "a") in need
    assert ("at", "t1", "a") in need


# --- rescheduling -----------------------------------------------------------

def test_compress_schedule_left_shifts(task_p1):
    plan = parse_plan(
        "0.0: (board-truck d1 t1 a) [10.0]\n"
        "50.0: (load-truck p1 t1 a) [10.0]\n"
        "100.0: (drive-truck t1 a b d1) [30.0]\n"
        "200.0: (unload-truck p1 t1 b) [10.0]\n")
    out = compress_schedule(task_p1, plan)
    assert out is not None
    assert simulate.validate(task_p1, out, require_goal=False).valid
    assert out.makespan < plan.makespan
    assert out.makespan <= Decimal("50")
    starts = [s.start for s in out.steps]
    assert starts == sorted(starts)


def test_compress_schedule_keeps_action_order(task_p1):
    plan = load_plan("plan1.txt")
    out = compress_schedule(task_p1, plan)
    assert out is not None
    assert [s.action for s in out.steps] == [s.action for s in plan.steps]
    assert simulate.validate(task_p1, out).valid


# --- behavior taxonomy ------------------------------------------------------

def _stub_planner(tmp_path, plan_text: str) -> PlannerConfig:
    stub = tmp_path / "stub.sh"
    stub.write_text('#!/bin/sh\ncat > "$3" <<\'EOF\'\n' + plan_text + "EOF\n")
    os.chmod(stub, os.stat(stub).st_mode | stat.S_IEXEC)
    return PlannerConfig(mode="external",
                         command=f"{stub} {{domain}} {{problem}} {{plan}}")


def test_behavior_a_apply_and_undo(tmp_path):
    d, p = _parse("toggle-domain.pddl", "toggle-p1.pddl")
    task = grounding.ground(d, p)
    base = parse_plan("0.0: (flip) [0.0]\n")
    cfg = _stub_planner(tmp_path, "0.0: (unmark) [0.0]\n0.001: (flip) [0.0]\n")
    res = replan_after(task, base, 0, task.action(("mark",)), cfg)
    assert res.behavior == "a"
    assert simulate.validate(task, res.plan).valid


def test_behavior_b_rejoins(builtin_config):
    d, p = _parse("grid-domain.pddl", "grid-p1.pddl")
    task = grounding.ground(d, p)
    base = parse_plan("0.0: (move n1 n2) [0.0]\n0.001: (move n2 n3) [0.0]\n")
    res = replan_after(task, base, 0, task.action(("move", "n1", "n4")),
                       builtin_config)
    assert res.behavior == "b"
    assert res.rejoin_index == 1
    assert simulate.validate(task, res.plan).valid


def test_behavior_c_diverges(task_p1, builtin_config):
    base = load_plan("plan1.txt")
    res = replan_after(task_p1, base, 3,
                       task_p1.action(("load-truck", "p1", "t1", "a")),
                       builtin_config)
    assert res.behavior == "c"
    assert res.rejoin_index is None
    assert simulate.validate(task_p1, res.plan).valid


def test_behavior_d_dead_end(builtin_config):
    d, p = _parse("trap-domain.pddl", "trap-p1.pddl")
    task = grounding.ground(d, p)
    base = parse_plan("0.0: (achieve) [0.0]\n")
    res = replan_after(task, base, 0, task.action(("burn",)), builtin_config)
    assert res.behavior == "d"
    assert res.plan is None
    assert res.status == "unsolvable"


def test_classify_prefers_a_over_b():
    d, p = _parse("toggle-domain.pddl", "toggle-p1.pddl")
    task = grounding.ground(d, p)
    base = parse_plan("0.0: (flip) [0.0]\n")
    pivot = frozenset({("p",)})
    new = parse_plan("0.0: (mark) [0.0]\n"
                     "0.001: (unmark) [0.0]\n"
                     "0.002: (flip) [0.0]\n")
    behavior, rejoin = classify_behavior(task, base, pivot, task, new, 0)
    assert behavior == "a"


# --- strategies on the logistics fixtures -----------------------------------

def test_replan_after_keeps_prefix(task_p1, builtin_config):
    base = load_plan("plan1.txt")
    res = replan_after(task_p1, base, 3,
                       task_p1.action(("load-truck", "p1", "t1", "a")),
                       builtin_config)
    assert [s.action for s in res.plan.steps[:3]] == \
        [s.action for s in base.steps[:3]]
    assert res.plan.steps[3].action == ("load-truck", "p1", "t1", "a")
    rep = simulate.validate(task_p1, res.plan)
    assert rep.valid, rep.violation


def test_replan_after_never_revisits_pivot(task_p1, builtin_config):
    base = load_plan("plan1.txt")
    pivot = completed_prefix_state(task_p1, base, 3).facts
    res = replan_after(task_p1, base, 3,
                       task_p1.action(("load-truck", "p1", "t1", "a")),
                       builtin_config)
    seq = simulate.state_sequence(task_p1, res.plan)
    assert pivot not in seq[4:]


def test_segments_validates_against_original(task_p1, builtin_config):
    base = load_plan("plan1.txt")
    res = plan_segments(task_p1, base, 3,
                        task_p1.action(("load-truck", "p1", "t1", "a")),
                        builtin_config)
    assert res.plan is not None
    rep = simulate.validate(task_p1, res.plan)
    assert rep.valid, rep.violation
    assert res.plan.steps[0].start >= Decimal("0")


def test_from_initial_marker_stripped_from_classification(
        task_p1, logistics_domain, logistics_p1, builtin_config):
    base = load_plan("plan1.txt")
    res = replan_from_initial(task_p1, base, 3,
                              task_p1.action(("load-truck", "p1", "t1", "a")),
                              builtin_config)
    assert res.behavior in {"a", "b", "c"}
    assert res.bookkeeping
    ctask = grounding.ground(res.domain, res.problem)
    assert simulate.validate(ctask, res.plan).valid
