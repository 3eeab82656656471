"""Timed-plan simulation: validation, state queries, applicable actions.

Event ordering at equal timestamps is fixed: end-effects, then timed
initial literals, then start-condition checks, then start-effects.  With
all times quantized to 0.001, events at distinct times are separated by
at least epsilon, so no additional separation check is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .errors import PlanwhyError
from .grounding import GroundAction, GroundTask
from .model import Atom, eval_expr
from .numbers import EPSILON, fmt, q3

# Same-timestamp processing order.
_PRI_END, _PRI_TIL, _PRI_START = 0, 1, 2


@dataclass(frozen=True)
class PlanStep:
    start: Decimal
    action: tuple  # ground action key: (name, arg, ...)
    duration: Decimal

    def __str__(self) -> str:
        name = "(" + " ".join(self.action) + ")"
        return f"{fmt(self.start)}: {name} [{fmt(self.duration)}]"


@dataclass(frozen=True)
class TimedPlan:
    steps: tuple[PlanStep, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.steps, key=lambda s: s.start))
        object.__setattr__(self, "steps", ordered)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def makespan(self) -> Decimal:
        if not self.steps:
            return q3(0)
        return max(s.start + s.duration for s in self.steps)


@dataclass(frozen=True)
class Violation:
    time: Decimal
    action: Optional[tuple]
    condition: Optional[Atom]
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violation: Optional[Violation]
    makespan: Decimal
    metrics: tuple[tuple[str, Decimal], ...] = ()

    def metric(self, name: str) -> Decimal:
        return dict(self.metrics)[name]


@dataclass
class State:
    facts: frozenset[Atom]
    values: dict[Atom, Decimal]
    time: Decimal


class InvalidPlanPrefix(PlanwhyError):
    code = "invalid-prefix"

    def __init__(self, report: ValidationReport):
        super().__init__(f"plan prefix fails validation: {report.violation}")
        self.report = report


def _events(task: GroundTask, steps, horizon: Decimal):
    """Build the (time, priority, seq, kind, payload) event list, sorted."""
    events = []
    for idx, (step, ga) in enumerate(steps):
        events.append((step.start, _PRI_START, idx, "start", (step, ga)))
        events.append((step.start + ga.duration, _PRI_END, idx, "end", (step, ga)))
    for idx, til in enumerate(task.tils):
        if til.time <= horizon:
            events.append((til.time, _PRI_TIL, idx, "til", til))
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    return events


def _apply_numeric(values: dict, effects, ):
    for op, func, expr in effects:
        try:
            val = q3(eval_expr(expr, values))
        except KeyError:
            continue  # undefined operand: leave the fluent untouched
        if op == "assign":
            values[func] = val
        elif op == "increase":
            values[func] = values.get(func, q3(0)) + val
        elif op == "decrease":
            values[func] = values.get(func, q3(0)) - val


def _simulate(task: GroundTask, plan: TimedPlan, *,
              stop_time: Decimal | None = None,
              stop_before_starts: bool = False):
    """Run the event queue.

    Returns (facts, values, violation, makespan).  When ``stop_time`` is
    given, processing halts after the last event at that time; with
    ``stop_before_starts`` the start events at ``stop_time`` are skipped
    (ends and TILs at that timestamp are applied first, per ordering).
    """
    resolved = []
    for step in plan.steps:
        if not task.has_action(step.action):
            v = Violation(step.start, step.action, None,
                          f"unknown ground action {'(' + ' '.join(step.action) + ')'}")
            return None, None, v, q3(0)
        ga = task.action(step.action)
        if abs(step.duration - ga.duration) > EPSILON:
            v = Violation(step.start, step.action, None,
                          f"duration mismatch for {ga}: plan says {fmt(step.duration)}, "
                          f"model says {fmt(ga.duration)}")
            return None, None, v, q3(0)
        if step.start < 0:
            v = Violation(step.start, step.action, None, "negative start time")
            return None, None, v, q3(0)
        resolved.append((step, ga))

    makespan = plan.makespan
    horizon = makespan if stop_time is None else stop_time
    events = _events(task, resolved, horizon)

    facts = set(task.init)
    values = dict(task.init_values)
    active: list[tuple[PlanStep, GroundAction, Decimal]] = []

    def overall_violation(t):
        for step, ga, end in active:
            missing = ga.cond_overall - facts
            if missing:
                return Violation(t, step.action, next(iter(sorted(missing))),
                                 f"over-all condition {_fact(sorted(missing)[0])} of "
                                 f"{ga} violated at {fmt(t)}")
        return None

    i = 0
    n = len(events)
    while i < n:
        t = events[i][0]
        if stop_time is not None and t > stop_time:
            break
        # process all events at this timestamp, in (priority, seq) order
        while i < n and events[i][0] == t:
            _, pri, _, kind, payload = events[i]
            if stop_time is not None and t == stop_time and stop_before_starts \
                    and pri >= _PRI_START:
                i += 1
                continue
            if kind == "end":
                step, ga = payload
                active = [a for a in active if a[0] is not step]
                missing = ga.cond_end - facts
                if missing:
                    c = sorted(missing)[0]
                    return facts, values, Violation(
                        t, step.action, c,
                        f"at-end condition {_fact(c)} of {ga} not satisfied at {fmt(t)}"), makespan
                facts -= ga.del_end
                facts |= ga.add_end
                _apply_numeric(values, ga.num_end)
            elif kind == "til":
                til = payload
                if til.literal.positive:
                    facts.add(til.literal.atom)
                else:
                    facts.discard(til.literal.atom)
            else:  # start
                step, ga = payload
                missing = ga.cond_start - facts
                if missing:
                    c = sorted(missing)[0]
                    return facts, values, Violation(
                        t, step.action, c,
                        f"at-start condition {_fact(c)} of {ga} not satisfied at {fmt(t)}"), makespan
                facts -= ga.del_start
                facts |= ga.add_start
                _apply_numeric(values, ga.num_start)
                if not ga.instantaneous:
                    active.append((step, ga, t + ga.duration))
            i += 1
        v = overall_violation(t)
        if v is not None:
            return facts, values, v, makespan

    return facts, values, None, makespan


def _fact(atom: Atom) -> str:
    return "(" + " ".join(atom) + ")"


def validate(task: GroundTask, plan: TimedPlan,
             require_goal: bool = True) -> ValidationReport:
    """Event-queue validation of a timed plan against a ground task."""
    facts, values, violation, makespan = _simulate(task, plan)
    if violation is None and require_goal:
        missing = task.goal - facts
        if missing:
            c = sorted(missing)[0]
            violation = Violation(makespan, None, c,
                                  f"goal {_fact(c)} not satisfied at makespan {fmt(makespan)}")
    metrics: list[tuple[str, Decimal]] = [
        ("makespan", makespan),
        ("step-count", q3(len(plan.steps))),
    ]
    if violation is None and task.problem.metric is not None:
        _, expr = task.problem.metric
        val = dict(values)
        val[("total-time",)] = makespan
        try:
            metrics.append(("metric", q3(eval_expr(expr, val))))
        except KeyError:
            pass
    return ValidationReport(valid=violation is None, violation=violation,
                            makespan=makespan, metrics=tuple(metrics))


def initial_state(task: GroundTask) -> State:
    """Initial state at time 0, with time-0 TILs applied."""
    facts = set(task.init)
    for til in task.tils:
        if til.time == 0:
            if til.literal.positive:
                facts.add(til.literal.atom)
            else:
                facts.discard(til.literal.atom)
    return State(frozenset(facts), dict(task.init_values), q3(0))


def state_at(task: GroundTask, plan: TimedPlan, point: int) -> State:
    """State immediately before step ``point`` starts.

    End-effects and TILs at the step's start time are applied first
    (epsilon-ordering); start effects at that timestamp are not.
    """
    if point <= 0:
        return initial_state(task)
    prefix = TimedPlan(plan.steps[:min(point, len(plan.steps))])
    report = validate(task, prefix, require_goal=False)
    if not report.valid:
        raise InvalidPlanPrefix(report)
    if point >= len(plan.steps):
        facts, values, violation, makespan = _simulate(task, plan)
        if violation is not None:
            raise InvalidPlanPrefix(validate(task, plan, require_goal=False))
        return State(frozenset(facts), values, makespan)
    t = plan.steps[point].start
    facts, values, violation, _ = _simulate(task, plan, stop_time=t,
                                            stop_before_starts=True)
    if violation is not None:
        raise InvalidPlanPrefix(ValidationReport(False, violation, plan.makespan))
    return State(frozenset(facts), values, t)


def completed_prefix_state(task: GroundTask, plan: TimedPlan, point: int) -> State:
    """State after fully executing (to completion) every step before
    ``point``, with TILs up to the prefix makespan applied.  This is the
    anchor state used when a suggested action replaces step ``point``."""
    prefix = TimedPlan(plan.steps[:min(point, len(plan.steps))])
    report = validate(task, prefix, require_goal=False)
    if not report.valid:
        raise InvalidPlanPrefix(report)
    facts, values, violation, makespan = _simulate(task, prefix)
    if violation is not None:
        raise InvalidPlanPrefix(ValidationReport(False, violation, makespan))
    return State(frozenset(facts), values, makespan)


def applicable_actions(task: GroundTask, state: State,
                       exclude: GroundAction | None = None) -> list[GroundAction]:
    """Ground actions whose at-start and over-all conditions hold in
    ``state``, minus ``exclude``; lexicographic by name then binding."""
    out = []
    for ga in task.actions:  # already sorted by key
        if exclude is not None and ga.key == exclude.key:
            continue
        if ga.cond_start <= state.facts and ga.cond_overall <= state.facts:
            out.append(ga)
    return out


def execute_action(state: State, ga: GroundAction) -> State | None:
    """Apply one action atomically (full durative execution, nothing
    interleaved).  Returns None if a condition fails."""
    if not (ga.cond_start <= state.facts and ga.cond_overall <= state.facts):
        return None
    facts = set(state.facts)
    values = dict(state.values)
    facts -= ga.del_start
    facts |= ga.add_start
    _apply_numeric(values, ga.num_start)
    if not (ga.cond_overall <= facts and ga.cond_end <= facts):
        return None
    facts -= ga.del_end
    facts |= ga.add_end
    _apply_numeric(values, ga.num_end)
    return State(frozenset(facts), values, state.time + ga.duration)


def state_sequence(task: GroundTask, plan: TimedPlan,
                   ignore_predicates: frozenset[str] = frozenset()) -> list[frozenset]:
    """Fact-set snapshots after sequentially completing each step.

    Used for behaviour classification: index 0 is the initial state,
    index i is the state once steps 0..i-1 have fully executed.  TILs
    are applied at their times relative to each step's scheduled end.
    """
    def strip(fs):
        if not ignore_predicates:
            return frozenset(fs)
        return frozenset(f for f in fs if f[0] not in ignore_predicates)

    facts = set(initial_state(task).facts)
    out = [strip(facts)]
    til_i = 0
    tils = task.tils
    for step in plan.steps:
        ga = task.action(step.action)
        end = step.start + ga.duration
        while til_i < len(tils) and tils[til_i].time <= end:
            til = tils[til_i]
            if til.literal.positive:
                facts.add(til.literal.atom)
            else:
                facts.discard(til.literal.atom)
            til_i += 1
        facts -= ga.del_start
        facts |= ga.add_start
        facts -= ga.del_end
        facts |= ga.add_end
        out.append(strip(facts))
    return out
