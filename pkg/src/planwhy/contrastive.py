"""The four plan-regeneration strategies behind "why A rather than B?".

Strategies: replan from the state after the user action (undo-state
forbidden), replan from the initial state forcing the action (optionally
inside a time window, via model compilation), and planning the segments
before/after the user action separately.  Outcomes are classified as:
(a) immediately undone, (b) rejoins the original plan, (c) new route,
(d) no plan exists.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal
from typing import Optional

from .errors import PlanningError, SemanticError
from .grounding import GroundAction, GroundTask, ground
from .model import (
    Atom,
    DomainModel,
    Literal,
    Operator,
    PredicateDef,
    ProblemModel,
    TimedInitialLiteral,
    TypedParam,
)
from .numbers import EPSILON, fmt, q3
from .planner import (
    SOLVED,
    PlannerConfig,
    SearchResult,
    plan_builtin,
    plan_external,
    run_planner,
)
from .printer import print_domain, print_problem
from .simulate import (
    PlanStep,
    State,
    TimedPlan,
    ValidationReport,
    applicable_actions,
    completed_prefix_state,
    execute_action,
    initial_state,
    state_sequence,
    validate,
)

STRATEGY_FROM_INITIAL = "from-initial"
STRATEGY_TIME_WINDOW = "time-window"
STRATEGY_AFTER_ACTION = "after-action"
STRATEGY_SEGMENTS = "segments"
STRATEGIES = (STRATEGY_FROM_INITIAL, STRATEGY_TIME_WINDOW,
              STRATEGY_AFTER_ACTION, STRATEGY_SEGMENTS)

BEHAVIOR_RETURNS_IMMEDIATELY = "a"
BEHAVIOR_REJOINS = "b"
BEHAVIOR_NEW_ROUTE = "c"
BEHAVIOR_NO_PLAN = "d"


@dataclass(frozen=True)
class CompiledTask:
    """A force-the-user-action compilation of a domain/problem pair."""

    domain: DomainModel
    problem: ProblemModel
    applied_predicate: str
    user_operator: str
    window_predicate: Optional[str] = None

    def bookkeeping(self) -> frozenset[str]:
        names = {self.applied_predicate}
        if self.window_predicate:
            names.add(self.window_predicate)
        return frozenset(names)


@dataclass
class ContrastiveResult:
    strategy: str
    plan: Optional[TimedPlan]
    behavior: str
    report: Optional[ValidationReport]
    rejoin_index: Optional[int]
    # Models the result plan validates against (the original pair for
    # after-action/segments, the compiled pair for from-initial).
    domain: DomainModel
    problem: ProblemModel
    bookkeeping: frozenset[str] = frozenset()
    status: str = SOLVED


def _unique_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    for i in range(2, 100):
        candidate = f"{base}-{i}"
        if candidate not in taken:
            return candidate
    raise SemanticError(f"cannot find an unused name for '{base}'")


def compile_force_action(domain: DomainModel, problem: ProblemModel,
                         alt: GroundAction) -> CompiledTask:
    """Add an applied-<op> predicate, a user-action-<op> operator copy
    carrying it as an (at-end) effect, and the ground applied fact as an
    extra goal.  Inputs are never mutated."""
    op = domain.operator(alt.name)
    pred_names = domain.predicate_names()
    op_names = {o.name for o in domain.operators}
    applied = _unique_name(f"applied-{op.name}", pred_names)
    user_op_name = _unique_name(f"user-action-{op.name}", op_names)

    applied_atom: Atom = (applied,) + tuple(p.name for p in op.params)
    marker = Literal(applied_atom)
    if op.durative:
        user_op = replace(op, name=user_op_name, eff_end=op.eff_end + (marker,))
    else:
        user_op = replace(op, name=user_op_name, eff_start=op.eff_start + (marker,))

    new_domain = replace(
        domain,
        predicates=domain.predicates + (PredicateDef(applied, op.params),),
        operators=domain.operators + (user_op,),
    )
    applied_fact: Atom = (applied,) + alt.args
    new_problem = replace(problem, goal=problem.goal + (applied_fact,))
    return CompiledTask(new_domain, new_problem, applied, user_op_name)


def compile_time_window(domain: DomainModel, problem: ProblemModel,
                        alt: GroundAction, lb: Decimal, ub: Decimal) -> CompiledTask:
    """Force the action and constrain its start to the (lb, ub) window
    with an applicable-user-action predicate toggled by two TILs."""
    lb, ub = q3(lb), q3(ub)
    if lb < 0 or not lb < ub:
        raise PlanningError(f"invalid time window [{fmt(lb)}, {fmt(ub)}]: "
                            "need 0 <= LB < UB")
    base = compile_force_action(domain, problem, alt)
    window = _unique_name("applicable-user-action", base.domain.predicate_names())
    window_atom: Atom = (window,)

    operators = []
    for op in base.domain.operators:
        if op.name == base.user_operator:
            op = replace(op, cond_start=op.cond_start + (window_atom,))
        operators.append(op)
    new_domain = replace(
        base.domain,
        predicates=base.domain.predicates + (PredicateDef(window, ()),),
        operators=tuple(operators),
    )
    tils = base.problem.tils + (
        TimedInitialLiteral(lb, Literal(window_atom, True)),
        TimedInitialLiteral(ub, Literal(window_atom, False)),
    )
    new_problem = replace(base.problem,
                          tils=tuple(sorted(tils, key=lambda t: t.time)))
    return CompiledTask(new_domain, new_problem, base.applied_predicate,
                        base.user_operator, window)


def weakest_conditions(task: GroundTask, steps) -> frozenset[Atom]:
    """Facts a plan suffix requires but does not itself produce.

    Steps are scanned in time order; a condition counts as supported only
    if an earlier step added it and no later delete cancelled it.  An
    empty suffix needs exactly the original goals.
    """
    steps = list(steps)
    if not steps:
        return frozenset(task.goal)
    supported: set[Atom] = set()
    needed: set[Atom] = set()
    for step in sorted(steps, key=lambda s: s.start):
        ga = task.action(step.action)
        for cond in sorted(ga.cond_start | ga.cond_overall | ga.cond_end):
            if cond not in supported:
                needed.add(cond)
        supported -= ga.del_start | ga.del_end
        supported |= ga.add_start | ga.add_end
    # goals the suffix leaves alone must already hold
    needed.update(g for g in task.goal if g not in supported)
    return frozenset(needed)


def compress_schedule(task: GroundTask, plan: TimedPlan) -> Optional[TimedPlan]:
    """Greedy left-shift: each step, in order, is moved to the earliest
    start (no earlier than the previous step's start) that keeps the
    partial plan valid.  Returns None if no valid compression is found."""
    scheduled: list[PlanStep] = []
    for step in plan.steps:
        prev_start = scheduled[-1].start if scheduled else q3(0)
        ends = [s.start + s.duration for s in scheduled]
        # Scheduling after everything already placed reproduces serial
        # semantics, so it is always a sound last resort.
        fallback = max(ends) + EPSILON if ends else step.start
        candidates = {q3(0), fallback, step.start}
        candidates.update(s.start for s in scheduled)
        candidates.update(ends)
        for til in task.tils:
            candidates.add(til.time)
            candidates.add(til.time + EPSILON)
        placed = None
        for cand in sorted(c for c in candidates if prev_start <= c <= fallback):
            trial = TimedPlan(tuple(scheduled) + (PlanStep(cand, step.action, step.duration),))
            if validate(task, trial, require_goal=False).valid:
                placed = PlanStep(cand, step.action, step.duration)
                break
        if placed is None:
            return None
        scheduled.append(placed)
    return TimedPlan(tuple(scheduled))


def classify_behavior(base_task: GroundTask, base_plan: TimedPlan,
                      pivot_facts: frozenset[Atom],
                      new_task: GroundTask, new_plan: Optional[TimedPlan],
                      anchor_index: int,
                      ignore_predicates: frozenset[str] = frozenset()):
    """Classify a regenerated plan against the original.

    ``pivot_facts`` is the state in which the suggested action was
    injected; ``anchor_index`` is the suggested action's step index in
    the new plan.  Returns (behavior, rejoin_index) where rejoin_index
    counts completed steps of the original plan at the shared state.
    """
    if new_plan is None:
        return BEHAVIOR_NO_PLAN, None
    base_seq = state_sequence(base_task, base_plan, ignore_predicates)
    new_seq = state_sequence(new_task, new_plan, ignore_predicates)
    pivot = frozenset(f for f in pivot_facts if f[0] not in ignore_predicates)

    # (a): the state right after the step following the user action is the
    # pivot state again -- the plan just undoes the suggestion.
    undo_pos = anchor_index + 2
    if undo_pos < len(new_seq) and new_seq[undo_pos] == pivot:
        return BEHAVIOR_RETURNS_IMMEDIATELY, None
    base_index = {facts: i for i, facts in reversed(list(enumerate(base_seq)))}
    for i in range(anchor_index + 2, len(new_seq)):
        if new_seq[i] in base_index:
            return BEHAVIOR_REJOINS, base_index[new_seq[i]]
    return BEHAVIOR_NEW_ROUTE, None


def _problem_from_state(problem: ProblemModel, state: State,
                        goal: frozenset[Atom]) -> ProblemModel:
    """A problem whose initial state is ``state`` (TILs shifted to be
    relative to it), for handing a mid-plan subtask to external planners."""
    tils = tuple(TimedInitialLiteral(t.time - state.time, t.literal)
                 for t in problem.tils if t.time > state.time)
    return replace(problem,
                   init=tuple(sorted(state.facts)),
                   init_values=tuple(sorted(state.values.items())),
                   tils=tils,
                   goal=tuple(sorted(goal)))


def _shift(plan: TimedPlan, offset: Decimal) -> TimedPlan:
    return TimedPlan(tuple(PlanStep(s.start + offset, s.action, s.duration)
                           for s in plan.steps))


def _plan_from(task: GroundTask, state: State, goal: frozenset[Atom],
               config: PlannerConfig, forbidden: frozenset = frozenset()) -> SearchResult:
    """Plan from an arbitrary state with either engine.  External planner
    results come back rebased to the state's absolute time."""
    if config.mode == "builtin":
        return plan_builtin(task, config, start_state=state, goal=goal,
                            forbidden=forbidden)
    sub_problem = _problem_from_state(task.problem, state, goal)
    plan = plan_external(print_domain(task.domain), print_problem(sub_problem),
                         config, ground(task.domain, sub_problem))
    return SearchResult(_shift(plan, state.time), SOLVED, 0)


def _inject_and_plan(task: GroundTask, plan: TimedPlan, index: int,
                     alt: GroundAction, config: PlannerConfig):
    """Common first phase of after-action and segments: complete the
    prefix, apply the suggestion atomically, plan onward to the goals
    while forbidding a return to the pivot state."""
    pivot = completed_prefix_state(task, plan, index)
    after = execute_action(pivot, alt)
    if after is None:
        raise PlanningError(f"suggested action {alt} is not applicable at step {index}")
    suffix = _plan_from(task, after, task.goal, config,
                        forbidden=frozenset({pivot.facts}))
    return pivot, after, suffix


def replan_after(task: GroundTask, plan: TimedPlan, index: int,
                 alt: GroundAction, config: PlannerConfig | None = None) -> ContrastiveResult:
    """Keep the plan prefix, apply the suggested action, replan to the
    goals without revisiting the pre-suggestion state."""
    config = config or PlannerConfig()
    pivot, after, suffix = _inject_and_plan(task, plan, index, alt, config)
    prefix_steps = plan.steps[:index]
    if suffix.plan is None:
        return ContrastiveResult(STRATEGY_AFTER_ACTION, None, BEHAVIOR_NO_PLAN,
                                 None, None, task.domain, task.problem,
                                 status=suffix.status)
    alt_step = PlanStep(pivot.time, alt.key, alt.duration)
    new_plan = TimedPlan(prefix_steps + (alt_step,) + suffix.plan.steps)
    report = validate(task, new_plan)
    behavior, rejoin = classify_behavior(task, plan, pivot.facts, task,
                                         new_plan, index)
    return ContrastiveResult(STRATEGY_AFTER_ACTION, new_plan, behavior, report,
                             rejoin, task.domain, task.problem)


def plan_segments(task: GroundTask, plan: TimedPlan, index: int,
                  alt: GroundAction, config: PlannerConfig | None = None) -> ContrastiveResult:
    """Plan the part after the user action and the part before it as
    separate subproblems, then concatenate and left-compress."""
    config = config or PlannerConfig()
    pivot, after, later = _inject_and_plan(task, plan, index, alt, config)
    if later.plan is None:
        return ContrastiveResult(STRATEGY_SEGMENTS, None, BEHAVIOR_NO_PLAN,
                                 None, None, task.domain, task.problem,
                                 status=later.status)

    alt_probe = PlanStep(pivot.time, alt.key, alt.duration)
    needed = weakest_conditions(task, (alt_probe,) + later.plan.steps)
    initial = _plan_from(task, initial_state(task), needed, config)
    if initial.plan is None:
        return ContrastiveResult(STRATEGY_SEGMENTS, None, BEHAVIOR_NO_PLAN,
                                 None, None, task.domain, task.problem,
                                 status=initial.status)

    alt_start = initial.plan.makespan
    alt_step = PlanStep(alt_start, alt.key, alt.duration)
    later_offset = (alt_start + alt.duration + EPSILON) - after.time
    serial = TimedPlan(initial.plan.steps + (alt_step,) +
                       _shift(later.plan, later_offset).steps)
    compressed = compress_schedule(task, serial)
    new_plan = compressed if compressed is not None \
        and validate(task, compressed).valid else serial
    report = validate(task, new_plan)
    anchor = new_plan.steps.index(next(s for s in new_plan.steps
                                       if s.action == alt.key))
    behavior, rejoin = classify_behavior(task, plan, pivot.facts, task,
                                         new_plan, anchor)
    return ContrastiveResult(STRATEGY_SEGMENTS, new_plan, behavior, report,
                             rejoin, task.domain, task.problem)


def replan_from_initial(task: GroundTask, plan: TimedPlan, index: int,
                        alt: GroundAction, config: PlannerConfig | None = None,
                        window: tuple[Decimal, Decimal] | None = None) -> ContrastiveResult:
    """Compile the suggestion into the model (optionally with a time
    window) and replan the whole task from the initial state."""
    config = config or PlannerConfig()
    strategy = STRATEGY_TIME_WINDOW if window is not None else STRATEGY_FROM_INITIAL
    if window is not None:
        compiled = compile_time_window(task.domain, task.problem, alt, *window)
    else:
        compiled = compile_force_action(task.domain, task.problem, alt)
    ctask = ground(compiled.domain, compiled.problem)
    result = run_planner(ctask, config)
    if result.plan is None:
        return ContrastiveResult(strategy, None, BEHAVIOR_NO_PLAN, None, None,
                                 compiled.domain, compiled.problem,
                                 compiled.bookkeeping(), status=result.status)
    report = validate(ctask, result.plan)
    anchor = next((i for i, s in enumerate(result.plan.steps)
                   if s.action == (compiled.user_operator,) + alt.args),
                  len(result.plan.steps) - 1)
    pivot = completed_prefix_state(task, plan, index)
    behavior, rejoin = classify_behavior(task, plan, pivot.facts, ctask,
                                         result.plan, anchor,
                                         compiled.bookkeeping())
    return ContrastiveResult(strategy, result.plan, behavior, report, rejoin,
                             compiled.domain, compiled.problem,
                             compiled.bookkeeping())
