"""Plan generation and plan-file handling.

Two engines sit behind one interface: a deterministic greedy best-first
search over serial durative execution (delete-relaxation additive
heuristic), and an adapter that shells out to any external PDDL planner
executable via a command template with {domain}, {problem} and {plan}
placeholders.
"""

from __future__ import annotations

import heapq
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional

from .errors import (
    ExternalPlannerFailure,
    ExternalPlannerTimeout,
    ExternalPlanRejected,
    PlanFormatError,
    PlanningError,
)
from .grounding import GroundAction, GroundTask
from .model import Atom
from .numbers import EPSILON, fmt, parse_decimal, q3
from .simulate import PlanStep, State, TimedPlan, initial_state, validate

DEFAULT_NODE_CAP = 100_000

# Search outcome statuses.
SOLVED = "solved"
UNSOLVABLE = "unsolvable"
RESOURCE_LIMITED = "resource-limited"


@dataclass(frozen=True)
class PlannerConfig:
    mode: str = "builtin"  # builtin | external
    command: Optional[str] = None
    timeout: float = 60.0
    node_cap: int = DEFAULT_NODE_CAP

    def __post_init__(self):
        if self.mode not in {"builtin", "external"}:
            raise ValueError(f"unknown planner mode {self.mode!r}")
        if self.mode == "external":
            if not self.command:
                raise ValueError("external mode requires a command template")
            for ph in ("{domain}", "{problem}", "{plan}"):
                if ph not in self.command:
                    raise ValueError(f"command template missing {ph} placeholder")


@dataclass(frozen=True)
class SearchResult:
    plan: Optional[TimedPlan]
    status: str  # solved | unsolvable | resource-limited
    expanded: int = 0


# ---------------------------------------------------------------------------
# Plan text format: "<start>: (<name> <args...>) [<duration>]"
# ---------------------------------------------------------------------------

_PLAN_LINE_RE = re.compile(
    r"^\s*(?P<start>\d+(?:\.\d+)?)\s*:\s*"
    r"\(\s*(?P<body>[A-Za-z0-9_-]+(?:\s+[A-Za-z0-9_-]+)*)\s*\)\s*"
    r"\[\s*(?P<dur>\d+(?:\.\d+)?)\s*\]\s*$")


def parse_plan(text: str) -> TimedPlan:
    """Parse plan text; blank lines and ';' comments are ignored."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = _PLAN_LINE_RE.match(line)
        if not m:
            raise PlanFormatError(f"malformed plan line: {raw.strip()!r}", lineno)
        parts = m.group("body").lower().split()
        steps.append(PlanStep(parse_decimal(m.group("start")),
                              tuple(parts), parse_decimal(m.group("dur"))))
    return TimedPlan(tuple(steps))


def format_plan(plan: TimedPlan) -> str:
    return "".join(str(step) + "\n" for step in plan.steps)


# ---------------------------------------------------------------------------
# Built-in planner
# ---------------------------------------------------------------------------


def _h_add(task: GroundTask, facts: frozenset, pending_tils, goal) -> Decimal | None:
    """Additive delete-relaxation heuristic.  Pending positive TILs count
    as freely available.  Returns None when the goal is relaxed-unreachable."""
    INF = None
    cost: dict[Atom, Decimal] = {f: q3(0) for f in facts}
    for til in pending_tils:
        if til.literal.positive:
            cost.setdefault(til.literal.atom, q3(0))
    changed = True
    while changed:
        changed = False
        for ga in task.actions:
            total = q3(0)
            reachable = True
            for c in ga.cond_start | ga.cond_overall | ga.cond_end:
                c_cost = cost.get(c)
                if c_cost is None:
                    reachable = False
                    break
                total += c_cost
            if not reachable:
                continue
            new = total + ga.duration
            for f in ga.add_start | ga.add_end:
                old = cost.get(f)
                if old is None or new < old:
                    cost[f] = new
                    changed = True
    total = q3(0)
    for g in goal:
        g_cost = cost.get(g)
        if g_cost is None:
            return INF
        total += g_cost
    return total


def _apply_serial(ga: GroundAction, facts: frozenset, values: dict,
                  t: Decimal, tils, til_index: int):
    """Execute one action serially from time t, weaving in TILs that fire
    during its interval.  Returns (facts', values', til_index') or None."""
    if not (ga.cond_start <= facts and ga.cond_overall <= facts):
        return None
    fs = set(facts)
    vals = dict(values)
    fs -= ga.del_start
    fs |= ga.add_start
    from .simulate import _apply_numeric
    _apply_numeric(vals, ga.num_start)
    if not ga.cond_overall <= fs:
        return None
    end = t + ga.duration
    i = til_index
    while i < len(tils) and tils[i].time <= end:
        til = tils[i]
        if til.literal.positive:
            fs.add(til.literal.atom)
        else:
            fs.discard(til.literal.atom)
        i += 1
        if not ga.cond_overall <= fs:
            return None
    if not ga.cond_end <= fs:
        return None
    fs -= ga.del_end
    fs |= ga.add_end
    _apply_numeric(vals, ga.num_end)
    return frozenset(fs), vals, i


def plan_builtin(task: GroundTask, config: PlannerConfig | None = None, *,
                 start_state: State | None = None,
                 goal: frozenset | None = None,
                 forbidden: frozenset = frozenset()) -> SearchResult:
    """Greedy best-first search over serial durative execution.

    ``forbidden`` is a set of fact-sets that must never be expanded.
    Deterministic: identical inputs yield identical plans.
    """
    config = config or PlannerConfig()
    if goal is None:
        goal = task.goal
    state = start_state or initial_state(task)
    tils = task.tils

    # TILs at or before the start time are already part of the state.
    til0 = 0
    while til0 < len(tils) and tils[til0].time <= state.time:
        til0 += 1

    def key_of(facts, til_i, t):
        if til_i < len(tils):
            return (facts, til_i, t)
        return facts

    init_facts = state.facts
    if goal <= init_facts:
        return SearchResult(TimedPlan(()), SOLVED, 0)

    h0 = _h_add(task, init_facts, tils[til0:], goal)
    if h0 is None:
        return SearchResult(None, UNSOLVABLE, 0)

    counter = 0
    open_heap = [(h0, 0, counter, init_facts, state.values, state.time, til0, ())]
    seen = {key_of(init_facts, til0, state.time)}
    expanded = 0

    while open_heap:
        h, depth, _, facts, values, t, til_i, path = heapq.heappop(open_heap)
        if facts in forbidden:
            continue
        if goal <= facts:
            return SearchResult(TimedPlan(path), SOLVED, expanded)
        expanded += 1
        if expanded > config.node_cap:
            return SearchResult(None, RESOURCE_LIMITED, expanded)

        successors = []
        for ga in task.actions:
            applied = _apply_serial(ga, facts, values, t, tils, til_i)
            if applied is None:
                continue
            nfacts, nvals, ntil = applied
            successors.append((ga, nfacts, nvals, t + ga.duration + EPSILON, ntil,
                               PlanStep(t, ga.key, ga.duration)))
        if til_i < len(tils):
            # wait: advance just past the next TIL time
            wt = tils[til_i].time
            fs = set(facts)
            j = til_i
            while j < len(tils) and tils[j].time == wt:
                til = tils[j]
                if til.literal.positive:
                    fs.add(til.literal.atom)
                else:
                    fs.discard(til.literal.atom)
                j += 1
            successors.append((None, frozenset(fs), values, wt + EPSILON, j, None))

        for succ in successors:
            _, nfacts, nvals, nt, ntil, step = succ
            k = key_of(nfacts, ntil, nt)
            if k in seen or nfacts in forbidden:
                continue
            seen.add(k)
            nh = _h_add(task, nfacts, tils[ntil:], goal)
            if nh is None:
                continue
            counter += 1
            npath = path + (step,) if step is not None else path
            heapq.heappush(open_heap,
                           (nh, len(npath), counter, nfacts, nvals, nt, ntil, npath))

    return SearchResult(None, UNSOLVABLE, expanded)


# ---------------------------------------------------------------------------
# External planner adapter
# ---------------------------------------------------------------------------


def plan_external(domain_text: str, problem_text: str, config: PlannerConfig,
                  task: GroundTask | None = None) -> TimedPlan:
    """Run an external planner over temp files and parse its plan.

    The plan is read from the {plan} path if the planner wrote it, and
    from standard output otherwise.  When ``task`` is given the plan is
    validated before being returned.
    """
    with tempfile.TemporaryDirectory(prefix="planwhy-") as tmp:
        tmpdir = Path(tmp)
        domain_path = tmpdir / "domain.pddl"
        problem_path = tmpdir / "problem.pddl"
        plan_path = tmpdir / "plan.txt"
        domain_path.write_text(domain_text)
        problem_path.write_text(problem_text)
        command = config.command.format(domain=str(domain_path),
                                        problem=str(problem_path),
                                        plan=str(plan_path))
        try:
            proc = subprocess.run(shlex.split(command), capture_output=True,
                                  text=True, timeout=config.timeout)
        except subprocess.TimeoutExpired:
            raise ExternalPlannerTimeout(
                f"external planner exceeded {config.timeout}s timeout")
        if proc.returncode != 0:
            raise ExternalPlannerFailure(proc.returncode, proc.stderr)
        text = plan_path.read_text() if plan_path.exists() else proc.stdout
        plan = parse_plan(text)
    if task is not None:
        report = validate(task, plan)
        if not report.valid:
            raise ExternalPlanRejected(report)
    return plan


def run_planner(task: GroundTask, config: PlannerConfig, *,
                domain_text: str | None = None,
                problem_text: str | None = None) -> SearchResult:
    """Dispatch to the configured engine, normalizing to a SearchResult."""
    if config.mode == "builtin":
        return plan_builtin(task, config)
    if domain_text is None or problem_text is None:
        from .printer import print_domain, print_problem
        domain_text = domain_text or print_domain(task.domain)
        problem_text = problem_text or print_problem(task.problem)
    plan = plan_external(domain_text, problem_text, config, task)
    return SearchResult(plan, SOLVED, 0)
