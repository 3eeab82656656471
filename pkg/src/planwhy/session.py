"""Workspace state: the exploration tree of generated plans, metric
evaluation, and versioned JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .contrastive import (
    BEHAVIOR_NO_PLAN,
    STRATEGIES,
    STRATEGY_AFTER_ACTION,
    STRATEGY_SEGMENTS,
    ContrastiveResult,
    plan_segments,
    replan_after,
    replan_from_initial,
)
from .errors import (
    PlanningError,
    SessionError,
    StaleSuggestionError,
    UnknownIdError,
    WorkspaceFormatError,
)
from .grounding import GroundTask, ground
from .model import DomainModel, ProblemModel
from .numbers import fmt, q3
from .parser import parse_domain, parse_problem
from .planner import PlannerConfig, format_plan, parse_plan, run_planner
from .printer import print_domain, print_problem
from .simulate import (TimedPlan, applicable_actions, completed_prefix_state,
                       validate)

WORKSPACE_VERSION = 1

BUILTIN_METRICS = ("makespan", "step-count")


@dataclass(frozen=True)
class Metric:
    name: str
    kind: str  # makespan | step-count | pddl-metric | weighted-sum
    weights: tuple[tuple[str, Decimal], ...] = ()


@dataclass
class PlanNode:
    id: int
    parent: Optional[int]
    plan: Optional[TimedPlan]
    replaced: Optional[tuple]  # ground action key of the replaced action
    suggested: Optional[tuple]
    step_index: Optional[int]
    strategy: Optional[str]
    behavior: Optional[str]
    rejoin_index: Optional[int]
    metrics: dict[str, Decimal]
    # PDDL texts the node's plan validates against (compiled models for
    # from-initial strategies, the originals otherwise).
    domain_text: str
    problem_text: str
    bookkeeping: frozenset[str] = frozenset()

    _task: Optional[GroundTask] = field(default=None, repr=False, compare=False)

    def task(self) -> GroundTask:
        if self._task is None:
            domain = parse_domain(self.domain_text)
            problem = parse_problem(self.problem_text, domain)
            self._task = ground(domain, problem)
        return self._task


@dataclass
class Workspace:
    domain_text: str
    problem_text: str
    config: PlannerConfig
    nodes: dict[int, PlanNode]
    root_id: int
    current_id: int
    metrics: dict[str, Metric]
    annotations: list[str]
    next_id: int

    domain: DomainModel = field(default=None, repr=False, compare=False)
    problem: ProblemModel = field(default=None, repr=False, compare=False)
    task: GroundTask = field(default=None, repr=False, compare=False)

    def node(self, node_id: int) -> PlanNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownIdError(f"unknown plan id {node_id}")


def _node_metrics(ws: Workspace, result_task: GroundTask,
                  plan: Optional[TimedPlan]) -> dict[str, Decimal]:
    if plan is None:
        return {}
    report = validate(result_task, plan)
    values = dict(report.metrics)
    out = {"makespan": values["makespan"], "step-count": values["step-count"]}
    if "metric" in values:
        out["metric"] = values["metric"]
    return out


def default_metrics(problem: ProblemModel) -> dict[str, Metric]:
    metrics = {"makespan": Metric("makespan", "makespan"),
               "step-count": Metric("step-count", "step-count")}
    if problem.metric is not None:
        metrics["metric"] = Metric("metric", "pddl-metric")
    return metrics


def new_session(domain_text: str, problem_text: str,
                config: PlannerConfig | None = None) -> Workspace:
    """Parse, ground, produce the root plan, and build a one-node tree."""
    config = config or PlannerConfig()
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    task = ground(domain, problem)
    result = run_planner(task, config,
                         domain_text=domain_text, problem_text=problem_text)
    if result.plan is None:
        raise PlanningError(f"could not solve the task ({result.status})")
    report = validate(task, result.plan)
    if not report.valid:
        raise PlanningError(f"planner returned an invalid plan: {report.violation}")

    ws = Workspace(domain_text=domain_text, problem_text=problem_text,
                   config=config, nodes={}, root_id=1, current_id=1,
                   metrics=default_metrics(problem), annotations=[], next_id=2,
                   domain=domain, problem=problem, task=task)
    root = PlanNode(id=1, parent=None, plan=result.plan, replaced=None,
                    suggested=None, step_index=None, strategy=None,
                    behavior=None, rejoin_index=None,
                    metrics=_node_metrics(ws, task, result.plan),
                    domain_text=domain_text, problem_text=problem_text)
    root._task = task
    ws.nodes[1] = root
    return ws


def alternatives(ws: Workspace, plan_id: int, step_index: int):
    """Applicable alternatives at the state before the given step, minus
    the step's own action.

    The state has every earlier step executed to completion, so any
    returned alternative can actually be substituted by the replan
    strategies.
    """
    node = ws.node(plan_id)
    if node.plan is None:
        raise SessionError(f"plan {plan_id} has no plan (behavior (d) node)")
    if not 0 <= step_index < len(node.plan.steps):
        raise UnknownIdError(f"plan {plan_id} has no step {step_index}")
    task = node.task()
    step = node.plan.steps[step_index]
    state = completed_prefix_state(task, node.plan, step_index)
    return applicable_actions(task, state, task.action(step.action))


def ask(ws: Workspace, plan_id: int, step_index: int, action_key: tuple,
        strategy: str, window=None) -> PlanNode:
    """Run a contrastive query and append the outcome as a child node.

    A behavior-(d) outcome still creates a node: the recorded absence of
    a plan is itself the explanation.
    """
    if strategy not in STRATEGIES:
        raise SessionError(f"unknown strategy {strategy!r}; expected one of "
                           + ", ".join(STRATEGIES))
    node = ws.node(plan_id)
    if node.plan is None:
        raise SessionError(f"plan {plan_id} has no plan to modify")
    task = node.task()
    alts = alternatives(ws, plan_id, step_index)
    by_key = {a.key: a for a in alts}
    if tuple(action_key) not in by_key:
        raise StaleSuggestionError(
            f"action {'(' + ' '.join(action_key) + ')'} is not an applicable "
            f"alternative at step {step_index} of plan {plan_id}")
    alt = by_key[tuple(action_key)]
    replaced = node.plan.steps[step_index].action

    if strategy == STRATEGY_AFTER_ACTION:
        result = replan_after(task, node.plan, step_index, alt, ws.config)
    elif strategy == STRATEGY_SEGMENTS:
        result = plan_segments(task, node.plan, step_index, alt, ws.config)
    else:
        win = None
        if strategy == "time-window":
            if window is None:
                raise SessionError("time-window strategy requires a window")
            win = (q3(window[0]), q3(window[1]))
        result = replan_from_initial(task, node.plan, step_index, alt,
                                     ws.config, window=win)

    result_task = ground(result.domain, result.problem)
    child = PlanNode(
        id=ws.next_id, parent=plan_id, plan=result.plan,
        replaced=replaced, suggested=alt.key, step_index=step_index,
        strategy=result.strategy, behavior=result.behavior,
        rejoin_index=result.rejoin_index,
        metrics=_node_metrics(ws, result_task, result.plan),
        domain_text=print_domain(result.domain),
        problem_text=print_problem(result.problem),
        bookkeeping=result.bookkeeping,
    )
    child._task = result_task
    ws.nodes[child.id] = child
    ws.next_id += 1
    ws.current_id = child.id
    return child


def evaluate_metric(ws: Workspace, metric_name: str, node: PlanNode) -> Optional[Decimal]:
    if metric_name not in ws.metrics:
        raise UnknownIdError(f"unknown metric {metric_name!r}")
    metric = ws.metrics[metric_name]
    if node.plan is None:
        return None
    if metric.kind in {"makespan", "step-count"}:
        return node.metrics[metric.kind]
    if metric.kind == "pddl-metric":
        return node.metrics.get("metric")
    if metric.kind == "weighted-sum":
        total = q3(0)
        for ref, weight in metric.weights:
            val = evaluate_metric(ws, ref, node)
            if val is None:
                return None
            total += weight * val
        return q3(total)
    raise SessionError(f"unknown metric kind {metric.kind!r}")


def add_metric(ws: Workspace, metric: Metric):
    if metric.kind == "weighted-sum":
        for ref, _ in metric.weights:
            if ref not in ws.metrics:
                raise UnknownIdError(f"weighted-sum references unknown metric {ref!r}")
            if ref == metric.name:
                raise SessionError("weighted-sum metric may not reference itself")
    elif metric.kind not in {"makespan", "step-count", "pddl-metric"}:
        raise SessionError(f"unknown metric kind {metric.kind!r}")
    ws.metrics[metric.name] = metric


def compare(ws: Workspace, plan_ids, metric_names) -> dict:
    """Matrix of metric values with a per-metric best plan id.

    Lower is better, except for a maximize PDDL metric.
    """
    rows = []
    for pid in plan_ids:
        node = ws.node(pid)
        values = {}
        for name in metric_names:
            val = evaluate_metric(ws, name, node)
            values[name] = None if val is None else fmt(val)
        rows.append({"id": pid, "values": values})

    maximize = ws.problem is not None and ws.problem.metric is not None \
        and ws.problem.metric[0] == "maximize"
    best = {}
    for name in metric_names:
        scored = [(ws.node(pid), pid) for pid in plan_ids]
        vals = [(evaluate_metric(ws, name, node), pid) for node, pid in scored]
        vals = [(v, pid) for v, pid in vals if v is not None]
        if not vals:
            best[name] = None
            continue
        metric = ws.metrics[name]
        pick_max = maximize and metric.kind == "pddl-metric"
        chosen = max(vals, key=lambda x: (x[0], -x[1])) if pick_max \
            else min(vals, key=lambda x: (x[0], x[1]))
        best[name] = chosen[1]
    return {"metrics": list(metric_names), "rows": rows, "best": best}


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_workspace(ws: Workspace) -> bytes:
    doc = {
        "version": WORKSPACE_VERSION,
        "domain": ws.domain_text,
        "problem": ws.problem_text,
        "config": {"mode": ws.config.mode, "command": ws.config.command,
                   "timeout": ws.config.timeout, "node_cap": ws.config.node_cap},
        "root": ws.root_id,
        "current": ws.current_id,
        "next_id": ws.next_id,
        "nodes": [
            {
                "id": n.id,
                "parent": n.parent,
                "plan": None if n.plan is None else format_plan(n.plan),
                "replaced": list(n.replaced) if n.replaced else None,
                "suggested": list(n.suggested) if n.suggested else None,
                "step_index": n.step_index,
                "strategy": n.strategy,
                "behavior": n.behavior,
                "rejoin_index": n.rejoin_index,
                "metrics": {k: fmt(v) for k, v in n.metrics.items()},
                "domain": n.domain_text,
                "problem": n.problem_text,
                "bookkeeping": sorted(n.bookkeeping),
            }
            for _, n in sorted(ws.nodes.items())
        ],
        "metrics": [
            {"name": m.name, "kind": m.kind,
             "weights": [[r, fmt(w)] for r, w in m.weights]}
            for m in ws.metrics.values()
        ],
        "annotations": list(ws.annotations),
    }
    return json.dumps(doc, indent=2).encode()


def load_workspace(data: bytes) -> Workspace:
    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WorkspaceFormatError(f"corrupt workspace stream: {exc}")
    if not isinstance(doc, dict) or "version" not in doc:
        raise WorkspaceFormatError("corrupt workspace stream: missing version")
    if doc["version"] != WORKSPACE_VERSION:
        raise WorkspaceFormatError(
            f"workspace version {doc['version']} not supported "
            f"(expected {WORKSPACE_VERSION})")
    try:
        config = PlannerConfig(**doc["config"])
        domain = parse_domain(doc["domain"])
        problem = parse_problem(doc["problem"], domain)
        task = ground(domain, problem)
        ws = Workspace(domain_text=doc["domain"], problem_text=doc["problem"],
                       config=config, nodes={}, root_id=doc["root"],
                       current_id=doc["current"], metrics={},
                       annotations=list(doc["annotations"]),
                       next_id=doc["next_id"],
                       domain=domain, problem=problem, task=task)
        for m in doc["metrics"]:
            ws.metrics[m["name"]] = Metric(
                m["name"], m["kind"],
                tuple((r, q3(w)) for r, w in m.get("weights", [])))
        for n in doc["nodes"]:
            node = PlanNode(
                id=n["id"], parent=n["parent"],
                plan=None if n["plan"] is None else parse_plan(n["plan"]),
                replaced=tuple(n["replaced"]) if n["replaced"] else None,
                suggested=tuple(n["suggested"]) if n["suggested"] else None,
                step_index=n["step_index"], strategy=n["strategy"],
                behavior=n["behavior"], rejoin_index=n["rejoin_index"],
                metrics={k: q3(v) for k, v in n["metrics"].items()},
                domain_text=n["domain"], problem_text=n["problem"],
                bookkeeping=frozenset(n.get("bookkeeping", [])),
            )
            ws.nodes[node.id] = node
    except (KeyError, TypeError, ValueError) as exc:
        raise WorkspaceFormatError(f"corrupt workspace stream: {exc}")
    return ws


def workspaces_equal(a: Workspace, b: Workspace) -> bool:
    """Structural equality used by round-trip tests."""
    return save_workspace(a) == save_workspace(b)
