"""Command-line interface: the same session operations as the HTTP API,
operating on a workspace file for scripted or headless use."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import session as sess
from .errors import PlanwhyError
from .grounding import ground
from .numbers import fmt, q3
from .parser import parse_domain, parse_problem
from .planner import PlannerConfig, format_plan, parse_plan
from .simulate import validate as validate_plan


def _config(planner_cmd, timeout, node_cap) -> PlannerConfig:
    if planner_cmd:
        return PlannerConfig(mode="external", command=planner_cmd,
                             timeout=timeout, node_cap=node_cap)
    return PlannerConfig(timeout=timeout, node_cap=node_cap)


def _load_ws(workspace: str) -> sess.Workspace:
    return sess.load_workspace(Path(workspace).read_bytes())


def _store_ws(ws: sess.Workspace, workspace: str):
    Path(workspace).write_bytes(sess.save_workspace(ws))


def _print_node(node: sess.PlanNode):
    click.echo(f"plan {node.id}"
               + (f" (parent {node.parent})" if node.parent else " (root)")
               + (f" strategy={node.strategy}" if node.strategy else "")
               + (f" behavior=({node.behavior})" if node.behavior else ""))
    if node.plan is None:
        click.echo("  no plan found: the suggestion prevents reaching the goals")
        return
    for line in format_plan(node.plan).splitlines():
        click.echo("  " + line)
    for name, value in sorted(node.metrics.items()):
        click.echo(f"  {name} = {fmt(value)}")


def _parse_action_text(text: str) -> tuple:
    return tuple(text.strip().lstrip("(").rstrip(")").lower().split())


class _Group(click.Group):
    """Translate package errors into clean CLI failures."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except PlanwhyError as exc:
            raise click.ClickException(str(exc))


@click.group(cls=_Group)
def main():
    """Contrastive exploration of temporal PDDL plans."""


@main.command("plan")
@click.option("--domain", required=True, type=click.Path(exists=True))
@click.option("--problem", required=True, type=click.Path(exists=True))
@click.option("--planner-cmd", default=None,
              help="External planner template with {domain} {problem} {plan}.")
@click.option("--timeout", default=60.0, show_default=True)
@click.option("--node-cap", default=100_000, show_default=True)
@click.option("--workspace", required=True, type=click.Path(),
              help="Workspace file to create.")
def cmd_plan(domain, problem, planner_cmd, timeout, node_cap, workspace):
    """Generate the root plan and start a workspace."""
    ws = sess.new_session(Path(domain).read_text(), Path(problem).read_text(),
                          _config(planner_cmd, timeout, node_cap))
    _store_ws(ws, workspace)
    _print_node(ws.nodes[ws.root_id])


@main.command("alternatives")
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--plan", "plan_id", default=None, type=int,
              help="Plan id (defaults to the current plan).")
@click.option("--step", required=True, type=int)
def cmd_alternatives(workspace, plan_id, step):
    """List applicable alternative actions at a plan step."""
    ws = _load_ws(workspace)
    pid = plan_id if plan_id is not None else ws.current_id
    for action in sess.alternatives(ws, pid, step):
        click.echo(str(action))


@main.command("ask")
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--plan", "plan_id", default=None, type=int)
@click.option("--step", required=True, type=int)
@click.option("--action", required=True,
              help='Alternative action, e.g. "(load-truck p1 t1 a)".')
@click.option("--strategy", required=True,
              type=click.Choice(["from-initial", "time-window",
                                 "after-action", "segments"]))
@click.option("--window", default=None, help="LB,UB for time-window.")
def cmd_ask(workspace, plan_id, step, action, strategy, window):
    """Ask "why not this action?" and record the regenerated plan."""
    ws = _load_ws(workspace)
    pid = plan_id if plan_id is not None else ws.current_id
    win = None
    if window is not None:
        try:
            lb, ub = window.split(",")
            win = (q3(lb), q3(ub))
        except ValueError:
            raise click.UsageError("--window expects LB,UB")
    node = sess.ask(ws, pid, step, _parse_action_text(action), strategy, win)
    _store_ws(ws, workspace)
    _print_node(node)


@main.command("compare")
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--plans", required=True, help="Comma-separated plan ids.")
@click.option("--metrics", default="makespan,step-count", show_default=True)
def cmd_compare(workspace, plans, metrics):
    """Compare plans over the registered metrics."""
    ws = _load_ws(workspace)
    ids = [int(p) for p in plans.split(",")]
    names = metrics.split(",")
    table = sess.compare(ws, ids, names)
    header = "plan".ljust(6) + "".join(n.ljust(14) for n in names)
    click.echo(header)
    for row in table["rows"]:
        cells = "".join(str(row["values"][n] or "-").ljust(14) for n in names)
        click.echo(str(row["id"]).ljust(6) + cells)
    for name in names:
        click.echo(f"best {name}: plan {table['best'][name]}")


@main.command("validate")
@click.option("--domain", required=True, type=click.Path(exists=True))
@click.option("--problem", required=True, type=click.Path(exists=True))
@click.option("--plan", "plan_file", required=True, type=click.Path(exists=True))
def cmd_validate(domain, problem, plan_file):
    """Validate a plan file against a domain/problem pair."""
    dom = parse_domain(Path(domain).read_text())
    prob = parse_problem(Path(problem).read_text(), dom)
    task = ground(dom, prob)
    plan = parse_plan(Path(plan_file).read_text())
    report = validate_plan(task, plan)
    if report.valid:
        click.echo(f"valid; makespan {fmt(report.makespan)}")
    else:
        click.echo(f"invalid: {report.violation}")
        sys.exit(1)


@main.command("save")
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def cmd_save(workspace, out):
    """Re-serialize a workspace to a new file (canonical form)."""
    _store_ws(_load_ws(workspace), out)
    click.echo(f"saved to {out}")


@main.command("load")
@click.option("--workspace", required=True, type=click.Path(exists=True))
def cmd_load(workspace):
    """Load a workspace and print its exploration tree."""
    ws = _load_ws(workspace)
    def walk(node_id, depth):
        node = ws.nodes[node_id]
        marker = "*" if node_id == ws.current_id else " "
        cost = fmt(node.metrics["makespan"]) if node.metrics else "-"
        suggested = "(" + " ".join(node.suggested) + ")" if node.suggested else "-"
        replaced = "(" + " ".join(node.replaced) + ")" if node.replaced else "-"
        click.echo(f"{marker}{'  ' * depth}plan {node_id}  cost={cost}  "
                   f"suggested={suggested}  replaced={replaced}")
        for child_id in sorted(c for c, n in ws.nodes.items()
                               if n.parent == node_id):
            walk(child_id, depth + 1)
    walk(ws.root_id, 0)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def cmd_serve(host, port):
    """Run the HTTP API server."""
    import uvicorn
    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
