"""Deterministic PDDL emission: one construct per line, 2-space indent.

print_* output re-parses to a structurally identical model, and is
byte-identical for identical models.
"""

from __future__ import annotations

from .model import (
    Atom,
    DomainModel,
    Expr,
    Literal,
    NumericEffect,
    Operator,
    ProblemModel,
)
from .numbers import fmt


def _atom(atom: Atom) -> str:
    return "(" + " ".join(atom) + ")"


def _literal(lit: Literal) -> str:
    return _atom(lit.atom) if lit.positive else f"(not {_atom(lit.atom)})"


def _expr(expr: Expr) -> str:
    kind = expr[0]
    if kind == "num":
        return fmt(expr[1])
    if kind == "func":
        return _atom(expr[1])
    return f"({kind} {_expr(expr[1])} {_expr(expr[2])})"


def _numeric(eff: NumericEffect) -> str:
    return f"({eff.op} {_atom(eff.function)} {_expr(eff.expr)})"


def _typed(pairs) -> str:
    return " ".join(f"{name} - {type_}" for name, type_ in pairs)


def _params(op_params) -> str:
    return " ".join(f"{p.name} - {p.type}" for p in op_params)


def _operator_lines(op: Operator) -> list[str]:
    lines = []
    if op.durative:
        lines.append(f"  (:durative-action {op.name}")
        lines.append(f"    :parameters ({_params(op.params)})")
        lines.append(f"    :duration (= ?duration {_expr(op.duration)})")
        conds = []
        conds.extend(f"(at start {_atom(a)})" for a in op.cond_start)
        conds.extend(f"(over all {_atom(a)})" for a in op.cond_overall)
        conds.extend(f"(at end {_atom(a)})" for a in op.cond_end)
        lines.append("    :condition (and")
        lines.extend(f"      {c}" for c in conds)
        lines.append("    )")
        effs = []
        effs.extend(f"(at start {_literal(l)})" for l in op.eff_start)
        effs.extend(f"(at start {_numeric(n)})" for n in op.num_start)
        effs.extend(f"(at end {_literal(l)})" for l in op.eff_end)
        effs.extend(f"(at end {_numeric(n)})" for n in op.num_end)
        lines.append("    :effect (and")
        lines.extend(f"      {e}" for e in effs)
        lines.append("    )")
        lines.append("  )")
    else:
        lines.append(f"  (:action {op.name}")
        lines.append(f"    :parameters ({_params(op.params)})")
        lines.append("    :precondition (and")
        lines.extend(f"      {_atom(a)}" for a in op.cond_start)
        lines.append("    )")
        lines.append("    :effect (and")
        lines.extend(f"      {_literal(l)}" for l in op.eff_start)
        lines.extend(f"      {_numeric(n)}" for n in op.num_start)
        lines.append("    )")
        lines.append("  )")
    return lines


def print_domain(domain: DomainModel) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        lines.append("  (:types " + _typed(domain.types) + ")")
    if domain.predicates:
        lines.append("  (:predicates")
        for p in domain.predicates:
            inner = f" {_params(p.params)}" if p.params else ""
            lines.append(f"    ({p.name}{inner})")
        lines.append("  )")
    if domain.functions:
        lines.append("  (:functions")
        for f in domain.functions:
            inner = f" {_params(f.params)}" if f.params else ""
            lines.append(f"    ({f.name}{inner})")
        lines.append("  )")
    for op in domain.operators:
        lines.extend(_operator_lines(op))
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(problem: ProblemModel) -> str:
    lines = [f"(define (problem {problem.name})",
             f"  (:domain {problem.domain_name})"]
    if problem.objects:
        lines.append("  (:objects " + _typed(problem.objects) + ")")
    lines.append("  (:init")
    for atom in problem.init:
        lines.append(f"    {_atom(atom)}")
    for func, value in problem.init_values:
        lines.append(f"    (= {_atom(func)} {fmt(value)})")
    for til in problem.tils:  # already stable-sorted by time
        lines.append(f"    (at {fmt(til.time)} {_literal(til.literal)})")
    lines.append("  )")
    lines.append("  (:goal (and")
    for atom in problem.goal:
        lines.append(f"    {_atom(atom)}")
    lines.append("  ))")
    if problem.metric is not None:
        direction, expr = problem.metric
        lines.append(f"  (:metric {direction} {_expr(expr)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_model(model) -> str:
    """Emit either a DomainModel or a ProblemModel as PDDL text."""
    if isinstance(model, DomainModel):
        return print_domain(model)
    if isinstance(model, ProblemModel):
        return print_problem(model)
    raise TypeError(f"cannot print {type(model).__name__}")
