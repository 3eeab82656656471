"""Immutable in-memory representation of the supported PDDL 2.1 subset.

The subset covers STRIPS + typing + durative actions with fixed-value
duration expressions, numeric fluents in durations/effects/metric, and
timed initial literals.  Everything is stored lower-cased and as tuples,
so models are hashable, comparable and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

# A ground or lifted atom: ("at", "?d", "?l") / ("at", "p1", "a").
Atom = tuple[str, ...]

# Duration / metric expressions, as nested tuples:
#   ("num", Decimal) | ("func", Atom) | ("+"|"-"|"*"|"/", expr, expr)
Expr = tuple

OBJECT_TYPE = "object"


@dataclass(frozen=True)
class TypedParam:
    name: str  # includes the leading "?"
    type: str


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: tuple[TypedParam, ...]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[TypedParam, ...]


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)


@dataclass(frozen=True)
class NumericEffect:
    op: str  # assign | increase | decrease
    function: Atom
    expr: Expr


@dataclass(frozen=True)
class Operator:
    """A durative operator; instantaneous actions are stored as duration-0
    operators with every condition at-start and every effect at-start."""

    name: str
    params: tuple[TypedParam, ...]
    duration: Expr
    durative: bool
    cond_start: tuple[Atom, ...] = ()
    cond_overall: tuple[Atom, ...] = ()
    cond_end: tuple[Atom, ...] = ()
    eff_start: tuple[Literal, ...] = ()
    eff_end: tuple[Literal, ...] = ()
    num_start: tuple[NumericEffect, ...] = ()
    num_end: tuple[NumericEffect, ...] = ()

    def all_conditions(self) -> tuple[Atom, ...]:
        return self.cond_start + self.cond_overall + self.cond_end


@dataclass(frozen=True)
class DomainModel:
    name: str
    requirements: tuple[str, ...]
    # (type, parent) pairs; "object" is the implicit root and never listed.
    types: tuple[tuple[str, str], ...]
    predicates: tuple[PredicateDef, ...]
    functions: tuple[FunctionDef, ...]
    operators: tuple[Operator, ...]

    def type_names(self) -> set[str]:
        names = {OBJECT_TYPE}
        for t, parent in self.types:
            names.add(t)
            names.add(parent)
        return names

    def ancestors(self, type_name: str) -> set[str]:
        """The type itself plus every supertype up to ``object``."""
        parents = dict(self.types)
        seen = {type_name}
        cur = type_name
        while cur != OBJECT_TYPE:
            cur = parents.get(cur, OBJECT_TYPE)
            if cur in seen:
                break
            seen.add(cur)
        seen.add(OBJECT_TYPE)
        return seen

    def operator(self, name: str) -> Operator:
        for op in self.operators:
            if op.name == name:
                return op
        raise KeyError(name)

    def predicate_names(self) -> set[str]:
        return {p.name for p in self.predicates}


@dataclass(frozen=True)
class TimedInitialLiteral:
    time: Decimal
    literal: Literal


@dataclass(frozen=True)
class ProblemModel:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (name, type)
    init: tuple[Atom, ...]
    init_values: tuple[tuple[Atom, Decimal], ...]
    tils: tuple[TimedInitialLiteral, ...]  # stable-sorted by time
    goal: tuple[Atom, ...]
    metric: Optional[tuple[str, Expr]] = None  # ("minimize"|"maximize", expr)

    def objects_of(self, domain: DomainModel, type_name: str) -> list[str]:
        return [o for o, t in self.objects if type_name in domain.ancestors(t)]


def eval_expr(expr: Expr, values: dict[Atom, Decimal]) -> Decimal:
    """Evaluate a numeric expression against a fluent valuation.

    Raises KeyError when a referenced fluent has no value.
    """
    kind = expr[0]
    if kind == "num":
        return expr[1]
    if kind == "func":
        return values[expr[1]]
    left = eval_expr(expr[1], values)
    right = eval_expr(expr[2], values)
    if kind == "+":
        return left + right
    if kind == "-":
        return left - right
    if kind == "*":
        return left * right
    if kind == "/":
        return left / right
    raise ValueError(f"unknown expression kind {kind!r}")


def expr_functions(expr: Expr) -> set[str]:
    """Names of every fluent referenced by an expression."""
    kind = expr[0]
    if kind == "num":
        return set()
    if kind == "func":
        return {expr[1][0]}
    return expr_functions(expr[1]) | expr_functions(expr[2])
