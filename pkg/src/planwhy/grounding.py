"""Exhaustive grounding of a domain/problem pair into a GroundTask.

Instantiation enumerates every type-consistent binding of every operator.
Bindings whose duration expression references an undefined fluent value
are dropped (they could never execute with a well-defined duration).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from decimal import Decimal

from .errors import GroundingLimitError
from .model import (
    Atom,
    DomainModel,
    Literal,
    Operator,
    ProblemModel,
    TimedInitialLiteral,
    eval_expr,
)
from .numbers import q3

DEFAULT_ACTION_CAP = 1_000_000


@dataclass(frozen=True)
class GroundAction:
    """A fully instantiated operator with fixed duration."""

    name: str
    args: tuple[str, ...]
    duration: Decimal
    cond_start: frozenset[Atom]
    cond_overall: frozenset[Atom]
    cond_end: frozenset[Atom]
    add_start: frozenset[Atom]
    del_start: frozenset[Atom]
    add_end: frozenset[Atom]
    del_end: frozenset[Atom]
    num_start: tuple = ()
    num_end: tuple = ()

    @property
    def key(self) -> tuple:
        return (self.name,) + self.args

    @property
    def instantaneous(self) -> bool:
        return self.duration == 0

    def __str__(self) -> str:
        return "(" + " ".join(self.key) + ")"


@dataclass(frozen=True)
class GroundTask:
    domain: DomainModel
    problem: ProblemModel
    facts: frozenset[Atom]
    actions: tuple[GroundAction, ...]
    init: frozenset[Atom]
    init_values: tuple[tuple[Atom, Decimal], ...]
    goal: frozenset[Atom]
    tils: tuple[TimedInitialLiteral, ...]

    _by_key: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def action(self, key: tuple) -> GroundAction:
        if not self._by_key:
            self._by_key.update({a.key: a for a in self.actions})
        return self._by_key[key]

    def has_action(self, key: tuple) -> bool:
        if not self._by_key:
            self._by_key.update({a.key: a for a in self.actions})
        return key in self._by_key

    def valuation(self) -> dict[Atom, Decimal]:
        return dict(self.init_values)


def _substitute(atom: Atom, binding: dict[str, str]) -> Atom:
    return (atom[0],) + tuple(binding.get(t, t) for t in atom[1:])


def _substitute_expr(expr, binding):
    if expr[0] == "num":
        return expr
    if expr[0] == "func":
        return ("func", _substitute(expr[1], binding))
    return (expr[0], _substitute_expr(expr[1], binding),
            _substitute_expr(expr[2], binding))


def _instantiate(op: Operator, binding: dict[str, str],
                 values: dict[Atom, Decimal]) -> GroundAction | None:
    try:
        duration = q3(eval_expr(_substitute_expr(op.duration, binding), values))
    except KeyError:
        return None  # duration reads an undefined fluent value
    if duration < 0:
        return None

    def atoms(seq) -> frozenset[Atom]:
        return frozenset(_substitute(a, binding) for a in seq)

    def lits(seq, positive: bool) -> frozenset[Atom]:
        return frozenset(_substitute(l.atom, binding) for l in seq if l.positive == positive)

    def nums(seq):
        return tuple((n.op, _substitute(n.function, binding),
                      _substitute_expr(n.expr, binding)) for n in seq)

    return GroundAction(
        name=op.name,
        args=tuple(binding[p.name] for p in op.params),
        duration=duration,
        cond_start=atoms(op.cond_start),
        cond_overall=atoms(op.cond_overall),
        cond_end=atoms(op.cond_end),
        add_start=lits(op.eff_start, True),
        del_start=lits(op.eff_start, False),
        add_end=lits(op.eff_end, True),
        del_end=lits(op.eff_end, False),
        num_start=nums(op.num_start),
        num_end=nums(op.num_end),
    )


def ground(domain: DomainModel, problem: ProblemModel,
           cap: int = DEFAULT_ACTION_CAP) -> GroundTask:
    """Instantiate every operator over all type-consistent bindings."""
    values = dict(problem.init_values)
    actions: list[GroundAction] = []
    for op in domain.operators:
        candidate_lists = []
        for param in op.params:
            candidate_lists.append([o for o, t in problem.objects
                                    if param.type in domain.ancestors(t)])
        for combo in itertools.product(*candidate_lists):
            binding = {p.name: obj for p, obj in zip(op.params, combo)}
            ga = _instantiate(op, binding, values)
            if ga is None:
                continue
            actions.append(ga)
            if len(actions) > cap:
                raise GroundingLimitError(len(actions), cap)

    facts: set[Atom] = set(problem.init)
    facts.update(t.literal.atom for t in problem.tils)
    facts.update(problem.goal)
    for a in actions:
        facts.update(a.cond_start, a.cond_overall, a.cond_end,
                     a.add_start, a.del_start, a.add_end, a.del_end)

    return GroundTask(
        domain=domain,
        problem=problem,
        facts=frozenset(facts),
        actions=tuple(sorted(actions, key=lambda a: a.key)),
        init=frozenset(problem.init),
        init_values=tuple(problem.init_values),
        goal=frozenset(problem.goal),
        tils=problem.tils,
    )
