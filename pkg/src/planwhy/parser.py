"""Recursive-descent parser for the supported PDDL subset.

Pure-Python s-expression tokenizer plus domain/problem interpreters.
Identifiers are case-insensitive and stored lower-cased; ``;`` comments
are stripped at lexing.  Constructs outside the subset (quantifiers,
conditional effects, continuous change, ...) are rejected by name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from .errors import ParseError, SemanticError, UnsupportedConstructError
from .model import (
    OBJECT_TYPE,
    Atom,
    DomainModel,
    Expr,
    FunctionDef,
    Literal,
    NumericEffect,
    Operator,
    PredicateDef,
    ProblemModel,
    TimedInitialLiteral,
    TypedParam,
    expr_functions,
)
from .numbers import q3

_NAME_RE = re.compile(r"[?:]?[A-Za-z0-9_=+*/<>.#-]+")
_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")

# Construct names outside the subset, rejected with their own name.
_UNSUPPORTED = {
    "forall", "exists", "when", "imply", "or", "either", "preference",
    "sometime", "always", "at-most-once", "derived", ":derived",
    ":constraints", ":constants", "scale-up", "scale-down",
}


@dataclass
class SAtom:
    text: str
    line: int
    column: int


@dataclass
class SList:
    items: list
    line: int
    column: int


SNode = Union[SAtom, SList]


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            i += 1
            col += 1
        else:
            m = _NAME_RE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", line, col)
            tok = m.group(0)
            yield tok.lower(), line, col
            col += len(tok)
            i = m.end()


def read_sexprs(text: str) -> list[SNode]:
    """Parse text into a list of top-level s-expressions."""
    stack: list[SList] = []
    top: list[SNode] = []
    last_line = last_col = 1
    for tok, line, col in tokenize(text):
        last_line, last_col = line, col
        if tok == "(":
            node = SList([], line, col)
            (stack[-1].items if stack else top).append(node)
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            stack.pop()
        else:
            (stack[-1].items if stack else top).append(SAtom(tok, line, col))
    if stack:
        raise ParseError("unbalanced '('", last_line, last_col)
    return top


def _expect_list(node: SNode, what: str) -> SList:
    if not isinstance(node, SList):
        raise ParseError(f"expected {what}, got {node.text!r}", node.line, node.column)
    return node


def _expect_atom(node: SNode, what: str) -> SAtom:
    if not isinstance(node, SAtom):
        raise ParseError(f"expected {what}", node.line, node.column)
    return node


def _head(node: SList) -> str:
    if not node.items or not isinstance(node.items[0], SAtom):
        return ""
    return node.items[0].text


def _check_supported(name: str, line: int, col: int):
    if name in _UNSUPPORTED or name.lstrip(":") in _UNSUPPORTED:
        raise UnsupportedConstructError(name.lstrip(":"), line, col)


def _parse_typed_list(items: list[SNode], default_type: str = OBJECT_TYPE) -> list[tuple[str, str]]:
    """Parse a PDDL typed list ``a b - t c d - u e`` into (name, type) pairs."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    it = iter(items)
    for node in it:
        atom = _expect_atom(node, "name in typed list")
        if atom.text == "-":
            try:
                tnode = next(it)
            except StopIteration:
                raise ParseError("missing type after '-'", atom.line, atom.column)
            tatom = _expect_atom(tnode, "type name")
            if tatom.text == "(":
                raise UnsupportedConstructError("either", tatom.line, tatom.column)
            for name in pending:
                out.append((name, tatom.text))
            pending = []
        else:
            pending.append(atom.text)
    out.extend((name, default_type) for name in pending)
    return out


def _parse_atom(node: SNode) -> Atom:
    lst = _expect_list(node, "atom")
    if not lst.items:
        raise ParseError("empty atom", lst.line, lst.column)
    head = _expect_atom(lst.items[0], "predicate name").text
    _check_supported(head, lst.line, lst.column)
    terms = [head]
    for t in lst.items[1:]:
        terms.append(_expect_atom(t, "term").text)
    return tuple(terms)


def _parse_literal(node: SNode) -> Literal:
    lst = _expect_list(node, "literal")
    if _head(lst) == "not":
        if len(lst.items) != 2:
            raise ParseError("'not' takes one argument", lst.line, lst.column)
        return Literal(_parse_atom(lst.items[1]), positive=False)
    return Literal(_parse_atom(lst))


def _parse_expr(node: SNode) -> Expr:
    if isinstance(node, SAtom):
        if node.text == "#t":
            raise UnsupportedConstructError("continuous effect (#t)", node.line, node.column)
        if not _NUMBER_RE.match(node.text):
            raise ParseError(f"expected number, got {node.text!r}", node.line, node.column)
        return ("num", q3(Decimal(node.text)))
    lst = node
    head = _head(lst)
    if head in {"+", "-", "*", "/"}:
        if len(lst.items) != 3:
            raise ParseError(f"'{head}' takes two arguments", lst.line, lst.column)
        return (head, _parse_expr(lst.items[1]), _parse_expr(lst.items[2]))
    return ("func", _parse_atom(lst))


def _flatten_and(node: SNode) -> list[SNode]:
    if isinstance(node, SList) and _head(node) == "and":
        out: list[SNode] = []
        for child in node.items[1:]:
            out.extend(_flatten_and(child))
        return out
    return [node]


_COMPARISONS = {"<", ">", "<=", ">=", "="}


def _reject_numeric_condition(lst: SList):
    if _head(lst) in _COMPARISONS:
        raise UnsupportedConstructError("numeric condition", lst.line, lst.column)


def _parse_durative_conditions(node: SNode):
    start: list[Atom] = []
    overall: list[Atom] = []
    end: list[Atom] = []
    for item in _flatten_and(node):
        lst = _expect_list(item, "timed condition")
        head = _head(lst)
        _check_supported(head, lst.line, lst.column)
        if head == "at" and len(lst.items) == 3 and isinstance(lst.items[1], SAtom) \
                and lst.items[1].text in {"start", "end"}:
            bucket = start if lst.items[1].text == "start" else end
        elif head == "over" and len(lst.items) == 3 and isinstance(lst.items[1], SAtom) \
                and lst.items[1].text == "all":
            bucket = overall
        else:
            raise ParseError("expected (at start ...), (over all ...) or (at end ...)",
                             lst.line, lst.column)
        for atom_node in _flatten_and(lst.items[2]):
            inner = _expect_list(atom_node, "condition atom")
            _check_supported(_head(inner), inner.line, inner.column)
            _reject_numeric_condition(inner)
            if _head(inner) == "not":
                raise UnsupportedConstructError("negative condition", inner.line, inner.column)
            bucket.append(_parse_atom(inner))
    return tuple(start), tuple(overall), tuple(end)


_NUMERIC_EFFECTS = {"assign", "increase", "decrease"}


def _parse_effect_item(node: SNode):
    """Return ('lit', Literal) or ('num', NumericEffect)."""
    lst = _expect_list(node, "effect")
    head = _head(lst)
    _check_supported(head, lst.line, lst.column)
    if head in _NUMERIC_EFFECTS:
        if len(lst.items) != 3:
            raise ParseError(f"'{head}' takes two arguments", lst.line, lst.column)
        func = _parse_atom(lst.items[1])
        expr = _parse_expr(lst.items[2])
        return ("num", NumericEffect(head, func, expr))
    return ("lit", _parse_literal(lst))


def _parse_durative_effects(node: SNode):
    eff_start: list[Literal] = []
    eff_end: list[Literal] = []
    num_start: list[NumericEffect] = []
    num_end: list[NumericEffect] = []
    for item in _flatten_and(node):
        lst = _expect_list(item, "timed effect")
        head = _head(lst)
        _check_supported(head, lst.line, lst.column)
        if not (head == "at" and len(lst.items) == 3 and isinstance(lst.items[1], SAtom)
                and lst.items[1].text in {"start", "end"}):
            raise ParseError("expected (at start ...) or (at end ...) effect", lst.line, lst.column)
        at_start = lst.items[1].text == "start"
        for inner in _flatten_and(lst.items[2]):
            kind, value = _parse_effect_item(inner)
            if kind == "lit":
                (eff_start if at_start else eff_end).append(value)
            else:
                (num_start if at_start else num_end).append(value)
    return tuple(eff_start), tuple(eff_end), tuple(num_start), tuple(num_end)


def _section_map(body: list[SNode], keyword_of):
    """Group ``:keyword value value ...`` runs of a define body."""
    sections: list[tuple[SAtom, list[SNode]]] = []
    for node in body:
        if isinstance(node, SAtom) and node.text.startswith(":"):
            sections.append((node, []))
        elif sections:
            sections[-1][1].append(node)
        else:
            raise ParseError("unexpected item before first section", node.line,
                             getattr(node, "column", 0))
    return sections


def _free_vars(atoms, literals=(), numerics=(), expr=None) -> set[str]:
    vars_: set[str] = set()
    for atom in atoms:
        vars_.update(t for t in atom[1:] if t.startswith("?"))
    for lit in literals:
        vars_.update(t for t in lit.atom[1:] if t.startswith("?"))
    for num in numerics:
        vars_.update(t for t in num.function[1:] if t.startswith("?"))
        vars_.update(_expr_vars(num.expr))
    if expr is not None:
        vars_.update(_expr_vars(expr))
    return vars_


def _expr_vars(expr: Expr) -> set[str]:
    if expr[0] == "num":
        return set()
    if expr[0] == "func":
        return {t for t in expr[1][1:] if t.startswith("?")}
    return _expr_vars(expr[1]) | _expr_vars(expr[2])


def _parse_action(lst: SList, durative: bool) -> Operator:
    items = lst.items[1:]
    if not items:
        raise ParseError("action missing name", lst.line, lst.column)
    name = _expect_atom(items[0], "action name").text
    fields: dict[str, SNode] = {}
    i = 1
    while i < len(items):
        key = _expect_atom(items[i], "action keyword").text
        if i + 1 >= len(items):
            raise ParseError(f"missing value for {key}", lst.line, lst.column)
        fields[key] = items[i + 1]
        i += 2

    params = tuple(TypedParam(n, t) for n, t in
                   _parse_typed_list(_expect_list(fields.get(":parameters", SList([], lst.line, lst.column)),
                                                  "parameter list").items))

    if durative:
        dur_node = fields.get(":duration")
        if dur_node is None:
            raise ParseError(f"durative action {name} missing :duration", lst.line, lst.column)
        dur_list = _expect_list(dur_node, "duration constraint")
        if _head(dur_list) != "=" or len(dur_list.items) != 3 \
                or not (isinstance(dur_list.items[1], SAtom) and dur_list.items[1].text == "?duration"):
            raise UnsupportedConstructError("duration inequality", dur_list.line, dur_list.column)
        duration = _parse_expr(dur_list.items[2])
        cond_node = fields.get(":condition")
        cs, co, ce = _parse_durative_conditions(cond_node) if cond_node is not None else ((), (), ())
        eff_node = fields.get(":effect")
        es, ee, ns, ne = _parse_durative_effects(eff_node) if eff_node is not None else ((), (), (), ())
        op = Operator(name, params, duration, True, cs, co, ce, es, ee, ns, ne)
    else:
        duration = ("num", q3(0))
        conds: list[Atom] = []
        pre = fields.get(":precondition")
        if pre is not None:
            for inner in _flatten_and(pre):
                inner_l = _expect_list(inner, "precondition atom")
                _check_supported(_head(inner_l), inner_l.line, inner_l.column)
                _reject_numeric_condition(inner_l)
                if _head(inner_l) == "not":
                    raise UnsupportedConstructError("negative condition", inner_l.line, inner_l.column)
                conds.append(_parse_atom(inner_l))
        effs: list[Literal] = []
        nums: list[NumericEffect] = []
        eff = fields.get(":effect")
        if eff is not None:
            for inner in _flatten_and(eff):
                kind, value = _parse_effect_item(inner)
                (effs if kind == "lit" else nums).append(value)
        op = Operator(name, params, duration, False,
                      cond_start=tuple(conds), eff_start=tuple(effs), num_start=tuple(nums))
    return op


def _check_operator(op: Operator, domain_types: set[str],
                    predicates: dict[str, int], functions: dict[str, int],
                    where: str):
    declared = {p.name for p in op.params}
    for p in op.params:
        if p.type not in domain_types:
            raise SemanticError(f"operator {op.name}: unknown type '{p.type}'")
    free = _free_vars(op.all_conditions(), op.eff_start + op.eff_end,
                      op.num_start + op.num_end, op.duration)
    undeclared = free - declared
    if undeclared:
        raise SemanticError(f"operator {op.name}: undeclared parameter(s) "
                            f"{', '.join(sorted(undeclared))}")
    for atom in op.all_conditions() + tuple(l.atom for l in op.eff_start + op.eff_end):
        if atom[0] not in predicates:
            raise SemanticError(f"operator {op.name}: unknown predicate '{atom[0]}'")
        if predicates[atom[0]] != len(atom) - 1:
            raise SemanticError(f"operator {op.name}: predicate '{atom[0]}' arity mismatch")
    for num in op.num_start + op.num_end:
        for fname in {num.function[0]} | expr_functions(num.expr):
            if fname not in functions:
                raise SemanticError(f"operator {op.name}: unknown function '{fname}'")
    for fname in expr_functions(op.duration):
        if fname not in functions:
            raise SemanticError(f"operator {op.name}: unknown function '{fname}'")
    # No fact may be both added and deleted at the same time point.
    for label, effects in (("start", op.eff_start), ("end", op.eff_end)):
        adds = {l.atom for l in effects if l.positive}
        dels = {l.atom for l in effects if not l.positive}
        both = adds & dels
        if both:
            fact = next(iter(both))
            raise SemanticError(f"operator {op.name}: fact {fact} both added and "
                                f"deleted at {label}")


def parse_domain(text: str) -> DomainModel:
    """Parse PDDL domain text into a DomainModel, or raise a diagnostic."""
    top = read_sexprs(text)
    if len(top) != 1:
        raise ParseError("expected a single (define ...) form")
    define = _expect_list(top[0], "(define ...)")
    if _head(define) != "define" or len(define.items) < 2:
        raise ParseError("expected (define (domain ...) ...)", define.line, define.column)
    header = _expect_list(define.items[1], "(domain NAME)")
    if _head(header) != "domain" or len(header.items) != 2:
        raise ParseError("expected (domain NAME)", header.line, header.column)
    name = _expect_atom(header.items[1], "domain name").text

    requirements: tuple[str, ...] = ()
    types: list[tuple[str, str]] = []
    predicates: list[PredicateDef] = []
    functions: list[FunctionDef] = []
    operators: list[Operator] = []

    for node in define.items[2:]:
        lst = _expect_list(node, "domain section")
        head = _head(lst)
        _check_supported(head, lst.line, lst.column)
        if head == ":requirements":
            requirements = tuple(_expect_atom(a, "requirement").text for a in lst.items[1:])
        elif head == ":types":
            types.extend(_parse_typed_list(lst.items[1:]))
        elif head == ":predicates":
            for pnode in lst.items[1:]:
                plst = _expect_list(pnode, "predicate declaration")
                pname = _expect_atom(plst.items[0], "predicate name").text
                params = tuple(TypedParam(n, t) for n, t in _parse_typed_list(plst.items[1:]))
                predicates.append(PredicateDef(pname, params))
        elif head == ":functions":
            # Optional "- number" annotations are tolerated and ignored.
            nodes = [n for n in lst.items[1:]
                     if not (isinstance(n, SAtom) and n.text in {"-", "number"})]
            for fnode in nodes:
                flst = _expect_list(fnode, "function declaration")
                fname = _expect_atom(flst.items[0], "function name").text
                params = tuple(TypedParam(n, t) for n, t in _parse_typed_list(flst.items[1:]))
                functions.append(FunctionDef(fname, params))
        elif head == ":durative-action":
            operators.append(_parse_action(lst, durative=True))
        elif head == ":action":
            operators.append(_parse_action(lst, durative=False))
        else:
            raise UnsupportedConstructError(head.lstrip(":") or "?", lst.line, lst.column)

    domain = DomainModel(name, requirements, tuple(types),
                         tuple(predicates), tuple(functions), tuple(operators))

    type_names = domain.type_names()
    for t, parent in types:
        if parent != OBJECT_TYPE and parent not in type_names:
            raise SemanticError(f"unknown parent type '{parent}'")
    for defs, label in ((predicates, "predicate"), (functions, "function")):
        for d in defs:
            for p in d.params:
                if p.type not in type_names:
                    raise SemanticError(f"{label} {d.name}: unknown type '{p.type}'")
    for seq, label in ((predicates, "predicate"), (functions, "function"), (operators, "operator")):
        names = [d.name for d in seq]
        if len(names) != len(set(names)):
            dup = next(n for n in names if names.count(n) > 1)
            raise SemanticError(f"duplicate {label} name '{dup}'")

    pred_arity = {p.name: len(p.params) for p in predicates}
    func_arity = {f.name: len(f.params) for f in functions}
    for op in operators:
        _check_operator(op, type_names, pred_arity, func_arity, name)

    # Duration expressions must be static: no operator may write a fluent
    # that any duration reads.
    duration_funcs: set[str] = set()
    for op in operators:
        duration_funcs |= expr_functions(op.duration)
    for op in operators:
        for num in op.num_start + op.num_end:
            if num.function[0] in duration_funcs:
                raise SemanticError(f"operator {op.name}: modifies non-static duration "
                                    f"function '{num.function[0]}'")
    return domain


def parse_problem(text: str, domain: DomainModel) -> ProblemModel:
    """Parse PDDL problem text against an already-parsed domain."""
    top = read_sexprs(text)
    if len(top) != 1:
        raise ParseError("expected a single (define ...) form")
    define = _expect_list(top[0], "(define ...)")
    if _head(define) != "define" or len(define.items) < 2:
        raise ParseError("expected (define (problem ...) ...)", define.line, define.column)
    header = _expect_list(define.items[1], "(problem NAME)")
    if _head(header) != "problem" or len(header.items) != 2:
        raise ParseError("expected (problem NAME)", header.line, header.column)
    name = _expect_atom(header.items[1], "problem name").text

    domain_name = ""
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    init_values: list[tuple[Atom, Decimal]] = []
    tils: list[TimedInitialLiteral] = []
    goal: list[Atom] = []
    metric = None

    for node in define.items[2:]:
        lst = _expect_list(node, "problem section")
        head = _head(lst)
        _check_supported(head, lst.line, lst.column)
        if head == ":domain":
            domain_name = _expect_atom(lst.items[1], "domain name").text
        elif head == ":objects":
            objects.extend(_parse_typed_list(lst.items[1:]))
        elif head == ":init":
            for inode in lst.items[1:]:
                ilst = _expect_list(inode, "init item")
                ihead = _head(ilst)
                if ihead == "=":
                    if len(ilst.items) != 3:
                        raise ParseError("'=' takes two arguments", ilst.line, ilst.column)
                    func = _parse_atom(ilst.items[1])
                    vnode = _expect_atom(ilst.items[2], "number")
                    if not _NUMBER_RE.match(vnode.text):
                        raise ParseError(f"expected number, got {vnode.text!r}",
                                         vnode.line, vnode.column)
                    init_values.append((func, q3(Decimal(vnode.text))))
                elif ihead == "at" and len(ilst.items) == 3 \
                        and isinstance(ilst.items[1], SAtom) \
                        and _NUMBER_RE.match(ilst.items[1].text) \
                        and isinstance(ilst.items[2], SList):
                    t = q3(Decimal(ilst.items[1].text))
                    if t < 0:
                        raise SemanticError("timed initial literal time must be nonnegative",
                                            ilst.line, ilst.column)
                    tils.append(TimedInitialLiteral(t, _parse_literal(ilst.items[2])))
                else:
                    _check_supported(ihead, ilst.line, ilst.column)
                    init.append(_parse_atom(ilst))
        elif head == ":goal":
            for gnode in _flatten_and(lst.items[1]):
                glst = _expect_list(gnode, "goal atom")
                _check_supported(_head(glst), glst.line, glst.column)
                if _head(glst) == "not":
                    raise UnsupportedConstructError("negative goal", glst.line, glst.column)
                _reject_numeric_condition(glst)
                goal.append(_parse_atom(glst))
        elif head == ":metric":
            direction = _expect_atom(lst.items[1], "metric direction").text
            if direction not in {"minimize", "maximize"}:
                raise ParseError(f"expected minimize/maximize, got {direction!r}",
                                 lst.line, lst.column)
            metric = (direction, _parse_expr(lst.items[2]))
        else:
            raise UnsupportedConstructError(head.lstrip(":") or "?", lst.line, lst.column)

    if domain_name and domain_name != domain.name:
        raise SemanticError(f"problem references domain '{domain_name}', "
                            f"expected '{domain.name}'")

    type_names = domain.type_names()
    for obj, t in objects:
        if t not in type_names:
            raise SemanticError(f"object {obj}: unknown type '{t}'")
    names = [o for o, _ in objects]
    if len(names) != len(set(names)):
        dup = next(n for n in names if names.count(n) > 1)
        raise SemanticError(f"duplicate object name '{dup}'")

    known_objects = set(names)
    pred_arity = {p.name: len(p.params) for p in domain.predicates}
    func_names = {f.name for f in domain.functions} | {"total-time"}

    def check_ground_atom(atom: Atom, where: str):
        if atom[0] not in pred_arity:
            raise SemanticError(f"{where}: unknown predicate '{atom[0]}'")
        if pred_arity[atom[0]] != len(atom) - 1:
            raise SemanticError(f"{where}: predicate '{atom[0]}' arity mismatch")
        for term in atom[1:]:
            if term not in known_objects:
                raise SemanticError(f"{where}: unknown object '{term}'")

    for atom in init:
        check_ground_atom(atom, "init")
    for func, _ in init_values:
        if func[0] not in func_names:
            raise SemanticError(f"init: unknown function '{func[0]}'")
        for term in func[1:]:
            if term not in known_objects:
                raise SemanticError(f"init: unknown object '{term}'")
    for til in tils:
        check_ground_atom(til.literal.atom, "timed initial literal")
    for atom in goal:
        check_ground_atom(atom, "goal")
    if metric is not None:
        for fname in expr_functions(metric[1]):
            if fname not in func_names:
                raise SemanticError(f"metric: unknown function '{fname}'")

    tils.sort(key=lambda t: t.time)  # stable, preserves same-time order
    return ProblemModel(name, domain.name, tuple(objects), tuple(init),
                        tuple(init_values), tuple(tils), tuple(goal), metric)
