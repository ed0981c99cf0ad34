"""Reader and writer for the STRIPS fragment of PDDL with possible-list annotations.

Annotations sit next to ``:precondition`` and ``:effect`` inside an action::

    (:action a
      :parameters ()
      :precondition (and (p) (q))
      :effect (and)
      (:poss-precondition (r))
      (:poss-effect (r) (not (p))))

The keyword spelling ``:poss-precondition (and ...)`` is accepted as well.
Everything is lowercased on the way in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

HYPOTHESIS_PLACEHOLDER = "<hypothesis>"


class PddlError(Exception):
    pass


class ParseError(PddlError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


class UndeclaredPredicate(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class MissingFile(PddlError):
    pass


class HiddenGoalNotInHypotheses(PddlError):
    pass


class UnresolvableObservation(PddlError):
    pass


# -- s-expressions ------------------------------------------------------


class Sym(str):
    """A token that remembers where it came from."""

    line: int = 0
    col: int = 0


class SList(list):
    line: int = 0
    col: int = 0


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def read_sexprs(text: str) -> list:
    """Parse all top-level s-expressions in ``text``."""
    stack: list[SList] = [SList()]
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok[0].isspace() or tok[0] == ";":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = m.start() + tok.rfind("\n") + 1
            continue
        if tok == "(":
            node = SList()
            node.line, node.col = line, col
            stack[-1].append(node)
            stack.append(node)
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            stack.pop()
        else:
            sym = Sym(tok.lower())
            sym.line, sym.col = line, col
            stack[-1].append(sym)
    if len(stack) > 1:
        open_ = stack[-1]
        raise ParseError("unclosed '('", open_.line, open_.col)
    return stack[0]


def _where(node) -> tuple[int | None, int | None]:
    return getattr(node, "line", None), getattr(node, "col", None)


def _fail(msg: str, node=None, cls=ParseError):
    raise cls(msg, *_where(node))


# -- model --------------------------------------------------------------

Literal = tuple  # (predicate, arg, arg, ...)


def fmt_literal(lit: Literal) -> str:
    return "(" + " ".join(lit) + ")"


@dataclass(frozen=True)
class Operator:
    """A lifted operator.  Literal lists are stored sorted so equality ignores order."""

    name: str
    parameters: tuple[tuple[str, str], ...] = ()
    pre: tuple[Literal, ...] = ()
    add: tuple[Literal, ...] = ()
    delete: tuple[Literal, ...] = ()
    poss_pre: tuple[Literal, ...] = ()
    poss_add: tuple[Literal, ...] = ()
    poss_del: tuple[Literal, ...] = ()

    LISTS = ("pre", "add", "delete", "poss_pre", "poss_add", "poss_del")

    def __post_init__(self):
        for name in self.LISTS:
            object.__setattr__(self, name, tuple(sorted(set(map(tuple, getattr(self, name))))))
        for known, poss in (("pre", "poss_pre"), ("add", "poss_add"), ("delete", "poss_del")):
            both = set(getattr(self, known)) & set(getattr(self, poss))
            if both:
                raise ValueError(f"{self.name}: {fmt_literal(min(both))} is both known and possible")

    @property
    def is_complete(self) -> bool:
        return not (self.poss_pre or self.poss_add or self.poss_del)

    def replace(self, **changes) -> Operator:
        fields = {k: getattr(self, k) for k in ("name", "parameters", *self.LISTS)}
        fields.update(changes)
        return Operator(**fields)


@dataclass(frozen=True)
class LiftedDomain:
    name: str
    requirements: tuple[str, ...] = ()
    types: dict[str, str] = field(default_factory=dict)  # child -> parent
    constants: tuple[tuple[str, str], ...] = ()
    predicates: dict[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)
    operators: tuple[Operator, ...] = ()

    def operator(self, name: str) -> Operator:
        for op in self.operators:
            if op.name == name:
                return op
        raise KeyError(name)

    def replace_operators(self, operators) -> LiftedDomain:
        return LiftedDomain(self.name, self.requirements, dict(self.types), self.constants,
                            dict(self.predicates), tuple(operators))

    def is_subtype(self, t: str, ancestor: str) -> bool:
        seen = set()
        while t not in seen:
            if t == ancestor:
                return True
            seen.add(t)
            t = self.types.get(t, "object")
        return ancestor == "object"


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]
    init: tuple[Literal, ...]
    goal: tuple[Literal, ...] | None  # None when the goal is the hypothesis placeholder


@dataclass(frozen=True)
class RecognitionProblem:
    domain: LiftedDomain
    objects: tuple[tuple[str, str], ...]
    init: tuple[Literal, ...]
    hypotheses: tuple[tuple[Literal, ...], ...]
    hidden_goal: int | None
    observations: tuple[str, ...]
    name: str = ""

    def ground(self, **kwargs):
        from .grounding import ground

        kwargs.setdefault("keep", self.observations)
        return ground(self.domain, self.objects, self.init, goals=self.hypotheses, **kwargs)


# -- parsing ------------------------------------------------------------


def _typed_list(items, node) -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out, pending = [], []
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, list):
            _fail("unexpected list in typed list", tok)
        if tok == "-":
            if i + 1 >= len(items) or isinstance(items[i + 1], list):
                _fail("expected a type name after '-'", tok)
            out.extend((p, str(items[i + 1])) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(str(tok))
        i += 1
    out.extend((p, "object") for p in pending)
    return out


class _Located(tuple):
    """A literal that remembers the s-expression it came from, for error positions."""

    node = None


def _literal(node, negated_ok: bool) -> tuple[bool, Literal]:
    if not isinstance(node, list) or not node:
        _fail("expected a literal", node)
    if node[0] == "not":
        if not negated_ok:
            _fail("negative preconditions are not supported", node)
        if len(node) != 2:
            _fail("'not' takes exactly one literal", node)
        positive, lit = _literal(node[1], False)
        return False, lit
    for tok in node:
        if isinstance(tok, list):
            _fail("nested list inside an atom", tok)
    lit = _Located(str(t) for t in node)
    lit.node = node
    return True, lit


def _conjunction(node, negated_ok: bool) -> list[tuple[bool, Literal]]:
    if not isinstance(node, list):
        _fail("expected a formula", node)
    if not node:
        return []
    if node[0] == "and":
        out = []
        for child in node[1:]:
            out.extend(_conjunction(child, negated_ok))
        return out
    return [_literal(node, negated_ok)]


def _split_effects(lits) -> tuple[list, list]:
    return [l for pos, l in lits if pos], [l for pos, l in lits if not pos]


def _parse_action(node, predicates, constants) -> Operator:
    if len(node) < 2 or isinstance(node[1], list):
        _fail("action needs a name", node)
    name = str(node[1])
    params: list[tuple[str, str]] = []
    pre, eff, poss_pre, poss_eff = [], [], [], []
    i = 2
    while i < len(node):
        item = node[i]
        if isinstance(item, list):
            head = item[0] if item else None
            if head == ":poss-precondition":
                for sub in item[1:]:
                    poss_pre.extend(_conjunction(sub, False))
            elif head == ":poss-effect":
                for sub in item[1:]:
                    poss_eff.extend(_conjunction(sub, True))
            else:
                _fail(f"unexpected block in action {name}", item)
            i += 1
            continue
        if i + 1 >= len(node):
            _fail(f"keyword {item} has no value", item)
        value = node[i + 1]
        if item == ":parameters":
            if not isinstance(value, list):
                _fail("parameters must be a list", value)
            params = _typed_list(value, value)
        elif item == ":precondition":
            pre = _conjunction(value, False)
        elif item == ":effect":
            eff = _conjunction(value, True)
        elif item == ":poss-precondition":
            poss_pre = _conjunction(value, False)
        elif item == ":poss-effect":
            poss_eff = _conjunction(value, True)
        else:
            _fail(f"unknown action keyword {item}", item)
        i += 2

    variables = {p for p, _ in params}
    const_names = {c for c, _ in constants}
    for _, lit in pre + eff + poss_pre + poss_eff:
        where = getattr(lit, "node", None) or node
        _check_literal(lit, predicates, where)
        for arg in lit[1:]:
            if arg.startswith("?") and arg not in variables:
                _fail(f"{name}: variable {arg} is not a parameter", where)
            if not arg.startswith("?") and arg not in const_names:
                _fail(f"{name}: unknown constant {arg}", where)
    add, delete = _split_effects(eff)
    poss_add, poss_del = _split_effects(poss_eff)
    try:
        return Operator(
            name,
            tuple(params),
            tuple(l for _, l in pre),
            tuple(add),
            tuple(delete),
            tuple(l for _, l in poss_pre),
            tuple(poss_add),
            tuple(poss_del),
        )
    except ValueError as e:
        _fail(str(e), node)


def _check_literal(lit: Literal, predicates, node):
    if lit[0] not in predicates:
        _fail(f"undeclared predicate {lit[0]}", node, UndeclaredPredicate)
    if len(lit) - 1 != len(predicates[lit[0]]):
        _fail(f"{lit[0]} expects {len(predicates[lit[0]])} arguments, got {len(lit) - 1}",
              node, ArityMismatch)


def _single_define(text: str, kind: str):
    forms = read_sexprs(text)
    if len(forms) != 1 or not isinstance(forms[0], list) or not forms[0] or forms[0][0] != "define":
        _fail("expected a single (define ...) form", forms[0] if forms else None)
    root = forms[0]
    if len(root) < 2 or not isinstance(root[1], list) or len(root[1]) != 2 or root[1][0] != kind:
        _fail(f"expected ({kind} <name>)", root)
    return root, str(root[1][1])


def parse_domain(text: str) -> LiftedDomain:
    root, name = _single_define(text, "domain")
    requirements: list[str] = []
    types: dict[str, str] = {}
    constants: list[tuple[str, str]] = []
    predicates: dict[str, tuple] = {}
    action_nodes = []
    for section in root[2:]:
        if not isinstance(section, list) or not section:
            _fail("expected a section", section)
        head = section[0]
        if head == ":requirements":
            requirements = [str(s) for s in section[1:]]
        elif head == ":types":
            for child, parent in _typed_list(section[1:], section):
                if child != "object":
                    types[child] = parent
        elif head == ":constants":
            constants = _typed_list(section[1:], section)
        elif head == ":predicates":
            for p in section[1:]:
                if not isinstance(p, list) or not p or isinstance(p[0], list):
                    _fail("malformed predicate declaration", p)
                predicates[str(p[0])] = tuple(_typed_list(p[1:], p))
        elif head == ":action":
            action_nodes.append(section)
        else:
            _fail(f"unsupported domain section {head}", section)
    ops = tuple(_parse_action(n, predicates, constants) for n in action_nodes)
    return LiftedDomain(name, tuple(requirements), types, tuple(constants), predicates, ops)


def parse_problem(text: str, domain: LiftedDomain | None = None) -> Problem:
    """Parse a problem file.  A goal of ``<HYPOTHESIS>`` yields ``goal=None``."""
    root, name = _single_define(text, "problem")
    domain_name, objects, init, goal = "", [], [], None
    for section in root[2:]:
        if not isinstance(section, list) or not section:
            _fail("expected a section", section)
        head = section[0]
        if head == ":domain":
            domain_name = str(section[1])
        elif head == ":objects":
            objects = _typed_list(section[1:], section)
        elif head == ":init":
            for atom in section[1:]:
                pos, lit = _literal(atom, False)
                init.append(lit)
        elif head == ":goal":
            body = section[1] if len(section) > 1 else SList()
            if body == HYPOTHESIS_PLACEHOLDER or (
                isinstance(body, list) and HYPOTHESIS_PLACEHOLDER in body
            ):
                goal = None
            elif isinstance(body, str):
                _fail("goal must be a formula", body)
            else:
                goal = [l for _, l in _conjunction(body, False)]
        elif head == ":requirements":
            pass
        else:
            _fail(f"unsupported problem section {head}", section)
    if domain is not None:
        for lit in init + (goal or []):
            _check_literal(lit, domain.predicates, getattr(lit, "node", None) or root)
    return Problem(name, domain_name, tuple(objects), tuple(map(tuple, init)),
                   None if goal is None else tuple(map(tuple, goal)))


def parse_atom_list(text: str) -> tuple[Literal, ...]:
    """``(on a b),(ontable b)`` -> sorted tuple of literals."""
    lits = []
    for node in read_sexprs(text.replace(",", " ")):
        _, lit = _literal(node, False)
        lits.append(tuple(lit))
    return tuple(sorted(set(lits)))


# -- serialization ------------------------------------------------------


def _fmt_typed(items) -> str:
    parts = []
    for name, typ in items:
        parts.append(name if typ == "object" else f"{name} - {typ}")
    return " ".join(parts)


def _fmt_conj(lits, negs=()) -> str:
    body = [fmt_literal(l) for l in lits] + [f"(not {fmt_literal(l)})" for l in negs]
    return "(and " + " ".join(body) + ")" if body else "(and)"


def serialize_domain(d: LiftedDomain) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append("  (:requirements " + " ".join(d.requirements) + ")")
    if d.types:
        lines.append("  (:types " + _fmt_typed(sorted(d.types.items())) + ")")
    if d.constants:
        lines.append("  (:constants " + _fmt_typed(d.constants) + ")")
    preds = " ".join(
        "(" + " ".join([p] + ([_fmt_typed(args)] if args else [])) + ")"
        for p, args in d.predicates.items()
    )
    lines.append(f"  (:predicates {preds})")
    for op in d.operators:
        lines.append(f"  (:action {op.name}")
        lines.append(f"    :parameters ({_fmt_typed(op.parameters)})")
        lines.append(f"    :precondition {_fmt_conj(op.pre)}")
        lines.append(f"    :effect {_fmt_conj(op.add, op.delete)}")
        if op.poss_pre:
            lines.append("    (:poss-precondition " + " ".join(map(fmt_literal, op.poss_pre)) + ")")
        if op.poss_add or op.poss_del:
            effs = [fmt_literal(l) for l in op.poss_add] + [f"(not {fmt_literal(l)})" for l in op.poss_del]
            lines.append("    (:poss-effect " + " ".join(effs) + ")")
        lines[-1] += ")"
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def serialize_problem(p: Problem) -> str:
    goal = HYPOTHESIS_PLACEHOLDER.upper() if p.goal is None else _fmt_conj(p.goal)
    return (
        f"(define (problem {p.name}) (:domain {p.domain_name})\n"
        f"  (:objects {_fmt_typed(p.objects)})\n"
        "  (:init " + " ".join(map(fmt_literal, p.init)) + ")\n"
        f"  (:goal {goal}))\n"
    )


# -- bundles ------------------------------------------------------------

BUNDLE_FILES = ("domain.pddl", "template.pddl", "hyps.dat", "real_hyp.dat", "obs.dat")


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(str(path)) from None


def _lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split(";", 1)[0].strip()
        if line:
            out.append(line)
    return out


def parse_recognition_bundle(directory, domain_file: str | Path | None = None) -> RecognitionProblem:
    """Load a bundle directory.  ``domain_file`` overrides ``domain.pddl``."""
    from .strips import normalize_atom

    d = Path(directory)
    if not d.is_dir():
        raise MissingFile(str(d))
    domain = parse_domain(_read(Path(domain_file) if domain_file else d / "domain.pddl"))
    template = parse_problem(_read(d / "template.pddl"), domain)
    hyps = tuple(parse_atom_list(line) for line in _lines(_read(d / "hyps.dat")))
    real = _lines(_read(d / "real_hyp.dat"))
    obs = tuple(normalize_atom(line) for line in _lines(_read(d / "obs.dat")))

    hidden = None
    if real:
        target = parse_atom_list(real[0])
        matches = [i for i, h in enumerate(hyps) if set(h) == set(target)]
        if not matches:
            raise HiddenGoalNotInHypotheses(real[0])
        hidden = matches[0]

    known_objects = {o for o, _ in template.objects} | {c for c, _ in domain.constants}
    op_arity = {op.name: len(op.parameters) for op in domain.operators}
    for o in obs:
        parts = o[1:-1].split()
        if not parts or parts[0] not in op_arity:
            raise UnresolvableObservation(f"{o}: unknown operator")
        if len(parts) - 1 != op_arity[parts[0]]:
            raise UnresolvableObservation(f"{o}: wrong number of arguments")
        unknown = [a for a in parts[1:] if a not in known_objects]
        if unknown:
            raise UnresolvableObservation(f"{o}: unknown object {unknown[0]}")
    return RecognitionProblem(domain, template.objects, template.init, hyps, hidden, obs, d.name)


def write_recognition_bundle(directory, problem: RecognitionProblem, domain_text: str | None = None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "domain.pddl").write_text(domain_text or serialize_domain(problem.domain), encoding="utf-8")
    template = Problem(problem.name or "p", problem.domain.name, problem.objects, problem.init, None)
    (d / "template.pddl").write_text(serialize_problem(template), encoding="utf-8")
    (d / "hyps.dat").write_text(
        "".join(",".join(map(fmt_literal, h)) + "\n" for h in problem.hypotheses), encoding="utf-8")
    real = "" if problem.hidden_goal is None else ",".join(map(fmt_literal, problem.hypotheses[problem.hidden_goal])) + "\n"
    (d / "real_hyp.dat").write_text(real, encoding="utf-8")
    (d / "obs.dat").write_text("".join(o + "\n" for o in problem.observations), encoding="utf-8")
