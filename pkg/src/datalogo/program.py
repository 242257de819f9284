"""Datalog° source: rule AST, ``.dlo`` parser/printer, TSV fact files and
program statistics (lambda, sigma, active domain).

Rule bodies are a single product; alternatives are written as several rules
with the same head::

    % transitive closure
    T(x,y) :- E(x,y).
    T(x,y) :- T(x,z) * E(z,y).

Terms starting with a lowercase letter or ``_`` are variables; anything else
(digits, capitalized words, ``"quoted strings"``) is a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .semiring import Element, InstanceMismatch, Semiring, sort_key


class ProgramError(ValueError):
    """Base class for source-level errors."""


class DatalogSyntaxError(ProgramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ArityMismatch(ProgramError):
    pass


class UnsafeRule(ProgramError):
    pass


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    value: str

    def __str__(self) -> str:
        if _BARE_CONST.fullmatch(self.value):
            return self.value
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'


Term = Union[Var, Const]

_BARE_CONST = re.compile(r"[A-Z0-9][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[str]:
        return {a.name for a in self.args if isinstance(a, Var)}

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]

    def __str__(self) -> str:
        return f"{self.head} :- {' * '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    arities: Mapping[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        arities: dict[str, int] = {}
        for rule in self.rules:
            if not rule.body:
                raise UnsafeRule(f"rule for {rule.head.predicate} has an empty body")
            for atom in (rule.head, *rule.body):
                known = arities.setdefault(atom.predicate, atom.arity)
                if known != atom.arity:
                    raise ArityMismatch(
                        f"{atom.predicate} used with arity {atom.arity} and {known}"
                    )
            missing = rule.head.variables() - set().union(*(a.variables() for a in rule.body))
            if missing:
                raise UnsafeRule(
                    f"head variable(s) {', '.join(sorted(missing))} of {rule.head} not in body"
                )
        object.__setattr__(self, "arities", arities)

    @property
    def idb_predicates(self) -> frozenset[str]:
        return frozenset(r.head.predicate for r in self.rules)

    @property
    def edb_predicates(self) -> frozenset[str]:
        return frozenset(self.arities) - self.idb_predicates

    def constants(self) -> set[str]:
        out: set[str] = set()
        for rule in self.rules:
            for atom in (rule.head, *rule.body):
                out.update(a.value for a in atom.args if isinstance(a, Const))
        return out


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<name>[A-Za-z0-9_]+)
  | (?P<punct>[(),.*])
    """,
    re.VERBOSE,
)


def _tokens(text: str):
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DatalogSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            value = m.group()
            if kind == "punct" or kind == "implies":
                kind = value
            yield kind, value, line, col
        pos = m.end()
    yield "eof", "", line, pos - line_start + 1


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            shown = tok[1] or "end of input"
            raise DatalogSyntaxError(f"expected {kind!r}, found {shown!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def program(self) -> list[Rule]:
        rules = []
        while self.peek()[0] != "eof":
            rules.append(self.rule())
        return rules

    def rule(self) -> Rule:
        head = self.atom()
        self.take(":-")
        body = [self.atom()]
        while self.peek()[0] == "*":
            self.take("*")
            body.append(self.atom())
        self.take(".")
        return Rule(head, tuple(body))

    def atom(self) -> Atom:
        _, name, line, col = self.take("name")
        if not re.match(r"[A-Za-z_]", name):
            raise DatalogSyntaxError(f"predicate name {name!r} must start with a letter", line, col)
        args: list[Term] = []
        if self.peek()[0] == "(":
            self.take("(")
            if self.peek()[0] != ")":
                args.append(self.term())
                while self.peek()[0] == ",":
                    self.take(",")
                    args.append(self.term())
            self.take(")")
        return Atom(name, tuple(args))

    def term(self) -> Term:
        kind, value, line, col = self.peek()
        if kind == "string":
            self.i += 1
            return Const(re.sub(r"\\(.)", r"\1", value[1:-1]))
        tok = self.take("name")
        if tok[1][0].islower() or tok[1][0] == "_":
            return Var(tok[1])
        return Const(tok[1])


def parse_program(text: str) -> Program:
    """Parse ``.dlo`` source.  Raises :class:`DatalogSyntaxError` with the
    position of the first offending token, or :class:`ArityMismatch` /
    :class:`UnsafeRule` for well-formed but invalid programs."""
    return Program(tuple(_Parser(text).program()))


def print_program(program: Program) -> str:
    return "".join(f"{rule}\n" for rule in program.rules)


# -- facts ------------------------------------------------------------------

GroundKey = tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class FactBase:
    """Ground EDB atoms with their (nonzero) semiring values."""

    semiring: Semiring
    facts: Mapping[GroundKey, Element] = field(default_factory=dict)

    def __post_init__(self) -> None:
        arities: dict[str, int] = {}
        for (pred, args), value in self.facts.items():
            if value.semiring != self.semiring:
                raise InstanceMismatch(f"value {value!r} for {pred}{args} is not in {self.semiring.selector}")
            if value.is_zero:
                raise ValueError(f"fact {pred}{args} has the zero value")
            if arities.setdefault(pred, len(args)) != len(args):
                raise ArityMismatch(f"facts for {pred} have inconsistent arity")

    def __len__(self) -> int:
        return len(self.facts)

    def get(self, pred: str, args: tuple[str, ...]) -> Element | None:
        return self.facts.get((pred, args))

    def predicates(self) -> set[str]:
        return {pred for pred, _ in self.facts}

    def by_predicate(self) -> dict[str, list[tuple[tuple[str, ...], Element]]]:
        out: dict[str, list] = {}
        for (pred, args), v in sorted(self.facts.items(), key=lambda kv: kv[0]):
            out.setdefault(pred, []).append((args, v))
        return out

    def validate_against(self, program: Program) -> None:
        for pred, args in self.facts:
            if pred in program.idb_predicates:
                raise ProgramError(f"fact for IDB predicate {pred}")
            if pred in program.arities and program.arities[pred] != len(args):
                raise ArityMismatch(f"fact {pred}{args} does not match arity {program.arities[pred]}")


def parse_facts(text: str, semiring: Semiring) -> FactBase:
    """Parse a TSV fact file: ``predicate<TAB>arg1..argk<TAB>value``.

    Blank lines and lines starting with ``#`` are skipped, as is a header
    line whose first column is literally ``predicate``.
    """
    facts: dict[GroundKey, Element] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = [c.strip() for c in raw.split("\t")]
        if cols[0] == "predicate":
            continue
        if len(cols) < 2:
            raise ProgramError(f"line {lineno}: need at least predicate and value columns")
        key = (cols[0], tuple(cols[1:-1]))
        try:
            value = semiring.parse_value(cols[-1])
        except ValueError as exc:
            raise ProgramError(f"line {lineno}: {exc}") from None
        if key in facts:
            raise ProgramError(f"line {lineno}: duplicate fact {key[0]}{key[1]}")
        if value.is_zero:
            raise ProgramError(f"line {lineno}: zero-valued fact {key[0]}{key[1]}")
        facts[key] = value
    return FactBase(semiring, facts)


def format_facts(facts: FactBase) -> str:
    lines = []
    for (pred, args), value in sorted(facts.facts.items(), key=lambda kv: kv[0]):
        lines.append("\t".join([pred, *args, facts.semiring.format_value(value)]))
    return "".join(line + "\n" for line in lines)


# -- statistics -------------------------------------------------------------

def lambda_of(program: Program) -> int:
    """Maximum number of multiplicands in any rule body."""
    return max((len(r.body) for r in program.rules), default=0)


def sigma_of(program: Program, facts: FactBase) -> tuple[int, list[Element]]:
    """Distinct semiring elements referenced by the input (not references).

    Rules carry no inline literals, so only the fact base contributes.
    """
    ordered = sorted(set(facts.facts.values()), key=sort_key)
    return len(ordered), ordered


def active_domain(program: Program, facts: FactBase) -> set[str]:
    dom = set(program.constants())
    for _, args in facts.facts:
        dom.update(args)
    return dom


def load_program(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def load_facts(path, semiring: Semiring) -> FactBase:
    with open(path, encoding="utf-8") as fh:
        return parse_facts(fh.read(), semiring)


def facts_from_mapping(semiring: Semiring, rows: Iterable[tuple[str, tuple, object]]) -> FactBase:
    """Build a fact base from ``(predicate, args, raw_value)`` triples."""
    facts = {}
    for pred, args, raw in rows:
        facts[(pred, tuple(str(a) for a in args))] = (
            raw if isinstance(raw, Element) else semiring.element(raw)
        )
    return FactBase(semiring, facts)
