"""Grammar view of a grounded system, parse trees and their yields.

Each variable of the system is a nonterminal and each monomial a production
``A -> t B1 ... Bm``: one terminal for the coefficient (omitted when the
coefficient is ``one``) followed by the monomial's variables.  Depth follows
the iteration count: a node whose children are all leaves has depth 1, so
trees of depth <= q are exactly the summands of the q-th iterate.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from ..grounding import GroundedSystem, format_atom
from ..semiring import Element, Semiring


class BudgetExceeded(RuntimeError):
    """An enumeration would produce more objects than its budget allows."""


class UnknownSymbol(ValueError):
    pass


@dataclass(frozen=True)
class Production:
    lhs: int
    terminal: int | None
    rhs: tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return len(self.rhs) + (self.terminal is not None)


@dataclass(frozen=True)
class Grammar:
    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    productions: tuple[Production, ...]
    semiring: Semiring | None = None
    terminal_values: tuple[Element, ...] = ()
    labels: tuple[str, ...] = ()
    by_lhs: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        table: dict[int, list[Production]] = {i: [] for i in range(len(self.nonterminals))}
        for p in self.productions:
            if not 0 <= p.lhs < len(self.nonterminals):
                raise ValueError(f"production with unknown lhs {p.lhs}")
            if p.terminal is not None and not 0 <= p.terminal < len(self.terminals):
                raise ValueError(f"production with unknown terminal {p.terminal}")
            if any(not 0 <= b < len(self.nonterminals) for b in p.rhs):
                raise ValueError(f"production with unknown nonterminal in {p.rhs}")
            table[p.lhs].append(p)
        object.__setattr__(self, "by_lhs", {k: tuple(v) for k, v in table.items()})
        if self.terminal_values and len(self.terminal_values) != len(self.terminals):
            raise ValueError("one value per terminal required")

    @property
    def n(self) -> int:
        return len(self.nonterminals)

    @property
    def sigma(self) -> int:
        return len(self.terminals)

    @property
    def max_rhs(self) -> int:
        return max((p.length for p in self.productions), default=0)

    def nt(self, name: str) -> int:
        return self.nonterminals.index(name)

    @classmethod
    def from_rules(cls, rules: dict[str, Sequence[str]], *, semiring: Semiring | None = None,
                   values: dict[str, object] | None = None) -> Grammar:
        """Build a grammar from ``{"A": ["aAB", "bB", "c"], ...}``.

        Uppercase letters are nonterminals, lowercase letters terminals; a
        right-hand side has at most one terminal, written first.  ``""``
        is a terminal-free, variable-free production.
        """
        nts = list(rules)
        terms = sorted({ch for rhss in rules.values() for rhs in rhss for ch in rhs if ch.islower()})
        prods = []
        for lhs, rhss in rules.items():
            for rhs in rhss:
                term = None
                body = rhs
                if body and body[0].islower():
                    term, body = terms.index(body[0]), body[1:]
                if any(not ch.isupper() for ch in body):
                    raise ValueError(f"bad right-hand side {rhs!r}: one leading terminal, then nonterminals")
                for ch in body:
                    if ch not in nts:
                        raise ValueError(f"undefined nonterminal {ch!r}")
                prods.append(Production(nts.index(lhs), term, tuple(nts.index(ch) for ch in body)))
        tvals: tuple[Element, ...] = ()
        if semiring is not None and values is not None:
            tvals = tuple(v if isinstance(v, Element) else semiring.element(v) for v in (values[t] for t in terms))
        return cls(tuple(nts), tuple(terms), tuple(prods), semiring, tvals)

    def to_text(self) -> str:
        lines = []
        for i, name in enumerate(self.nonterminals):
            alts = []
            for p in self.by_lhs[i]:
                syms = ([self.terminals[p.terminal]] if p.terminal is not None else []) + [
                    self.nonterminals[b] for b in p.rhs
                ]
                alts.append(" ".join(syms) if syms else "ε")
            line = f"{name} -> {' | '.join(alts) if alts else '∅'}"
            if self.labels:
                line += f"    % {self.labels[i]}"
            lines.append(line)
        if self.terminal_values:
            sr = self.semiring
            pairs = ", ".join(f"{t} = {sr.format_value(v)}" for t, v in zip(self.terminals, self.terminal_values))
            lines.append(f"% terminals: {pairs}")
        return "".join(line + "\n" for line in lines)


def _terminal_names(count: int) -> list[str]:
    if count <= 26:
        return list(string.ascii_lowercase[:count])
    return [f"t{i}" for i in range(count)]


def grammar_from_system(system: GroundedSystem) -> Grammar:
    """Nonterminal ``X<i>`` per atom, one terminal per distinct non-one
    coefficient (named ``a, b, ...`` in value order), one production per
    monomial."""
    sr = system.semiring
    alphabet = system.terminals()
    index = {el: i for i, el in enumerate(alphabet)}
    one = sr.one()
    prods = []
    for lhs, poly in enumerate(system.polys):
        for m in poly:
            term = None if m.coefficient == one else index[m.coefficient]
            prods.append(Production(lhs, term, m.vars))
    return Grammar(
        tuple(f"X{i}" for i in range(system.n)),
        tuple(_terminal_names(len(alphabet))),
        tuple(prods),
        sr,
        tuple(alphabet),
        tuple(format_atom(a) for a in system.atoms),
    )


# -- trees ------------------------------------------------------------------

@dataclass(frozen=True)
class Hole:
    """The single nonterminal leaf of a wedge."""

    label: int
    depth: int = field(default=0, init=False, compare=False)


@dataclass(frozen=True)
class ParseTree:
    """A node labelled by nonterminal ``label`` that expanded with a
    production emitting ``terminal`` (or nothing) and one child per
    right-hand-side nonterminal.  ``depth`` and ``size`` are cached."""

    label: int
    terminal: int | None
    children: tuple[ParseTree | Hole, ...] = ()
    depth: int = field(init=False, compare=False, repr=False)
    size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "depth", 1 + max((c.depth for c in self.children), default=0))
        object.__setattr__(self, "size", 1 + sum(c.size for c in self.children if isinstance(c, ParseTree)))

    @property
    def rhs(self) -> tuple[int, ...]:
        return tuple(c.label for c in self.children)


Node = ParseTree | Hole
Path = tuple[int, ...]


def iter_nodes(t: Node, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    """Preorder ``(path, node)`` pairs; paths index into ``children``."""
    stack = [(path, t)]
    while stack:
        p, node = stack.pop()
        yield p, node
        if isinstance(node, ParseTree):
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((p + (i,), node.children[i]))


def get_node(t: Node, path: Path) -> Node:
    for i in path:
        t = t.children[i]
    return t


def replace_node(t: Node, path: Path, new: Node) -> Node:
    if not path:
        return new
    head, rest = path[0], path[1:]
    kids = list(t.children)
    kids[head] = replace_node(kids[head], rest, new)
    return ParseTree(t.label, t.terminal, tuple(kids))


def nonterminals_of(t: Node) -> frozenset[int]:
    """Labels of internal nodes (hole labels excluded)."""
    return frozenset(node.label for _, node in iter_nodes(t) if isinstance(node, ParseTree))


def is_valid_tree(g: Grammar, t: Node, *, allow_hole: bool = False) -> bool:
    holes = 0
    for _, node in iter_nodes(t):
        if isinstance(node, Hole):
            holes += 1
            continue
        if not any(p.terminal == node.terminal and p.rhs == node.rhs for p in g.by_lhs.get(node.label, ())):
            return False
    return holes == 0 or (allow_hole and holes == 1)


def yield_of(t: Node) -> tuple[int, ...]:
    """Terminal indices at the leaves, left to right (holes contribute nothing)."""
    out: list[int] = []
    for _, node in iter_nodes(t):
        if isinstance(node, ParseTree) and node.terminal is not None:
            out.append(node.terminal)
    return tuple(out)


def word_of(g: Grammar, t: Node) -> str:
    return "".join(g.terminals[i] for i in yield_of(t))


def product_yield(g: Grammar, t: Node) -> Element:
    """Product of the terminal values in the yield; ``one`` for the empty word."""
    if g.semiring is None:
        raise ValueError("grammar has no semiring values attached")
    return g.semiring.prod(g.terminal_values[i] for i in yield_of(t))


def parikh(word: Sequence, alphabet: Sequence) -> tuple[int, ...]:
    """Occurrence counts of each alphabet symbol in ``word``."""
    pos = {s: i for i, s in enumerate(alphabet)}
    counts = [0] * len(alphabet)
    for sym in word:
        if sym not in pos:
            raise UnknownSymbol(f"{sym!r} is not in the alphabet")
        counts[pos[sym]] += 1
    return tuple(counts)


def tree_parikh(g: Grammar, t: Node) -> tuple[int, ...]:
    return parikh(yield_of(t), range(g.sigma))


# -- enumeration ------------------------------------------------------------

def count_trees(g: Grammar, start: int, q: int, limit: int | None = None) -> int:
    """Number of parse trees rooted at ``start`` with depth <= q (saturating
    at ``limit + 1`` when a limit is given)."""
    cap = None if limit is None else limit + 1
    counts = {a: 0 for a in range(g.n)}
    for _ in range(q):
        nxt = {}
        for a in range(g.n):
            total = 0
            for p in g.by_lhs[a]:
                prod = 1
                for b in p.rhs:
                    prod *= counts[b]
                    if prod == 0:
                        break
                    if cap is not None:
                        prod = min(prod, cap)
                total += prod
                if cap is not None:
                    total = min(total, cap)
            nxt[a] = total
        counts = nxt
    return counts[start]


def enumerate_trees(g: Grammar, start: int, q: int, budget: int = 100_000) -> list[ParseTree]:
    """All parse trees rooted at ``start`` of depth <= q.

    Raises :class:`BudgetExceeded` instead of materializing more than
    ``budget`` trees at the root.
    """
    if count_trees(g, start, q, budget) > budget:
        raise BudgetExceeded(f"more than {budget} trees of depth <= {q} at {g.nonterminals[start]}")
    memo: dict[tuple[int, int], list[ParseTree]] = {}

    def trees(a: int, d: int) -> list[ParseTree]:
        if d <= 0:
            return []
        key = (a, d)
        if key in memo:
            return memo[key]
        out: list[ParseTree] = []
        for p in g.by_lhs[a]:
            options = []
            for b in p.rhs:
                opts = trees(b, d - 1)
                if not opts:
                    break
                options.append(opts)
            else:
                for kids in itertools.product(*options):
                    out.append(ParseTree(a, p.terminal, kids))
        memo[key] = out
        return out

    return list(trees(start, q))


def eval_via_trees(g: Grammar, start: int, q: int, budget: int = 100_000) -> Element:
    """``⊕`` of the product yields of all trees of depth <= q (zero if none)."""
    if g.semiring is None:
        raise ValueError("grammar has no semiring values attached")
    return g.semiring.sum(product_yield(g, t) for t in enumerate_trees(g, start, q, budget))


def eval_via_trees_upto(g: Grammar, start: int, qmax: int, budget: int = 100_000) -> list[Element]:
    """``[eval_via_trees(g, start, q) for q in 0..qmax]`` from one enumeration."""
    sr = g.semiring
    if sr is None:
        raise ValueError("grammar has no semiring values attached")
    buckets = [sr.zero() for _ in range(qmax + 1)]
    for t in enumerate_trees(g, start, qmax, budget):
        buckets[t.depth] = sr.add(buckets[t.depth], product_yield(g, t))
    out = []
    acc = sr.zero()
    for b in buckets:
        acc = sr.add(acc, b)
        out.append(acc)
    return out
