"""Grounding a Datalog° program into a polynomial fixpoint system.

Every ground IDB atom becomes a variable ``X<i>``; its polynomial is the
``⊕`` of one monomial per rule instantiation whose EDB atoms are all present
in the fact base.  EDB values are multiplied into the monomial coefficient,
IDB atoms stay as variables (repeated atoms become powers).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .program import Atom, Const, FactBase, GroundKey, Program, Var, active_domain, lambda_of, sigma_of
from .semiring import Element, InstanceMismatch, Semiring, sort_key


@dataclass(frozen=True)
class Monomial:
    coefficient: Element
    vars: tuple[int, ...] = ()

    @property
    def degree(self) -> int:
        return len(self.vars)


def _mono_key(sr: Semiring, m: Monomial):
    return (len(m.vars), m.vars, sort_key(m.coefficient))


def format_atom(key: GroundKey) -> str:
    pred, args = key
    return f"{pred}({','.join(args)})" if args else pred


@dataclass(frozen=True)
class GroundedSystem:
    """``X_i = f_i(X_0..X_{n-1})`` for every retained ground atom.

    ``program_lambda`` and ``input_sigma`` carry the source program's body
    length and the number of distinct fact values when the system came from
    :func:`ground`; hand-built systems leave them ``None``.
    """

    semiring: Semiring
    atoms: tuple[GroundKey, ...]
    polys: tuple[tuple[Monomial, ...], ...]
    program_lambda: int | None = None
    input_sigma: int | None = None
    _index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.polys):
            raise ValueError("one polynomial per atom required")
        n = len(self.atoms)
        canon = []
        for poly in self.polys:
            for m in poly:
                if m.coefficient.semiring != self.semiring:
                    raise InstanceMismatch(f"coefficient {m.coefficient!r} not in {self.semiring.selector}")
                if m.coefficient.is_zero:
                    raise ValueError("zero-coefficient monomials are not stored")
                if any(not 0 <= v < n for v in m.vars):
                    raise ValueError(f"monomial refers to unknown variable in {m.vars}")
            canon.append(tuple(sorted(
                (Monomial(m.coefficient, tuple(sorted(m.vars))) for m in poly),
                key=lambda m: _mono_key(self.semiring, m),
            )))
        object.__setattr__(self, "polys", tuple(canon))
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.atoms)})

    @classmethod
    def from_polynomials(cls, semiring: Semiring, polys: Sequence[Sequence[tuple]], names=None) -> GroundedSystem:
        """Build a system from ``[[(coef, (vars...)), ...], ...]`` with raw or
        Element coefficients; atoms are named ``X(i)`` unless ``names`` given."""
        def el(c):
            return c if isinstance(c, Element) else semiring.element(c)

        atoms = tuple(names) if names is not None else tuple(("X", (str(i),)) for i in range(len(polys)))
        return cls(
            semiring,
            atoms,
            tuple(tuple(Monomial(el(c), tuple(vs)) for c, vs in poly) for poly in polys),
        )

    @property
    def n(self) -> int:
        return len(self.atoms)

    def index_of(self, key: GroundKey) -> int:
        return self._index[key]

    def monomials(self) -> Iterator[Monomial]:
        for poly in self.polys:
            yield from poly

    def terminals(self) -> list[Element]:
        """Distinct coefficients other than ``one``, in a stable order."""
        one = self.semiring.one()
        seen: dict[Element, None] = {}
        for m in self.monomials():
            if m.coefficient != one:
                seen.setdefault(m.coefficient, None)
        return sorted(seen, key=sort_key)

    def coefficients(self) -> list[Element]:
        seen: dict[Element, None] = {}
        for m in self.monomials():
            seen.setdefault(m.coefficient, None)
        return list(seen)

    def multiset_form(self):
        """Canonical, order-independent view used for equality checks."""
        return {
            format_atom(a): sorted(
                (tuple(format_atom(self.atoms[v]) for v in m.vars), self.semiring.format_value(m.coefficient))
                for m in poly
            )
            for a, poly in zip(self.atoms, self.polys)
        }

    def to_text(self) -> str:
        sr = self.semiring
        one = sr.one()
        lines = []
        for i, (atom, poly) in enumerate(zip(self.atoms, self.polys)):
            terms = []
            for m in poly:
                parts = [] if (m.coefficient == one and m.vars) else [sr.format_value(m.coefficient)]
                parts += [f"X{v}" for v in m.vars]
                terms.append("*".join(parts))
            rhs = " + ".join(terms) if terms else sr.format_value(sr.zero())
            lines.append(f"X{i} = {rhs}    % {format_atom(atom)}")
        return "".join(line + "\n" for line in lines)

    def stats_json(self) -> dict:
        n, lam, sigma, alphabet = system_stats(self)
        return {
            "semiring": self.semiring.selector,
            "n": n,
            "lambda_effective": lam,
            "lambda_program": self.program_lambda,
            "sigma": sigma,
            "sigma_input": self.input_sigma,
            "terminals": [self.semiring.to_json(t) for t in alphabet],
            "atoms": [format_atom(a) for a in self.atoms],
            "monomials": sum(len(p) for p in self.polys),
        }


def _bindings(body: Sequence[Atom], idb: frozenset[str], facts: FactBase, adom: list[str]):
    """Yield ``(binding, edb_values)`` for every instantiation of ``body``
    whose EDB atoms all have facts; IDB-only variables range over ``adom``."""
    edb_atoms = [a for a in body if a.predicate not in idb]
    idb_atoms = [a for a in body if a.predicate in idb]
    by_pred = facts.by_predicate()

    def match(atom: Atom, args: tuple[str, ...], binding: dict) -> dict | None:
        new = dict(binding)
        for term, val in zip(atom.args, args):
            if isinstance(term, Const):
                if term.value != val:
                    return None
            elif new.setdefault(term.name, val) != val:
                return None
        return new

    def walk(i: int, binding: dict, values: list[Element]):
        if i < len(edb_atoms):
            atom = edb_atoms[i]
            for args, val in by_pred.get(atom.predicate, ()):
                if len(args) != atom.arity:
                    continue
                nb = match(atom, args, binding)
                if nb is not None:
                    yield from walk(i + 1, nb, values + [val])
            return
        free = sorted({v for a in idb_atoms for v in a.variables()} - binding.keys())
        for combo in itertools.product(adom, repeat=len(free)):
            yield {**binding, **dict(zip(free, combo))}, values

    yield from walk(0, {}, [])


def _ground_atom(atom: Atom, binding: dict) -> GroundKey:
    return atom.predicate, tuple(t.value if isinstance(t, Const) else binding[t.name] for t in atom.args)


def ground(program: Program, facts: FactBase) -> GroundedSystem:
    """Instantiate ``program`` over the active domain (before pruning).

    Every ground IDB atom over ADom gets an equation, even if it can never be
    nonzero; :func:`prune_inactive` removes those.
    """
    facts.validate_against(program)
    sr = facts.semiring
    adom = sorted(active_domain(program, facts))
    idb = program.idb_predicates
    atoms: list[GroundKey] = []
    for pred in sorted(idb):
        for args in itertools.product(adom, repeat=program.arities[pred]):
            atoms.append((pred, args))
    # heads with constants outside the enumerated grid cannot occur: rule
    # constants are part of ADom
    index = {a: i for i, a in enumerate(atoms)}
    polys: list[list[Monomial]] = [[] for _ in atoms]
    for rule in program.rules:
        for binding, values in _bindings(rule.body, idb, facts, adom):
            coef = sr.prod(values)
            if coef.is_zero:
                continue
            vars_ = tuple(sorted(index[_ground_atom(a, binding)] for a in rule.body if a.predicate in idb))
            polys[index[_ground_atom(rule.head, binding)]].append(Monomial(coef, vars_))
    return GroundedSystem(
        sr,
        tuple(atoms),
        tuple(tuple(p) for p in polys),
        program_lambda=lambda_of(program),
        input_sigma=sigma_of(program, facts)[0],
    )


def active_atoms(system: GroundedSystem) -> set[int]:
    """Least fixpoint of the Boolean abstraction (nonzero coefficient = true)."""
    active: set[int] = set()
    watchers: dict[int, list[tuple[int, Monomial]]] = {}
    pending: dict[tuple[int, int], int] = {}
    queue: list[int] = []
    for i, poly in enumerate(system.polys):
        for j, m in enumerate(poly):
            need = set(m.vars)
            pending[(i, j)] = len(need)
            for v in need:
                watchers.setdefault(v, []).append((i, j))
            if not need and i not in active:
                active.add(i)
                queue.append(i)
    while queue:
        v = queue.pop()
        for i, j in watchers.get(v, ()):
            pending[(i, j)] -= 1
            if pending[(i, j)] == 0 and i not in active:
                active.add(i)
                queue.append(i)
    return active


def prune_inactive(system: GroundedSystem) -> GroundedSystem:
    """Drop atoms that stay zero in every iterate, re-densifying indices."""
    keep = sorted(active_atoms(system))
    remap = {old: new for new, old in enumerate(keep)}
    polys = []
    for old in keep:
        polys.append(tuple(
            Monomial(m.coefficient, tuple(remap[v] for v in m.vars))
            for m in system.polys[old]
            if all(v in remap for v in m.vars)
        ))
    return GroundedSystem(
        system.semiring,
        tuple(system.atoms[i] for i in keep),
        tuple(polys),
        program_lambda=system.program_lambda,
        input_sigma=system.input_sigma,
    )


def system_stats(system: GroundedSystem) -> tuple[int, int, int, list[Element]]:
    """``(n, lambda_effective, sigma, terminal alphabet)``.

    ``lambda_effective`` is the largest monomial degree (at least 1); sigma
    counts distinct pre-multiplied coefficients other than ``one``.
    """
    lam = max((m.degree for m in system.monomials()), default=0)
    alphabet = system.terminals()
    return system.n, max(lam, 1), len(alphabet), alphabet


def write_ground_output(system: GroundedSystem) -> tuple[str, str]:
    return system.to_text(), json.dumps(system.stats_json(), indent=2, sort_keys=True)
