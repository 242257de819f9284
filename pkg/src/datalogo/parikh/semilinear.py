"""Semilinear Parikh images, small-support representations and absorption.

``build_semilinear`` creates one linear set per shallow core tree: the offset
is the tree's Parikh vector and the basis collects the Parikh vectors of all
shallow wedges over the tree's nonterminals.  Trees and wedges are explored
through their (Parikh vector, nonterminal set) signatures, which keeps the
search exhaustive while storing a single witness per signature.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

from ..semiring import Element, Semiring, power
from .grammar import BudgetExceeded, Grammar, Hole, ParseTree

log = logging.getLogger(__name__)

Vector = tuple[int, ...]


class CapExceeded(RuntimeError):
    """Too many vectors for brute-force subset search."""


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(k: int, a: Vector) -> Vector:
    return tuple(k * x for x in a)


def norm1(a: Vector) -> int:
    return sum(a)


@dataclass(frozen=True)
class LinearSet:
    """``offset + N·basis``; witnesses are a core tree for the offset and one
    wedge tree per basis vector (empty tuples for hand-built sets)."""

    offset: Vector
    basis: tuple[Vector, ...] = ()
    offset_witness: ParseTree | None = field(default=None, compare=False)
    basis_witnesses: tuple = field(default=(), compare=False)
    nonterminals: frozenset[int] = field(default=frozenset(), compare=False)

    def point(self, coeffs: Sequence[int]) -> Vector:
        if len(coeffs) != len(self.basis):
            raise ValueError("one coefficient per basis vector")
        out = self.offset
        for k, v in zip(coeffs, self.basis):
            out = vadd(out, vscale(k, v))
        return out

    def representation_of(self, target: Vector) -> tuple[int, ...] | None:
        """Some ``k`` with ``point(k) == target``, or ``None``."""
        rest = vsub(target, self.offset)
        if any(x < 0 for x in rest):
            return None
        return _solve_nonneg(rest, self.basis)

    def __contains__(self, target: Vector) -> bool:
        return self.representation_of(tuple(target)) is not None


def _solve_nonneg(target: Vector, basis: Sequence[Vector]) -> tuple[int, ...] | None:
    """Reachability search for ``target`` as an N-combination of ``basis``."""
    dim = len(target)
    zero = (0,) * dim
    if target == zero:
        return (0,) * len(basis)
    useful = [i for i, b in enumerate(basis) if any(b) and all(x <= t for x, t in zip(b, target))]
    # parent pointers over the box [0, target]; each vector is reached once
    parent: dict[Vector, tuple[Vector, int]] = {zero: (zero, -1)}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for i in useful:
                w = vadd(v, basis[i])
                if w in parent or any(x > t for x, t in zip(w, target)):
                    continue
                parent[w] = (v, i)
                if w == target:
                    coeffs = [0] * len(basis)
                    while w != zero:
                        w, j = parent[w]
                        coeffs[j] += 1
                    return tuple(coeffs)
                nxt.append(w)
        frontier = nxt
    return None


@dataclass(frozen=True)
class SemilinearSet:
    sigma: int
    c: int
    linear_sets: tuple[LinearSet, ...]

    def __contains__(self, target: Vector) -> bool:
        return any(target in ls for ls in self.linear_sets)

    def find(self, target: Vector) -> tuple[LinearSet, tuple[int, ...]] | None:
        for ls in self.linear_sets:
            rep = ls.representation_of(tuple(target))
            if rep is not None:
                return ls, rep
        return None


# -- signature search over trees and wedges ---------------------------------

Signature = tuple[Vector, frozenset[int]]


class _Explorer:
    """Memoized (Parikh vector, nonterminal set) -> witness tables for trees
    and single-hole wedges of bounded depth, optionally restricted to a set
    of allowed nonterminals."""

    def __init__(self, g: Grammar, budget: int):
        self.g = g
        self.budget = budget
        self.entries = 0
        self.zero = (0,) * g.sigma
        self.tree_memo: dict = {}
        self.wedge_memo: dict = {}

    def _charge(self, k: int) -> None:
        self.entries += k
        if self.entries > self.budget:
            raise BudgetExceeded(f"semilinear construction exceeded budget {self.budget}")

    def _unit(self, term: int | None) -> Vector:
        if term is None:
            return self.zero
        v = [0] * self.g.sigma
        v[term] = 1
        return tuple(v)

    def trees(self, a: int, d: int, allowed: frozenset[int] | None) -> dict[Signature, ParseTree]:
        key = (a, d, allowed)
        if key in self.tree_memo:
            return self.tree_memo[key]
        out: dict[Signature, ParseTree] = {}
        if d > 0 and (allowed is None or a in allowed):
            for p in self.g.by_lhs[a]:
                tables = [self.trees(b, d - 1, allowed) for b in p.rhs]
                if any(not tb for tb in tables):
                    continue
                base = self._unit(p.terminal)
                for combo in itertools.product(*(tb.items() for tb in tables)):
                    vec = base
                    nts = {a}
                    for (v, ns), _ in combo:
                        vec = vadd(vec, v)
                        nts |= ns
                    sig = (vec, frozenset(nts))
                    if sig not in out:
                        out[sig] = ParseTree(a, p.terminal, tuple(t for _, t in combo))
                        self._charge(1)
        self.tree_memo[key] = out
        return out

    def wedges(self, a: int, d: int, hole: int, allowed: frozenset[int]) -> dict[Signature, ParseTree]:
        """Fragments rooted at ``a`` of depth <= d with one hole labelled
        ``hole`` strictly below the root."""
        key = (a, d, hole, allowed)
        if key in self.wedge_memo:
            return self.wedge_memo[key]
        out: dict[Signature, ParseTree] = {}
        if d > 0 and a in allowed:
            for p in self.g.by_lhs[a]:
                if any(b not in allowed for b in p.rhs):
                    continue
                base = self._unit(p.terminal)
                for j, bj in enumerate(p.rhs):
                    hole_opts: dict[Signature, ParseTree | Hole] = {}
                    if bj == hole:
                        hole_opts[(self.zero, frozenset())] = Hole(hole)
                    for sig, w in self.wedges(bj, d - 1, hole, allowed).items():
                        hole_opts.setdefault(sig, w)
                    if not hole_opts:
                        continue
                    tables = [
                        hole_opts if i == j else self.trees(b, d - 1, allowed)
                        for i, b in enumerate(p.rhs)
                    ]
                    if any(not tb for tb in tables):
                        continue
                    for combo in itertools.product(*(tb.items() for tb in tables)):
                        vec = base
                        nts = {a}
                        for (v, ns), _ in combo:
                            vec = vadd(vec, v)
                            nts |= ns
                        sig = (vec, frozenset(nts))
                        if sig not in out:
                            out[sig] = ParseTree(a, p.terminal, tuple(t for _, t in combo))
                            self._charge(1)
        self.wedge_memo[key] = out
        return out


def _hole_path(t) -> tuple[int, ...]:
    stack = [((), t)]
    while stack:
        path, node = stack.pop()
        if isinstance(node, Hole):
            return path
        for i, ch in enumerate(node.children):
            stack.append((path + (i,), ch))
    raise ValueError("wedge without a hole")


def _irreducible(vectors) -> tuple[Vector, ...]:
    """Drop vectors that are N-combinations of smaller ones; the span is
    unchanged."""
    kept: list[Vector] = []
    # vectors are visited by 1-norm, so every memo entry (always of smaller
    # norm than the vector being tested) is final when it is written
    memo: dict[Vector, bool] = {}

    def spanned(w: Vector) -> bool:
        if not any(w):
            return True
        if w not in memo:
            memo[w] = any(
                all(x <= y for x, y in zip(u, w)) and spanned(vsub(w, u)) for u in kept
            )
        return memo[w]

    for v in sorted(vectors, key=lambda v: (norm1(v), v)):
        if not any(all(x <= y for x, y in zip(u, v)) and spanned(vsub(v, u)) for u in kept):
            kept.append(v)
    return tuple(sorted(kept))


def _sig_order(item):
    (vec, nts), _ = item
    return vec, sorted(nts)


def build_semilinear(g: Grammar, start: int, c: int | None = None, budget: int = 200_000) -> SemilinearSet:
    """One linear set per shallow core tree (deduplicated by offset and
    nonterminal set), with basis vectors from every nonzero wedge of depth
    <= c rooted at, and built only from, the core's nonterminals.  Basis
    vectors that are sums of other basis vectors are left out."""
    from .wedges import Wedge

    if c is None:
        c = g.n * (g.n + 3) // 2
    ex = _Explorer(g, budget)
    linear_sets: dict[tuple[Vector, tuple[Vector, ...]], LinearSet] = {}
    bases: dict[frozenset[int], tuple[tuple[Vector, ...], tuple[Wedge, ...]]] = {}
    cores = ex.trees(start, c, None)
    for (offset, nts), core in sorted(cores.items(), key=_sig_order):
        if nts not in bases:
            found: dict[Vector, ParseTree] = {}
            for v in sorted(nts):
                for (vec, _), wt in sorted(ex.wedges(v, c, v, nts).items(), key=_sig_order):
                    if any(vec):
                        found.setdefault(vec, wt)
            ordered = _irreducible(found)
            bases[nts] = ordered, tuple(Wedge(found[b], _hole_path(found[b])) for b in ordered)
        ordered, witnesses = bases[nts]
        key = (offset, ordered)
        if key not in linear_sets:
            linear_sets[key] = LinearSet(offset, ordered, core, witnesses, nts)
    return SemilinearSet(g.sigma, c, tuple(linear_sets.values()))


# -- small support ----------------------------------------------------------

def find_equal_sum_subsets(
    vs: Sequence[Vector], cap: int = 22, *, equal_size: bool = False
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Two disjoint index sets with equal vector sums, or ``None``.

    Subsets are visited in bitmask order and the first collision is
    returned with the common part removed.  With ``equal_size`` only
    collisions between equally sized sets count.
    """
    m = len(vs)
    if m > cap:
        raise CapExceeded(f"{m} vectors exceed the brute-force cap of {cap}")
    dim = len(vs[0]) if vs else 0
    sums: list[Vector] = [(0,) * dim] * (1 << m)
    seen: dict = {}
    for mask in range(1, 1 << m):
        low = mask & -mask
        i = low.bit_length() - 1
        sums[mask] = vadd(sums[mask ^ low], vs[i])
        key = (sums[mask], bin(mask).count("1")) if equal_size else sums[mask]
        other = seen.get(key)
        if other is None:
            seen[key] = mask
            continue
        common = mask & other
        h1, h2 = other & ~common, mask & ~common
        return (
            tuple(j for j in range(m) if h1 >> j & 1),
            tuple(j for j in range(m) if h2 >> j & 1),
        )
    return None


@dataclass(frozen=True)
class Rewrite:
    before: tuple[int, ...]
    after: tuple[int, ...]
    h1: tuple[int, ...]
    h2: tuple[int, ...]

    @property
    def norm_preserved(self) -> bool:
        return sum(self.before) == sum(self.after)


def _point(basis: Sequence[Vector], coeffs: Sequence[int]) -> Vector:
    out = (0,) * len(basis[0])
    for kk, v in zip(coeffs, basis):
        if kk:
            out = vadd(out, vscale(kk, v))
    return out


def reduce_support(
    rep: Sequence[int],
    basis: Sequence[Vector],
    h: int,
    *,
    preserve_norm: bool = False,
    cap: int = 22,
    trace: list[Rewrite] | None = None,
) -> tuple[int, ...]:
    """Shrink the support of ``rep`` to at most ``h`` by equal-sum exchanges.

    Each step finds index sets H1, H2 (among the active vectors) with equal
    sums, orients them so that |H1| >= |H2|, takes the smallest coefficient
    on H1-H2, subtracts it there and adds it on H2-H1.  The represented vector never changes; the coefficient
    sum is kept only when |H1-H2| = |H2-H1|.  With ``preserve_norm`` only
    such balanced pairs are used; otherwise unbalanced steps are logged.
    """
    k = list(rep)
    if len(k) != len(basis):
        raise ValueError("one coefficient per basis vector")
    if any(x < 0 for x in k):
        raise ValueError("coefficients must be nonnegative")
    if any(not any(v) for v in basis):
        raise ValueError("basis vectors must be nonzero")
    while True:
        active = [i for i, x in enumerate(k) if x > 0]
        if len(active) <= h:
            break
        found = find_equal_sum_subsets([basis[i] for i in active], cap, equal_size=preserve_norm)
        if found is None:
            break
        h1 = tuple(active[j] for j in found[0])
        h2 = tuple(active[j] for j in found[1])
        # subtract on the larger side so the coefficient sum never grows;
        # on a tie, move the smaller amount
        if (len(h2), -min(k[j] for j in h2)) > (len(h1), -min(k[j] for j in h1)):
            h1, h2 = h2, h1
        i_min = min(h1, key=lambda j: (k[j], j))
        delta = k[i_min]
        before = tuple(k)
        for j in h1:
            k[j] -= delta
        for j in h2:
            k[j] += delta
        after = tuple(k)
        if _point(basis, after) != _point(basis, before):
            raise AssertionError(f"rewrite on {h1} / {h2} moved the represented vector")
        step = Rewrite(before, after, h1, h2)
        if not step.norm_preserved:
            log.warning("coefficient sum changed %d -> %d (|H1|=%d, |H2|=%d)",
                        sum(before), sum(after), len(h1), len(h2))
        if trace is not None:
            trace.append(step)
    return tuple(k)


# -- absorption -------------------------------------------------------------

def z_of(vec: Vector, terminals: Sequence[Element], semiring: Semiring) -> Element:
    """``prod_s a_s ** vec[s]``."""
    acc = semiring.one()
    for a, e in zip(terminals, vec):
        if e:
            acc = semiring.mul(acc, power(a, e))
    return acc


def bounded_points(ls: LinearSet, p: int, budget: int = 100_000) -> set[Vector]:
    """``{offset + sum kappa_i v_i : 0 <= kappa_i <= p}``."""
    if (p + 1) ** len(ls.basis) > budget:
        raise BudgetExceeded(f"(p+1)^l = {(p + 1) ** len(ls.basis)} points exceed budget {budget}")
    return {ls.point(kappa) for kappa in itertools.product(range(p + 1), repeat=len(ls.basis))}


def absorption_check(
    ls: LinearSet,
    p: int,
    semiring: Semiring,
    rep: Sequence[int],
    terminals: Sequence[Element],
    budget: int = 100_000,
) -> bool:
    """Does ``Z(L_{<=p}) ⊕ Z(w) == Z(L_{<=p})`` for ``w = point(rep)``?

    ``Z`` of a point set sums each distinct vector once.  ``rep`` must have
    some coefficient above ``p``.
    """
    if not any(k > p for k in rep):
        raise ValueError("representation needs a coefficient greater than p")
    total = semiring.sum(z_of(v, terminals, semiring) for v in sorted(bounded_points(ls, p, budget)))
    w = ls.point(rep)
    return semiring.add(total, z_of(w, terminals, semiring)) == total
