"""Seeded verification suites with brute-force oracles.

Four suites, each returning a JSON-ready dict with a ``status`` of
``pass``, ``fail`` or ``budget-exceeded``:

``trees``        engine iterates vs. sums over enumerated parse trees
``wedge``        collapse/augment invariants on random deep parse trees
``semilinear``   build_semilinear vs. a Parikh-language fixpoint
``absorption``   absorption over bounded linear sets of p-stable instances

Every suite draws from its own ``random.Random`` derived from the seed, so a
report is a pure function of (seed, budget, options).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable

from .engine import c_bound, iterate
from .grounding import GroundedSystem, Monomial, format_atom
from .parikh.grammar import (
    BudgetExceeded,
    Grammar,
    ParseTree,
    Production,
    count_trees,
    eval_via_trees_upto,
    grammar_from_system,
    is_valid_tree,
    nonterminals_of,
    tree_parikh,
)
from .parikh.semilinear import (
    LinearSet,
    absorption_check,
    build_semilinear,
    vadd,
)
from .parikh.wedges import augment, find_good_pair, rebuild, remove_wedge
from .semiring import Boolean, BoundedNatural, Element, MaxPlus, Semiring, Tropical, stability_index

SUITES = ("trees", "wedge", "semilinear", "absorption")


class Budget:
    """Shared work counter; ``charge`` raises once the limit is passed."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    @property
    def remaining(self) -> int:
        return max(self.limit - self.used, 0)

    def charge(self, units: int = 1) -> None:
        self.used += units
        if self.used > self.limit:
            raise BudgetExceeded(f"budget of {self.limit} work units exhausted")


# -- generators -------------------------------------------------------------

def sample_elements(sr: Semiring, rng: random.Random, k: int) -> list[Element]:
    """Up to ``k`` distinct nonzero elements of ``sr``."""
    if isinstance(sr, Boolean):
        return [sr.one()]
    if isinstance(sr, BoundedNatural):
        pool = list(range(1, sr.bound + 1))
    elif isinstance(sr, Tropical):
        pool = list(range(0, 10))
    elif isinstance(sr, MaxPlus):
        pool = list(range(-3, 6))
    else:
        carrier = sr.carrier()
        if carrier is None:
            raise ValueError(f"no sampler for {sr.selector}")
        pool = [el.value for el in carrier if not el.is_zero]
    return [sr.element(v) for v in rng.sample(pool, min(k, len(pool)))]


def random_system(
    rng: random.Random,
    sr: Semiring,
    n: int,
    lam: int,
    sigma: int,
    *,
    max_monomials: int = 3,
) -> GroundedSystem:
    """Random polynomial system: ``n`` variables, monomial degree <= lam,
    coefficients drawn from at most ``sigma`` distinct nonzero values."""
    pool = sample_elements(sr, rng, max(sigma, 1))
    # low degrees are more likely, which keeps tree counts manageable
    degree_weights = [2 ** (lam - d) for d in range(lam + 1)]
    polys = []
    for _ in range(n):
        poly = []
        for _ in range(rng.randint(0, max_monomials)):
            deg = rng.choices(range(lam + 1), degree_weights)[0]
            poly.append(Monomial(rng.choice(pool), tuple(rng.randrange(n) for _ in range(deg))))
        polys.append(tuple(poly))
    atoms = tuple(("X", (str(i),)) for i in range(n))
    return GroundedSystem(sr, atoms, tuple(polys))


def random_grammar(rng: random.Random, n: int, sigma: int, max_rhs: int = 2, *, recursive: int = 2) -> Grammar:
    """Grammar over ``n`` nonterminals and ``sigma`` terminals where every
    nonterminal has a terminal-only production and up to ``recursive``
    productions with nonterminals on the right."""
    prods: list[Production] = []
    for a in range(n):
        prods.append(Production(a, rng.randrange(sigma), ()))
        for _ in range(rng.randint(1, recursive)):
            width = rng.randint(1, max(max_rhs - 1, 1))
            term = rng.randrange(sigma) if rng.random() < 0.6 else None
            if term is None and max_rhs >= 2 and rng.random() < 0.5:
                width = min(max_rhs, 2)
            prods.append(Production(a, term, tuple(rng.randrange(n) for _ in range(width))))
    prods = list(dict.fromkeys(prods))
    return Grammar(
        tuple(chr(ord("A") + i) for i in range(n)),
        tuple(chr(ord("a") + i) for i in range(sigma)),
        tuple(prods),
    )


def random_tree(rng: random.Random, g: Grammar, start: int, depth: int) -> ParseTree:
    """Random tree of depth exactly ``depth`` (when the grammar allows it):
    one child carries the depth, siblings stay shallow."""
    if depth <= 1:
        leaves = [p for p in g.by_lhs[start] if not p.rhs]
        return ParseTree(start, rng.choice(leaves).terminal, ())
    options = [p for p in g.by_lhs[start] if p.rhs]
    if not options:
        return random_tree(rng, g, start, 1)
    p = rng.choice(options)
    carrier = rng.randrange(len(p.rhs))
    kids = []
    for i, b in enumerate(p.rhs):
        d = depth - 1 if i == carrier else rng.randint(1, min(3, depth - 1))
        kids.append(random_tree(rng, g, b, d))
    return ParseTree(start, p.terminal, tuple(kids))


def parikh_language(g: Grammar, start: int, max_norm: int, budget: Budget | None = None) -> set[tuple[int, ...]]:
    """Parikh vectors of all words of length <= max_norm derivable from
    ``start``, by a least fixpoint over norm-bounded vector sets."""
    sets: list[set[tuple[int, ...]]] = [set() for _ in range(g.n)]
    zero = (0,) * g.sigma

    def unit(t: int | None) -> tuple[int, ...]:
        if t is None:
            return zero
        return tuple(int(i == t) for i in range(g.sigma))

    changed = True
    while changed:
        changed = False
        for p in g.productions:
            partial = {unit(p.terminal)}
            for b in p.rhs:
                partial = {
                    w for u in partial for v in sets[b]
                    if sum(w := vadd(u, v)) <= max_norm
                }
                if budget is not None:
                    budget.charge(len(partial) + 1)
                if not partial:
                    break
            new = {v for v in partial if sum(v) <= max_norm} - sets[p.lhs]
            if new:
                sets[p.lhs] |= new
                changed = True
    return sets[start]


# -- fault injection --------------------------------------------------------

@dataclass(frozen=True)
class SkewedBoundedNatural(BoundedNatural):
    """BoundedNatural with a broken ``⊕``: ``min(B, a + 2b)``.  Neither
    commutative nor associative; used to show the oracles catch it."""

    name = "bounded-nat-skewed"

    def _add(self, x, y):
        return min(self.bound, x + 2 * y)


# -- suites -----------------------------------------------------------------

def _result(cases: int, failures: list[dict], extra: dict | None = None) -> dict:
    out = {"status": "pass" if not failures else "fail", "cases": cases, "failures": len(failures)}
    if failures:
        out["counterexample"] = failures[0]
    if extra:
        out.update(extra)
    return out


def _system_json(system: GroundedSystem) -> dict:
    sr = system.semiring
    return {
        "semiring": sr.selector,
        "equations": [
            {
                "atom": format_atom(a),
                "monomials": [
                    {"coefficient": sr.to_json(m.coefficient), "vars": list(m.vars)} for m in poly
                ],
            }
            for a, poly in zip(system.atoms, system.polys)
        ],
    }


def _trees_mismatch(system: GroundedSystem, qmax: int, tree_budget: int) -> tuple[int, int] | None:
    """First (q, i) where the engine and the tree sum disagree."""
    g = grammar_from_system(system)
    states = [iterate(system, q) for q in range(qmax + 1)]
    for i in range(system.n):
        via_trees = eval_via_trees_upto(g, i, qmax, tree_budget)
        for q in range(qmax + 1):
            if states[q][i] != via_trees[q]:
                return q, i
    return None


def _shrink(system: GroundedSystem, fails: Callable[[GroundedSystem], bool]) -> GroundedSystem:
    """Greedy monomial deletion while the failure persists."""
    current = system
    progress = True
    while progress:
        progress = False
        for i, poly in enumerate(current.polys):
            for j in range(len(poly)):
                polys = list(current.polys)
                polys[i] = poly[:j] + poly[j + 1:]
                candidate = GroundedSystem(current.semiring, current.atoms, tuple(polys))
                if fails(candidate):
                    current = candidate
                    progress = True
                    break
            if progress:
                break
    return current


def trees_semirings(fault: bool = False) -> list[Semiring]:
    if fault:
        return [SkewedBoundedNatural(4)]
    return [Boolean(), Tropical(), BoundedNatural(2), BoundedNatural(3), BoundedNatural(4)]


def trees_suite(
    rng: random.Random,
    budget: Budget,
    *,
    cases: int = 200,
    qmax: int = 5,
    fault: bool = False,
    extra_systems: tuple[GroundedSystem, ...] = (),
    tree_limit: int = 5000,
) -> dict:
    """Engine ``f^(q)(0)`` vs. the parse-tree sum, all atoms, all q <= qmax."""
    semirings = trees_semirings(fault)
    failures: list[dict] = []
    checked = 0
    skipped = 0
    systems: list[tuple[GroundedSystem, int]] = []
    for system in extra_systems:
        g = grammar_from_system(system)
        q = qmax
        while q > 0 and any(count_trees(g, i, q, tree_limit) > tree_limit for i in range(system.n)):
            q -= 1
        systems.append((system, q))
    attempts = 0
    while len(systems) < cases + len(extra_systems):
        attempts += 1
        if attempts > 50 * cases:
            break
        sr = semirings[rng.randrange(len(semirings))]
        system = random_system(rng, sr, rng.randint(1, 4), rng.randint(1, 3), rng.randint(1, 3))
        g = grammar_from_system(system)
        if any(count_trees(g, i, qmax, tree_limit) > tree_limit for i in range(system.n)):
            skipped += 1
            continue
        systems.append((system, qmax))
    for system, q in systems:
        g = grammar_from_system(system)
        budget.charge(1 + sum(count_trees(g, i, q, tree_limit) for i in range(system.n)))
        checked += 1
        if _trees_mismatch(system, q, tree_limit) is not None:
            failures.append((system, q))
    report_failures = []
    if failures:
        # minimal counterexample: smallest system after greedy shrinking
        smallest = []
        for system, q in failures:
            small = _shrink(system, lambda s, q=q: _trees_mismatch(s, q, tree_limit) is not None)
            smallest.append((sum(len(p) for p in small.polys), small.n, q, small))
        smallest.sort(key=lambda t: t[:3])
        size, _, q, small = smallest[0]
        qi = _trees_mismatch(small, q, tree_limit)
        g = grammar_from_system(small)
        report_failures.append({
            "system": _system_json(small),
            "q": qi[0],
            "atom": qi[1],
            "engine": small.semiring.to_json(iterate(small, qi[0])[qi[1]]),
            "trees": small.semiring.to_json(eval_via_trees_upto(g, qi[1], qi[0], tree_limit)[qi[0]]),
        })
        report_failures.extend({"system_size": sum(len(p) for p in s.polys), "q": q} for s, q in failures[1:])
    return _result(checked, report_failures, {"qmax": qmax, "resampled": skipped})


def check_collapse(g: Grammar, t: ParseTree, c: int) -> list[str]:
    """All violated collapse/augment invariants for one tree (empty = ok)."""
    problems = []
    target = tree_parikh(g, t)
    nts = nonterminals_of(t)
    cur = t
    wedges = []
    while cur.depth > c:
        pair = find_good_pair(cur, c)
        if pair is None:
            problems.append(f"no good pair at depth {cur.depth}")
            return problems
        cur, w = remove_wedge(cur, pair)
        wedges.append(w)
        if nonterminals_of(cur) != nts:
            problems.append("nonterminal set changed")
        if w.depth > c:
            problems.append(f"wedge depth {w.depth} > c")
        if not is_valid_tree(g, w.tree, allow_hole=True):
            problems.append("wedge is not a valid fragment")
    core = cur
    if core.depth > c:
        problems.append("core deeper than c")
    if not is_valid_tree(g, core):
        problems.append("core is not a valid tree")
    total = tree_parikh(g, core)
    for w in wedges:
        total = vadd(total, tree_parikh(g, w.tree))
    if total != target:
        problems.append("Parikh additivity fails")
    if (len(wedges) + 1) * c < t.depth:
        problems.append(f"eta+1 = {len(wedges) + 1} < depth/c = {t.depth}/{c}")
    if rebuild(core, wedges) != t:
        problems.append("rebuild does not restore the tree")
    # augmenting at the first occurrence instead of the anchor: same Parikh image
    loose = core
    for w in reversed(wedges):
        loose = augment(loose, None, w)
    if tree_parikh(g, loose) != target or not is_valid_tree(g, loose):
        problems.append("augment at first occurrence changes the Parikh image")
    if loose.depth > (len(wedges) + 1) * c:
        problems.append("augmented depth exceeds (k+1)c")
    return problems


def wedge_suite(rng: random.Random, budget: Budget, *, cases: int = 500, max_depth: int = 40) -> dict:
    failures = []
    for _ in range(cases):
        n = rng.randint(1, 3)
        g = random_grammar(rng, n, rng.randint(1, 3))
        start = rng.randrange(n)
        t = random_tree(rng, g, start, rng.randint(1, max_depth))
        budget.charge(t.size)
        c = c_bound(g.n)
        problems = check_collapse(g, t, c)
        if problems:
            failures.append({"grammar": g.to_text(), "depth": t.depth, "problems": problems})
    failures.sort(key=lambda f: f["depth"])
    return _result(cases, failures)


def check_semilinear(g: Grammar, start: int, *, max_len: int = 6, coeff_sum: int = 3,
                     budget: Budget | None = None, build_budget: int = 200_000) -> list[str]:
    """Both inclusions between the built semilinear set and the language's
    Parikh image (words up to ``max_len``; span points with coefficient sum
    up to ``coeff_sum``), plus the structural invariants."""
    problems = []
    c = c_bound(g.n)
    lam = max(g.max_rhs, 1)
    ms = build_semilinear(g, start, c, build_budget)
    if budget is not None:
        budget.charge(len(ms.linear_sets) + 1)
    points = []
    for ls in ms.linear_sets:
        if any(not any(v) for v in ls.basis):
            problems.append("zero basis vector")
        for v in (ls.offset, *ls.basis):
            if sum(v) > lam ** c:
                problems.append(f"vector {v} has 1-norm above lambda^c = {lam ** c}")
        if ls.offset_witness is not None:
            if ls.offset_witness.depth > c or tree_parikh(g, ls.offset_witness) != ls.offset:
                problems.append("bad offset witness")
        for v, w in zip(ls.basis, ls.basis_witnesses):
            if w.depth > c or tree_parikh(g, w.tree) != v or not is_valid_tree(g, w.tree, allow_hole=True):
                problems.append("bad basis witness")
        for ks in itertools.product(range(coeff_sum + 1), repeat=len(ls.basis)):
            if sum(ks) <= coeff_sum:
                points.append(ls.point(ks))
    words = parikh_language(g, start, max_len, budget)
    for v in sorted(words):
        if v not in ms:
            problems.append(f"language vector {v} not in the semilinear set")
    if points:
        bigger = parikh_language(g, start, max(sum(p) for p in points), budget)
        for v in sorted(set(points)):
            if v not in bigger:
                problems.append(f"span point {v} is not the Parikh image of a word")
    return problems


def semilinear_suite(rng: random.Random, budget: Budget, *, cases: int = 40) -> dict:
    failures = []
    for _ in range(cases):
        n = rng.randint(1, 2)
        g = random_grammar(rng, n, rng.randint(1, 2), max_rhs=2, recursive=2)
        start = rng.randrange(n)
        problems = check_semilinear(g, start, budget=budget, build_budget=max(budget.remaining, 1))
        if problems:
            failures.append({"grammar": g.to_text(), "start": g.nonterminals[start], "problems": problems[:5]})
    return _result(cases, failures)


def measured_stability(sr: Semiring, cap: int = 64) -> int | None:
    """Largest stability index over a finite carrier."""
    carrier = sr.carrier()
    if carrier is None:
        raise ValueError(f"{sr.selector} has no finite carrier")
    worst = 0
    for el in carrier:
        idx = stability_index(el, cap)
        if idx is None:
            return None
        worst = max(worst, idx)
    return worst


def random_linear_set(rng: random.Random, sigma: int, max_basis: int = 3, max_entry: int = 2) -> LinearSet:
    def vec(nonzero: bool) -> tuple[int, ...]:
        while True:
            v = tuple(rng.randint(0, max_entry) for _ in range(sigma))
            if any(v) or not nonzero:
                return v

    return LinearSet(vec(False), tuple(vec(True) for _ in range(rng.randint(1, max_basis))))


def absorption_suite(rng: random.Random, budget: Budget, *, cases: int = 100, samples: int = 5) -> dict:
    failures = []
    for _ in range(cases):
        sr = BoundedNatural(rng.randint(1, 4))
        p = measured_stability(sr)
        sigma = rng.randint(1, 3)
        ls = random_linear_set(rng, sigma)
        terminals = [sr.element(rng.randint(1, sr.bound)) for _ in range(sigma)]
        for _ in range(samples):
            budget.charge((p + 1) ** len(ls.basis))
            rep = [rng.randint(0, p + 3) for _ in ls.basis]
            j = rng.randrange(len(rep))
            rep[j] = max(rep[j], p + 1 + rng.randint(0, 2))
            if not absorption_check(ls, p, sr, rep, terminals, budget=max(budget.remaining, 1)):
                failures.append({
                    "semiring": sr.selector,
                    "p": p,
                    "offset": list(ls.offset),
                    "basis": [list(v) for v in ls.basis],
                    "terminals": [sr.to_json(t) for t in terminals],
                    "rep": rep,
                })
    return _result(cases * samples, failures)


def run_suites(
    seed: int = 0,
    budget: int = 10_000_000,
    *,
    suites: tuple[str, ...] = SUITES,
    fault: bool = False,
    extra_systems: tuple[GroundedSystem, ...] = (),
    sizes: dict[str, int] | None = None,
) -> dict:
    """Run the selected suites; each gets its own budget and RNG stream."""
    sizes = sizes or {}
    runners = {
        "trees": lambda rng, b: trees_suite(rng, b, cases=sizes.get("trees", 200), fault=fault,
                                        extra_systems=extra_systems),
        "wedge": lambda rng, b: wedge_suite(rng, b, cases=sizes.get("wedge", 500)),
        "semilinear": lambda rng, b: semilinear_suite(rng, b, cases=sizes.get("semilinear", 40)),
        "absorption": lambda rng, b: absorption_suite(rng, b, cases=sizes.get("absorption", 100)),
    }
    report: dict = {"seed": seed, "budget": budget, "fault_injected": fault, "suites": {}}
    for name in SUITES:
        if name not in suites:
            continue
        rng = random.Random(f"{seed}:{name}")
        try:
            report["suites"][name] = runners[name](rng, Budget(budget))
        except BudgetExceeded as exc:
            report["suites"][name] = {"status": "budget-exceeded", "detail": str(exc)}
    report["ok"] = all(s["status"] == "pass" for s in report["suites"].values())
    return report
