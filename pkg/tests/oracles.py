"""Independent reference implementations used by the tests.

None of these import the engine, grounding or parikh modules.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction


def floyd_warshall(vertices, edges: dict[tuple[str, str], int]) -> dict[tuple[str, str], float]:
    """Shortest path of length >= 1 edge between every ordered pair."""
    vs = sorted(vertices)
    d = {(u, v): math.inf for u in vs for v in vs}
    for (u, v), w in edges.items():
        d[(u, v)] = min(d[(u, v)], w)
    for k in vs:
        for i in vs:
            for j in vs:
                if d[(i, k)] + d[(k, j)] < d[(i, j)]:
                    d[(i, j)] = d[(i, k)] + d[(k, j)]
    return d


def reachable_pairs(edges) -> set[tuple[str, str]]:
    """(u, v) with a nonempty directed path u -> v, by BFS from every vertex."""
    succ: dict[str, list[str]] = {}
    for u, v in edges:
        succ.setdefault(u, []).append(v)
    out = set()
    for s in succ:
        seen = set()
        queue = deque(succ[s])
        while queue:
            v = queue.popleft()
            if v in seen:
                continue
            seen.add(v)
            queue.extend(succ.get(v, ()))
        out |= {(s, v) for v in seen}
    return out


def bounded_nat_tables(bound: int):
    """Addition and multiplication tables of {0..B} with capping."""
    add = {(a, b): min(bound, a + b) for a in range(bound + 1) for b in range(bound + 1)}
    mul = {(a, b): min(bound, a * b) for a in range(bound + 1) for b in range(bound + 1)}
    return add, mul


def bounded_nat_stability(u: int, bound: int) -> int:
    """Least p with 1+u+...+u^p == 1+u+...+u^(p+1), computed on plain ints."""
    p = 0
    while True:
        s_p = min(bound, sum(min(bound, u**i) for i in range(p + 1)))
        s_q = min(bound, sum(min(bound, u**i) for i in range(p + 2)))
        if s_p == s_q:
            return p
        p += 1


def bound_by_decimal(p, n, sigma, lam) -> int:
    """The bound formula with 80-digit decimal logarithms.

    When lam+1 and sigma are powers of two the value is rational and is
    computed exactly with Fractions instead.
    """
    k = p * n * (n + 3)
    if k == 0:
        return 0
    c = Fraction(n * (n + 3), 2)

    def pow2_log(x: int):
        return Fraction(x.bit_length() - 1) if x & (x - 1) == 0 else None

    l_exact = pow2_log(lam + 1)
    s_exact = pow2_log(sigma) if sigma >= 2 else Fraction(0)
    if l_exact is not None and s_exact is not None:
        return math.ceil(k * (sigma * c * l_exact + 4 * sigma * s_exact + 1))
    with localcontext() as ctx:
        ctx.prec = 80
        ln2 = Decimal(2).ln()
        lg_l = Decimal(lam + 1).ln() / ln2
        lg_s = Decimal(sigma).ln() / ln2 if sigma >= 2 else Decimal(0)
        val = k * (sigma * Decimal(c.numerator) / c.denominator * lg_l + 4 * sigma * lg_s + 1)
        return int(val.to_integral_value(rounding=ROUND_CEILING))


def subset_sums(vs):
    """All (index set, vector sum) pairs, brute force."""
    out = []
    dim = len(vs[0]) if vs else 0
    for r in range(len(vs) + 1):
        for idx in itertools.combinations(range(len(vs)), r):
            out.append((set(idx), tuple(sum(vs[i][d] for i in idx) for d in range(dim))))
    return out
