"""Naive (synchronous) fixpoint iteration and the convergence bounds.

``evaluate_to_fixpoint`` starts from the all-zero state and applies the
grounded operator until two consecutive states are equal.  In ``auto`` mode
the iteration cap is derived from the polynomial convergence bound
``ceil(p n(n+3) (sigma c lg(lambda+1) + 4 sigma lg sigma + 1))`` with
``c = n(n+3)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .grounding import GroundedSystem, format_atom, system_stats
from .semiring import Element, stability_index

State = tuple[Element, ...]

# above this many bits the exact big-integer route gets slow; switch to mpmath
_EXACT_BITS_LIMIT = 1 << 20


def c_bound(n: int) -> int:
    return n * (n + 3) // 2


def _ceil_log2_product(factors: Sequence[tuple[int, int]]) -> int:
    """``ceil(lg(prod base**exp))`` for positive integer bases, exactly."""
    factors = [(b, e) for b, e in factors if e > 0 and b > 1]
    if not factors:
        return 0
    if all(b & (b - 1) == 0 for b, _ in factors):
        return sum(e * (b.bit_length() - 1) for b, e in factors)
    est_bits = sum(e * b.bit_length() for b, e in factors)
    if est_bits <= _EXACT_BITS_LIMIT:
        prod = 1
        for b, e in factors:
            prod *= b**e
        return (prod - 1).bit_length()
    # The product is not a power of two, so its lg is irrational and cannot
    # sit exactly on an integer; enough guard digits make the ceiling exact.
    digits = len(str(est_bits)) + 40
    with mpmath.workdps(digits):
        val = mpmath.fsum(e * mpmath.log(b, 2) for b, e in factors)
        return int(mpmath.ceil(val))


def _sigma_lg_sigma_factor(sigma: int, weight: int) -> tuple[int, int]:
    # sigma lg sigma is taken as 0 for sigma <= 1
    return (sigma, weight * sigma) if sigma >= 2 else (1, 0)


def theorem_bound(p: int, n: int, sigma: int, lam: int) -> int:
    """``ceil(p n(n+3) (sigma c lg(lam+1) + 4 sigma lg sigma + 1))``."""
    for name, v in (("p", p), ("n", n), ("sigma", sigma), ("lambda", lam)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0")
    k = p * n * (n + 3)
    if k == 0:
        return 0
    c = c_bound(n)
    # k*(sigma c lg(lam+1) + 4 sigma lg sigma) = lg((lam+1)^(k sigma c) * sigma^(4 k sigma))
    return k + _ceil_log2_product([(lam + 1, k * sigma * c), _sigma_lg_sigma_factor(sigma, 4 * k)])


def h_bound(sigma: int, n: int, lam: int) -> int:
    """``ceil(2 (sigma c lg(lam+1) + 4 sigma lg sigma))``, the support size."""
    c = c_bound(n)
    return _ceil_log2_product([(lam + 1, 2 * sigma * c), _sigma_lg_sigma_factor(sigma, 8)])


def iteration_guard(p: int, n: int, sigma: int, lam: int) -> int:
    """Cap on the fixpoint index used in ``auto`` mode.

    The literal bound is 0 whenever p = 0, which would forbid even the O(n)
    iterations a 0-stable (e.g. Boolean) program needs, hence ``max(p, 1)``
    and the ``n + 1`` floor.
    """
    return max(theorem_bound(max(p, 1), n, sigma, lam), n + 1)


def zero_state(system: GroundedSystem) -> State:
    z = system.semiring.zero()
    return (z,) * system.n


def step(system: GroundedSystem, s: Sequence[Element]) -> State:
    """One synchronous application: every ``f_i`` reads the previous state."""
    if len(s) != system.n:
        raise ValueError(f"state has {len(s)} entries, system has {system.n}")
    sr = system.semiring
    prev = tuple(x.value for x in s)
    add, mul = sr._add, sr._mul
    zero = sr._zero()
    out = []
    for poly in system.polys:
        acc = zero
        for m in poly:
            term = m.coefficient.value
            for v in m.vars:
                term = mul(term, prev[v])
            acc = add(acc, term)
        out.append(Element(sr, acc))
    return tuple(out)


def iterate(system: GroundedSystem, q: int) -> State:
    """``f^(q)(0)``."""
    s = zero_state(system)
    for _ in range(q):
        s = step(system, s)
    return s


def grammar_lambda(system: GroundedSystem) -> int:
    """Longest right-hand side of the grammar view: variables plus one
    terminal for every coefficient other than ``one``."""
    one = system.semiring.one()
    return max(
        (m.degree + (m.coefficient != one) for m in system.monomials()),
        default=0,
    )


def effective_stability(system: GroundedSystem, cap: int = 256, closure_depth: int | None = None) -> int | None:
    """Largest stability index over the coefficients (plus ``one``) and their
    products of up to ``closure_depth`` factors.

    Returns ``None`` if some element is not stable within ``cap``.  The
    default depth is the system's effective lambda; the closure stops early
    once no new element appears.
    """
    sr = system.semiring
    _, lam, _, _ = system_stats(system)
    depth = lam if closure_depth is None else closure_depth
    base = set(system.coefficients()) | {sr.one()}
    seen = set(base)
    frontier = set(base)
    for _ in range(max(depth - 1, 0)):
        new = {sr.mul(a, b) for a in frontier for b in base} - seen
        if not new:
            break
        seen |= new
        frontier = new
    worst = 0
    for el in sorted(seen, key=repr):
        idx = stability_index(el, cap)
        if idx is None:
            return None
        worst = max(worst, idx)
    return worst


@dataclass
class BoundInfo:
    p: int | None
    n: int
    sigma: int
    lam: int
    theorem_bound: int | None
    guard: int | None
    stability_reading: str
    exceeds_literal_bound: bool = False

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "sigma": self.sigma,
            "lambda": self.lam,
            "theorem_bound": self.theorem_bound,
            "guard": self.guard,
            "stability_reading": self.stability_reading,
            "exceeds_literal_bound": self.exceeds_literal_bound,
        }


@dataclass
class EvaluationReport:
    """Outcome of a naive evaluation run.

    ``fixpoint_index`` is the least q with f^(q)(0) = f^(q+1)(0);
    ``steps_executed`` counts operator applications, including the one that
    confirmed the fixpoint, and never exceeds ``max_iters``.
    """

    converged: bool
    fixpoint_index: int | None
    steps_executed: int
    final_state: State
    max_iters: int
    bound: BoundInfo
    deltas: list[int] = field(default_factory=list)
    atoms: tuple = ()

    def to_json(self) -> dict:
        sr = self.final_state[0].semiring if self.final_state else None
        return {
            "converged": self.converged,
            "fixpoint_index": self.fixpoint_index,
            "steps_executed": self.steps_executed,
            "max_iters": self.max_iters,
            "bound": self.bound.to_json(),
            "state": [
                {"atom": format_atom(a), "value": sr.to_json(v)}
                for a, v in zip(self.atoms, self.final_state)
            ],
            "deltas": list(self.deltas),
        }


def bound_info(system: GroundedSystem, p: int | None = None, *, stability_cap: int = 256) -> BoundInfo:
    """Collect (p, n, sigma, lambda) for ``system`` and evaluate the bound.

    Without an explicit ``p`` the element-wise reading is used: the largest
    stability index over the referenced elements and their products.
    """
    n, _, sigma, _ = system_stats(system)
    lam = system.program_lambda if system.program_lambda is not None else grammar_lambda(system)
    lam = max(lam, 1)
    reading = "explicit"
    if p is None:
        p = effective_stability(system, cap=stability_cap)
        reading = "element-wise"
    if p is None:
        return BoundInfo(None, n, sigma, lam, None, None, "not-stable-within-cap")
    return BoundInfo(p, n, sigma, lam, theorem_bound(p, n, sigma, lam), iteration_guard(p, n, sigma, lam), reading)


def evaluate_to_fixpoint(
    system: GroundedSystem,
    max_iters: int | str = "auto",
    *,
    p: int | None = None,
    stability_cap: int = 256,
) -> EvaluationReport:
    """Iterate from zero until the state repeats or ``max_iters`` applications.

    ``auto`` allows ``guard + 1`` applications so a fixpoint index equal to
    the guard can still be confirmed.  Non-convergence is reported through
    ``converged=False``, not raised.
    """
    info = bound_info(system, p, stability_cap=stability_cap)
    if max_iters == "auto":
        if info.guard is None:
            raise ValueError("cannot derive an iteration cap: no stability index within cap; pass max_iters")
        limit = info.guard + 1
    else:
        limit = int(max_iters)
        if limit < 0:
            raise ValueError("max_iters must be >= 0")
    s = zero_state(system)
    deltas: list[int] = []
    for q in range(limit):
        nxt = step(system, s)
        changed = sum(a != b for a, b in zip(s, nxt))
        deltas.append(changed)
        if changed == 0:
            if info.theorem_bound is not None and info.p is not None:
                info.exceeds_literal_bound = q > info.theorem_bound
            return EvaluationReport(True, q, q + 1, nxt, limit, info, deltas, system.atoms)
        s = nxt
    return EvaluationReport(False, None, limit, s, limit, info, deltas, system.atoms)
