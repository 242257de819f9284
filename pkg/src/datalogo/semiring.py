"""Commutative semirings with exact, canonical carrier values.

Every value is wrapped in an :class:`Element` that remembers the instance it
belongs to, so mixing values from two instances is an error instead of a
silent coercion.  Concrete instances:

- :class:`Boolean`         ({false, true}, or, and)
- :class:`Tropical`        (naturals/rationals + inf, min, +)
- :class:`BoundedNatural`  ({0..B}, capped +, capped *)
- :class:`TropK`           (k smallest path costs, merge-keep-k, sum-keep-k)
- :class:`MaxPlus`         (integers + -inf, max, +); *not* stable, kept for
  negative tests of convergence and absorption.
"""

from __future__ import annotations

import heapq
import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, ClassVar, Iterable, Sequence

INF = math.inf


class InstanceMismatch(ValueError):
    """Raised when elements of two different semiring instances are combined."""


@dataclass(frozen=True, slots=True)
class Element:
    semiring: Semiring
    value: Any

    def __repr__(self) -> str:
        return f"{self.semiring.selector}:{self.semiring.format_value(self)}"

    @property
    def is_zero(self) -> bool:
        return self.value == self.semiring.zero().value


class Semiring:
    """Base class for a commutative semiring instance.

    Subclasses implement ``_add``/``_mul`` on raw canonical values and
    ``_canon`` to validate/normalize user input.  ``claimed_stability`` is
    the stability index the instance is believed to have (``None`` when it is
    not stable); the engine treats it as advisory.
    """

    name: ClassVar[str] = "semiring"

    # -- raw-value hooks ---------------------------------------------------
    def _zero(self) -> Any:
        raise NotImplementedError

    def _one(self) -> Any:
        raise NotImplementedError

    def _add(self, x: Any, y: Any) -> Any:
        raise NotImplementedError

    def _mul(self, x: Any, y: Any) -> Any:
        raise NotImplementedError

    def _canon(self, raw: Any) -> Any:
        return raw

    def _parse(self, text: str) -> Any:
        raise NotImplementedError

    def _format(self, raw: Any) -> str:
        return str(raw)

    def _to_json(self, raw: Any) -> Any:
        return raw

    # -- public surface ----------------------------------------------------
    @property
    def parameters(self) -> dict[str, int]:
        return {}

    @property
    def selector(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.name}:{params}" if params else self.name

    @property
    def claimed_stability(self) -> int | None:
        return None

    def element(self, raw: Any) -> Element:
        return Element(self, self._canon(raw))

    def zero(self) -> Element:
        return Element(self, self._zero())

    def one(self) -> Element:
        return Element(self, self._one())

    def carrier(self) -> list[Element] | None:
        """All elements for finite instances, ``None`` otherwise."""
        return None

    def add(self, a: Element, b: Element) -> Element:
        self._check(a)
        self._check(b)
        return Element(self, self._add(a.value, b.value))

    def mul(self, a: Element, b: Element) -> Element:
        self._check(a)
        self._check(b)
        return Element(self, self._mul(a.value, b.value))

    def sum(self, items: Iterable[Element]) -> Element:
        acc = self._zero()
        for it in items:
            self._check(it)
            acc = self._add(acc, it.value)
        return Element(self, acc)

    def prod(self, items: Iterable[Element]) -> Element:
        acc = self._one()
        for it in items:
            self._check(it)
            acc = self._mul(acc, it.value)
        return Element(self, acc)

    def parse_value(self, text: str) -> Element:
        return Element(self, self._canon(self._parse(text.strip())))

    def format_value(self, el: Element) -> str:
        return self._format(el.value)

    def to_json(self, el: Element) -> Any:
        return self._to_json(el.value)

    def _check(self, el: Element) -> None:
        if not isinstance(el, Element):
            raise TypeError(f"expected Element, got {type(el).__name__}")
        if el.semiring is not self and el.semiring != self:
            raise InstanceMismatch(f"{el!r} does not belong to {self.selector}")


@dataclass(frozen=True)
class Boolean(Semiring):
    name: ClassVar[str] = "boolean"

    @property
    def claimed_stability(self) -> int:
        return 0

    def _zero(self) -> bool:
        return False

    def _one(self) -> bool:
        return True

    def _add(self, x: bool, y: bool) -> bool:
        return x or y

    def _mul(self, x: bool, y: bool) -> bool:
        return x and y

    def _canon(self, raw: Any) -> bool:
        if raw not in (True, False, 0, 1):
            raise ValueError(f"not a boolean value: {raw!r}")
        return bool(raw)

    def _parse(self, text: str) -> bool:
        low = text.lower()
        if low in ("true", "1"):
            return True
        if low in ("false", "0"):
            return False
        raise ValueError(f"bad boolean literal {text!r}")

    def _format(self, raw: bool) -> str:
        return "true" if raw else "false"

    def carrier(self) -> list[Element]:
        return [self.zero(), self.one()]


def _canon_number(raw: Any, *, allow_fraction: bool = True) -> int | Fraction | float:
    if raw == INF:
        return INF
    if isinstance(raw, bool):
        raise ValueError("booleans are not weights")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, Fraction) and allow_fraction:
        return raw.numerator if raw.denominator == 1 else raw
    raise ValueError(f"not an exact weight: {raw!r}")


def _parse_number(text: str) -> int | Fraction | float:
    if text.lower() in ("inf", "+inf", "infinity", "∞"):
        return INF
    if "/" in text:
        return Fraction(text)
    return int(text)


def _format_number(raw: Any) -> str:
    if raw == INF:
        return "inf"
    if raw == -INF:
        return "-inf"
    return str(raw)


def _json_number(raw: Any) -> Any:
    if raw in (INF, -INF) or isinstance(raw, Fraction):
        return _format_number(raw)
    return raw


@dataclass(frozen=True)
class Tropical(Semiring):
    """min-plus over nonnegative exact weights and ``inf`` (the zero)."""

    name: ClassVar[str] = "tropical"

    @property
    def claimed_stability(self) -> int:
        return 0

    def _zero(self) -> float:
        return INF

    def _one(self) -> int:
        return 0

    def _add(self, x, y):
        return x if x <= y else y

    def _mul(self, x, y):
        if x == INF or y == INF:
            return INF
        return x + y

    def _canon(self, raw):
        val = _canon_number(raw)
        if val < 0:
            raise ValueError(f"tropical weights must be nonnegative, got {raw!r}")
        return val

    def _parse(self, text):
        return _parse_number(text)

    def _format(self, raw):
        return _format_number(raw)

    def _to_json(self, raw):
        return _json_number(raw)


@dataclass(frozen=True)
class BoundedNatural(Semiring):
    """Naturals ``0..bound`` with saturating addition and multiplication."""

    bound: int
    name: ClassVar[str] = "bounded-nat"

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise ValueError("bounded-nat needs B >= 1")

    @property
    def parameters(self) -> dict[str, int]:
        return {"B": self.bound}

    @property
    def claimed_stability(self) -> int:
        # 1^(p) = min(B, p+1) first repeats at p = B-1; every other element
        # saturates no later (checked exhaustively in the test-suite).
        return self.bound - 1

    def _zero(self) -> int:
        return 0

    def _one(self) -> int:
        return 1

    def _add(self, x: int, y: int) -> int:
        return min(self.bound, x + y)

    def _mul(self, x: int, y: int) -> int:
        return min(self.bound, x * y)

    def _canon(self, raw: Any) -> int:
        if isinstance(raw, bool) or not isinstance(raw, int) or not 0 <= raw <= self.bound:
            raise ValueError(f"{raw!r} is outside 0..{self.bound}")
        return raw

    def _parse(self, text: str) -> int:
        return int(text)

    def carrier(self) -> list[Element]:
        return [Element(self, v) for v in range(self.bound + 1)]


@dataclass(frozen=True)
class TropK(Semiring):
    """Multisets of the ``k`` smallest path costs (sorted tuples).

    ``()`` is the zero (no path), ``(0,)`` the one (the empty path).
    """

    k: int
    name: ClassVar[str] = "tropk"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("tropk needs k >= 1")

    @property
    def parameters(self) -> dict[str, int]:
        return {"k": self.k}

    @property
    def claimed_stability(self) -> int:
        return self.k - 1

    def _zero(self) -> tuple:
        return ()

    def _one(self) -> tuple:
        return (0,)

    def _add(self, x: tuple, y: tuple) -> tuple:
        return tuple(itertools.islice(heapq.merge(x, y), self.k))

    def _mul(self, x: tuple, y: tuple) -> tuple:
        return tuple(heapq.nsmallest(self.k, (a + b for a in x for b in y)))

    def _canon(self, raw: Any) -> tuple:
        vals = [_canon_number(v) for v in raw]
        if any(v < 0 or v == INF for v in vals):
            raise ValueError(f"tropk costs must be finite and nonnegative: {raw!r}")
        return tuple(sorted(vals)[: self.k])

    def _parse(self, text: str) -> tuple:
        body = text.strip().strip("[](){}")
        if not body.strip():
            return ()
        return tuple(_parse_number(tok.strip()) for tok in body.split(","))

    def _format(self, raw: tuple) -> str:
        return "[" + ",".join(_format_number(v) for v in raw) + "]"

    def _to_json(self, raw: tuple) -> list:
        return [_json_number(v) for v in raw]


@dataclass(frozen=True)
class MaxPlus(Semiring):
    """(Z + {-inf}, max, +).  Not stable: 1^(p) = p grows forever."""

    name: ClassVar[str] = "maxplus"

    def _zero(self) -> float:
        return -INF

    def _one(self) -> int:
        return 0

    def _add(self, x, y):
        return x if x >= y else y

    def _mul(self, x, y):
        if x == -INF or y == -INF:
            return -INF
        return x + y

    def _canon(self, raw):
        if raw == -INF:
            return -INF
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ValueError(f"maxplus weights are integers or -inf: {raw!r}")
        return raw

    def _parse(self, text):
        if text.lower() in ("-inf", "-infinity"):
            return -INF
        return int(text)

    def _format(self, raw):
        return _format_number(raw)

    def _to_json(self, raw):
        return _json_number(raw)


def sort_key(el: Element):
    """Total order on the values of one instance (numeric, then tuples)."""
    v = el.value
    return (1, v) if isinstance(v, tuple) else (0, v)


# -- generic operations -----------------------------------------------------

def _owner(a: Element, b: Element) -> Semiring:
    if a.semiring != b.semiring:
        raise InstanceMismatch(f"{a!r} and {b!r} come from different instances")
    return a.semiring


def oplus(a: Element, b: Element) -> Element:
    return _owner(a, b).add(a, b)


def otimes(a: Element, b: Element) -> Element:
    return _owner(a, b).mul(a, b)


def power(u: Element, i: int) -> Element:
    """``u`` multiplied by itself ``i`` times; ``u**0`` is one."""
    if i < 0:
        raise ValueError("exponent must be >= 0")
    sr = u.semiring
    acc = sr.one()
    base = u
    # square-and-multiply; valid because otimes is associative
    while i:
        if i & 1:
            acc = sr.mul(acc, base)
        base = sr.mul(base, base)
        i >>= 1
    return acc


def star_truncated(u: Element, p: int) -> Element:
    """``1 + u + u^2 + ... + u^p``."""
    if p < 0:
        raise ValueError("p must be >= 0")
    sr = u.semiring
    acc = sr.one()
    term = sr.one()
    for _ in range(p):
        term = sr.mul(term, u)
        acc = sr.add(acc, term)
    return acc


def stability_index(u: Element, cap: int) -> int | None:
    """Least ``p <= cap`` with ``u^(p) == u^(p+1)``, or ``None`` if none exists."""
    sr = u.semiring
    prev = sr.one()
    term = sr.one()
    for p in range(cap + 1):
        term = sr.mul(term, u)
        nxt = sr.add(prev, term)
        if nxt == prev:
            return p
        prev = nxt
    return None


# -- axiom checking ---------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    axiom: str
    operands: tuple[Element, ...]


@dataclass
class AxiomReport:
    semiring: str
    checked_triples: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed_axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}


def check_axioms(sr: Semiring, sample: Sequence[Element], *, max_violations: int = 50) -> AxiomReport:
    """Check every semiring axiom on all triples drawn from ``sample``."""
    if not sample:
        raise ValueError("sample must be nonempty")
    report = AxiomReport(sr.selector)
    zero, one = sr.zero(), sr.one()

    def fail(axiom: str, *ops: Element) -> None:
        if len(report.violations) < max_violations:
            report.violations.append(Violation(axiom, ops))

    for a in sample:
        if sr.add(a, zero) != a:
            fail("additive-identity", a)
        if sr.mul(a, one) != a or sr.mul(one, a) != a:
            fail("multiplicative-identity", a)
        if sr.mul(a, zero) != zero or sr.mul(zero, a) != zero:
            fail("annihilation", a)
        for b in sample:
            if sr.add(a, b) != sr.add(b, a):
                fail("additive-commutativity", a, b)
            if sr.mul(a, b) != sr.mul(b, a):
                fail("multiplicative-commutativity", a, b)
            for c in sample:
                report.checked_triples += 1
                if sr.add(sr.add(a, b), c) != sr.add(a, sr.add(b, c)):
                    fail("additive-associativity", a, b, c)
                if sr.mul(sr.mul(a, b), c) != sr.mul(a, sr.mul(b, c)):
                    fail("multiplicative-associativity", a, b, c)
                if sr.mul(a, sr.add(b, c)) != sr.add(sr.mul(a, b), sr.mul(a, c)):
                    fail("distributivity", a, b, c)
    return report


# -- selection strings ------------------------------------------------------

_SELECTOR = re.compile(r"^\s*([a-z\-]+)\s*(?::\s*(.*))?$")


def parse_semiring(text: str) -> Semiring:
    """Parse ``boolean``, ``tropical``, ``bounded-nat:B=<n>``, ``tropk:k=<n>``
    (and ``maxplus``, the non-stable test instance)."""
    m = _SELECTOR.match(text)
    if not m:
        raise ValueError(f"bad semiring selection {text!r}")
    name, rest = m.group(1), m.group(2) or ""
    params: dict[str, int] = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"bad semiring parameter {part!r}")
        try:
            params[key.strip()] = int(val)
        except ValueError:
            raise ValueError(f"semiring parameter {key!r} must be an integer") from None

    def only(*allowed: str) -> None:
        extra = set(params) - set(allowed)
        missing = set(allowed) - set(params)
        if extra or missing:
            raise ValueError(f"{name} expects parameters {list(allowed)}, got {sorted(params)}")

    if name == "boolean":
        only()
        return Boolean()
    if name == "tropical":
        only()
        return Tropical()
    if name == "maxplus":
        only()
        return MaxPlus()
    if name == "bounded-nat":
        only("B")
        return BoundedNatural(params["B"])
    if name == "tropk":
        only("k")
        return TropK(params["k"])
    raise ValueError(f"unknown semiring {name!r}")
