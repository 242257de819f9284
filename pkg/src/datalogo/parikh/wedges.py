"""Wedge calculus on parse trees: good pairs, wedge removal/augmentation and
collapsing a deep tree to a shallow core.

A wedge is the part of the subtree at an ancestor ``A'`` that is not below a
same-labelled descendant ``A''``; the position of ``A''`` becomes a
:class:`~datalogo.parikh.grammar.Hole`.  A pair is *good* when its ancestor
subtree has depth <= c and removing the wedge keeps the tree's set of
nonterminals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import Hole, Node, ParseTree, Path, get_node, iter_nodes, nonterminals_of, replace_node


class InvalidPair(ValueError):
    pass


class NonterminalAbsent(ValueError):
    pass


@dataclass(frozen=True)
class Wedge:
    """``tree`` has exactly one :class:`Hole` at ``hole_path``, labelled like
    the root.  ``anchor`` records where the wedge was cut out, if known."""

    tree: ParseTree
    hole_path: Path
    anchor: Path | None = None

    @property
    def label(self) -> int:
        return self.tree.label

    @property
    def depth(self) -> int:
        return self.tree.depth


def _check_pair(t: ParseTree, anc: Path, desc: Path) -> None:
    if len(desc) <= len(anc) or desc[: len(anc)] != anc:
        raise InvalidPair(f"{desc} is not a proper descendant of {anc}")
    try:
        a, d = get_node(t, anc), get_node(t, desc)
    except (IndexError, AttributeError):
        raise InvalidPair("path does not address a node") from None
    if not isinstance(a, ParseTree) or not isinstance(d, ParseTree):
        raise InvalidPair("pair must address parse-tree nodes")
    if a.label != d.label:
        raise InvalidPair(f"labels differ: {a.label} vs {d.label}")


def remove_wedge(t: ParseTree, pair: tuple[Path, Path]) -> tuple[ParseTree, Wedge]:
    """Hoist the subtree at the descendant into the ancestor's place.

    Returns the smaller tree and the excised wedge; re-augmenting the wedge
    at ``pair[0]`` restores ``t``.  The nonterminal set is kept whenever the
    pair is good.
    """
    anc, desc = pair
    _check_pair(t, anc, desc)
    top = get_node(t, anc)
    low = get_node(t, desc)
    rel = desc[len(anc):]
    wedge_tree = replace_node(top, rel, Hole(low.label))
    return replace_node(t, anc, low), Wedge(wedge_tree, rel, anc)


def augment(t: ParseTree, path: Path | None, w: Wedge) -> ParseTree:
    """Insert ``w`` at the node ``path`` (which must carry the wedge's label),
    hanging the old subtree into the hole.  ``path=None`` picks the first
    occurrence of the label in preorder."""
    if path is None:
        for p, node in iter_nodes(t):
            if isinstance(node, ParseTree) and node.label == w.label:
                path = p
                break
        else:
            raise NonterminalAbsent(f"nonterminal {w.label} does not occur in the tree")
    try:
        node = get_node(t, path)
    except (IndexError, AttributeError):
        raise NonterminalAbsent(f"no node at {path}") from None
    if not isinstance(node, ParseTree) or node.label != w.label:
        raise NonterminalAbsent(f"node at {path} is not labelled {w.label}")
    return replace_node(t, path, replace_node(w.tree, w.hole_path, node))


def is_good_pair(t: ParseTree, pair: tuple[Path, Path], c: int) -> bool:
    anc, desc = pair
    try:
        _check_pair(t, anc, desc)
    except InvalidPair:
        return False
    if get_node(t, anc).depth > c:
        return False
    smaller, _ = remove_wedge(t, pair)
    return nonterminals_of(smaller) == nonterminals_of(t)


def _deepest_path(t: ParseTree, removed: set[Path]) -> list[Path] | None:
    """Root-to-bottom path following the leftmost deepest branch of ``t``
    with the subtrees at ``removed`` cut off (``None`` if the root is cut)."""
    if () in removed:
        return None
    heights: dict[Path, int] = {}

    # post-order heights in the pruned tree
    order = list(iter_nodes(t))
    for p, node in reversed(order):
        if not isinstance(node, ParseTree) or p in removed or any(p[:k] in removed for k in range(len(p))):
            continue
        hs = [heights[p + (i,)] for i, ch in enumerate(node.children)
              if isinstance(ch, ParseTree) and p + (i,) in heights]
        heights[p] = 1 + max(hs, default=0)
    path: list[Path] = [()]
    cur: Path = ()
    while True:
        node = get_node(t, cur)
        best, best_h = None, 0
        for i, ch in enumerate(node.children):
            cp = cur + (i,)
            if cp in heights and heights[cp] > best_h:
                best, best_h = cp, heights[cp]
        if best is None:
            return path
        cur = best
        path.append(cur)


def _first_repeat(t: ParseTree, spine: list[Path]) -> tuple[Path, Path] | None:
    seen: dict[int, Path] = {}
    for p in reversed(spine):
        label = get_node(t, p).label
        if label in seen:
            return p, seen[label]
        seen[label] = p
    return None


def find_good_pair(t: ParseTree, c: int) -> tuple[Path, Path] | None:
    """A good (ancestor, descendant) pair, or ``None`` if there is none.

    Candidates come from walking up from the deepest (leftmost) leaf to the
    first repeated nonterminal; when that pair would delete a nonterminal,
    its ancestor subtree is cut off and the walk is repeated on what is left.
    Every candidate is checked against the definition; if the walk runs out,
    all pairs are scanned, shallowest ancestor first.
    """
    removed: set[Path] = set()
    while True:
        spine = _deepest_path(t, removed)
        if spine is None:
            break
        pair = _first_repeat(t, spine)
        if pair is None:
            break
        if is_good_pair(t, pair, c):
            return pair
        removed.add(pair[0])
    return _scan_good_pair(t, c)


def _scan_good_pair(t: ParseTree, c: int) -> tuple[Path, Path] | None:
    nodes = [(p, n) for p, n in iter_nodes(t) if isinstance(n, ParseTree)]
    candidates = []
    for p, node in nodes:
        if node.depth > c:
            continue
        for q, sub in iter_nodes(node, p):
            if q != p and isinstance(sub, ParseTree) and sub.label == node.label:
                candidates.append((node.depth, p, q))
    for _, p, q in sorted(candidates):
        if is_good_pair(t, (p, q), c):
            return p, q
    return None


def collapse_to_core(t: ParseTree, c: int) -> tuple[ParseTree, list[Wedge]]:
    """Remove good wedges until the tree has depth <= c.

    Every intermediate tree has the same nonterminal set as ``t``; the
    wedges are returned in removal order, each with its ``anchor`` so that
    augmenting them back in reverse order rebuilds ``t`` exactly.
    """
    wedges: list[Wedge] = []
    while t.depth > c:
        pair = find_good_pair(t, c)
        if pair is None:
            raise RuntimeError(f"no good pair in a tree of depth {t.depth} > c = {c}")
        t, w = remove_wedge(t, pair)
        wedges.append(w)
    return t, wedges


def rebuild(core: ParseTree, wedges: list[Wedge]) -> ParseTree:
    """Undo :func:`collapse_to_core` using the recorded anchors."""
    t = core
    for w in reversed(wedges):
        t = augment(t, w.anchor, w)
    return t
