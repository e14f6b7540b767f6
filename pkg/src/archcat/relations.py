"""Finite relations between the elements of two views.

A declared morphism is carried by an :class:`ElementRelation`; composition,
inversion and equality of these relations are what make the category laws
on one level of abstraction decidable.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from archcat.model import Morphism, View


class ContractViolation(ValueError):
    """Raised when two relations do not have the endpoints an operation needs."""


@dataclass(frozen=True)
class ElementRelation:
    source_view: str
    target_view: str
    pairs: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))

    @classmethod
    def of(cls, morphism: Morphism) -> ElementRelation:
        return cls(morphism.source, morphism.target, morphism.pairs)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(a for a, _ in self.pairs)

    @property
    def image(self) -> frozenset[str]:
        return frozenset(b for _, b in self.pairs)

    def __len__(self):
        return len(self.pairs)


def identity(view: View | str, elements: Iterable[str] = ()) -> ElementRelation:
    """Identity relation on a view (or on ``elements`` of a view given by id)."""
    if isinstance(view, View):
        return ElementRelation(view.id, view.id, frozenset((e, e) for e in view.element_ids))
    return ElementRelation(view, view, frozenset((e, e) for e in elements))


def compose(f: ElementRelation, h: ElementRelation) -> ElementRelation:
    """``f`` then ``h``: pairs (a, c) with some b such that (a, b) in f and (b, c) in h."""
    if f.target_view != h.source_view:
        raise ContractViolation(
            f"cannot compose {f.source_view}->{f.target_view} with {h.source_view}->{h.target_view}"
        )
    forward = defaultdict(set)
    for b, c in h.pairs:
        forward[b].add(c)
    pairs = frozenset((a, c) for a, b in f.pairs for c in forward.get(b, ()))
    return ElementRelation(f.source_view, h.target_view, pairs)


def equal(f: ElementRelation, g: ElementRelation) -> bool:
    if (f.source_view, f.target_view) != (g.source_view, g.target_view):
        raise ContractViolation(
            f"cannot compare {f.source_view}->{f.target_view} with {g.source_view}->{g.target_view}"
        )
    return f.pairs == g.pairs


def is_bijection(f: ElementRelation) -> bool:
    """True iff every source and every target element occurs in at most one pair."""
    return len(f.domain) == len(f.pairs) == len(f.image)


def inverse(f: ElementRelation) -> ElementRelation:
    return ElementRelation(f.target_view, f.source_view, frozenset((b, a) for a, b in f.pairs))


def reachable_composites(morphisms: Iterable[Morphism]) -> dict[tuple[str, str], ElementRelation]:
    """Union of the composed relations along every path of two or more morphisms.

    Keys are ``(source view, target view)`` for every pair of views joined by
    such a path, even when the composite relation is empty.  Paths through
    cycles are covered: the search runs on (view, element) nodes, which are
    finite, so it stops once no new node is reached.
    """
    morphisms = list(morphisms)
    out_views = defaultdict(set)
    out_elems = defaultdict(set)  # (view, element) -> {(view, element)}
    for m in morphisms:
        out_views[m.source].add(m.target)
        for a, b in m.pairs:
            out_elems[(m.source, a)].add((m.target, b))

    result = {}
    for start in sorted(out_views):
        # view pairs linked by a path of length >= 2
        frontier = set(out_views[start])
        reach = set()
        while frontier:
            nxt = set()
            for v in frontier:
                for w in out_views[v]:
                    if w not in reach:
                        reach.add(w)
                        nxt.add(w)
            frontier = nxt
        for target in reach:
            result[(start, target)] = set()

    # element walks of length >= 2
    for node in sorted(out_elems):
        first = out_elems[node]
        frontier = set()
        for mid in first:
            frontier |= out_elems.get(mid, set())
        seen = set(frontier)
        while frontier:
            nxt = set()
            for n in frontier:
                for m in out_elems.get(n, ()):
                    if m not in seen:
                        seen.add(m)
                        nxt.add(m)
            frontier = nxt
        for view, elem in seen:
            result[(node[0], view)].add((node[1], elem))

    return {
        key: ElementRelation(key[0], key[1], frozenset(pairs))
        for key, pairs in sorted(result.items())
    }
