"""Traceability queries: where a correspondence came from, and what a view affects."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from archcat.model import Framework, UnknownReference
from archcat.rules import refinement_map


class InheritanceCycle(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceChain:
    morphisms: tuple[str, ...]

    def __iter__(self):
        return iter(self.morphisms)

    def __len__(self):
        return len(self.morphisms)

    @property
    def root(self) -> str:
        return self.morphisms[-1]


@dataclass(frozen=True)
class ImpactSet:
    origin: str
    same_level: frozenset[str]
    downstream: frozenset[str]


def trace_morphism(framework: Framework, morphism_id: str) -> TraceChain:
    """Follow ``inherits`` links from ``morphism_id`` up to a morphism without a parent."""
    chain = [framework.morphism(morphism_id).id]
    seen = set(chain)
    current = framework.morphism_by_id[morphism_id]
    while current.inherits is not None:
        parent = framework.morphism(current.inherits)
        if parent.id in seen:
            raise InheritanceCycle(f"inheritance cycle through {parent.id}")
        chain.append(parent.id)
        seen.add(parent.id)
        current = parent
    return TraceChain(tuple(chain))


def descendants(framework: Framework, morphism_id: str) -> set[str]:
    framework.morphism(morphism_id)
    children = defaultdict(list)
    for m in framework.morphisms:
        if m.inherits is not None:
            children[m.inherits].append(m.id)
    found = set()
    todo = deque(children[morphism_id])
    while todo:
        m = todo.popleft()
        if m in found or m == morphism_id:
            continue
        found.add(m)
        todo.extend(children[m])
    return found


def impact(framework: Framework, view_id: str) -> ImpactSet:
    """Views reachable from ``view_id`` on its own level, plus everything that refines them.

    Same-level reachability ignores morphism direction; downstream impact
    follows refinements to more detailed levels only.
    """
    origin = framework.view(view_id)
    neighbours = defaultdict(set)
    for m in framework.local_morphisms(origin.level):
        neighbours[m.source].add(m.target)
        neighbours[m.target].add(m.source)

    reached = {origin.id}
    todo = deque([origin.id])
    while todo:
        v = todo.popleft()
        for w in neighbours[v]:
            if w not in reached:
                reached.add(w)
                todo.append(w)

    refine = refinement_map(framework)
    downstream = set()
    for start in reached:
        v = refine.get(start)
        while v is not None and v not in downstream:
            downstream.add(v)
            v = refine.get(v)

    return ImpactSet(origin.id, frozenset(reached - {origin.id}), frozenset(downstream))


__all__ = [
    "ImpactSet",
    "InheritanceCycle",
    "TraceChain",
    "UnknownReference",
    "descendants",
    "impact",
    "trace_morphism",
]
