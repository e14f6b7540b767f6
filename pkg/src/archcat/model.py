"""Domain types of a compositional architecture framework.

A framework arranges architectural views in a matrix: columns are clusters
of concern (bundled into groups), rows are levels of abstraction.  Views on
one level are related by morphisms; refinements carry a view to its more
detailed counterpart on the next level down.

All types are frozen dataclasses.  ``Framework`` sorts its collections into
a canonical order on construction, so two frameworks that declare the same
entities in a different order compare equal.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional


class UnknownReference(LookupError):
    """Raised when a query names an entity the framework does not contain."""


class ModelError(ValueError):
    """Raised by :meth:`Framework.validated` for a structurally broken framework."""

    def __init__(self, problems: list[Problem]):
        self.problems = problems
        super().__init__("; ".join(f"{p.code} {p.message}" for p in problems))


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Level:
    id: str
    index: int
    display_name: Optional[str] = None


@dataclass(frozen=True)
class Group:
    id: str
    display_name: str


@dataclass(frozen=True)
class Cluster:
    id: str
    group: str
    display_name: str


@dataclass(frozen=True)
class Element:
    id: str
    display_name: Optional[str] = None


@dataclass(frozen=True)
class View:
    id: str
    cluster: str
    level: str
    display_name: Optional[str] = None
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(self.elements, key=lambda e: e.id)))

    @property
    def element_ids(self) -> frozenset[str]:
        return frozenset(e.id for e in self.elements)


@dataclass(frozen=True)
class Morphism:
    id: str
    source: str
    target: str
    pairs: frozenset[tuple[str, str]] = frozenset()
    description: Optional[str] = None
    inherits: Optional[str] = None
    iso: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))


@dataclass(frozen=True)
class Refinement:
    source: str  # the more abstract view
    target: str  # its refinement one level down


@dataclass(frozen=True)
class ProductDecl:
    product: str
    left: str
    right: str
    proj_left: str
    proj_right: str


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    message: str
    location: Optional[SourceSpan] = None
    entities: tuple[str, ...] = ()
    rule: str = "STRUCTURE"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


@dataclass(frozen=True)
class Problem:
    """A structural defect found by :func:`structural_problems`."""

    code: str
    message: str
    kind: str  # namespace of the offending entity
    entity: str
    entities: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class Framework:
    name: str = ""
    levels: tuple[Level, ...] = ()
    groups: tuple[Group, ...] = ()
    clusters: tuple[Cluster, ...] = ()
    views: tuple[View, ...] = ()
    morphisms: tuple[Morphism, ...] = ()
    refinements: tuple[Refinement, ...] = ()
    products: tuple[ProductDecl, ...] = ()

    def __post_init__(self):
        # levels, groups and clusters keep declaration order; the rest is canonical
        for name in ("levels", "groups", "clusters"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        level_rank = {lv.id: i for i, lv in enumerate(self.levels)}
        cluster_rank = {c.id: i for i, c in enumerate(self.clusters)}
        view_level = {v.id: level_rank.get(v.level, len(level_rank)) for v in self.views}
        big = len(level_rank) + 1

        object.__setattr__(self, "views", tuple(sorted(
            self.views,
            key=lambda v: (cluster_rank.get(v.cluster, len(cluster_rank)),
                           level_rank.get(v.level, big), v.id),
        )))
        object.__setattr__(self, "morphisms", tuple(sorted(
            self.morphisms, key=lambda m: (view_level.get(m.source, big), m.id, m.source, m.target),
        )))
        object.__setattr__(self, "refinements", tuple(sorted(
            self.refinements,
            key=lambda r: (view_level.get(r.source, big), r.source, r.target),
        )))
        object.__setattr__(self, "products", tuple(sorted(
            self.products, key=lambda p: (p.product, p.left, p.right, p.proj_left, p.proj_right),
        )))

    def _key(self):
        return (self.name, self.levels, self.groups, self.clusters, self.views,
                self.morphisms, self.refinements, self.products)

    def __eq__(self, other):
        if not isinstance(other, Framework):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @classmethod
    def validated(cls, **fields) -> Framework:
        """Build a framework, raising :class:`ModelError` on any structural defect."""
        fw = cls(**fields)
        problems = list(structural_problems(fw))
        if problems:
            raise ModelError(problems)
        return fw

    # lookups assume unique ids; duplicates are reported by structural_problems

    @cached_property
    def level_by_id(self) -> dict[str, Level]:
        return {lv.id: lv for lv in self.levels}

    @cached_property
    def group_by_id(self) -> dict[str, Group]:
        return {g.id: g for g in self.groups}

    @cached_property
    def cluster_by_id(self) -> dict[str, Cluster]:
        return {c.id: c for c in self.clusters}

    @cached_property
    def view_by_id(self) -> dict[str, View]:
        return {v.id: v for v in self.views}

    @cached_property
    def morphism_by_id(self) -> dict[str, Morphism]:
        return {m.id: m for m in self.morphisms}

    def level_of(self, view_id: str) -> Level:
        view = self.view(view_id)
        return self.level_by_id[view.level]

    def level_index(self, view_id: str) -> int:
        return self.level_of(view_id).index

    def view(self, view_id: str) -> View:
        try:
            return self.view_by_id[view_id]
        except KeyError:
            raise UnknownReference(f"unknown view {view_id!r}") from None

    def morphism(self, morphism_id: str) -> Morphism:
        try:
            return self.morphism_by_id[morphism_id]
        except KeyError:
            raise UnknownReference(f"unknown morphism {morphism_id!r}") from None

    def is_level_local(self, m: Morphism) -> bool:
        return self.view_by_id[m.source].level == self.view_by_id[m.target].level

    def local_morphisms(self, level_id: str) -> list[Morphism]:
        """Morphisms with both endpoints on ``level_id``."""
        return [m for m in self.morphisms
                if self.view_by_id[m.source].level == level_id
                and self.view_by_id[m.target].level == level_id]

    def view_precedes(self, u: str, v: str) -> bool:
        """The cluster order: ``u <= v`` iff same cluster and u is no more detailed than v."""
        a, b = self.view(u), self.view(v)
        return a.cluster == b.cluster and self.level_index(u) <= self.level_index(v)


def identity_morphism(view: View) -> Morphism:
    return Morphism(
        id=f"id_{view.id}",
        source=view.id,
        target=view.id,
        pairs=frozenset((e.id, e.id) for e in view.elements),
        iso=True,
    )


def views_at(framework: Framework, level: str) -> set[View]:
    if level not in framework.level_by_id:
        raise UnknownReference(f"unknown level {level!r}")
    return {v for v in framework.views if v.level == level}


def cluster_chain(framework: Framework, cluster: str) -> list[tuple[Level, set[View]]]:
    """Views of ``cluster`` grouped by level, most abstract level first."""
    if cluster not in framework.cluster_by_id:
        raise UnknownReference(f"unknown cluster {cluster!r}")
    chain = []
    for level in framework.levels:
        members = {v for v in framework.views if v.cluster == cluster and v.level == level.id}
        if members:
            chain.append((level, members))
    return chain


def _duplicates(ids: Iterable[str]) -> list[str]:
    return sorted(k for k, n in Counter(ids).items() if n > 1)


def structural_problems(fw: Framework) -> Iterator[Problem]:
    """Yield every duplicate id (E001), dangling reference (E002) and misplaced view (E003)."""
    namespaces = [
        ("level", [lv.id for lv in fw.levels]),
        ("group", [g.id for g in fw.groups]),
        ("cluster", [c.id for c in fw.clusters]),
        ("view", [v.id for v in fw.views]),
        ("morphism", [m.id for m in fw.morphisms]),
    ]
    for kind, ids in namespaces:
        for dup in _duplicates(ids):
            yield Problem("E001", f"duplicate {kind} id {dup!r}", kind, dup, (dup,))
    for view in fw.views:
        for dup in _duplicates(e.id for e in view.elements):
            yield Problem("E001", f"duplicate element {dup!r} in view {view.id!r}",
                          "element", f"{view.id}.{dup}", (view.id, dup))
    for i, level in enumerate(fw.levels):
        if level.index != i:
            yield Problem("E003", f"level {level.id!r} has index {level.index}, expected {i}",
                          "level", level.id, (level.id,))

    for cluster in fw.clusters:
        if cluster.group not in fw.group_by_id:
            yield Problem("E002", f"cluster {cluster.id!r} references unknown group {cluster.group!r}",
                          "cluster", cluster.id, (cluster.id, cluster.group))
    for view in fw.views:
        if view.cluster not in fw.cluster_by_id:
            yield Problem("E003", f"view {view.id!r} placed in unknown cluster {view.cluster!r}",
                          "view", view.id, (view.id, view.cluster))
        if view.level not in fw.level_by_id:
            yield Problem("E003", f"view {view.id!r} placed on unknown level {view.level!r}",
                          "view", view.id, (view.id, view.level))
    for m in fw.morphisms:
        for end in (m.source, m.target):
            if end not in fw.view_by_id:
                yield Problem("E002", f"morphism {m.id!r} references unknown view {end!r}",
                              "morphism", m.id, (m.id, end))
        if m.inherits is not None and m.inherits not in fw.morphism_by_id:
            yield Problem("E002", f"morphism {m.id!r} inherits unknown morphism {m.inherits!r}",
                          "morphism", m.id, (m.id, m.inherits))
    for r in fw.refinements:
        for end in (r.source, r.target):
            if end not in fw.view_by_id:
                yield Problem("E002", f"refinement {r.source} -> {r.target} references unknown view {end!r}",
                              "refinement", f"{r.source}->{r.target}", (r.source, r.target))
    for p in fw.products:
        for end in (p.product, p.left, p.right):
            if end not in fw.view_by_id:
                yield Problem("E002", f"product {p.product!r} references unknown view {end!r}",
                              "product", p.product, (p.product, end))
        for proj in (p.proj_left, p.proj_right):
            if proj not in fw.morphism_by_id:
                yield Problem("E002", f"product {p.product!r} references unknown morphism {proj!r}",
                              "product", p.product, (p.product, proj))
