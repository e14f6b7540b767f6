"""Consistency rules for compositional architecture frameworks.

Each check is a pure function from a framework to a list of diagnostics.
:func:`check_all` runs them in order and sorts the findings by level, code
and entity so that CI output is stable.

Rule tags:

* ``STRUCTURE``  - ids and references resolve (E000-E003, W001)
* ``R1``         - views of a cluster form a partial order over the levels
* ``R2``         - morphisms stay on one level and compose (E011, E012, W040)
* ``ANTIPATTERN``- diagonal correspondence between levels (E010)
* ``R3``         - products commute; views are mutually reachable (E030, E031, W041)
* ``R4``         - refinement is a functor between adjacent levels (E020-E024)
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Iterable, Mapping, Optional

from archcat.model import Diagnostic, Framework, Morphism, structural_problems
from archcat.relations import ElementRelation, compose, identity, is_bijection, reachable_composites

# code -> (slug, rule, default severity)
REGISTRY: dict[str, tuple[str, str, str]] = {
    "E000": ("syntax-error", "STRUCTURE", "error"),
    "E001": ("duplicate-id", "STRUCTURE", "error"),
    "E002": ("unknown-reference", "STRUCTURE", "error"),
    "E003": ("bad-placement", "STRUCTURE", "error"),
    "W001": ("duplicate-mapping", "STRUCTURE", "warning"),
    "E010": ("cross-level-morphism", "ANTIPATTERN", "error"),
    "E011": ("dangling-element", "R2", "error"),
    "E012": ("iso-not-bijective", "R2", "error"),
    "E020": ("missing-view-refinement", "R4", "error"),
    "E021": ("bad-refinement", "R4", "error"),
    "E022": ("bad-inheritance", "R4", "error"),
    "E023": ("missing-morphism-refinement", "R4", "error"),
    "E024": ("functor-compositionality", "R4", "error"),
    "E030": ("bad-product-declaration", "R3", "error"),
    "E031": ("product-not-commuting", "R3", "error"),
    "W040": ("undeclared-composite", "R2", "warning"),
    "W041": ("isolated-view", "R3", "warning"),
}

RULE_ORDER = ("STRUCTURE", "R1", "ANTIPATTERN", "R2", "R3", "R4")


@dataclass(frozen=True)
class CheckConfig:
    strict_functor_objects: bool = True
    strict_functor_morphisms: bool = True
    warn_isolated_views: bool = True
    warn_undeclared_composites: bool = True

    @classmethod
    def lenient(cls) -> CheckConfig:
        return cls(strict_functor_objects=False, strict_functor_morphisms=False)


@dataclass
class CheckReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    checked_rules: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(d.severity for d in self.diagnostics)
        return {"error": tally["error"], "warning": tally["warning"]}

    @property
    def errors(self) -> int:
        return self.counts["error"]

    @property
    def warnings(self) -> int:
        return self.counts["warning"]

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class _Emitter:
    """Collects diagnostics with the level index used for ordering."""

    def __init__(self, fw: Framework, spans: Optional[Mapping] = None):
        self.fw = fw
        self.spans = spans or {}
        self.found: list[tuple[int, Diagnostic]] = []

    def level_of_view(self, view_id: str) -> int:
        view = self.fw.view_by_id.get(view_id)
        if view is None or view.level not in self.fw.level_by_id:
            return -1
        return self.fw.level_by_id[view.level].index

    def emit(self, code: str, message: str, entities: Iterable[str], *,
             level: int = -1, span_key: Optional[tuple[str, str]] = None,
             severity: Optional[str] = None):
        slug, rule, default = REGISTRY[code]
        location = self.spans.get(span_key) if span_key else None
        diag = Diagnostic(code, severity or default, message, location, tuple(entities), rule)
        self.found.append((level, diag))

    def diagnostics(self) -> list[Diagnostic]:
        return [d for _, d in self.found]


def _sort_key(item: tuple[int, Diagnostic]):
    level, d = item
    return (level, d.code, d.entities, d.message)


def _run(check, fw, spans, *args) -> list[Diagnostic]:
    em = _Emitter(fw, spans)
    check(em, *args)
    return [d for _, d in sorted(em.found, key=_sort_key)]


# -- structure ---------------------------------------------------------------


def _structure(em: _Emitter):
    fw = em.fw
    problems = list(structural_problems(fw))
    for p in problems:
        em.emit(p.code, p.message, p.entities, span_key=(p.kind, p.entity))
    if not problems:
        # induced by level indices, so reflexive and transitive by construction
        for v in fw.views:
            assert fw.view_precedes(v.id, v.id)


def check_structure(framework: Framework, spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_structure, framework, spans)


# -- level locality ----------------------------------------------------------


def _locality(em: _Emitter):
    fw = em.fw
    for m in fw.morphisms:
        src, tgt = fw.view_by_id[m.source], fw.view_by_id[m.target]
        key = ("morphism", m.id)
        level = em.level_of_view(m.source)
        if src.level != tgt.level:
            em.emit("E010",
                    f"morphism {m.id} relates {m.source} ({src.level}) to {m.target} ({tgt.level}); "
                    "correspondences must stay on one level of abstraction",
                    (m.id, m.source, m.target), level=level, span_key=key)
        for a, b in sorted(m.pairs):
            if a not in src.element_ids:
                em.emit("E011", f"morphism {m.id} maps {a!r}, which is not an element of {m.source}",
                        (m.id, m.source, a), level=level, span_key=key)
            if b not in tgt.element_ids:
                em.emit("E011", f"morphism {m.id} maps to {b!r}, which is not an element of {m.target}",
                        (m.id, m.target, b), level=level, span_key=key)
        if m.iso and not is_bijection(ElementRelation.of(m)):
            em.emit("E012", f"morphism {m.id} is declared iso but its mapping is not a bijection",
                    (m.id,), level=level, span_key=key)


def check_level_locality(framework: Framework, spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_locality, framework, spans)


# -- composition closure -----------------------------------------------------


def _closure(em: _Emitter, config: CheckConfig):
    if not config.warn_undeclared_composites:
        return
    fw = em.fw
    for level in fw.levels:
        local = fw.local_morphisms(level.id)
        declared = defaultdict(list)
        for m in local:
            declared[(m.source, m.target)].append(m.pairs)
        for (s, t), rel in reachable_composites(local).items():
            if not rel.pairs:
                continue
            if any(rel.pairs <= pairs for pairs in declared[(s, t)]):
                continue
            shown = ", ".join(f"{a}->{b}" for a, b in sorted(rel.pairs))
            em.emit("W040",
                    f"composite {s} -> {t} relates {{{shown}}} but no declared morphism covers it",
                    (s, t), level=level.index, span_key=("view", s))


def check_composition_closure(framework: Framework, config: CheckConfig = CheckConfig(),
                              spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_closure, framework, spans, config)


# -- products ----------------------------------------------------------------


def _products(em: _Emitter):
    fw = em.fw
    for decl in fw.products:
        key = ("product", decl.product)
        level = em.level_of_view(decl.product)
        problems = []
        names = (decl.product, decl.left, decl.right)
        if any(v not in fw.view_by_id for v in names):
            problems.append("a product view does not exist")
        elif len({fw.view_by_id[v].level for v in names}) != 1:
            problems.append(f"{decl.product}, {decl.left} and {decl.right} are not on one level")
        for proj, want in ((decl.proj_left, decl.left), (decl.proj_right, decl.right)):
            m = fw.morphism_by_id.get(proj)
            if m is None:
                problems.append(f"projection {proj} does not exist")
            elif (m.source, m.target) != (decl.product, want):
                problems.append(f"projection {proj} runs {m.source} -> {m.target}, "
                                f"expected {decl.product} -> {want}")
        if problems:
            em.emit("E030", f"product {decl.product}: " + "; ".join(problems),
                    (decl.product, decl.proj_left, decl.proj_right), level=level, span_key=key)
            continue

        z = fw.view_by_id[decl.product]
        pi1 = ElementRelation.of(fw.morphism_by_id[decl.proj_left])
        pi2 = ElementRelation.of(fw.morphism_by_id[decl.proj_right])
        local = fw.local_morphisms(z.level)
        by_ends = defaultdict(list)
        for m in local:
            by_ends[(m.source, m.target)].append(m)

        for p in sorted(v.id for v in fw.views if v.level == z.level):
            fs = by_ends[(p, decl.left)]
            gs = by_ends[(p, decl.right)]
            if not fs or not gs:
                continue
            phis = [ElementRelation.of(m) for m in by_ends[(p, decl.product)]]
            phi_ids = [m.id for m in by_ends[(p, decl.product)]]
            if p == decl.product:
                phis.append(identity(z))
                phi_ids.append(f"id_{z.id}")
            for f, g in cartesian(fs, gs):
                fr, gr = ElementRelation.of(f), ElementRelation.of(g)
                if any(compose(phi, pi1).pairs == fr.pairs and compose(phi, pi2).pairs == gr.pairs
                       for phi in phis):
                    continue
                if not phis:
                    why = f"no morphism from {p} to {decl.product}"
                    entities = (decl.product, p, f.id, g.id)
                else:
                    phi, phi_id = phis[0], phi_ids[0]
                    legs = []
                    if compose(phi, pi1).pairs != fr.pairs:
                        legs.append(f"{phi_id} ; {decl.proj_left} differs from {f.id}")
                    if compose(phi, pi2).pairs != gr.pairs:
                        legs.append(f"{phi_id} ; {decl.proj_right} differs from {g.id}")
                    why = " and ".join(legs)
                    if len(phis) > 1:
                        why += f" (and {len(phis) - 1} other candidate(s) fail)"
                    entities = (decl.product, p, f.id, g.id, phi_id)
                em.emit("E031", f"product {decl.product} does not commute for {p}: {why}",
                        entities, level=level, span_key=key)


def check_products(framework: Framework, spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_products, framework, spans)


# -- functor -----------------------------------------------------------------


def refinement_map(fw: Framework) -> dict[str, str]:
    """The object part of the functor: each view's valid refinement, if any."""
    out = {}
    for r in fw.refinements:
        if r.source in out or not _valid_refinement(fw, r.source, r.target):
            continue
        out[r.source] = r.target
    return out


def _valid_refinement(fw: Framework, source: str, target: str) -> bool:
    a, b = fw.view_by_id.get(source), fw.view_by_id.get(target)
    if a is None or b is None:
        return False
    return (a.cluster == b.cluster
            and fw.level_by_id[b.level].index == fw.level_by_id[a.level].index + 1)


def _functor(em: _Emitter, config: CheckConfig):
    fw = em.fw
    if len(fw.levels) < 2:
        return
    last = fw.levels[-1].index
    obj_sev = "error" if config.strict_functor_objects else "warning"
    mor_sev = "error" if config.strict_functor_morphisms else "warning"

    # object part
    seen_out = set()
    for r in fw.refinements:
        key = ("refinement", f"{r.source}->{r.target}")
        level = em.level_of_view(r.source)
        a, b = fw.view_by_id[r.source], fw.view_by_id[r.target]
        if r.source in seen_out:
            em.emit("E021", f"{r.source} already has a refinement; {r.source} -> {r.target} is a second one",
                    (r.source, r.target), level=level, span_key=key)
            continue
        if a.cluster != b.cluster:
            em.emit("E021", f"refinement {r.source} -> {r.target} leaves cluster {a.cluster}",
                    (r.source, r.target), level=level, span_key=key)
        if fw.level_by_id[b.level].index != fw.level_by_id[a.level].index + 1:
            em.emit("E021", f"refinement {r.source} ({a.level}) -> {r.target} ({b.level}) "
                    "does not go to the next level", (r.source, r.target), level=level, span_key=key)
        if _valid_refinement(fw, r.source, r.target):
            seen_out.add(r.source)

    refine = refinement_map(fw)
    for v in fw.views:
        idx = fw.level_by_id[v.level].index
        if idx < last and v.id not in refine:
            em.emit("E020", f"view {v.id} has no refinement on level {fw.levels[idx + 1].id}",
                    (v.id,), level=idx, span_key=("view", v.id), severity=obj_sev)

    # morphism part
    local = [m for m in fw.morphisms if fw.is_level_local(m)]
    level_of = {m.id: em.level_of_view(m.source) for m in fw.morphisms}
    flagged = set()  # morphisms whose `inherits` is wrong
    for m in local:
        if m.inherits is None:
            continue
        parent = fw.morphism_by_id[m.inherits]
        key = ("morphism", m.id)
        if not fw.is_level_local(parent) or level_of[parent.id] != level_of[m.id] - 1:
            em.emit("E022", f"{m.id} inherits {parent.id}, which is not a morphism one level above",
                    (m.id, parent.id), level=level_of[m.id], span_key=key)
            flagged.add(m.id)
            continue
        if parent.source not in refine or parent.target not in refine:
            continue  # reported as E020
        want = (refine[parent.source], refine[parent.target])
        if (m.source, m.target) != want:
            em.emit("E022",
                    f"{m.id} inherits {parent.id}, but {parent.id} refines to {want[0]} -> {want[1]}, "
                    f"not {m.source} -> {m.target}",
                    (m.id, parent.id), level=level_of[m.id], span_key=key)
            flagged.add(m.id)

    inheritors = defaultdict(list)
    for m in local:
        if m.inherits is not None and m.id not in flagged:
            inheritors[m.inherits].append(m)
    by_ends = defaultdict(list)
    for m in local:
        by_ends[(m.source, m.target)].append(m)

    for m in local:
        idx = level_of[m.id]
        if idx >= last:
            continue
        if m.source not in refine or m.target not in refine:
            continue
        want = (refine[m.source], refine[m.target])
        if inheritors[m.id]:
            continue
        # a counterpart with a mislabelled `inherits` is already reported as E022
        if any(c.id in flagged for c in by_ends[want]):
            continue
        em.emit("E023", f"morphism {m.id} has no inheriting morphism {want[0]} -> {want[1]} "
                f"on level {fw.levels[idx + 1].id}",
                (m.id,), level=idx, span_key=("morphism", m.id), severity=mor_sev)

    # compositionality among declared morphisms
    for f in local:
        for h in _outgoing(local, f.target):
            for g in by_ends[(f.source, h.target)]:
                composite = compose(ElementRelation.of(f), ElementRelation.of(h))
                if g.pairs != composite.pairs:
                    continue
                fs, hs, gs = inheritors[f.id], inheritors[h.id], inheritors[g.id]
                if not (fs and hs and gs):
                    continue
                if any(compose(ElementRelation.of(f2), ElementRelation.of(h2)).pairs == g2.pairs
                       for f2, h2, g2 in cartesian(fs, hs, gs)
                       if f2.target == h2.source):
                    continue
                em.emit("E024",
                        f"{g.id} = {f.id} ; {h.id}, but its inheritor differs from the composite "
                        f"of the inheritors of {f.id} and {h.id}",
                        (g.id, f.id, h.id), level=level_of[g.id], span_key=("morphism", g.id))


def _outgoing(morphisms: list[Morphism], source: str) -> list[Morphism]:
    return [m for m in morphisms if m.source == source]


def check_functor(framework: Framework, config: CheckConfig = CheckConfig(),
                  spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_functor, framework, spans, config)


# -- connectivity ------------------------------------------------------------


def _connectivity(em: _Emitter, config: CheckConfig):
    if not config.warn_isolated_views:
        return
    fw = em.fw
    for level in fw.levels:
        members = [v.id for v in fw.views if v.level == level.id]
        if len(members) < 2:
            continue
        linked = set()
        for m in fw.local_morphisms(level.id):
            if m.source != m.target:
                linked.update((m.source, m.target))
        for v in members:
            if v not in linked:
                em.emit("W041", f"view {v} has no correspondence to any other view on level {level.id}",
                        (v,), level=level.index, span_key=("view", v))


def check_connectivity(framework: Framework, config: CheckConfig = CheckConfig(),
                       spans: Optional[Mapping] = None) -> list[Diagnostic]:
    return _run(_connectivity, framework, spans, config)


# -- driver ------------------------------------------------------------------


def check_all(framework: Framework, config: CheckConfig = CheckConfig(),
              spans: Optional[Mapping] = None) -> CheckReport:
    """Run every rule; stop after structural errors since later rules need resolved ids."""
    em = _Emitter(framework, spans)
    _structure(em)
    rules = ["STRUCTURE", "R1"]
    if not any(d.is_error for d in em.diagnostics()):
        _locality(em)
        _closure(em, config)
        _products(em)
        _functor(em, config)
        _connectivity(em, config)
        rules += ["ANTIPATTERN", "R2", "R3", "R4"]
    ordered = [d for _, d in sorted(em.found, key=_sort_key)]
    return CheckReport(ordered, [r for r in RULE_ORDER if r in rules])
