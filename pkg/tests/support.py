"""Random framework generator and brute-force oracles shared by the test modules.

The oracles deliberately avoid the library's relation code: composition is
a triple loop, composites come from explicit path enumeration, and product
commutativity is decided by trying every candidate mediating morphism.
"""

from __future__ import annotations

import random
from pathlib import Path

from archcat.model import (
    Cluster, Element, Framework, Group, Level, Morphism, ProductDecl, Refinement, View,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


# -- oracles -----------------------------------------------------------------


def brute_compose(f: set, h: set) -> set:
    out = set()
    for a, b in f:
        for b2, c in h:
            if b == b2:
                out.add((a, c))
    return out


def brute_elements(rel: set) -> tuple[set, set]:
    return {a for a, _ in rel}, {b for _, b in rel}


def path_composites(morphisms) -> dict:
    """Every path of two or more morphisms, enumerated explicitly (acyclic inputs only)."""
    morphisms = list(morphisms)
    result = {}

    def extend(path, pairs):
        last = path[-1]
        for m in morphisms:
            if m.source != last.target:
                continue
            new = brute_compose(pairs, set(m.pairs))
            key = (path[0].source, m.target)
            result.setdefault(key, set()).update(new)
            extend(path + [m], new)

    for m in morphisms:
        extend([m], set(m.pairs))
    return result


def brute_e031(fw: Framework) -> set:
    """(product, P, f, g) for every pair of legs no candidate mediator satisfies."""
    failing = set()
    for decl in fw.products:
        z = fw.view_by_id[decl.product]
        pi1 = set(fw.morphism_by_id[decl.proj_left].pairs)
        pi2 = set(fw.morphism_by_id[decl.proj_right].pairs)
        same_level = [v for v in fw.views if v.level == z.level]
        for p in same_level:
            legs_a = [m for m in fw.morphisms if (m.source, m.target) == (p.id, decl.left)]
            legs_b = [m for m in fw.morphisms if (m.source, m.target) == (p.id, decl.right)]
            mediators = [set(m.pairs) for m in fw.morphisms
                         if (m.source, m.target) == (p.id, decl.product)]
            if p.id == decl.product:
                mediators.append({(e.id, e.id) for e in z.elements})
            for f in legs_a:
                for g in legs_b:
                    ok = False
                    for phi in mediators:
                        if brute_compose(phi, pi1) == set(f.pairs) and brute_compose(phi, pi2) == set(g.pairs):
                            ok = True
                    if not ok:
                        failing.add((decl.product, p.id, f.id, g.id))
    return failing


# -- generator ---------------------------------------------------------------


def _subset(rng: random.Random, left, right, p: float) -> frozenset:
    return frozenset((a, b) for a in left for b in right if rng.random() < p)


def random_framework(seed: int, max_views: int = 6, max_elements: int = 6) -> Framework:
    """A structurally valid framework whose same-level morphisms form a DAG.

    Views on a level are ordered by their index and morphisms only point
    forward, so path enumeration terminates.  Refinements, inheritance links,
    products and the occasional diagonal morphism are sprinkled in at random,
    so every rule gets exercised across seeds.
    """
    rng = random.Random(seed)
    n_levels = rng.randint(1, 3)
    levels = tuple(Level(f"L{i}", i) for i in range(n_levels))
    groups = (Group("g0", "Group 0"), Group("g1", "Group 1"))
    clusters = tuple(Cluster(f"c{i}", groups[i % 2].id, f"Cluster {i}")
                     for i in range(rng.randint(1, 3)))

    views: list[View] = []
    per_level: dict[str, list[View]] = {}
    for lv in levels:
        row = []
        for i in range(rng.randint(1, max_views)):
            elems = tuple(Element(f"e{k}") for k in range(rng.randint(1, max_elements)))
            row.append(View(f"v{lv.index}_{i}", rng.choice(clusters).id, lv.id, elements=elems))
        per_level[lv.id] = row
        views.extend(row)

    morphisms: list[Morphism] = []
    counter = iter(range(10_000))

    def add(src: View, dst: View, pairs, **kw) -> Morphism:
        m = Morphism(f"m{next(counter)}", src.id, dst.id, frozenset(pairs), **kw)
        morphisms.append(m)
        return m

    def ids(v: View) -> list[str]:
        return [e.id for e in v.elements]

    products = []
    for lv in levels:
        row = per_level[lv.id]
        for i, src in enumerate(row):
            for dst in row[i + 1:]:
                for _ in range(rng.choice((0, 0, 1, 1, 2))):
                    add(src, dst, _subset(rng, ids(src), ids(dst), rng.choice((0.15, 0.3, 0.6))))
        if len(row) >= 3 and rng.random() < 0.6:
            zi = rng.randrange(0, len(row) - 2)
            z = row[zi]
            a, b = rng.sample(row[zi + 1:], 2)
            pi1 = add(z, a, _subset(rng, ids(z), ids(a), 0.4))
            pi2 = add(z, b, _subset(rng, ids(z), ids(b), 0.4))
            products.append(ProductDecl(z.id, a.id, b.id, pi1.id, pi2.id))
            for p in row[:zi + 1]:
                if rng.random() < 0.5:
                    continue
                if p.id == z.id:
                    phi = {(e, e) for e in ids(z)}
                else:
                    phi = _subset(rng, ids(p), ids(z), 0.3)
                    add(p, z, phi)
                if rng.random() < 0.6:
                    add(p, a, brute_compose(set(phi), set(pi1.pairs)))
                    add(p, b, brute_compose(set(phi), set(pi2.pairs)))
                else:
                    add(p, a, _subset(rng, ids(p), ids(a), 0.3))
                    add(p, b, _subset(rng, ids(p), ids(b), 0.3))

    refinements = []
    for lv in levels[:-1]:
        below = per_level[levels[lv.index + 1].id]
        for v in per_level[lv.id]:
            if rng.random() < 0.8:
                same = [w for w in below if w.cluster == v.cluster]
                pool = same if same and rng.random() < 0.9 else below
                refinements.append(Refinement(v.id, rng.choice(pool).id))

    # inheritance links, occasionally wrong
    by_level: dict[int, list[Morphism]] = {}
    view_level = {v.id: int(v.level[1:]) for v in views}
    for m in morphisms:
        by_level.setdefault(view_level[m.source], []).append(m)
    linked = []
    for m in morphisms:
        above = by_level.get(view_level[m.source] - 1, [])
        if above and rng.random() < 0.5:
            linked.append(Morphism(m.id, m.source, m.target, m.pairs, inherits=rng.choice(above).id))
        else:
            linked.append(m)
    morphisms = linked

    if n_levels > 1 and rng.random() < 0.2:
        src = rng.choice(per_level["L0"])
        dst = rng.choice(per_level["L1"])
        add(src, dst, _subset(rng, ids(src), ids(dst), 0.3))

    return Framework(
        name=f"random {seed}",
        levels=levels,
        groups=groups,
        clusters=clusters,
        views=tuple(views),
        morphisms=tuple(morphisms),
        refinements=tuple(refinements),
        products=tuple(products),
    )
