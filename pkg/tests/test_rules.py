import dataclasses

import pytest

from archcat import CheckConfig, check_all, parse
from archcat.model import Refinement
from archcat.rules import (
    REGISTRY, check_composition_closure, check_connectivity, check_functor,
    check_level_locality, check_products, refinement_map,
)
from support import brute_e031, fixture_text, random_framework


def load(name):
    result = parse(fixture_text(name), name)
    assert result.ok, result.diagnostics
    return result.framework


def codes(report, severity="error"):
    return sorted((d.code, d.entities) for d in report.diagnostics if d.severity == severity)


def replace_morphism(fw, mid, **changes):
    ms = tuple(dataclasses.replace(m, **changes) if m.id == mid else m for m in fw.morphisms)
    return dataclasses.replace(fw, morphisms=ms)


HEADER = """level hi
level lo
group g "G"
cluster c group=g "C"
cluster d group=g "D"
"""


def build(body):
    result = parse(HEADER + body)
    assert result.ok, result.diagnostics
    return result.framework


# -- fixtures ----------------------------------------------------------------


def test_vedliot_has_no_errors():
    report = check_all(load("vedliot.arch"))
    assert report.errors == 0
    assert report.checked_rules == ["STRUCTURE", "R1", "ANTIPATTERN", "R2", "R3", "R4"]


def test_vedliot_undeclared_composites_are_real_paths():
    # every W040 is backed by two declared correspondences that chain
    report = check_all(load("vedliot.arch"))
    assert set(report.codes()) == {"W040"}
    pairs = {d.entities for d in report.diagnostics}
    assert ("ai_model_configuration", "ai_model_configuration") in pairs
    assert ("hardware_performance_monitoring", "ai_performance_monitoring") in pairs


def test_antipattern_yields_single_e010():
    report = check_all(load("antipattern.arch"))
    assert codes(report) == [("E010", ("DIAG", "cybersecurity_concept", "component_hardware_architecture"))]
    assert report.diagnostics[0].rule == "ANTIPATTERN"


def test_safety_and_product_fixtures_are_clean():
    for name in ("safety.arch", "product.arch"):
        report = check_all(load(name))
        assert report.diagnostics == [], name


# -- functor mutation suite --------------------------------------------------


def test_deleting_inheritor_yields_e023():
    fw = load("vedliot.arch")
    fw = dataclasses.replace(fw, morphisms=tuple(m for m in fw.morphisms if m.id != "C-01"))
    fw = replace_morphism(fw, "D-01", inherits=None)
    assert codes(check_all(fw)) == [("E023", ("B-01",))]


def test_wrong_inherits_yields_e022_only():
    fw = replace_morphism(load("vedliot.arch"), "B-01", inherits="A-02")
    assert codes(check_all(fw)) == [("E022", ("B-01", "A-02"))]


@pytest.mark.parametrize("config, severity", [
    (CheckConfig(), "error"), (CheckConfig.lenient(), "warning"),
])
def test_missing_refinement_yields_e020(config, severity):
    fw = load("vedliot.arch")
    fw = dataclasses.replace(fw, refinements=tuple(
        r for r in fw.refinements if r != Refinement("context_definition", "design_domain")))
    report = check_all(fw, config)
    found = [(d.code, d.entities, d.severity) for d in report.diagnostics if d.code != "W040"]
    assert found == [("E020", ("context_definition",), severity)]


# -- individual rules --------------------------------------------------------


def test_iso_must_be_bijective():
    fw = build("""view v cluster=c level=hi { element a element b }
view w cluster=d level=hi { element x }
morphism m from=v to=w iso {
  map a -> x
  map b -> x
}
""")
    assert "E012" in check_all(fw).codes()


def test_cross_level_morphism_is_reported_and_excluded_from_local_analyses():
    fw = build("""view v cluster=c level=hi { element a }
view w cluster=d level=lo { element x }
morphism m from=v to=w { map a -> x }
""")
    assert [d.code for d in check_level_locality(fw)] == ["E010"]
    assert fw.local_morphisms("hi") == [] and fw.local_morphisms("lo") == []


def test_bad_refinements_e021():
    fw = build("""view v cluster=c level=hi {}
view w cluster=d level=lo {}
view u cluster=c level=hi {}
refine v -> w
refine u -> v
""")
    found = sorted(d.entities for d in check_functor(fw) if d.code == "E021")
    assert found == [("u", "v"), ("v", "w")]  # same level; leaves the cluster
    assert refinement_map(fw) == {}


def test_second_refinement_is_e021():
    fw = build("""view v cluster=c level=hi {}
view w cluster=c level=lo {}
view w2 cluster=c level=lo {}
refine v -> w
refine v -> w2
""")
    assert [d.entities for d in check_functor(fw) if d.code == "E021"] == [("v", "w2")]
    assert refinement_map(fw) == {"v": "w"}


def test_functor_compositionality_e024():
    body = """view a cluster=c level=hi { element x }
view b cluster=c level=hi { element x }
view e cluster=c level=hi { element x }
view a2 cluster=c level=lo { element x element y }
view b2 cluster=c level=lo { element x }
view e2 cluster=c level=lo { element x element y }
refine a -> a2
refine b -> b2
refine e -> e2
morphism f from=a to=b { map x -> x }
morphism h from=b to=e { map x -> x }
morphism g from=a to=e { map x -> x }
morphism f2 from=a2 to=b2 inherits=f { map x -> x }
morphism h2 from=b2 to=e2 inherits=h { map x -> x }
morphism g2 from=a2 to=e2 inherits=g { %s }
"""
    good = build(body % "map x -> x")
    assert "E024" not in check_all(good).codes()
    bad = build(body % "map y -> y")
    assert [d.entities for d in check_all(bad).diagnostics if d.code == "E024"] == [("g", "f", "h")]


def test_undeclared_composite_w040_and_its_cover():
    body = """view a cluster=c level=hi { element x }
view b cluster=c level=hi { element x }
view e cluster=c level=hi { element x }
morphism f from=a to=b { map x -> x }
morphism h from=b to=e { map x -> x }
"""
    assert [d.entities for d in check_composition_closure(build(body))] == [("a", "e")]
    covered = build(body + "morphism g from=a to=e { map x -> x }\n")
    assert check_composition_closure(covered) == []
    off = check_composition_closure(build(body), CheckConfig(warn_undeclared_composites=False))
    assert off == []


def test_isolated_view_w041():
    fw = build("""view a cluster=c level=hi {}
view b cluster=d level=hi {}
""")
    assert sorted(d.entities for d in check_connectivity(fw)) == [("a",), ("b",)]


def test_bad_product_declaration_e030():
    fw = build("""view z cluster=c level=hi { element x }
view a cluster=c level=hi { element x }
view b cluster=d level=lo { element x }
morphism p1 from=z to=a { map x -> x }
morphism p2 from=a to=z { map x -> x }
product z = a x b proj=p1, p2
""")
    assert [d.code for d in check_products(fw)] == ["E030"]


def test_missing_mediator_is_e031():
    fw = build("""view z cluster=c level=hi { element x }
view a cluster=c level=hi { element x }
view b cluster=d level=hi { element x }
view p cluster=d level=hi { element x }
morphism p1 from=z to=a { map x -> x }
morphism p2 from=z to=b { map x -> x }
morphism f from=p to=a { map x -> x }
morphism g from=p to=b { map x -> x }
product z = a x b proj=p1, p2
""")
    assert [d.entities for d in check_products(fw)] == [("z", "p", "f", "g")]


def _perturbations(m, src_elems, dst_elems):
    pairs = set(m.pairs)
    every = {(a, b) for a in src_elems for b in dst_elems}
    for extra in sorted(every - pairs):
        yield "add", pairs | {extra}
    for gone in sorted(pairs):
        yield "remove", pairs - {gone}
        for other in sorted(every - pairs):
            yield "replace", (pairs - {gone}) | {other}


def test_every_single_pair_perturbation_breaks_the_product():
    fw = load("product.arch")
    tried = 0
    for mid in ("phi", "pi1", "pi2"):
        m = fw.morphism(mid)
        src = fw.view(m.source).element_ids
        dst = fw.view(m.target).element_ids
        for kind, pairs in _perturbations(m, src, dst):
            report = check_all(replace_morphism(fw, mid, pairs=frozenset(pairs)))
            assert "E031" in report.codes(), (mid, kind, sorted(pairs))
            tried += 1
    assert tried == 3 * (2 + 2 + 2 * 2)


@pytest.mark.parametrize("seed", range(40))
def test_e031_matches_exhaustive_search(seed):
    fw = random_framework(seed)
    found = {d.entities[:4] for d in check_all(fw).diagnostics if d.code == "E031"}
    assert found == brute_e031(fw)


# -- driver ------------------------------------------------------------------


def test_structural_errors_stop_later_rules():
    fw = load("antipattern.arch")
    fw = replace_morphism(fw, "DIAG", inherits="ghost")
    report = check_all(fw)
    assert report.codes() == ["E002"]
    assert report.checked_rules == ["STRUCTURE", "R1"]


def test_every_emitted_code_is_registered():
    for seed in range(60):
        for d in check_all(random_framework(seed)).diagnostics:
            slug, rule, severity = REGISTRY[d.code]
            assert d.rule == rule


@pytest.mark.parametrize("seed", range(30))
def test_lenient_only_downgrades(seed):
    fw = random_framework(seed)
    strict = check_all(fw)
    lenient = check_all(fw, CheckConfig.lenient())
    key = lambda r: {(d.code, d.entities) for d in r.diagnostics}
    assert key(lenient) <= key(strict)
    assert lenient.errors <= strict.errors


def test_report_order_is_stable():
    fw = random_framework(7)
    first = check_all(fw).diagnostics
    assert all(check_all(fw).diagnostics == first for _ in range(3))
