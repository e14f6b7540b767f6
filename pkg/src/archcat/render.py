"""Text matrix, DOT graph and JSON report renderers.

All three are deterministic: the same framework and report always produce
byte-identical output.
"""

from __future__ import annotations

import json
import re
from typing import Optional

from archcat import __version__
from archcat.model import Diagnostic, Framework
from archcat.rules import CheckReport

_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
HIGHLIGHT = 'color="red", penwidth=2'


def render_matrix(framework: Framework) -> str:
    """Levels as rows, clusters as columns (grouped by group, in declaration order)."""
    fw = framework
    order = {g.id: i for i, g in enumerate(fw.groups)}
    clusters = sorted(fw.clusters, key=lambda c: order.get(c.group, len(order)))

    header_groups = [""]
    last_group = None
    for c in clusters:
        header_groups.append(c.group if c.group != last_group else "")
        last_group = c.group
    rows = [header_groups, ["level"] + [c.id for c in clusters]]
    for level in fw.levels:
        row = [level.id]
        for c in clusters:
            names = sorted(v.id for v in fw.views if v.cluster == c.id and v.level == level.id)
            row.append(", ".join(names))
        rows.append(row)

    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for n, row in enumerate(rows):
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if n == 1:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _dot_id(text: str) -> str:
    if _DOT_ID.match(text):
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_str(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_graph(framework: Framework, checked: Optional[CheckReport] = None) -> str:
    """DOT digraph: a ``cluster_<level>`` subgraph per level, morphisms solid, refinements dashed.

    With a report, views and edges named by an error diagnostic are drawn in red.
    """
    fw = framework
    errors = [d for d in (checked.diagnostics if checked else []) if d.is_error]
    hot_ids = {e for d in errors for e in d.entities}
    hot_pairs = {frozenset(d.entities) for d in errors}

    lines = [f"digraph {_dot_str(fw.name or 'framework')} {{", "  node [shape=box];"]
    for level in fw.levels:
        lines.append(f"  subgraph {_dot_id('cluster_' + level.id)} {{")
        lines.append(f"    label={_dot_str(level.display_name or level.id)};")
        for v in fw.views:
            if v.level != level.id:
                continue
            attrs = f"label={_dot_str(v.cluster + '/' + v.id)}"
            if v.id in hot_ids:
                attrs += ", " + HIGHLIGHT
            lines.append(f"    {_dot_str(v.id)} [{attrs}];")
        lines.append("  }")
    for m in fw.morphisms:
        attrs = f"label={_dot_str(m.id)}"
        if m.id in hot_ids:
            attrs += ", " + HIGHLIGHT
        lines.append(f"  {_dot_str(m.source)} -> {_dot_str(m.target)} [{attrs}];")
    for r in fw.refinements:
        attrs = "style=dashed"
        if any({r.source, r.target} <= pair for pair in hot_pairs):
            attrs += ", " + HIGHLIGHT
        lines.append(f"  {_dot_str(r.source)} -> {_dot_str(r.target)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _diagnostic_json(d: Diagnostic) -> dict:
    loc = d.location
    return {
        "code": d.code,
        "severity": d.severity,
        "message": d.message,
        "entities": list(d.entities),
        "rule": d.rule,
        "file": loc.file if loc else None,
        "line": loc.line if loc else None,
        "column": loc.column if loc else None,
    }


def report_document(framework: Optional[Framework], report: CheckReport) -> dict:
    fw = framework
    doc = {
        "framework": None,
        "levels": None,
        "clusters": None,
        "views": None,
        "morphisms": None,
        "diagnostics": [_diagnostic_json(d) for d in report.diagnostics],
        "summary": {"errors": report.errors, "warnings": report.warnings},
        "tool_version": __version__,
    }
    if fw is None:
        return doc
    doc["framework"] = {
        "name": fw.name,
        "groups": [{"id": g.id, "display_name": g.display_name} for g in fw.groups],
        "refinements": [{"from": r.source, "to": r.target} for r in fw.refinements],
        "products": [
            {"product": p.product, "left": p.left, "right": p.right,
             "proj_left": p.proj_left, "proj_right": p.proj_right}
            for p in fw.products
        ],
    }
    doc["levels"] = [
        {"id": lv.id, "index": lv.index, "display_name": lv.display_name} for lv in fw.levels
    ]
    doc["clusters"] = [
        {"id": c.id, "group": c.group, "display_name": c.display_name} for c in fw.clusters
    ]
    doc["views"] = [
        {"id": v.id, "cluster": v.cluster, "level": v.level, "display_name": v.display_name,
         "elements": [e.id for e in v.elements]}
        for v in fw.views
    ]
    doc["morphisms"] = [
        {"id": m.id, "from": m.source, "to": m.target, "inherits": m.inherits, "iso": m.iso,
         "description": m.description, "pairs": [list(p) for p in sorted(m.pairs)]}
        for m in fw.morphisms
    ]
    return doc


def render_json(framework: Optional[Framework], report: CheckReport) -> str:
    return json.dumps(report_document(framework, report), indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"
