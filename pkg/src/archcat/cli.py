"""Command-line entry point: ``archcat <check|trace|impact|render|init|fmt>``.

Exit status: 0 clean (warnings allowed unless ``--deny-warnings``),
1 error diagnostics present, 2 usage, I/O or parse failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from archcat import dsl, render, rules, trace
from archcat.model import Diagnostic, SourceSpan, UnknownReference

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2

SKELETON = '''\
# Compositional architecture framework skeleton.
#
# Step 1: list groups of concern and split them into clusters of concern.
# Step 2: declare levels of abstraction, most abstract first.
# Steps 3-4: place views in the matrix and relate views on the same level.
# Step 5: give every view a refinement on the next level and every
#         morphism an inheriting morphism there (inherits=...).
# Run `archcat check` after each edit.

framework "New framework"

level analytical "Analytical level"
level conceptual "Conceptual level"
level design "Design level"
level runtime "Run time level"

group functionality "Functionality"
group resources "Means and Resources"

cluster logical_behaviour group=functionality "Logical Behaviour"
cluster hardware group=resources "Hardware"

view function_components cluster=logical_behaviour level=analytical "Function components" {
  element object_detection "Object detection"
}
view logical_components cluster=logical_behaviour level=conceptual "Logical components" {
  element object_detection "Object detection"
}
view computing_resource_allocation cluster=logical_behaviour level=design "Computing resource allocation" {
  element object_detection "Object detection"
}
view performance_monitoring cluster=logical_behaviour level=runtime "Performance monitoring" {
  element object_detection "Object detection"
}

view hardware_overview cluster=hardware level=analytical "High level hardware" {
  element sensor "Sensor"
}
view system_hardware_architecture cluster=hardware level=conceptual "System hardware architecture" {
  element sensor "Sensor"
}
view component_hardware_architecture cluster=hardware level=design "Component hardware architecture" {
  element sensor "Sensor"
}
view hardware_monitoring cluster=hardware level=runtime "Hardware monitoring" {
  element sensor "Sensor"
}

refine function_components -> logical_components
refine logical_components -> computing_resource_allocation
refine computing_resource_allocation -> performance_monitoring
refine hardware_overview -> system_hardware_architecture
refine system_hardware_architecture -> component_hardware_architecture
refine component_hardware_architecture -> hardware_monitoring

morphism M-A from=hardware_overview to=function_components {
  map sensor -> object_detection
  desc "Detection depends on the sensor"
}
morphism M-B from=system_hardware_architecture to=logical_components inherits=M-A {
  map sensor -> object_detection
}
morphism M-C from=component_hardware_architecture to=computing_resource_allocation inherits=M-B {
  map sensor -> object_detection
}
morphism M-D from=hardware_monitoring to=performance_monitoring inherits=M-C {
  map sensor -> object_detection
}
'''


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _format_diagnostic(d: Diagnostic, file: str) -> str:
    loc = d.location or SourceSpan(file, 1, 1)
    text = f"{d.code} {d.severity} {loc.file}:{loc.line}:{loc.column} {d.message}"
    if d.entities:
        text += " [" + ", ".join(d.entities) + "]"
    return text


def _load(path: str) -> Optional[dsl.ParseResult]:
    try:
        return dsl.parse_file(path)
    except OSError as exc:
        print(f"archcat: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        return None
    except UnicodeDecodeError as exc:
        print(f"archcat: {path} is not valid UTF-8: {exc}", file=sys.stderr)
        return None


def _load_framework(path: str):
    result = _load(path)
    if result is None:
        return None
    if not result.ok:
        for d in result.diagnostics:
            print(_format_diagnostic(d, path), file=sys.stderr)
        return None
    return result


def cmd_check(args) -> int:
    result = _load(args.file)
    if result is None:
        return EXIT_USAGE
    config = rules.CheckConfig.lenient() if args.lenient else rules.CheckConfig()
    if result.ok:
        report = rules.check_all(result.framework, config, spans=result.span_map)
        report.diagnostics[:0] = result.diagnostics  # parse warnings
    else:
        report = rules.CheckReport(list(result.diagnostics), [])

    if args.format == "json":
        sys.stdout.write(render.render_json(result.framework, report))
    else:
        for d in report.diagnostics:
            print(_format_diagnostic(d, args.file))
        print(f"{report.errors} errors, {report.warnings} warnings")

    if not result.ok:
        return EXIT_USAGE
    if report.errors or (args.deny_warnings and report.warnings):
        return EXIT_ERRORS
    return EXIT_OK


def cmd_trace(args) -> int:
    result = _load_framework(args.file)
    if result is None:
        return EXIT_USAGE
    fw = result.framework
    if args.morphism not in fw.morphism_by_id:
        print(f"archcat: unknown morphism {args.morphism!r}", file=sys.stderr)
        return EXIT_USAGE
    report = rules.check_all(fw, spans=result.span_map)
    blocking = [d for d in report.diagnostics if d.code in ("E000", "E001", "E002", "E003", "E022")]
    if blocking:
        for d in blocking:
            print(_format_diagnostic(d, args.file), file=sys.stderr)
        return EXIT_ERRORS
    try:
        chain = trace.trace_morphism(fw, args.morphism)
    except trace.InheritanceCycle as exc:
        print(f"archcat: {exc}", file=sys.stderr)
        return EXIT_ERRORS
    for mid in chain:
        print(f"{mid} ({fw.view_by_id[fw.morphism_by_id[mid].source].level})")
    return EXIT_OK


def cmd_impact(args) -> int:
    result = _load_framework(args.file)
    if result is None:
        return EXIT_USAGE
    fw = result.framework
    try:
        found = trace.impact(fw, args.view)
    except UnknownReference as exc:
        print(f"archcat: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    print(f"origin: {found.origin} ({fw.view_by_id[found.origin].level})")
    print("same-level:")
    for v in sorted(found.same_level):
        print(f"  {v}")
    print("downstream:")
    for v in sorted(found.downstream, key=lambda v: (fw.level_index(v), v)):
        print(f"  {v} ({fw.view_by_id[v].level})")
    return EXIT_OK


def cmd_render(args) -> int:
    result = _load_framework(args.file)
    if result is None:
        return EXIT_USAGE
    fw = result.framework
    if args.format == "matrix":
        sys.stdout.write(render.render_matrix(fw))
        return EXIT_OK
    report = rules.check_all(fw, spans=result.span_map)
    if args.format == "dot":
        sys.stdout.write(render.render_graph(fw, report))
    else:
        sys.stdout.write(render.render_json(fw, report))
    return EXIT_OK


def cmd_init(args) -> int:
    try:
        with open(args.path, "x", encoding="utf-8") as fh:
            fh.write(SKELETON)
    except FileExistsError:
        print(f"archcat: {args.path} already exists; not overwriting", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"archcat: cannot write {args.path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"archcat: wrote {args.path}", file=sys.stderr)
    return EXIT_OK


def cmd_fmt(args) -> int:
    result = _load_framework(args.file)
    if result is None:
        return EXIT_USAGE
    text = dsl.format(result.framework)
    if not args.write:
        sys.stdout.write(text)
        return EXIT_OK
    if not os.access(args.file, os.W_OK):
        print(f"archcat: {args.file} is not writable", file=sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.file, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"archcat: cannot write {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="archcat", description="Check compositional architecture frameworks.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check", help="run all consistency rules")
    p.add_argument("file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true", help="missing refinements are errors (default)")
    mode.add_argument("--lenient", action="store_true", help="missing refinements are warnings")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--deny-warnings", action="store_true", help="exit 1 on warnings too")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trace", help="print the inheritance chain of a morphism")
    p.add_argument("file")
    p.add_argument("morphism")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("impact", help="list views affected by a change to a view")
    p.add_argument("file")
    p.add_argument("view")
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("render", help="render the framework as a matrix, DOT graph or JSON")
    p.add_argument("file")
    p.add_argument("--format", choices=("matrix", "dot", "json"), default="matrix")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("init", help="write a skeleton framework file")
    p.add_argument("path")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("fmt", help="print or rewrite the file in canonical form")
    p.add_argument("file")
    p.add_argument("--write", action="store_true", help="rewrite the file in place")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
