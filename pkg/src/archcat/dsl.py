"""Reader and canonical writer for ``.arch`` framework descriptions.

Grammar (``#`` starts a comment that runs to end of line)::

    file      := stmt*
    stmt      := fwdecl | level | group | cluster | view | refine | morphism | product
    fwdecl    := "framework" STRING
    level     := "level" IDENT [STRING]
    group     := "group" IDENT STRING
    cluster   := "cluster" IDENT "group" "=" IDENT STRING
    view      := "view" IDENT "cluster" "=" IDENT "level" "=" IDENT [STRING]
                 "{" element* "}"
    element   := "element" IDENT [STRING]
    refine    := "refine" IDENT "->" IDENT
    morphism  := "morphism" IDENT "from" "=" IDENT "to" "=" IDENT
                 ["inherits" "=" IDENT] ["iso"]
                 "{" mapping* ["desc" STRING] "}"
    mapping   := "map" IDENT "->" IDENT
    product   := "product" IDENT "=" IDENT "x" IDENT "proj" "=" IDENT "," IDENT

Identifiers match ``[A-Za-z_][A-Za-z0-9_-]*`` (so ``A-01`` is one token);
strings are double quoted with ``\\"`` and ``\\\\`` as the only escapes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from archcat.model import (
    Cluster,
    Diagnostic,
    Element,
    Framework,
    Group,
    Level,
    Morphism,
    ProductDecl,
    Refinement,
    SourceSpan,
    View,
    structural_problems,
)

STATEMENTS = ("framework", "level", "group", "cluster", "view", "refine", "morphism", "product")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_](?:[A-Za-z0-9_]|-(?!>))*)
  | (?P<string>"(?:[^"\\\n]|\\["\\])*")
  | (?P<sym>[={},])
    """,
    re.VERBOSE,
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | string | sym | bad | eof
    value: str
    line: int
    column: int
    length: int


@dataclass
class ParseResult:
    framework: Optional[Framework]
    diagnostics: list[Diagnostic] = field(default_factory=list)
    span_map: dict[tuple[str, str], SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.framework is not None

    def span(self, kind: str, entity: str) -> Optional[SourceSpan]:
        return self.span_map.get((kind, entity))


class _SyntaxError(Exception):
    def __init__(self, message: str, token: Token):
        super().__init__(message)
        self.token = token


def _unescape(raw: str) -> str:
    return re.sub(r"\\([\"\\])", r"\1", raw[1:-1])


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.diagnostics: list[Diagnostic] = []
        self.tokens = self._lex(text)
        self.pos = 0
        self.spans: dict[tuple[str, str], list[SourceSpan]] = {}

        self.name: Optional[str] = None
        self.levels: list[Level] = []
        self.groups: list[Group] = []
        self.clusters: list[Cluster] = []
        self.views: list[View] = []
        self.morphisms: list[Morphism] = []
        self.refinements: list[Refinement] = []
        self.products: list[ProductDecl] = []
        # morphism id -> [(left, right, span)] in source order
        self.maps: dict[int, list[tuple[str, str, SourceSpan]]] = {}

    # -- lexing ---------------------------------------------------------

    def _lex(self, text: str) -> list[Token]:
        tokens = []
        line, line_start, pos = 1, 0, 0
        while pos < len(text):
            match = _TOKEN.match(text, pos)
            col = pos - line_start + 1
            if match is None:
                bad = text[pos]
                if bad == '"':
                    self._error("E000", "unterminated string", SourceSpan(self.file, line, col, 1))
                    end = text.find("\n", pos)
                    pos = len(text) if end < 0 else end
                else:
                    self._error("E000", f"unexpected character {bad!r}", SourceSpan(self.file, line, col, 1))
                    # keep a placeholder so the parser recovers without a second report
                    tokens.append(Token("bad", bad, line, col, 1))
                    pos += 1
                continue
            kind = match.lastgroup
            value = match.group()
            if kind == "nl":
                line += 1
                line_start = match.end()
            elif kind in ("ident", "string"):
                tokens.append(Token(kind, value, line, col, len(value)))
            elif kind in ("arrow", "sym"):
                tokens.append(Token("sym", value, line, col, len(value)))
            pos = match.end()
        tokens.append(Token("eof", "", line, pos - line_start + 1, 0))
        return tokens

    # -- helpers --------------------------------------------------------

    def _error(self, code: str, message: str, span: SourceSpan, entities=(),
               severity="error", rule="STRUCTURE"):
        self.diagnostics.append(Diagnostic(code, severity, message, span, tuple(entities), rule))

    def _span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.column, tok.length)

    def _record(self, kind: str, entity: str, tok: Token):
        self.spans.setdefault((kind, entity), []).append(self._span(tok))

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _expect_ident(self, what: str) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise _SyntaxError(f"expected {what}, found {self._describe(tok)}", tok)
        return self._next()

    def _expect_keyword(self, word: str) -> Token:
        tok = self.tok
        if tok.kind != "ident" or tok.value != word:
            raise _SyntaxError(f"expected '{word}', found {self._describe(tok)}", tok)
        return self._next()

    def _expect_sym(self, sym: str) -> Token:
        tok = self.tok
        if tok.kind != "sym" or tok.value != sym:
            raise _SyntaxError(f"expected '{sym}', found {self._describe(tok)}", tok)
        return self._next()

    def _expect_string(self, what: str) -> str:
        tok = self.tok
        if tok.kind != "string":
            raise _SyntaxError(f"expected {what}, found {self._describe(tok)}", tok)
        return _unescape(self._next().value)

    def _optional_string(self) -> Optional[str]:
        if self.tok.kind == "string":
            return _unescape(self._next().value)
        return None

    def _keyword_value(self, word: str) -> Token:
        self._expect_keyword(word)
        self._expect_sym("=")
        return self._expect_ident(f"identifier after '{word}='")

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "eof":
            return "end of file"
        return repr(tok.value)

    def _at_keyword(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.value == word

    def _recover(self, start: int):
        # skip to the next statement keyword that starts a line
        if self.pos == start:
            self._next()
        while self.tok.kind != "eof":
            if self.tok.kind == "ident" and self.tok.value in STATEMENTS and self._first_on_line():
                return
            self._next()

    def _first_on_line(self) -> bool:
        return self.pos == 0 or self.tokens[self.pos - 1].line != self.tok.line

    # -- statements -----------------------------------------------------

    def parse_file(self):
        while self.tok.kind != "eof":
            tok, start = self.tok, self.pos
            try:
                if tok.kind != "ident" or tok.value not in STATEMENTS:
                    raise _SyntaxError(f"expected a statement, found {self._describe(tok)}", tok)
                getattr(self, "_stmt_" + tok.value)()
            except _SyntaxError as exc:
                if exc.token.kind != "bad":  # already reported by the lexer
                    self._error("E000", str(exc), self._span(exc.token))
                self._recover(start)

    def _stmt_framework(self):
        kw = self._next()
        name = self._expect_string("framework name")
        if self.name is not None:
            self._error("E001", "framework declared more than once", self._span(kw))
            return
        self.name = name

    def _stmt_level(self):
        self._next()
        ident = self._expect_ident("level id")
        display = self._optional_string()
        self._record("level", ident.value, ident)
        self.levels.append(Level(ident.value, len(self.levels), display))

    def _stmt_group(self):
        self._next()
        ident = self._expect_ident("group id")
        display = self._expect_string("group display name")
        self._record("group", ident.value, ident)
        self.groups.append(Group(ident.value, display))

    def _stmt_cluster(self):
        self._next()
        ident = self._expect_ident("cluster id")
        group = self._keyword_value("group")
        display = self._expect_string("cluster display name")
        self._record("cluster", ident.value, ident)
        self.clusters.append(Cluster(ident.value, group.value, display))

    def _stmt_view(self):
        self._next()
        ident = self._expect_ident("view id")
        cluster = self._keyword_value("cluster")
        level = self._keyword_value("level")
        display = self._optional_string()
        self._expect_sym("{")
        elements = []
        while not (self.tok.kind == "sym" and self.tok.value == "}"):
            self._expect_keyword("element")
            elem = self._expect_ident("element id")
            elem_display = self._optional_string()
            self._record("element", f"{ident.value}.{elem.value}", elem)
            elements.append(Element(elem.value, elem_display))
        self._expect_sym("}")
        self._record("view", ident.value, ident)
        self.views.append(View(ident.value, cluster.value, level.value, display, tuple(elements)))

    def _stmt_refine(self):
        kw = self._next()
        source = self._expect_ident("view id")
        self._expect_sym("->")
        target = self._expect_ident("view id")
        self._record("refinement", f"{source.value}->{target.value}", kw)
        self.refinements.append(Refinement(source.value, target.value))

    def _stmt_morphism(self):
        self._next()
        ident = self._expect_ident("morphism id")
        source = self._keyword_value("from")
        target = self._keyword_value("to")
        inherits = None
        if self._at_keyword("inherits"):
            inherits = self._keyword_value("inherits").value
        iso = False
        if self._at_keyword("iso"):
            self._next()
            iso = True
        self._expect_sym("{")
        maps = []
        description = None
        while not (self.tok.kind == "sym" and self.tok.value == "}"):
            if self._at_keyword("desc"):
                self._next()
                description = self._expect_string("description")
                break
            kw = self._expect_keyword("map")
            left = self._expect_ident("element id")
            self._expect_sym("->")
            right = self._expect_ident("element id")
            maps.append((left.value, right.value, self._span(kw)))
        self._expect_sym("}")
        self._record("morphism", ident.value, ident)
        self.maps[len(self.morphisms)] = maps
        self.morphisms.append(Morphism(
            ident.value, source.value, target.value, frozenset(),
            description, inherits, iso,
        ))

    def _stmt_product(self):
        self._next()
        product = self._expect_ident("product view id")
        self._expect_sym("=")
        left = self._expect_ident("view id")
        self._expect_keyword("x")
        right = self._expect_ident("view id")
        proj_left = self._keyword_value("proj")
        self._expect_sym(",")
        proj_right = self._expect_ident("projection morphism id")
        self._record("product", product.value, product)
        self.products.append(ProductDecl(
            product.value, left.value, right.value, proj_left.value, proj_right.value,
        ))

    # -- resolution -----------------------------------------------------

    def resolve(self) -> Framework:
        view_elems: dict[str, set[str]] = {}
        for v in self.views:
            view_elems.setdefault(v.id, set()).update(v.element_ids)

        morphisms = []
        for i, m in enumerate(self.morphisms):
            pairs = set()
            for left, right, span in self.maps[i]:
                if (left, right) in pairs:
                    self._error("W001", f"duplicate mapping {left} -> {right} in morphism {m.id!r}",
                                span, (m.id,), severity="warning")
                    continue
                for elem, end in ((left, m.source), (right, m.target)):
                    if end in view_elems and elem not in view_elems[end]:
                        self._error("E011", f"morphism {m.id!r} maps {elem!r}, which is not an element of view {end!r}",
                                    span, (m.id, end, elem), rule="R2")
                pairs.add((left, right))
            morphisms.append(Morphism(m.id, m.source, m.target, frozenset(pairs),
                                      m.description, m.inherits, m.iso))

        fw = Framework(
            name=self.name or "",
            levels=tuple(self.levels),
            groups=tuple(self.groups),
            clusters=tuple(self.clusters),
            views=tuple(self.views),
            morphisms=tuple(morphisms),
            refinements=tuple(self.refinements),
            products=tuple(self.products),
        )
        for problem in structural_problems(fw):
            spans = self.spans.get((problem.kind, problem.entity), [])
            if problem.code == "E001" and len(spans) > 1:
                span = spans[1]
            elif spans:
                span = spans[0]
            else:
                span = SourceSpan(self.file, 1, 1, 0)
            self._error(problem.code, problem.message, span, problem.entities)
        return fw


def parse(text: str, file: str = "<string>") -> ParseResult:
    """Parse an ``.arch`` description.

    The result carries a framework only when no error was diagnosed; every
    diagnostic points into ``text``.
    """
    parser = _Parser(text, file)
    parser.parse_file()
    syntax_ok = not any(d.is_error for d in parser.diagnostics)
    fw = parser.resolve() if syntax_ok else None
    failed = any(d.is_error for d in parser.diagnostics)
    diagnostics = sorted(
        parser.diagnostics,
        key=lambda d: (d.location.line, d.location.column, d.code) if d.location else (0, 0, d.code),
    )
    span_map = {key: spans[0] for key, spans in parser.spans.items()}
    return ParseResult(None if failed else fw, diagnostics, span_map)


def parse_file(path) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))


def _ident(value: str) -> str:
    if not _IDENT.match(value) or value.endswith("-"):
        raise ValueError(f"{value!r} is not a valid identifier")
    return value


def format(framework: Framework) -> str:  # noqa: A001 - mirrors the CLI verb
    """Canonical text for ``framework``; ``parse(format(f))`` reproduces ``f``."""
    fw = framework
    out = [f"framework {_quote(fw.name)}"]
    out.extend(
        f"level {_ident(lv.id)}" + (f" {_quote(lv.display_name)}" if lv.display_name is not None else "")
        for lv in fw.levels
    )

    def section(lines):
        if lines:
            out.append("")
            out.extend(lines)

    section([f"group {_ident(g.id)} {_quote(g.display_name)}" for g in fw.groups])
    section([
        f"cluster {_ident(c.id)} group={_ident(c.group)} {_quote(c.display_name)}"
        for c in fw.clusters
    ])

    views = []
    for v in fw.views:
        head = f"view {_ident(v.id)} cluster={_ident(v.cluster)} level={_ident(v.level)}"
        if v.display_name is not None:
            head += f" {_quote(v.display_name)}"
        if not v.elements:
            views.append(head + " {}")
            continue
        views.append(head + " {")
        for e in v.elements:
            views.append(f"  element {_ident(e.id)}"
                         + (f" {_quote(e.display_name)}" if e.display_name is not None else ""))
        views.append("}")
    section(views)

    section([f"refine {_ident(r.source)} -> {_ident(r.target)}" for r in fw.refinements])

    morphisms = []
    for m in fw.morphisms:
        head = f"morphism {_ident(m.id)} from={_ident(m.source)} to={_ident(m.target)}"
        if m.inherits is not None:
            head += f" inherits={_ident(m.inherits)}"
        if m.iso:
            head += " iso"
        body = [f"  map {_ident(a)} -> {_ident(b)}" for a, b in sorted(m.pairs)]
        if m.description is not None:
            body.append(f"  desc {_quote(m.description)}")
        if body:
            morphisms.extend([head + " {", *body, "}"])
        else:
            morphisms.append(head + " {}")
    section(morphisms)

    section([
        f"product {_ident(p.product)} = {_ident(p.left)} x {_ident(p.right)} "
        f"proj={_ident(p.proj_left)}, {_ident(p.proj_right)}"
        for p in fw.products
    ])
    return "\n".join(out) + "\n"
