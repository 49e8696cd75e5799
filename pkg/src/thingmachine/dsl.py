"""Textual ``.tm`` front-end.

Grammar::

    file      := item*
    item      := thimac | edge
    thimac    := 'thimac' NAME '{' (stages | thimac | edge)* '}'
    stages    := stage+ ';'
    stage     := 'create' | 'process' | 'release' | 'receive'
               | 'transfer' ('in' | 'out')?          # bare transfer = both ports
    edge      := ('flow' | 'trigger') ref '->' ref ';'
    ref       := (NAME '.')* stage ('.' ('in' | 'out'))?

References resolve relative to the enclosing thimac first, then outwards
to the top level; a ref with no thimac path names a stage of the
enclosing thimac.  ``#`` starts a comment that runs to end of line.

The parser never raises on bad input: every problem becomes a
:class:`Diagnostic` with a source span, and parsing resumes at the next
``;`` or ``}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ModelError
from .model import Port, StageKind, StaticModel, stage_id

STAGE_WORDS = {k.value: k for k in StageKind}
PORT_WORDS = {p.value: p for p in Port}


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, order=True)
class SourceSpan:
    line: int
    column: int
    file: str = field(default="<string>", compare=False)

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError("spans are 1-based")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    # Syntax problems are tool failures; everything else is a model finding.
    @property
    def is_syntax(self) -> bool:
        return self.code in ("Syntax", "UnexpectedCharacter")

    def __str__(self) -> str:
        return f"{self.span}: {self.severity.value} {self.code}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "sym" or "eof"
    text: str
    span: SourceSpan


def tokenize(text: str, file: str = "<string>") -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i, line, col, n = 0, 1, 1, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col, file)
        if c.isascii() and (c.isalpha() or c == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], span))
            col += j - i
            i = j
            continue
        if text.startswith("->", i):
            tokens.append(Token("sym", "->", span))
            i, col = i + 2, col + 2
            continue
        if c in "{};.":
            tokens.append(Token("sym", c, span))
            i, col = i + 1, col + 1
            continue
        diags.append(Diagnostic(Severity.ERROR, "UnexpectedCharacter", f"unexpected character {c!r}", span))
        i, col = i + 1, col + 1
    tokens.append(Token("eof", "", SourceSpan(line, col, file)))
    return tokens, diags


# -- syntax tree ---------------------------------------------------------


@dataclass
class StageDecl:
    kind: StageKind
    port: Port | None
    span: SourceSpan


@dataclass
class Ref:
    parts: list[str]
    span: SourceSpan

    def __str__(self) -> str:
        return ".".join(self.parts)


@dataclass
class EdgeDecl:
    trigger: bool
    source: Ref
    target: Ref
    span: SourceSpan


@dataclass
class ThimacDecl:
    name: str
    span: SourceSpan
    stages: list[StageDecl] = field(default_factory=list)
    children: list[ThimacDecl] = field(default_factory=list)
    edges: list[EdgeDecl] = field(default_factory=list)


class _Recover(Exception):
    pass


class Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def error(self, message: str, span: SourceSpan | None = None) -> _Recover:
        self.diags.append(Diagnostic(Severity.ERROR, "Syntax", message, span or self.tok.span))
        return _Recover()

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {got!r}")
        return self.advance()

    def expect_name(self, what: str) -> Token:
        if self.tok.kind != "name":
            got = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {got!r}")
        return self.advance()

    def synchronize(self) -> None:
        """Skip to just past the next ';' or up to the next '}'."""
        while self.tok.kind != "eof":
            if self.at(";"):
                self.advance()
                return
            if self.at("}"):
                return
            self.advance()

    def parse_file(self) -> tuple[list[ThimacDecl], list[EdgeDecl]]:
        thimacs: list[ThimacDecl] = []
        edges: list[EdgeDecl] = []
        while self.tok.kind != "eof":
            try:
                if self.at("thimac"):
                    thimacs.append(self.parse_thimac())
                elif self.at("flow") or self.at("trigger"):
                    edges.append(self.parse_edge())
                elif self.at("}"):
                    self.error("unmatched '}'")
                    self.advance()
                else:
                    raise self.error(f"expected 'thimac', 'flow' or 'trigger', found {self.tok.text!r}")
            except _Recover:
                self.synchronize()
                if self.at("}"):
                    self.advance()
        return thimacs, edges

    def parse_thimac(self) -> ThimacDecl:
        start = self.expect("thimac")
        name = self.expect_name("a thimac name")
        if name.text in STAGE_WORDS or name.text in ("thimac", "flow", "trigger"):
            raise self.error(f"{name.text!r} is a keyword and cannot name a thimac", name.span)
        decl = ThimacDecl(name.text, start.span)
        self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error(f"thimac {decl.name!r} is missing its closing '}}'")
            try:
                if self.at("thimac"):
                    decl.children.append(self.parse_thimac())
                elif self.at("flow") or self.at("trigger"):
                    decl.edges.append(self.parse_edge())
                elif self.tok.text in STAGE_WORDS:
                    decl.stages.extend(self.parse_stages())
                else:
                    raise self.error(f"expected a stage, thimac or edge, found {self.tok.text!r}")
            except _Recover:
                self.synchronize()
        self.advance()
        return decl

    def parse_stages(self) -> list[StageDecl]:
        out = []
        while self.tok.text in STAGE_WORDS and self.tok.kind == "name":
            t = self.advance()
            kind = STAGE_WORDS[t.text]
            if kind is StageKind.TRANSFER and self.tok.kind == "name" and self.tok.text in PORT_WORDS:
                out.append(StageDecl(kind, PORT_WORDS[self.advance().text], t.span))
            elif kind is StageKind.TRANSFER:
                out.append(StageDecl(kind, Port.IN, t.span))
                out.append(StageDecl(kind, Port.OUT, t.span))
            else:
                out.append(StageDecl(kind, None, t.span))
        self.expect(";")
        return out

    def parse_edge(self) -> EdgeDecl:
        kw = self.advance()
        src = self.parse_ref()
        self.expect("->")
        dst = self.parse_ref()
        self.expect(";")
        return EdgeDecl(kw.text == "trigger", src, dst, kw.span)

    def parse_ref(self) -> Ref:
        first = self.expect_name("a stage reference")
        parts = [first.text]
        while self.at("."):
            self.advance()
            parts.append(self.expect_name("a name after '.'").text)
        return Ref(parts, first.span)


# -- building the model ----------------------------------------------------


class _Builder:
    def __init__(self, model: StaticModel) -> None:
        self.model = model
        self.diags: list[Diagnostic] = []

    def fail(self, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(Severity.ERROR, code, message, span))

    def declare(self, decl: ThimacDecl, parent: str | None, pending: list) -> None:
        try:
            tid = self.model.add_thimac(decl.name, parent)
        except ModelError as exc:
            self.fail(exc.code, exc.message, decl.span)
            return
        for s in decl.stages:
            try:
                self.model.add_stage(tid, s.kind, s.port)
            except ModelError as exc:
                self.fail(exc.code, exc.message, s.span)
        for child in decl.children:
            self.declare(child, tid, pending)
        pending.extend((tid, e) for e in decl.edges)

    def resolve(self, ref: Ref, scope: str | None) -> str | None:
        parts = ref.parts
        idx = next((i for i, p in enumerate(parts) if p in STAGE_WORDS), None)
        if idx is None:
            self.fail("BadReference", f"{ref} does not name a stage", ref.span)
            return None
        path, kind, rest = parts[:idx], STAGE_WORDS[parts[idx]], parts[idx + 1 :]
        if rest and not (kind is StageKind.TRANSFER and len(rest) == 1 and rest[0] in PORT_WORDS):
            self.fail("BadReference", f"unexpected {'.'.join(rest)!r} after {kind.value} in {ref}", ref.span)
            return None
        thimac = self._thimac(path, scope)
        if thimac is None:
            where = ".".join(path) if path else "(no enclosing thimac)"
            self.fail("UnknownThimac", f"{ref}: no thimac {where}", ref.span)
            return None
        if kind is StageKind.TRANSFER and not rest:
            ports = [p for p in Port if stage_id(thimac, kind, p) in self.model.stages]
            if len(ports) != 1:
                why = "has both transfer ports; write .in or .out" if ports else "has no transfer port"
                self.fail("AmbiguousPort" if ports else "UnknownStage", f"{ref}: {thimac} {why}", ref.span)
                return None
            return stage_id(thimac, kind, ports[0])
        sid = stage_id(thimac, kind, PORT_WORDS[rest[0]] if rest else None)
        if sid not in self.model.stages:
            self.fail("UnknownStage", f"{ref}: thimac {thimac} has no such stage", ref.span)
            return None
        return sid

    def _thimac(self, path: list[str], scope: str | None) -> str | None:
        if not path:
            return scope
        scopes = []
        while scope is not None:
            scopes.append(scope)
            scope = self.model.thimacs[scope].parent
        for base in scopes + [None]:
            tid = ".".join(([base] if base else []) + path)
            if tid in self.model.thimacs:
                return tid
        return None

    def connect(self, scope: str | None, e: EdgeDecl) -> None:
        src, dst = self.resolve(e.source, scope), self.resolve(e.target, scope)
        if src is None or dst is None:
            return
        try:
            if e.trigger:
                self.model.add_trigger(src, dst)
            else:
                self.model.add_flow(src, dst)
        except ModelError as exc:
            self.fail(exc.code, exc.message, e.span)


def parse_model(text: str, file: str = "<string>") -> tuple[StaticModel, list[Diagnostic]]:
    """Parse ``.tm`` source.  Returns the (possibly partial) model and diagnostics in span order."""
    tokens, lex_diags = tokenize(text, file)
    parser = Parser(tokens)
    thimac_decls, top_edges = parser.parse_file()
    builder = _Builder(StaticModel())
    pending: list = []
    for decl in thimac_decls:
        builder.declare(decl, None, pending)
    pending.extend((None, e) for e in top_edges)
    for scope, edge in pending:
        builder.connect(scope, edge)
    diags = sorted(lex_diags + parser.diags + builder.diags, key=lambda d: (d.span.line, d.span.column))
    return builder.model, diags


def _stage_order(model: StaticModel, sid: str):
    s = model.stages[sid]
    return (list(StageKind).index(s.kind), s.port.value if s.port else "")


def print_model(model: StaticModel) -> str:
    """Render a model back to ``.tm`` source; edges are printed with absolute references."""
    lines: list[str] = []

    def emit(tid: str, depth: int) -> None:
        pad = "    " * depth
        lines.append(f"{pad}thimac {model.thimacs[tid].name} {{")
        for sid in sorted((s for s in model.thimacs[tid].stages if s in model.stages), key=lambda s: _stage_order(model, s)):
            lines.append(f"{pad}    {model.stages[sid].label};")
        for child in model.children(tid):
            emit(child, depth + 1)
        lines.append(f"{pad}}}")

    for root in model.children(None):
        emit(root, 0)
    for f in sorted(model.flows.values(), key=lambda f: f.id):
        lines.append(f"flow {f.source} -> {f.target};")
    for t in sorted(model.triggers.values(), key=lambda t: t.id):
        lines.append(f"trigger {t.source} -> {t.target};")
    return "\n".join(lines) + "\n"
