"""Text format for schemas and instances.

The format is whitespace-insensitive (newlines are just spacing), ``#`` starts
a comment that runs to end of line, identifiers are ``[A-Za-z0-9_]+``, and
strings are double-quoted with exactly two escapes: ``\\"`` and ``\\\\``.

Schema blocks::

    schema "chain-olog" {
      box A "an amino acid"
      arrow 1 : A -> E "has" [conjecture]
      eq A..F : [1,10] = [2] "optional note"
      pullback F = D ×[H] J proj (12, 13) legs (9, 26)
    }

Instance blocks::

    instance "protein" of "chain-olog" {
      set A { aa1 = real 23.45, aa2 }
      set Q { q1 = pair (20.55, 50.6), q2 = pair (inf, 20.6) }
      set H { h1 = graph { n1 -> n2, n3 } }
      set W { w1 = text "free text" }
      fn 1 { aa1 -> e1 }
    }

Real literals accept ``inf``/``-inf``; a bare exponent needs an explicit sign
(``1e+16``), since ``1e16`` would be indistinguishable from an identifier.

Serialization is canonical and byte-deterministic: declarations sorted by
natural key, empty sets and tables dropped, floats via ``repr``.  Parsing a
serialized document and serializing again reproduces it byte for byte.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path as FsPath

from .errors import DuplicateIdError, ParseError, SourceSpan
from .graphs import Graph
from .instance import (
    GraphPayload,
    Instance,
    PairPayload,
    Payload,
    RealPayload,
    TextPayload,
)
from .ordering import natural_key
from .schema import (
    ArrowDecl,
    BoxDecl,
    FiberProductDecl,
    OlogSchema,
    Path,
    PathEquation,
    path_endpoints,
    with_fiber_product_squares,
)

__all__ = [
    "parse_schema",
    "parse_instance",
    "load_schema",
    "load_instance",
    "serialize_schema",
    "serialize_instance",
]

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[^\S\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<nl>\n)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<number>-?\d+\.\d+(?:[eE][+-]?\d+)?|-?\d+[eE][+-]\d+|-\d+|-inf)
    | (?P<ident>[A-Za-z0-9_]+)
    | (?P<arrowsym>->)
    | (?P<dotdot>\.\.)
    | (?P<times>×)
    | (?P<punct>[{}()\[\]:=,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str, filename: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            ch = text[pos]
            span = SourceSpan(filename, line, col)
            if ch == '"':
                raise ParseError("unterminated string", span)
            raise ParseError(f"unexpected character {ch!r}", span)
        kind = match.lastgroup
        lexeme = match.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = match.end()
    return tokens


def _unescape(raw: str, span: SourceSpan) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body) or body[i + 1] not in ('"', "\\"):
                raise ParseError(
                    f"invalid escape \\{body[i + 1 : i + 2]} in string", span
                )
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = _tokenize(text, filename)
        self.pos = 0

    # -- primitives --------------------------------------------------------

    def span(self) -> SourceSpan:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            return SourceSpan(self.filename, tok.line, tok.column)
        if self.tokens:
            last = self.tokens[-1]
            return SourceSpan(self.filename, last.line, last.column + len(last.text))
        return SourceSpan(self.filename, 1, 1)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def take(self, kind: str, text: str | None = None) -> _Token | None:
        if self.at(kind, text):
            tok = self.tokens[self.pos]
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str, text: str | None = None, what: str = "") -> _Token:
        tok = self.take(kind, text)
        if tok is None:
            wanted = what or (text if text is not None else kind)
            got = self.peek()
            found = f"{got.text!r}" if got else "end of input"
            raise ParseError(f"expected {wanted}, found {found}", self.span())
        return tok

    def ident(self, what: str = "identifier") -> str:
        return self.expect("ident", what=what).text

    def string(self, what: str = "string") -> str:
        span = self.span()
        return _unescape(self.expect("string", what=what).text, span)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    # -- shared pieces ------------------------------------------------------

    def tag_group(self) -> frozenset[str]:
        if not self.take("punct", "["):
            return frozenset()
        tags: set[str] = set()
        if not self.at("punct", "]"):
            tags.add(self.ident("tag"))
            while self.take("punct", ","):
                if self.at("punct", "]"):
                    break
                tags.add(self.ident("tag"))
        self.expect("punct", "]")
        return frozenset(tags)

    def path_literal(self, start_box: str) -> Path:
        self.expect("punct", "[", what="'[' starting a path")
        arrows: list[str] = []
        if not self.at("punct", "]"):
            arrows.append(self.ident("arrow id"))
            while self.take("punct", ","):
                if self.at("punct", "]"):
                    break
                arrows.append(self.ident("arrow id"))
        self.expect("punct", "]")
        return Path(start_box, tuple(arrows))

    # -- schema -------------------------------------------------------------

    def schema_block(self) -> OlogSchema:
        self.expect("ident", "schema")
        name = self.string("schema name")
        self.expect("punct", "{")

        boxes: list[BoxDecl] = []
        arrows: list[ArrowDecl] = []
        equations: list[PathEquation] = []
        eq_spans: list[tuple[SourceSpan, str, str]] = []
        fps: list[FiberProductDecl] = []
        fp_spans: list[tuple[SourceSpan, str, str, str]] = []
        box_ids: set[str] = set()
        arrow_ids: set[str] = set()
        apexes: set[str] = set()

        while not self.at("punct", "}"):
            span = self.span()
            tok = self.peek()
            if tok is None:
                raise ParseError("unterminated schema block", span)
            if self.take("ident", "box"):
                box_id = self.ident("box id")
                label = self.string("box label")
                tags = self.tag_group()
                if box_id in box_ids:
                    raise DuplicateIdError(f"box {box_id!r} declared twice", span)
                box_ids.add(box_id)
                boxes.append(BoxDecl(box_id, label, tags))
            elif self.take("ident", "arrow"):
                arrow_id = self.ident("arrow id")
                self.expect("punct", ":")
                src = self.ident("source box")
                self.expect("arrowsym", what="'->'")
                dst = self.ident("target box")
                label = self.string() if self.at("string") else ""
                tags = self.tag_group()
                if arrow_id in arrow_ids:
                    raise DuplicateIdError(f"arrow {arrow_id!r} declared twice", span)
                arrow_ids.add(arrow_id)
                arrows.append(ArrowDecl(arrow_id, src, dst, label, tags))
            elif self.take("ident", "eq"):
                start = self.ident("start box")
                self.expect("dotdot", what="'..'")
                end = self.ident("end box")
                self.expect("punct", ":")
                lhs = self.path_literal(start)
                self.expect("punct", "=")
                rhs = self.path_literal(start)
                note = self.string() if self.at("string") else ""
                equations.append(PathEquation(lhs, rhs, note))
                eq_spans.append((span, start, end))
            elif self.take("ident", "pullback"):
                apex = self.ident("apex box")
                self.expect("punct", "=")
                x = self.ident("first corner box")
                self.expect("times", what="'×'")
                self.expect("punct", "[")
                z = self.ident("cospan target box")
                self.expect("punct", "]")
                y = self.ident("second corner box")
                self.expect("ident", "proj")
                self.expect("punct", "(")
                proj1 = self.ident("projection arrow")
                self.expect("punct", ",")
                proj2 = self.ident("projection arrow")
                self.expect("punct", ")")
                self.expect("ident", "legs")
                self.expect("punct", "(")
                leg1 = self.ident("leg arrow")
                self.expect("punct", ",")
                leg2 = self.ident("leg arrow")
                self.expect("punct", ")")
                if apex in apexes:
                    raise DuplicateIdError(
                        f"pullback for apex {apex!r} declared twice", span
                    )
                apexes.add(apex)
                fps.append(FiberProductDecl(apex, proj1, proj2, leg1, leg2))
                fp_spans.append((span, x, y, z))
            else:
                raise ParseError(
                    f"expected a schema declaration, found {tok.text!r}", span
                )
        self.expect("punct", "}")

        schema = OlogSchema(name, tuple(boxes), tuple(arrows), tuple(equations), tuple(fps))
        self._cross_check_eqs(schema, eq_spans)
        self._cross_check_fps(schema, fp_spans)
        return with_fiber_product_squares(schema)

    def _cross_check_eqs(
        self, schema: OlogSchema, eq_spans: list[tuple[SourceSpan, str, str]]
    ) -> None:
        for eq, (span, start, end) in zip(schema.equations, eq_spans):
            for side in (eq.lhs, eq.rhs):
                try:
                    got = path_endpoints(schema, side)
                except Exception:
                    continue  # undeclared pieces: schema validation reports those
                if got != (start, end):
                    raise ParseError(
                        f"path [{','.join(side.arrows)}] runs {got[0]}->{got[1]} "
                        f"but the equation declares {start}..{end}",
                        span,
                    )

    def _cross_check_fps(
        self, schema: OlogSchema, fp_spans: list[tuple[SourceSpan, str, str, str]]
    ) -> None:
        for fp, (span, x, y, z) in zip(schema.fiber_products, fp_spans):
            stated = {
                fp.proj1: (fp.apex, x),
                fp.proj2: (fp.apex, y),
                fp.leg1: (x, z),
                fp.leg2: (y, z),
            }
            for arrow_id, (want_src, want_dst) in stated.items():
                decl = schema.arrow(arrow_id)
                if decl is None:
                    continue
                if (decl.src, decl.dst) != (want_src, want_dst):
                    raise ParseError(
                        f"pullback {fp.apex}: arrow {arrow_id} runs "
                        f"{decl.src}->{decl.dst}, but the declaration needs "
                        f"{want_src}->{want_dst}",
                        span,
                    )

    # -- instance -----------------------------------------------------------

    def instance_block(self) -> Instance:
        self.expect("ident", "instance")
        name = self.string("instance name")
        self.expect("ident", "of")
        schema_name = self.string("schema name")
        self.expect("punct", "{")

        sets: dict[str, dict[str, Payload | None]] = {}
        functions: dict[str, dict[str, str]] = {}

        while not self.at("punct", "}"):
            span = self.span()
            tok = self.peek()
            if tok is None:
                raise ParseError("unterminated instance block", span)
            if self.take("ident", "set"):
                box_id = self.ident("box id")
                if box_id in sets:
                    raise DuplicateIdError(
                        f"set block for box {box_id!r} declared twice", span
                    )
                sets[box_id] = self._set_entries(box_id)
            elif self.take("ident", "fn"):
                arrow_id = self.ident("arrow id")
                if arrow_id in functions:
                    raise DuplicateIdError(
                        f"fn block for arrow {arrow_id!r} declared twice", span
                    )
                functions[arrow_id] = self._fn_entries(arrow_id)
            else:
                raise ParseError(
                    f"expected 'set', 'fn' or '}}', found {tok.text!r}", span
                )
        self.expect("punct", "}")
        return Instance(name, schema_name, sets, functions)

    def _set_entries(self, box_id: str) -> dict[str, Payload | None]:
        self.expect("punct", "{")
        elems: dict[str, Payload | None] = {}
        while not self.at("punct", "}"):
            span = self.span()
            eid = self.ident("element id")
            payload: Payload | None = None
            if self.take("punct", "="):
                payload = self._payload()
            if eid in elems:
                raise DuplicateIdError(
                    f"element {eid!r} listed twice in box {box_id}", span
                )
            elems[eid] = payload
            if not self.take("punct", ","):
                break
        self.expect("punct", "}")
        return elems

    def _fn_entries(self, arrow_id: str) -> dict[str, str]:
        self.expect("punct", "{")
        table: dict[str, str] = {}
        while not self.at("punct", "}"):
            span = self.span()
            src = self.ident("element id")
            self.expect("arrowsym", what="'->'")
            dst = self.ident("element id")
            if src in table:
                raise DuplicateIdError(
                    f"element {src!r} mapped twice by arrow {arrow_id}", span
                )
            table[src] = dst
            if not self.take("punct", ","):
                break
        self.expect("punct", "}")
        return table

    def _payload(self) -> Payload:
        span = self.span()
        kind_tok = self.expect("ident", what="payload kind (real/pair/graph/text)")
        kind = kind_tok.text
        if kind == "real":
            return RealPayload(self._real_value())
        if kind == "pair":
            self.expect("punct", "(")
            first = self._real_value()
            self.expect("punct", ",")
            second = self._real_value()
            self.expect("punct", ")")
            return PairPayload(first, second)
        if kind == "graph":
            return GraphPayload(self._graph_value())
        if kind == "text":
            return TextPayload(self.string("text value"))
        raise ParseError(f"unknown payload kind {kind!r}", span)

    def _real_value(self) -> float:
        span = self.span()
        tok = self.take("number")
        if tok is not None:
            return float(tok.text)
        tok = self.take("ident")
        if tok is not None:
            if tok.text == "inf":
                return math.inf
            if tok.text.isdigit():
                return float(tok.text)
        raise ParseError("expected a real value", span)

    def _graph_value(self) -> Graph:
        self.expect("punct", "{")
        nodes: list[str] = []
        seen: set[str] = set()
        edges: list[tuple[str, str]] = []

        def note(node: str) -> None:
            if node not in seen:
                seen.add(node)
                nodes.append(node)

        while not self.at("punct", "}"):
            src = self.ident("node id")
            note(src)
            if self.take("arrowsym"):
                dst = self.ident("node id")
                note(dst)
                edges.append((src, dst))
            if not self.take("punct", ","):
                break
        self.expect("punct", "}")
        return Graph(tuple(nodes), tuple(edges))


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def parse_schema(text: str, filename: str = "<string>") -> OlogSchema:
    """Parse a document holding exactly one schema block."""
    parser = _Parser(text, filename)
    schema = parser.schema_block()
    if not parser.done():
        raise ParseError(
            f"unexpected trailing content {parser.peek().text!r}", parser.span()
        )
    return schema


def parse_instance(text: str, filename: str = "<string>") -> Instance:
    """Parse a document holding exactly one instance block."""
    parser = _Parser(text, filename)
    instance = parser.instance_block()
    if not parser.done():
        raise ParseError(
            f"unexpected trailing content {parser.peek().text!r}", parser.span()
        )
    return instance


def load_schema(path: str | FsPath) -> OlogSchema:
    fspath = FsPath(path)
    return parse_schema(fspath.read_text(encoding="utf-8"), str(fspath))


def load_instance(path: str | FsPath) -> Instance:
    fspath = FsPath(path)
    return parse_instance(fspath.read_text(encoding="utf-8"), str(fspath))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _quote(text: str) -> str:
    if "\n" in text:
        raise ValueError("strings in the text format cannot contain raw newlines")
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tag_suffix(tags: frozenset[str]) -> str:
    if not tags:
        return ""
    return " [" + ", ".join(sorted(tags)) + "]"


def _path_lit(path: Path) -> str:
    return "[" + ",".join(path.arrows) + "]"


def serialize_schema(schema: OlogSchema) -> str:
    """Canonical text for a schema (sorted declarations, stable bytes)."""
    s = schema.canonical()
    lines = [f"schema {_quote(s.name)} {{"]
    for box in s.boxes:
        lines.append(f"  box {box.id} {_quote(box.label)}{_tag_suffix(box.tags)}")
    for arrow in s.arrows:
        label = f" {_quote(arrow.label)}" if arrow.label else ""
        lines.append(
            f"  arrow {arrow.id} : {arrow.src} -> {arrow.dst}{label}"
            f"{_tag_suffix(arrow.tags)}"
        )
    for eq in s.equations:
        try:
            start, end = path_endpoints(s, eq.lhs)
        except Exception:
            start, end = eq.lhs.start, "?"
        note = f" {_quote(eq.note)}" if eq.note else ""
        lines.append(
            f"  eq {start}..{end} : {_path_lit(eq.lhs)} = {_path_lit(eq.rhs)}{note}"
        )
    for fp in s.fiber_products:
        proj1 = s.arrow(fp.proj1)
        proj2 = s.arrow(fp.proj2)
        leg1 = s.arrow(fp.leg1)
        x = proj1.dst if proj1 else "?"
        y = proj2.dst if proj2 else "?"
        z = leg1.dst if leg1 else "?"
        lines.append(
            f"  pullback {fp.apex} = {x} ×[{z}] {y} "
            f"proj ({fp.proj1}, {fp.proj2}) legs ({fp.leg1}, {fp.leg2})"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _real_lit(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _graph_lit(graph: Graph) -> str:
    g = graph.canonical()
    covered = {node for edge in g.edges for node in edge}
    parts = [f"{a} -> {b}" for a, b in g.edges]
    parts.extend(node for node in g.nodes if node not in covered)
    return "graph { " + ", ".join(parts) + " }" if parts else "graph {}"


def _payload_lit(payload: Payload) -> str:
    if isinstance(payload, RealPayload):
        return f"real {_real_lit(payload.value)}"
    if isinstance(payload, PairPayload):
        return f"pair ({_real_lit(payload.first)}, {_real_lit(payload.second)})"
    if isinstance(payload, GraphPayload):
        return _graph_lit(payload.graph)
    if isinstance(payload, TextPayload):
        return f"text {_quote(payload.text)}"
    raise TypeError(f"unknown payload {payload!r}")


def serialize_instance(instance: Instance) -> str:
    """Canonical text for an instance (sorted, empties dropped, stable bytes)."""
    inst = instance.canonical()
    lines = [f"instance {_quote(inst.name)} of {_quote(inst.schema_name)} {{"]
    for box_id, elems in inst.sets.items():
        lines.append(f"  set {box_id} {{")
        entries = []
        for eid, payload in elems.items():
            entries.append(
                f"    {eid}" if payload is None else f"    {eid} = {_payload_lit(payload)}"
            )
        lines.append(",\n".join(entries))
        lines.append("  }")
    for arrow_id, table in inst.functions.items():
        lines.append(f"  fn {arrow_id} {{")
        lines.append(",\n".join(f"    {src} -> {dst}" for src, dst in table.items()))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
