"""Text format for bound path algebras and gbp-algebras.

    algebra S2 {
      vertices 1 2 3;
      arrow delta: 1 -> 2;
      arrow eps: 2 -> 3;
      relations { delta*eps; }
    }

    gbp L {
      quiver { vertices 1 2 3; arrow alpha: 1 -> 2; arrow beta: 2 -> 3; }
      assign 1 = k; 2 = S2; 3 = k;
      relations { alpha*beta; }
    }

Identifiers are runs of letters, digits, ``_``, ``.`` and ``'``.  Purely
numeric words may name vertices but not arrows, so a leading number in a
relation term is always a coefficient.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .algebra import BoundPathAlgebra, LinComb, field_algebra
from .gbp import GbpAlgebra
from .quiver import Arrow, Path, Quiver

KEYWORDS = {"algebra", "gbp", "vertices", "arrow", "relations", "quiver", "assign"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<rational>\d+/\d+(?![\w.']))
  | (?P<word>[\w.']+)
  | (?P<punct>->|[{};:=+\-*])
""", re.VERBOSE | re.UNICODE)


class Token(NamedTuple):
    kind: str  # keyword, id, int, rational, punct, eof
    value: str
    line: int
    column: int


class ParseError(Exception):
    """Lexical, syntax or resolution error at a source location."""

    def __init__(self, kind: str, message: str, line: int, column: int,
                 expected=(), source_name: str = "<input>"):
        self.kind = kind
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        self.source_name = source_name
        text = f"{source_name}:{line}:{column}: {kind} error: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)
        self.message = message


def tokenize(source: str, source_name: str = "<input>") -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError("lexical", f"unexpected character {source[pos]!r}", line, col,
                             source_name=source_name)
        kind, text = m.lastgroup, m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "word":
                if text in KEYWORDS:
                    kind = "keyword"
                elif text.isdigit():
                    kind = "int"
                else:
                    kind = "id"
            if kind not in ("ws", "comment"):
                tokens.append(Token(kind, text, line, col))
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class Document:
    algebras: dict[str, BoundPathAlgebra] = field(default_factory=dict)
    gbps: dict[str, GbpAlgebra] = field(default_factory=dict)


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.value)


class _Parser:
    def __init__(self, source: str, source_name: str):
        self.name = source_name
        self.toks = tokenize(source, source_name)
        self.i = 0
        self.doc = Document()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message, expected=(), tok=None, kind="syntax"):
        tok = tok or self.tok
        return ParseError(kind, message, tok.line, tok.column, expected, self.name)

    def resolution(self, message, tok):
        return self.error(message, tok=tok, kind="resolution")

    def at(self, value: str) -> bool:
        return self.tok.kind in ("punct", "keyword") and self.tok.value == value

    def expect(self, value: str) -> Token:
        if not self.at(value):
            raise self.error(f"unexpected {_describe(self.tok)}", [repr(value)])
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str, numeric_ok: bool = True) -> Token:
        tok = self.tok
        kinds = ("id", "int") if numeric_ok else ("id",)
        if tok.kind not in kinds:
            if tok.kind == "int":
                raise self.error(f"{what} {tok.value!r} must contain a non-digit character")
            raise self.error(f"unexpected {_describe(tok)}", [what])
        self.i += 1
        return tok

    def document(self) -> Document:
        while self.tok.kind != "eof":
            if self.at("algebra"):
                self.algebra_block()
            elif self.at("gbp"):
                self.gbp_block()
            else:
                raise self.error(f"unexpected {_describe(self.tok)}", ["'algebra'", "'gbp'"])
        return self.doc

    def _new_name(self) -> Token:
        tok = self.ident("name", numeric_ok=False)
        if tok.value == "k":
            raise self.resolution("'k' is reserved for the base field", tok)
        if tok.value in self.doc.algebras or tok.value in self.doc.gbps:
            raise self.resolution(f"duplicate block name {tok.value!r}", tok)
        return tok

    def quiver_body(self) -> Quiver:
        self.expect("vertices")
        vertices = [self.ident("vertex id")]
        while self.tok.kind in ("id", "int"):
            vertices.append(self.ident("vertex id"))
        if not self.at(";"):
            raise self.error(f"unexpected {_describe(self.tok)}", ["';'", "vertex id"])
        self.i += 1
        seen = set()
        for v in vertices:
            if v.value in seen:
                raise self.resolution(f"duplicate vertex {v.value!r}", v)
            seen.add(v.value)
        arrows, names = [], set()
        while self.at("arrow"):
            self.i += 1
            name = self.ident("arrow id", numeric_ok=False)
            self.expect(":")
            src = self.ident("vertex id")
            self.expect("->")
            dst = self.ident("vertex id")
            self.expect(";")
            if name.value in names:
                raise self.resolution(f"duplicate arrow {name.value!r}", name)
            for v in (src, dst):
                if v.value not in seen:
                    raise self.resolution(f"unknown vertex {v.value!r}", v)
            names.add(name.value)
            arrows.append(Arrow(name.value, src.value, dst.value))
        return Quiver(tuple(v.value for v in vertices), tuple(arrows))

    def relations_block(self, q: Quiver) -> list[LinComb]:
        self.expect("relations")
        self.expect("{")
        rels = []
        while not self.at("}"):
            rels.append(self.lincomb(q))
            if self.at(";"):
                self.i += 1
            elif not self.at("}"):
                raise self.error(f"unexpected {_describe(self.tok)}", ["';'", "'}'", "'+'", "'-'"])
        self.expect("}")
        return rels

    def lincomb(self, q: Quiver) -> LinComb:
        sign = 1
        if self.at("-"):
            self.i += 1
            sign = -1
        terms = [self.term(q, sign)]
        while self.at("+") or self.at("-"):
            sign = 1 if self.tok.value == "+" else -1
            self.i += 1
            terms.append(self.term(q, sign))
        return LinComb(terms)

    def term(self, q: Quiver, sign: int) -> tuple[Path, Fraction]:
        coef = Fraction(sign)
        if self.tok.kind in ("int", "rational"):
            coef *= Fraction(self.tok.value)
            self.i += 1
            self.expect("*")
        first = self.tok
        arrows = [self.ident("arrow id", numeric_ok=False)]
        while self.at("*"):
            self.i += 1
            arrows.append(self.ident("arrow id", numeric_ok=False))
        for a in arrows:
            if not q.has_arrow(a.value):
                raise self.resolution(f"unknown arrow {a.value!r}", a)
        for prev, nxt in zip(arrows, arrows[1:]):
            if q.arrow(prev.value).target != q.arrow(nxt.value).source:
                raise self.resolution(f"arrows {prev.value!r} and {nxt.value!r} do not compose", nxt)
        if coef == 0:
            raise self.resolution("zero coefficient", first)
        return q.path(*(a.value for a in arrows)), coef

    def algebra_block(self):
        self.expect("algebra")
        name = self._new_name()
        self.expect("{")
        q = self.quiver_body()
        rels = self.relations_block(q) if self.at("relations") else []
        self.expect("}")
        self.doc.algebras[name.value] = BoundPathAlgebra(q, tuple(rels), name=name.value)

    def gbp_block(self):
        self.expect("gbp")
        name = self._new_name()
        self.expect("{")
        self.expect("quiver")
        self.expect("{")
        gamma = self.quiver_body()
        self.expect("}")
        self.expect("assign")
        family = {}
        while True:
            v = self.ident("vertex id")
            self.expect("=")
            target = self.ident("algebra name", numeric_ok=False)
            self.expect(";")
            if v.value not in gamma.vertices:
                raise self.resolution(f"unknown vertex {v.value!r}", v)
            if v.value in family:
                raise self.resolution(f"vertex {v.value!r} assigned twice", v)
            if target.value == "k":
                family[v.value] = field_algebra()
            elif target.value in self.doc.algebras:
                family[v.value] = self.doc.algebras[target.value]
            else:
                raise self.resolution(f"unknown algebra {target.value!r}", target)
            if self.tok.kind not in ("id", "int"):
                break
        missing = [v for v in gamma.vertices if v not in family]
        if missing:
            raise self.resolution(f"no algebra assigned to vertices {missing}", name)
        rels = self.relations_block(gamma) if self.at("relations") else []
        self.expect("}")
        self.doc.gbps[name.value] = GbpAlgebra(gamma, family, tuple(rels), name=name.value)


def parse(source: str, source_name: str = "<input>") -> Document:
    return _Parser(source, source_name).document()


def parse_lincomb(text: str, q: Quiver) -> LinComb:
    """One linear combination over ``q``, e.g. ``"a*b - 2*c*d"``."""
    p = _Parser(text, "<lincomb>")
    c = p.lincomb(q)
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {_describe(p.tok)}", ["'+'", "'-'", "end of input"])
    return c


# ---------- serialization ----------

def _quiver_lines(q: Quiver, indent: str) -> list[str]:
    lines = [f"{indent}vertices {' '.join(q.vertices)};"]
    lines += [f"{indent}arrow {a.name}: {a.source} -> {a.target};" for a in q.arrows]
    return lines


def _relation_lines(rels, indent: str) -> list[str]:
    if not rels:
        return []
    return ([f"{indent}relations {{"] + [f"{indent}  {r};" for r in rels] + [f"{indent}}}"])


def format_algebra(name: str, a: BoundPathAlgebra) -> str:
    lines = [f"algebra {name} {{"] + _quiver_lines(a.quiver, "  ")
    lines += _relation_lines(a.relations, "  ")
    return "\n".join(lines + ["}"]) + "\n"


def format_gbp(name: str, g: GbpAlgebra, names: dict[str, str]) -> str:
    """``names`` maps each gamma vertex to the block name of its algebra."""
    lines = [f"gbp {name} {{", "  quiver {"] + _quiver_lines(g.gamma, "    ") + ["  }"]
    lines.append("  assign " + " ".join(f"{v} = {names[v]};" for v in g.gamma.vertices))
    lines += _relation_lines(g.relations, "  ")
    return "\n".join(lines + ["}"]) + "\n"


def serialize(doc: Document) -> str:
    blocks = [format_algebra(n, a) for n, a in doc.algebras.items()]
    for gname, g in doc.gbps.items():
        names = {}
        for v, a in g.family:
            if a.name in doc.algebras and doc.algebras[a.name] == a:
                names[v] = a.name
            elif a == field_algebra():
                names[v] = "k"
            else:
                raise ValueError(f"gbp {gname}: algebra at {v} is not a named block of the document")
        blocks.append(format_gbp(gname, g, names))
    return "\n".join(blocks)


def document_for_gbp(g: GbpAlgebra, name: str | None = None) -> Document:
    """A self-contained document: one algebra block per vertex algebra other than ``k``.

    A one-vertex algebra whose vertex is not named ``1`` gets its own block so
    that vertex ids survive the round trip.
    """
    gname = name or g.name or "G"
    doc = Document()
    family = {}
    for v, a in g.family:
        if a == field_algebra():
            family[v] = a
            continue
        base = a.name if a.name and a.name != "k" else f"{gname}_{v}"
        base = re.sub(r"[^\w.']", "_", base)
        aname, i = base, 1
        while aname in doc.algebras and doc.algebras[aname] != a:
            i += 1
            aname = f"{base}_{i}"
        named = BoundPathAlgebra(a.quiver, a.relations, name=aname)
        doc.algebras[aname] = named
        family[v] = named
    doc.gbps[gname] = GbpAlgebra(g.gamma, family, g.relations, name=gname)
    return doc
