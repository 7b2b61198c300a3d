"""Text format for diagrams and move scripts.

A document holds ``link`` blocks (diagrams) and ``script`` blocks (moves run
on a named link, with ``expect`` clauses).  Move statements are one line::

    KIND key=value key=value ...

where a value is an integer, a name, ``true``/``false``, an arc ``a[2]``, a
tuple ``(v, v)``, a band ``band + from a[0] to b[1] { over c[3], under c[3] }``
or a new component ``component r framing 1 { over a[0] +, under a[1] + }``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .diagram import NAME_RE, Component, Cross, Diagram, Spot, validate
from .moves import (
    MACROS, PRIMITIVES, ArcCross, ArcRef, Band, MacroMove, Move, NewComponent, RouteStep, SelfCross,
)


class DslError(Exception):
    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{code} at {line}:{col}: {message}")
        self.code = code
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Expect:
    kind: str  # signature nullity h1 components ball_pairs isomorphic invariants
    value: Any


@dataclass(frozen=True)
class Script:
    name: str
    link: str
    statements: tuple = ()  # Move | Expect


@dataclass(frozen=True)
class ScriptDocument:
    links: dict = field(default_factory=dict)
    scripts: dict = field(default_factory=dict)


EXPECT_INT = ("signature", "nullity", "components", "ball_pairs")
EXPECT_REF = ("isomorphic", "invariants")

_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)
    |(?P<event>[A-Za-z][A-Za-z0-9_]*\.[ou][+-])
    |(?P<spot>@[A-Za-z][A-Za-z0-9_]*\.[0-9]+\.[AB])
    |(?P<int>[+-]?[0-9]+)
    |(?P<name>[A-Za-z][A-Za-z0-9_]*)
    |(?P<sym>[{}()\[\],=+-])""",
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokens(text: str) -> list[_Tok]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslError("SYNTAX", f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Optional[_Tok] = None, code: str = "SYNTAX"):
        t = tok or self.tok
        raise DslError(code, msg, t.line, t.col)

    def next(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("sym", "name"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if not self.accept(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.toks[self.i - 1]

    def name(self) -> str:
        if self.tok.kind != "name":
            self.fail(f"expected a name, found {self.tok.text or 'end of input'!r}")
        return self.next().text

    def int(self) -> int:
        if self.tok.kind != "int":
            self.fail(f"expected an integer, found {self.tok.text or 'end of input'!r}")
        return int(self.next().text)

    def sign(self) -> int:
        if self.tok.kind == "int" and self.tok.text in ("+1", "-1", "1"):
            return int(self.next().text)
        if self.accept("+"):
            return 1
        if self.accept("-"):
            return -1
        self.fail("expected a sign")

    # document
    def document(self) -> ScriptDocument:
        links: dict[str, Diagram] = {}
        scripts: dict[str, Script] = {}
        refs = []
        while self.tok.kind != "eof":
            t = self.tok
            if self.accept("link"):
                name, d = self.link(t)
                if name in links:
                    self.fail(f"link {name} defined twice", t, "DUP_NAME")
                links[name] = d
            elif self.accept("script"):
                s, r = self.script()
                if s.name in scripts:
                    self.fail(f"script {s.name} defined twice", t, "DUP_NAME")
                scripts[s.name] = s
                refs += r
            else:
                self.fail(f"expected 'link' or 'script', found {t.text!r}")
        for ref, tok, kinds in refs:
            ok = ("link" in kinds and ref in links) or ("script" in kinds and ref in scripts)
            if not ok:
                self.fail(f"unresolved reference {ref}", tok, "UNRESOLVED")
        return ScriptDocument(links, scripts)

    def link(self, start: _Tok):
        name = self.name()
        self.expect("{")
        comps, pairs = [], {}
        signs: dict[str, int] = {}
        seen: dict[tuple[str, str], _Tok] = {}
        while not self.accept("}"):
            t = self.tok
            if self.accept("component"):
                comps.append(self.component(signs, seen))
            elif self.accept("ballpair"):
                p = self.name()
                self.expect("spots")
                k = self.int()
                if p in pairs:
                    self.fail(f"ball pair {p} declared twice", t, "DUP_PAIR")
                pairs[p] = k
            else:
                self.fail(f"expected 'component', 'ballpair' or '}}', found {t.text!r}")
        names = [c.name for c in comps]
        if len(set(names)) != len(names):
            self.fail("duplicate component name", start, "DUP_COMPONENT")
        d = Diagram.build(comps, signs, pairs)
        rep = validate(d)
        if not rep.ok:
            code, where, msg = rep.violations[0]
            self.fail(f"link {name}: {msg} {where}".strip(), start, code)
        return name, d

    def component(self, signs, seen) -> Component:
        name = self.name()
        self.expect("framing")
        f = self.int()
        self.expect("{")
        events = []
        while not self.accept("}"):
            if events:
                self.expect(",")
            t = self.next()
            if t.kind == "event":
                x, rest = t.text.split(".")
                role, sg = rest[0], (1 if rest[1] == "+" else -1)
                if (x, role) in seen:
                    code = "DUP_OVER" if role == "o" else "DUP_UNDER"
                    self.fail(f"{x}.{role} already used", t, code)
                seen[(x, role)] = t
                if x in signs and signs[x] != sg:
                    self.fail(f"sign of {x} differs from its other occurrence", t, "SIGN_MISMATCH")
                signs[x] = sg
                events.append(Cross(x, role))
            elif t.kind == "spot":
                p, j, side = t.text[1:].split(".")
                events.append(Spot(p, int(j), side))
            else:
                self.fail(f"expected an event, found {t.text!r}", t)
        return Component(name, f, tuple(events))

    def script(self):
        name = self.name()
        self.expect("on")
        t = self.tok
        link = self.name()
        refs = [(link, t, ("link",))]
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            t = self.tok
            if self.accept("expect"):
                kt = self.tok
                kind = self.name()
                if kind in EXPECT_INT:
                    stmts.append(Expect(kind, self.int()))
                elif kind == "h1":
                    stmts.append(Expect(kind, tuple(self.tuple_of(self.int))))
                elif kind in EXPECT_REF:
                    rt = self.tok
                    ref = self.name()
                    refs.append((ref, rt, ("link", "script")))
                    stmts.append(Expect(kind, ref))
                else:
                    self.fail(f"unknown expectation {kind}", kt)
            else:
                stmts.append(self.move())
        return Script(name, link, tuple(stmts)), refs

    def tuple_of(self, item) -> list:
        self.expect("(")
        out = []
        while not self.accept(")"):
            if out:
                self.expect(",")
            out.append(item())
        return out

    def move(self) -> Move:
        t = self.tok
        kind = self.name()
        if kind not in PRIMITIVES and kind not in MACROS:
            self.fail(f"unknown move {kind}", t)
        params = {}
        while self.tok.kind == "name" and self.toks[self.i + 1].text == "=":
            key = self.next().text
            self.next()
            params[key] = self.value()
        return (MacroMove if kind in MACROS else Move)(kind, params)

    def arc(self) -> ArcRef:
        c = self.name()
        self.expect("[")
        pos = self.int()
        self.expect("]")
        return ArcRef(c, pos)

    def value(self):
        t = self.tok
        if t.kind == "int":
            return int(self.next().text)
        if t.text == "(" and t.kind == "sym":
            return tuple(self.tuple_of(self.value))
        if t.kind == "name":
            if t.text == "band":
                self.next()
                return self.band()
            if t.text == "component":
                self.next()
                return self.new_component()
            if t.text in ("true", "false"):
                self.next()
                return t.text == "true"
            if self.toks[self.i + 1].text == "[":
                return self.arc()
            return self.next().text
        self.fail(f"expected a value, found {t.text or 'end of input'!r}")

    def band(self) -> Band:
        eps = self.sign()
        start = end = None
        if self.accept("from"):
            start = self.arc()
            self.expect("to")
            end = self.arc()
        self.expect("{")
        steps = []
        while not self.accept("}"):
            if steps:
                self.expect(",")
            steps.append(self.route_step())
        return Band(tuple(steps), eps, start, end)

    def route_step(self) -> RouteStep:
        t = self.tok
        role = {"over": "o", "under": "u"}.get(self.name())
        if role is None:
            self.fail("expected 'over' or 'under'", t)
        arc = self.arc()
        sg = self.sign() if self.tok.text in ("+", "-", "+1", "-1") else None
        return RouteStep(arc, role, sg)

    def new_component(self) -> NewComponent:
        name = self.name()
        self.expect("framing")
        f = self.int()
        self.expect("{")
        evs = []
        while not self.accept("}"):
            if evs:
                self.expect(",")
            t = self.tok
            if t.kind == "event":
                self.next()
                x, rest = t.text.split(".")
                evs.append(SelfCross(x, rest[0], 1 if rest[1] == "+" else -1))
            else:
                st = self.route_step()
                evs.append(ArcCross(st.arc, st.role, 1 if st.sign is None else st.sign))
        return NewComponent(name, f, tuple(evs))


def parse(text: str) -> ScriptDocument:
    return _Parser(text).document()


def parse_band(text: str) -> Band:
    """Parse one band, with or without the leading ``band`` keyword."""
    t = text.strip()
    p = _Parser(t if t.startswith("band") else "band " + t)
    p.expect("band")
    b = p.band()
    if p.tok.kind != "eof":
        p.fail("trailing text after band")
    return b


def parse_link(text: str) -> Diagram:
    """Parse a document holding exactly one link and return it."""
    doc = parse(text)
    if len(doc.links) != 1:
        raise DslError("SYNTAX", "expected exactly one link")
    return next(iter(doc.links.values()))


# ----------------------------------------------------------- serialization


def _sg(s: int) -> str:
    return "+" if s > 0 else "-"


def format_event(e, sign: dict) -> str:
    if isinstance(e, Cross):
        return f"{e.crossing}.{e.role}{_sg(sign[e.crossing])}"
    return e.key()


def format_link(name: str, d: Diagram) -> str:
    sign = d.sign
    lines = [f"link {name} {{"]
    for c in d.components:
        evs = ", ".join(format_event(e, sign) for e in c.events)
        lines.append(f"  component {c.name} framing {c.framing} {{ {evs} }}" if evs
                     else f"  component {c.name} framing {c.framing} {{ }}")
    for p, k in d.pairs:
        lines.append(f"  ballpair {p} spots {k}")
    lines.append("}")
    return "\n".join(lines)


def _step(st: RouteStep) -> str:
    role = "over" if st.role == "o" else "under"
    tail = "" if st.sign is None else f" {_sg(st.sign)}"
    return f"{role} {format_value(st.arc)}{tail}"


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return f"{v:+d}" if v else "0"
    if isinstance(v, str):
        return v
    if isinstance(v, ArcRef):
        return f"{v.component}[{v.pos}]"
    if isinstance(v, (tuple, list)):
        return "(" + ", ".join(format_value(x) for x in v) + ")"
    if isinstance(v, Band):
        ends = f" from {format_value(v.start)} to {format_value(v.end)}" if v.start is not None else ""
        steps = ", ".join(_step(s) for s in v.route)
        return f"band {_sg(v.orientation)}{ends} {{ {steps} }}" if steps else f"band {_sg(v.orientation)}{ends} {{ }}"
    if isinstance(v, NewComponent):
        parts = []
        for e in v.events:
            if isinstance(e, SelfCross):
                parts.append(f"{e.crossing}.{e.role}{_sg(e.sign)}")
            else:
                parts.append(_step(RouteStep(e.arc, e.role, e.sign)))
        body = ", ".join(parts)
        return f"component {v.name} framing {v.framing} {{ {body} }}" if body else f"component {v.name} framing {v.framing} {{ }}"
    raise TypeError(f"cannot serialise {v!r}")


def format_statement(s) -> str:
    if isinstance(s, Expect):
        if s.kind == "h1":
            return "expect h1 (" + ", ".join(str(x) for x in s.value) + ")"
        if s.kind in EXPECT_INT:
            return f"expect {s.kind} {format_value(s.value)}"
        return f"expect {s.kind} {s.value}"
    params = " ".join(f"{k}={format_value(v)}" for k, v in sorted(s.params.items()))
    return f"{s.kind} {params}".rstrip()


def serialize(doc: ScriptDocument) -> str:
    blocks = [format_link(n, doc.links[n]) for n in sorted(doc.links)]
    for n in sorted(doc.scripts):
        s = doc.scripts[n]
        body = [f"  {format_statement(st)}" for st in s.statements]
        blocks.append("\n".join([f"script {n} on {s.link} {{", *body, "}"]))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


__all__ = [
    "DslError", "Expect", "Script", "ScriptDocument", "format_link", "parse", "parse_band", "parse_link",
    "serialize", "NAME_RE",
]
