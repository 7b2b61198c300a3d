"""Execute move scripts and the bundled figure replays."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .diagram import Diagram, DiagramError, isomorphic
from .dsl import EXPECT_INT, Expect, Script, ScriptDocument, parse
from .invariants import InvariantRecord, invariant_record
from .moves import MoveError, apply_move, normalize

NORMALIZE_BUDGET = 200
FIGURES = ("FIG5", "FIG6", "FIG7", "FIG9")


@dataclass(frozen=True)
class StepRecord:
    script: str
    index: int
    kind: str
    pre: Optional[InvariantRecord]
    post: Optional[InvariantRecord]
    verdict: str
    message: str = ""


@dataclass(frozen=True)
class ExpectRecord:
    script: str
    clause: str
    verdict: str
    message: str = ""


@dataclass
class Trace:
    steps: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    finals: dict = field(default_factory=dict)
    order: list = field(default_factory=list)
    order_links: list = field(default_factory=list)

    @property
    def overall(self) -> str:
        bad = [r for r in self.steps + self.expectations if r.verdict != "pass"]
        return "fail" if bad else "pass"

    @property
    def final(self) -> Optional[Diagram]:
        return self.finals[self.order[-1]] if self.order else None

    def lines(self) -> list[str]:
        out = []
        for name, link in sorted(self.order_links):
            out.append(f"SCRIPT {name} ON {link}")
            for r in self.steps:
                if r.script == name:
                    rec = r.post or r.pre
                    out.append(f"STEP {r.index} MOVE {r.kind} SIG {_sig(rec)} H1 {_h1(rec)} VERDICT {r.verdict}")
            for r in self.expectations:
                if r.script == name:
                    out.append(f"EXPECT {r.clause} VERDICT {r.verdict}")
        out.append(f"RESULT {self.overall}")
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _sig(r: Optional[InvariantRecord]) -> str:
    return "?" if r is None else f"{r.signature:+d}" if r.signature else "0"


def _h1(r: Optional[InvariantRecord]) -> str:
    return "?" if r is None else "[" + ",".join(str(f) for f in r.h1_factors) + "]"


def _record(d: Diagram) -> Optional[InvariantRecord]:
    try:
        return invariant_record(d)
    except (DiagramError, MoveError):
        return None


def expected_shift(d: Diagram, m) -> int:
    """Signature change a move is expected to cause."""
    if m.kind == "O1_INSERT":
        return int(m.params.get("sign", 1))
    if m.kind == "O1_DELETE" and d.has_component(m.params.get("component", "")):
        return -d.component(m.params["component"]).framing
    return 0


def step_verdict(pre, post, shift: int) -> bool:
    if pre is None or post is None:
        return pre is None and post is None
    return post.signature == pre.signature + shift and post.h1_factors == pre.h1_factors


def equivalent(a: Diagram, b: Diagram, budget: int = NORMALIZE_BUDGET) -> bool:
    """Isomorphic outright, or after greedy R1/R2 reduction of both."""
    if isomorphic(a, b) is not None:
        return True
    return isomorphic(normalize(a, budget), normalize(b, budget)) is not None


class _Runner:
    def __init__(self, doc: ScriptDocument):
        self.doc = doc
        self.trace = Trace()
        self.done: dict[str, Optional[Diagram]] = {}
        self.active: set[str] = set()

    def resolve(self, ref: str) -> Optional[Diagram]:
        if ref in self.doc.scripts:
            return self.run_script(self.doc.scripts[ref])
        return self.doc.links.get(ref)

    def run_script(self, s: Script) -> Optional[Diagram]:
        if s.name in self.done:
            return self.done[s.name]
        if s.name in self.active:
            return None  # reference cycle
        self.active.add(s.name)
        cur = self.doc.links[s.link]
        pre = _record(cur)
        k = 0
        halted = False
        for st in s.statements:
            if isinstance(st, Expect):
                if not halted:
                    self.check(s.name, st, cur)
                else:
                    self.trace.expectations.append(ExpectRecord(s.name, _clause(st), "fail", "script halted"))
                continue
            k += 1
            if halted:
                continue
            try:
                nxt = apply_move(cur, st)
            except (MoveError, DiagramError) as exc:
                self.trace.steps.append(StepRecord(s.name, k, st.kind, pre, None, "fail", str(exc)))
                halted = True
                continue
            post = _record(nxt)
            ok = step_verdict(pre, post, expected_shift(cur, st))
            self.trace.steps.append(StepRecord(s.name, k, st.kind, pre, post, "pass" if ok else "fail"))
            cur, pre = nxt, post
        self.active.discard(s.name)
        self.done[s.name] = None if halted else cur
        self.trace.finals[s.name] = cur
        self.trace.order.append(s.name)
        self.trace.order_links.append((s.name, s.link))
        return self.done[s.name]

    def check(self, script: str, e: Expect, d: Diagram) -> None:
        clause = _clause(e)
        rec = _record(d)
        ok, msg = False, ""
        if e.kind in EXPECT_INT or e.kind == "h1":
            if rec is None:
                msg = "invariants undefined"
            else:
                got = rec.h1_factors if e.kind == "h1" else getattr(rec, e.kind)
                ok = tuple(got) == tuple(e.value) if e.kind == "h1" else got == e.value
                msg = "" if ok else f"got {got}"
        else:
            other = self.resolve(e.value)
            if other is None:
                msg = f"{e.value} has no endpoint"
            elif e.kind == "isomorphic":
                ok = equivalent(d, other)
            else:
                r2 = _record(other)
                ok = rec is not None and r2 is not None and (rec.signature, rec.nullity, rec.h1_factors) == (
                    r2.signature, r2.nullity, r2.h1_factors)
        self.trace.expectations.append(ExpectRecord(script, clause, "pass" if ok else "fail", msg))


def _clause(e: Expect) -> str:
    if e.kind == "h1":
        return "h1 [" + ",".join(str(x) for x in e.value) + "]"
    if e.kind in EXPECT_INT:
        return f"{e.kind} {e.value}"
    return f"{e.kind} {e.value}"


def run(doc: ScriptDocument) -> Trace:
    """Run every script in name order; a failing step halts only its script."""
    r = _Runner(doc)
    for name in sorted(doc.scripts):
        r.run_script(doc.scripts[name])
    return r.trace


def corpus_text(name: str) -> str:
    return resources.files("kirbycalc.corpus").joinpath(name).read_text()


def corpus_files() -> list[str]:
    return sorted(p.name for p in resources.files("kirbycalc.corpus").iterdir() if p.name.endswith(".kl"))


def replay(figure: str) -> Trace:
    fig = figure.upper()
    if fig not in FIGURES:
        raise ValueError(f"no replay for {figure}; choose one of {', '.join(FIGURES)}")
    doc = parse(corpus_text(f"{fig.lower()}.kl"))
    trace = run(doc)
    if fig == "FIG9":
        trace.expectations.append(_fig9_certificate(doc))
    return trace


def _fig9_certificate(doc: ScriptDocument) -> ExpectRecord:
    from .translate import band_independence_certificate

    s1, s2 = doc.scripts["fig9_first"], doc.scripts["fig9_second"]
    m1, m2 = s1.statements[0], s2.statements[0]
    d = doc.links[s1.link]
    cert = band_independence_certificate(d, m1.params["pair"], m1.params["band"], m2.params["band"])
    ok = cert.verdict == "isomorphic" and equivalent(cert.replay(), cert.claims[1])
    return ExpectRecord("fig9_first", "certificate isomorphic", "pass" if ok else "fail", cert.verdict)


__all__ = ["FIGURES", "Trace", "StepRecord", "ExpectRecord", "run", "replay", "equivalent", "corpus_files"]
