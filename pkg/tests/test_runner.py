from __future__ import annotations

import re
import time

import pytest

from kirbycalc.diagram import isomorphic
from kirbycalc.dsl import parse
from kirbycalc.runner import FIGURES, corpus_text, replay, run

U0 = "link U0 { component u framing 0 { } }\n"

STEP_RE = re.compile(r"^STEP \d+ MOVE [A-Z0-9_]+ SIG (0|[+-]\d+|\?) H1 \[[0-9,]*\]|\? VERDICT (pass|fail)$")


def test_blow_up_script_passes():
    t = run(parse(U0 + "script s on U0 {\n  O1_INSERT component=e sign=+1\n  expect signature +1\n}"))
    assert t.overall == "pass"
    assert t.steps[0].post.signature == 1


def test_hopf_insertion_script_passes():
    t = run(parse(U0 + "script s on U0 {\n  O3_INSERT annulus=q component=component r framing 1 { }\n"
                       "  expect signature +0\n  expect h1 (0)\n}"))
    assert t.overall == "pass"


def test_failing_step_halts_only_its_script():
    doc = parse(U0 + "script bad on U0 {\n  A1_DELETE pair=P\n  O1_INSERT component=e sign=+1\n"
                     "  expect signature +1\n}\n"
                     "script good on U0 {\n  O1_INSERT component=e sign=-1\n  expect signature -1\n}")
    t = run(doc)
    assert t.overall == "fail"
    bad = [r for r in t.steps if r.script == "bad"]
    assert len(bad) == 1 and bad[0].verdict == "fail" and "NOT_APPLICABLE" in bad[0].message
    assert all(r.verdict == "pass" for r in t.steps + t.expectations if r.script == "good")
    assert [r.verdict for r in t.expectations if r.script == "bad"] == ["fail"]


def test_wrong_expectation_fails():
    t = run(parse(U0 + "script s on U0 {\n  O1_INSERT component=e sign=+1\n  expect signature +2\n}"))
    assert t.overall == "fail"
    assert t.expectations[0].message == "got 1"


def test_trace_format():
    t = run(parse(corpus_text("basics.kl")))
    lines = t.lines()
    assert lines[-1] == "RESULT pass"
    for line in lines:
        head = line.split()[0]
        assert head in ("SCRIPT", "STEP", "EXPECT", "RESULT")
        if head == "STEP":
            assert STEP_RE.match(line), line
    assert t.text() == "\n".join(lines) + "\n"


def test_run_is_deterministic():
    doc = parse(corpus_text("fig9.kl"))
    assert run(doc).text() == run(parse(corpus_text("fig9.kl"))).text()


def test_script_reference_resolves_to_endpoint():
    doc = parse(U0 + "script a on U0 {\n  O1_INSERT component=e sign=+1\n}\n"
                     "script b on U0 {\n  O1_INSERT component=e sign=+1\n  expect isomorphic a\n"
                     "  expect invariants a\n}")
    t = run(doc)
    assert t.overall == "pass"
    assert isomorphic(t.finals["a"], t.finals["b"]) is not None


def test_reference_cycle_fails_cleanly():
    doc = parse(U0 + "script a on U0 {\n  expect isomorphic b\n}\nscript b on U0 {\n  expect isomorphic a\n}")
    assert run(doc).overall == "fail"


def test_basics_corpus_passes():
    assert run(parse(corpus_text("basics.kl"))).overall == "pass"


@pytest.mark.parametrize("fig", FIGURES)
def test_replays_pass_quickly(fig):
    t0 = time.perf_counter()
    t = replay(fig)
    assert time.perf_counter() - t0 < 1.0
    assert t.overall == "pass", t.text()
    assert t.steps and t.expectations
    assert any(e.clause.startswith("isomorphic") for e in t.expectations)


def test_band_replay_carries_certificate():
    t = replay("fig9")
    assert [e.verdict for e in t.expectations if e.clause == "certificate isomorphic"] == ["pass"]


def test_unknown_figure():
    with pytest.raises(ValueError):
        replay("FIG8")
