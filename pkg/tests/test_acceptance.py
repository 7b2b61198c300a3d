"""Acceptance suite: one PASS/FAIL line per criterion, exact tolerances.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import random
import sys
import time
from collections import Counter

import pytest

from conftest import bridged_diagrams, framed_diagrams, random_band
from oracles import (
    det_leibniz, invariant_factors, linking_by_crossings, matmul, signature_by_roots, transpose,
)

from kirbycalc.diagram import isomorphic, validate
from kirbycalc.dsl import Expect, Script, ScriptDocument, parse, serialize
from kirbycalc.fuzz import FuzzParams, check_instance, random_instance
from kirbycalc.invariants import bordered, invariant_record, linking_matrix, signature, smith_normal_form
from kirbycalc.moves import ArcRef, Band, Move, MoveError, NewComponent, apply_move as _apply, o2_slide
from kirbycalc.runner import FIGURES, corpus_files, corpus_text, replay
from kirbycalc.translate import inject, recombine

RESULTS: dict[int, str] = {}


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
        RESULTS[k] = line
        with capsys.disabled():
            print("\n" + line)
    return emit


def _shadow(r):
    return r.signature, r.h1_factors


# 1 ------------------------------------------------------------------------

REQUIRED_KINDS = {
    "O2_SLIDE", "O3_INSERT", "O3_DELETE", "A1_INSERT", "A1_DELETE", "A2_FORWARD", "A2_REVERSE",
    "BALL_DRAG", "R1", "R2", "R3",
}


def test_criterion_1_move_invariance(report):
    tried, failed = Counter(), Counter()
    o1_bad = 0
    seed = 0
    while seed < 700 or sum(tried.values()) < 500 or not REQUIRED_KINDS <= set(tried):
        d, moves = random_instance(seed, FuzzParams(4, 12, 2))
        for kind, ok in check_instance(d, moves):
            tried[kind] += 1
            failed[kind] += 0 if ok else 1
        # an explicit O1 check per instance, both signs
        pre = invariant_record(d)
        for eps in (1, -1):
            post = invariant_record(_apply(d, Move("O1_INSERT", {"component": "zz_blow", "sign": eps})))
            if post.signature != pre.signature + eps or post.h1_factors != pre.h1_factors:
                o1_bad += 1
        seed += 1
        if seed > 5000:
            break
    total = sum(tried.values())
    bad = sum(failed.values())
    missing = REQUIRED_KINDS - set(tried)
    ok = total >= 500 and not bad and not missing and not o1_bad
    report(1, ok, f"cases={total} seeds={seed} failures={bad} o1_failures={o1_bad} "
                  f"kinds={len(tried)} missing={sorted(missing) or '-'}")
    assert ok, (failed, missing)


# 2 ------------------------------------------------------------------------


def test_criterion_2_hopf_insertion(report):
    rng = random.Random(2)
    n = bad = 0
    for _, d in framed_diagrams(120, start=1000):
        f = rng.choice((0, 1))
        taken = set(d.names())
        new = _apply(d, Move("O3_INSERT", {"component": NewComponent("zr", f), "annulus": "zq"}))
        assert validate(new, strict=True).ok
        # the inserted pair is a split Hopf link with framings 0 and f
        lm = linking_matrix(new)
        i, j = lm.labels.index("zr"), lm.labels.index("zq")
        assert (lm.entries[i][i], lm.entries[j][j], lm.entries[i][j]) == (f, 0, 1)
        assert taken < set(new.names())
        if _shadow(invariant_record(new)) != _shadow(invariant_record(d)):
            bad += 1
        n += 1
    ok = n >= 100 and bad == 0
    report(2, ok, f"diagrams={n} changed={bad}")
    assert ok


# 3 ------------------------------------------------------------------------


def _oracle_matrix(d, names):
    m = [[0] * len(names) for _ in names]
    for i, a in enumerate(names):
        m[i][i] = d.component(a).framing
        for j, b in enumerate(names):
            if i != j:
                lk = linking_by_crossings(d, a, b)
                assert lk.denominator == 1
                m[i][j] = int(lk)
    return m


def test_criterion_3_slide_matrix_law(report):
    rng = random.Random(3)
    n = bad = skipped = 0
    seed = 3000
    while n < 220:
        d, _ = random_instance(seed, FuzzParams(4, 10, 0))
        seed += 1
        if len(d.components) < 2:
            continue
        t, o = rng.sample(d.names(), 2)
        b = random_band(rng, d)
        tl, ol = len(d.component(t).events), len(d.component(o).events)
        b = Band(b.route, b.orientation, ArcRef(t, rng.randrange(max(tl, 1))),
                 ArcRef(o, rng.randrange(max(ol, 1))))
        try:
            after = o2_slide(d, t, o, b, side=rng.choice("LR"))
        except MoveError:
            skipped += 1
            continue
        names = sorted(d.names())
        m = _oracle_matrix(d, names)
        e = [[int(i == j) for j in range(len(names))] for i in range(len(names))]
        e[names.index(o)][names.index(t)] = b.orientation
        want = matmul(matmul(transpose(e), m), e)
        got = _oracle_matrix(after, names)
        engine = linking_matrix(after).rows()
        lk = int(linking_by_crossings(d, o, t))
        frame = d.component(t).framing + d.component(o).framing + 2 * b.orientation * lk
        ok = (got == want and engine == want and after.component(t).framing == frame
              and validate(after).ok)
        bad += 0 if ok else 1
        n += 1
    ok = n >= 200 and bad == 0
    report(3, ok, f"slides={n} mismatches={bad} rejected_bands={skipped}")
    assert ok


# 4 ------------------------------------------------------------------------


def test_criterion_4_left_inverse(report):
    n = bad = 0
    for _, d in framed_diagrams(220, start=4000):
        n += 1
        if recombine(inject(d), {}) != d:
            bad += 1
    doc = parse(corpus_text("basics.kl"))
    hopf = isomorphic(recombine(doc.links["fig3"]), doc.links["hopf00"]) is not None
    ok = n >= 200 and bad == 0 and hopf
    report(4, ok, f"diagrams={n} mismatches={bad} fig3_to_hopf00={'yes' if hopf else 'no'}")
    assert ok


# 5 ------------------------------------------------------------------------


def test_criterion_5_band_independence(report):
    rng = random.Random(5)
    n = bad = rejected = 0
    gen = bridged_diagrams(start=5000)
    while n < 120:
        _, d = next(gen)
        b1 = {p: random_band(rng, d) for p in d.spot_counts}
        b2 = {p: random_band(rng, d) for p in d.spot_counts}
        try:
            r1, r2 = recombine(d, b1), recombine(d, b2)
        except MoveError:
            rejected += 1
            continue
        n += 1
        if invariant_record(r1) != invariant_record(r2):
            bad += 1
    t = replay("FIG9")
    cert = [r for r in t.expectations if r.clause == "certificate isomorphic"]
    cert_ok = bool(cert) and cert[0].verdict == "pass"
    ok = n >= 100 and bad == 0 and cert_ok
    report(5, ok, f"band_pairs={n} disagreements={bad} rejected={rejected} "
                  f"fig9_certificate={'isomorphic' if cert_ok else 'no'}")
    assert ok


# 6 ------------------------------------------------------------------------


def test_criterion_6_replays(report):
    parts, ok = [], True
    for fig in FIGURES:
        t0 = time.perf_counter()
        trace = replay(fig)
        dt = time.perf_counter() - t0
        good = trace.overall == "pass" and dt < 1.0 and trace.steps
        ok &= bool(good)
        parts.append(f"{fig}={trace.overall}/{dt * 1000:.0f}ms")
    report(6, ok, " ".join(parts))
    assert ok


# 7 ------------------------------------------------------------------------


def _snf_ok(m) -> bool:
    res = smith_normal_form(m)
    u, s, v = res.U, res.S, res.V
    r, c = len(m), len(m[0])
    if matmul(matmul(u, m), v) != s:
        return False
    if abs(det_leibniz(u)) != 1 or abs(det_leibniz(v)) != 1:
        return False
    if any(s[i][j] for i in range(r) for j in range(c) if i != j):
        return False
    diag = [s[i][i] for i in range(min(r, c))]
    if any(x < 0 for x in diag):
        return False
    for a, b in zip(diag, diag[1:]):
        if (a == 0 and b != 0) or (a and b % a):
            return False
    return diag == invariant_factors(m)


def test_criterion_7_exact_algebra(report):
    rng = random.Random(7)
    snf_bad = 0
    for _ in range(10_000):
        r, c = rng.randint(1, 4), rng.randint(1, 4)
        m = [[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)]
        snf_bad += 0 if _snf_ok(m) else 1
    sig_bad = 0
    for _ in range(1000):
        n = rng.randint(1, 6)
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                m[i][j] = m[j][i] = rng.randint(-3, 3)
        sig_bad += 0 if signature(m) == signature_by_roots(m) else 1
    ok = snf_bad == 0 and sig_bad == 0
    report(7, ok, f"snf_samples=10000 snf_failures={snf_bad} signature_samples=1000 "
                  f"signature_failures={sig_bad}")
    assert ok


# 8 ------------------------------------------------------------------------


def test_criterion_8_bordered_signature(report):
    rng = random.Random(8)
    bad = 0
    for _ in range(1000):
        n = rng.randint(0, 5)
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                m[i][j] = m[j][i] = rng.randint(-3, 3)
        v = [rng.randint(-3, 3) for _ in range(n)]
        f = rng.randint(-4, 4)
        b = bordered(m, v, f)
        if not (signature(b) == signature(m) == signature_by_roots(b)):
            bad += 1
    ok = bad == 0
    report(8, ok, f"samples=1000 failures={bad}")
    assert ok


# 9 ------------------------------------------------------------------------


def fuzz_document(seed: int) -> ScriptDocument:
    d, moves = random_instance(seed, FuzzParams(4, 12, 2))
    rec = invariant_record(d)
    stmts = []
    for m in moves[:12]:
        stmts.append(m)
    stmts += [Expect("signature", rec.signature), Expect("h1", tuple(rec.h1_factors)),
              Expect("components", rec.components), Expect("ball_pairs", rec.ball_pairs),
              Expect("invariants", "L0")]
    return ScriptDocument({"L0": d}, {"s0": Script("s0", "L0", tuple(stmts))})


def _roundtrip(doc: ScriptDocument) -> bool:
    text = serialize(doc)
    back = parse(text)
    return back == doc and serialize(back) == text


def test_criterion_9_dsl_roundtrip(report):
    corpus_bad = 0
    files = corpus_files()
    for name in files:
        corpus_bad += 0 if _roundtrip(parse(corpus_text(name))) else 1
    fuzz_bad = sum(0 if _roundtrip(fuzz_document(s)) else 1 for s in range(9000, 10_000))
    ok = corpus_bad == 0 and fuzz_bad == 0 and len(files) >= 5
    report(9, ok, f"corpus_files={len(files)} corpus_failures={corpus_bad} "
                  f"fuzz_documents=1000 fuzz_failures={fuzz_bad}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
