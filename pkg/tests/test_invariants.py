from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import framed_diagrams
from oracles import (
    charpoly, det_leibniz, h1_factors, invariant_factors, matmul, signature_by_roots, transpose,
)

from kirbycalc.diagram import Component, Cross, Diagram, DiagramError
from kirbycalc.dsl import parse
from kirbycalc.invariants import (
    bordered, h1_invariants, invariant_record, linking_matrix, nullity, signature, smith_normal_form,
)
from kirbycalc.moves import Move, NewComponent, apply_move
from kirbycalc.runner import corpus_text


def sym(rng, n, lo=-3, hi=3):
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = rng.randint(lo, hi)
    return m


def unimodular(rng, n, steps=6):
    e = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        f = rng.choice((-1, 1))
        e = [[e[r][c] + (f * e[j][c] if r == i else 0) for c in range(n)] for r in range(n)]
        if max(abs(v) for r in e for v in r) > 3:
            e = [[e[r][c] - (f * e[j][c] if r == i else 0) for c in range(n)] for r in range(n)]
    return e


def block(a, b):
    n, m = len(a), len(b)
    out = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        out[i][:n] = a[i]
    for i in range(m):
        out[n + i][n:] = b[i]
    return out


def elementary(factors):
    """The group as a sorted list of prime powers plus 0 per free summand."""
    out = []
    for f in factors:
        if f == 0:
            out.append(0)
            continue
        p = 2
        while f > 1:
            q = 1
            while f % p == 0:
                f //= p
                q *= p
            if q > 1:
                out.append(q)
            p += 1
    return sorted(out)


# oracle sanity ---------------------------------------------------------------


def test_oracles_on_known_cases():
    assert det_leibniz([[2, 1], [1, 3]]) == 5
    assert charpoly([[2, 0], [0, 3]]) == [1, -5, 6]
    assert signature_by_roots([[0, 1], [1, 0]]) == 0
    assert signature_by_roots([[1, 0], [0, 1]]) == 2
    assert signature_by_roots([[0, 0], [0, -4]]) == -1
    assert invariant_factors([[2, 0], [0, 3]]) == [1, 6]
    assert h1_factors([[0]]) == [0]


# linking matrix -------------------------------------------------------------


def test_linking_matrix_examples():
    h = Diagram.build(
        [Component("a", 0, (Cross("x1", "o"), Cross("x2", "u"))),
         Component("b", 1, (Cross("x1", "u"), Cross("x2", "o")))], {"x1": 1, "x2": 1})
    assert linking_matrix(h).rows() == [[0, 1], [1, 1]]
    assert linking_matrix(Diagram.build([Component("u", 5)], {})).rows() == [[5]]
    split = Diagram.build([Component("p", 1), Component("q", -1)], {})
    assert linking_matrix(split).rows() == [[1, 0], [0, -1]]


def test_linking_matrix_refuses_pairs():
    d = parse(corpus_text("basics.kl")).links["fig3"]
    with pytest.raises(DiagramError) as e:
        linking_matrix(d)
    assert e.value.code == "HAS_BALL_PAIRS"


def test_linking_matrix_is_symmetric_with_framings():
    for _, d in framed_diagrams(30, start=200):
        lm = linking_matrix(d)
        rows = lm.rows()
        assert rows == transpose(rows)
        assert [rows[i][i] for i in range(lm.order)] == [d.component(c).framing for c in lm.labels]


# signature ------------------------------------------------------------------


def test_signature_examples():
    assert signature([[0, 1], [1, 0]]) == 0
    assert signature([[1, 0], [0, -1]]) == 0
    assert signature([[0, 1], [1, 1]]) == 0 == signature_by_roots([[0, 1], [1, 1]])
    assert signature([]) == 0
    assert nullity([[0, 0], [0, 0]]) == 2


def test_signature_and_nullity_match_oracle():
    rng = random.Random(1)
    for _ in range(300):
        m = sym(rng, rng.randint(1, 6))
        assert signature(m) == signature_by_roots(m)
        c = charpoly(m)
        zero_roots = next(i for i, v in enumerate(reversed(c)) if v != 0)
        assert nullity(m) == zero_roots


def test_signature_zero_diagonals():
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(2, 6)
        m = sym(rng, n)
        for i in range(n):
            m[i][i] = 0
        assert signature(m) == signature_by_roots(m)


def test_signature_additive_on_blocks():
    rng = random.Random(3)
    for _ in range(200):
        a, b = sym(rng, rng.randint(0, 3)), sym(rng, rng.randint(0, 3))
        assert signature(block(a, b)) == signature(a) + signature(b)
        assert elementary(h1_invariants(block(a, b))) == elementary(h1_invariants(a) + h1_invariants(b))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_congruence_invariance(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    m, e = sym(rng, n), unimodular(rng, n)
    if n <= 5:
        assert abs(det_leibniz(e)) == 1
    c = matmul(matmul(transpose(e), m), e)
    assert signature(c) == signature(m)
    assert h1_invariants(c) == h1_invariants(m)


def test_bordered_matrix_shape():
    assert bordered([[2]], [1], 0) == [[2, 1, 0], [1, 0, 1], [0, 1, 0]]
    assert bordered([], [], 3) == [[3, 1], [1, 0]]


# Smith normal form ----------------------------------------------------------


def test_snf_examples():
    assert smith_normal_form([[2, 0], [0, 3]]).diagonal() == [1, 6]
    assert smith_normal_form([[0, 1], [1, 0]]).diagonal() == [1, 1]
    assert smith_normal_form([[0, 0], [0, 0]]).S == [[0, 0], [0, 0]]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r))))
def test_snf_properties(m):
    res = smith_normal_form(m)
    assert matmul(matmul(res.U, m), res.V) == res.S
    if len(m) <= 5:
        assert abs(det_leibniz(res.U)) == 1
    if len(m[0]) <= 5:
        assert abs(det_leibniz(res.V)) == 1
    diag = res.diagonal()
    assert diag == invariant_factors(m)


def test_h1_examples():
    assert h1_invariants([[5]]) == [5]
    assert h1_invariants([[0]]) == [0]
    assert h1_invariants([[0, 1], [1, 0]]) == []
    assert h1_invariants([[2, 0], [0, 0]]) == [2, 0]


def test_h1_matches_minors_oracle():
    rng = random.Random(5)
    for _ in range(400):
        m = sym(rng, rng.randint(1, 4))
        assert h1_invariants(m) == h1_factors(m)


# records --------------------------------------------------------------------


def test_record_of_cancelling_pair_is_hopf():
    d = parse(corpus_text("basics.kl")).links["fig3"]
    r = invariant_record(d)
    assert (r.signature, r.nullity, r.h1_factors, r.components, r.ball_pairs) == (0, 0, (), 1, 1)


def test_record_under_blow_up_and_hopf():
    for _, d in framed_diagrams(20, start=300):
        base = invariant_record(d)
        up = invariant_record(apply_move(d, Move("O1_INSERT", {"component": "zu", "sign": 1})))
        assert up.signature == base.signature + 1 and up.h1_factors == base.h1_factors
        h = invariant_record(apply_move(d, Move("O3_INSERT", {"component": NewComponent("zr", 1),
                                                               "annulus": "za"})))
        assert h.signature == base.signature and h.h1_factors == base.h1_factors


def test_record_shape_and_text():
    for _, d in framed_diagrams(20, start=400):
        r = invariant_record(d)
        assert abs(r.signature) + r.nullity <= r.components
        fs = list(r.h1_factors)
        nz = [f for f in fs if f]
        assert fs == nz + [0] * (len(fs) - len(nz))
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        text = r.as_text()
        assert text.startswith("signature=") and "h1=" in text and "ball_pairs=" in text
