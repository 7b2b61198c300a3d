"""Exact integer invariants: linking matrix, signature, Smith form, H1."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .diagram import Diagram, DiagramError, linking_number

Matrix = list[list[int]]


@dataclass(frozen=True)
class LinkingMatrix:
    labels: tuple
    entries: tuple  # tuple of row tuples

    @property
    def order(self) -> int:
        return len(self.labels)

    def rows(self) -> Matrix:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class SNFResult:
    U: Matrix
    S: Matrix
    V: Matrix

    def diagonal(self) -> list[int]:
        return [self.S[i][i] for i in range(min(len(self.S), len(self.S[0]) if self.S else 0))]


@dataclass(frozen=True)
class InvariantRecord:
    signature: int
    nullity: int
    h1_factors: tuple
    components: int
    ball_pairs: int

    def shadow(self) -> tuple:
        """The part of the record every equivalence move must preserve."""
        return (self.signature, self.h1_factors)

    def as_text(self) -> str:
        h1 = ",".join(str(f) for f in self.h1_factors)
        return (f"signature={self.signature}\nnullity={self.nullity}\nh1=[{h1}]\n"
                f"components={self.components}\nball_pairs={self.ball_pairs}\n")


def linking_matrix(d: Diagram) -> LinkingMatrix:
    if not d.is_framed():
        raise DiagramError("HAS_BALL_PAIRS", "recombine the ball pairs first")
    names = d.names()
    n = len(names)
    m = [[0] * n for _ in range(n)]
    for i, a in enumerate(names):
        m[i][i] = d.component(a).framing
        for j in range(i + 1, n):
            m[i][j] = m[j][i] = linking_number(d, a, names[j])
    return LinkingMatrix(tuple(names), tuple(tuple(r) for r in m))


def _as_rows(m) -> Matrix:
    if isinstance(m, LinkingMatrix):
        return m.rows()
    return [list(map(int, r)) for r in m]


def signature(m) -> int:
    return _inertia(_as_rows(m))[0]


def _inertia(rows: Matrix) -> tuple[int, int]:
    """(signature, nullity) by rational congruence pivoting."""
    a = [[Fraction(v) for v in r] for r in rows]
    n = len(a)
    live = list(range(n))
    sig = 0
    while live:
        piv = next((i for i in live if a[i][i] != 0), None)
        if piv is not None:
            p = a[piv][piv]
            sig += 1 if p > 0 else -1
            live.remove(piv)
            for i in live:
                f = a[i][piv] / p
                if f:
                    for j in live:
                        a[i][j] -= f * a[piv][j]
            continue
        pair = next(((i, j) for i in live for j in live if i < j and a[i][j] != 0), None)
        if pair is None:
            break
        i0, j0 = pair
        b = a[i0][j0]
        # hyperbolic block [[0,b],[b,0]]: one positive and one negative square
        live.remove(i0)
        live.remove(j0)
        for k in live:
            ci, cj = a[k][i0], a[k][j0]
            if not (ci or cj):
                continue
            # block inverse is [[0,1/b],[1/b,0]]
            for l in live:
                a[k][l] -= (ci * a[j0][l] + cj * a[i0][l]) / b
    return sig, len(live)


def nullity(m) -> int:
    return _inertia(_as_rows(m))[1]


def _identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(m) -> SNFResult:
    """Return U, S, V with U*m*V = S diagonal and d1 | d2 | ...

    Pivot: smallest nonzero absolute value, ties by row-major position.
    """
    S = _as_rows(m)
    r = len(S)
    c = len(S[0]) if r else 0
    U, V = _identity(r), _identity(c)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (S, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):  # row dst += f * row src
        S[dst] = [x + f * y for x, y in zip(S[dst], S[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for M in (S, V):
            for row in M:
                row[dst] += f * row[src]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    v = abs(S[i][j])
                    if v and (best is None or v < best[0]):
                        best = (v, i, j)
            if best is None:
                break
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            p = S[t][t]
            done = True
            for i in range(t + 1, r):
                q = S[i][t] // p
                if q:
                    add_row(t, i, -q)
                if S[i][t]:
                    done = False
            for j in range(t + 1, c):
                q = S[t][j] // p
                if q:
                    add_col(t, j, -q)
                if S[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, c)
                        if S[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if t < r and t < c and S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
    return SNFResult(U, S, V)


def h1_invariants(m) -> list[int]:
    rows = _as_rows(m)
    n = len(rows)
    if n == 0:
        return []
    diag = smith_normal_form(rows).diagonal()
    diag += [0] * (n - len(diag))
    nonzero = sorted(v for v in diag if v not in (0, 1))
    return nonzero + [0] * diag.count(0)


def invariant_record(d: Diagram, bands: Optional[dict] = None) -> InvariantRecord:
    from .translate import recombine

    framed = d if d.is_framed() else recombine(d, bands or {})
    lm = linking_matrix(framed)
    sig, nul = _inertia(lm.rows())
    return InvariantRecord(sig, nul, tuple(h1_invariants(lm)), len(d.components), len(d.pairs))


def bordered(m: Sequence[Sequence[int]], v: Sequence[int], f: int) -> Matrix:
    """[[m, v, 0], [v^T, f, 1], [0, 1, 0]] -- the matrix after an O3 insertion."""
    n = len(m)
    out = [list(map(int, r)) + [int(v[i]), 0] for i, r in enumerate(m)]
    out.append([int(x) for x in v] + [int(f), 1])
    out.append([0] * n + [1, 0])
    return out
