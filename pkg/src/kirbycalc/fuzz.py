"""Seeded random diagrams with moves that apply to them."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .diagram import Component, Diagram, fresh_name, realizability_genus, validate
from .moves import (
    ArcCross, ArcRef, Band, MacroMove, Move, NewComponent, RouteStep, applicable, apply_move,
    reduction_sites, STRAIGHT, expand_macro, MoveError,
)


@dataclass(frozen=True)
class FuzzParams:
    max_components: int = 4
    max_crossings: int = 12
    max_pairs: int = 2


def _arcs(d: Diagram) -> list[ArcRef]:
    out = []
    for c in d.components:
        out += [ArcRef(c.name, i) for i in range(max(len(c.events), 1))]
    return out


def _planar(d: Diagram) -> bool:
    # growth steps keep the structure and the parity valid, only the
    # embedding can break
    return realizability_genus(d) == 0


def _try(d: Diagram, m) -> Diagram | None:
    try:
        out = apply_move(d, m)
    except MoveError:
        return None
    return out if _planar(out) else None


def _grow(rng: random.Random, p: FuzzParams) -> Diagram:
    pairs = rng.randint(0, p.max_pairs) if p.max_components > 1 else 0
    pairs = min(pairs, p.max_components - 1)
    n = rng.randint(1, max(1, p.max_components - pairs))
    comps = [Component(f"c{i + 1}", rng.randint(-3, 3)) for i in range(n)]
    d = Diagram.build(comps, {})
    budget = rng.randint(0, p.max_crossings)
    for _ in range(4 * budget + 4):
        room = p.max_crossings - d.n_crossings()
        if room < 1:
            break
        arcs = _arcs(d)
        r = rng.random()
        if r < 0.3 or room < 2:
            m = Move("R1", {"op": "insert", "arc": rng.choice(arcs), "sign": rng.choice((1, -1)),
                            "role": rng.choice("ou")})
        elif r < 0.4 and len(d.components) < p.max_components - pairs - 1:
            taken = set(d.names())
            name = fresh_name(taken, "c")
            m = Move("O3_INSERT", {"component": NewComponent(name, rng.randint(-2, 2)),
                                   "annulus": fresh_name(taken | {name}, "q")})
        else:
            a1, a2 = rng.choice(arcs), rng.choice(arcs)
            if a1 == a2:
                continue
            m = Move("R2", {"op": "insert", "arcs": (a1, a2), "sign": rng.choice((1, -1)),
                            "parallel": rng.random() < 0.5})
        nxt = _try(d, m)
        if nxt is not None:
            d = nxt
    for _ in range(pairs):
        pair = fresh_name(d.spot_counts, "P")
        u = fresh_name(d.names(), "c")
        if rng.random() < 0.25:
            m = Move("A1_INSERT", {"pair": pair, "component": u})
        else:
            m = MacroMove("A1GEN_INSERT", {"pair": pair, "component": u, "strands": [rng.choice(_arcs(d))]})
        nxt = _try(d, m)
        if nxt is not None:
            d = nxt
    return d


def _new_component(rng: random.Random, d: Diagram, name: str) -> NewComponent:
    """A new component crossing one or two existing components twice each."""
    evs = []
    for c in rng.sample(d.names(), min(len(d.components), rng.randint(0, 2))):
        n = max(len(d.component(c).events), 1)
        a, b = ArcRef(c, rng.randrange(n)), ArcRef(c, rng.randrange(n))
        s = rng.choice((1, -1))
        evs += [ArcCross(a, rng.choice("ou"), s), ArcCross(b, rng.choice("ou"), rng.choice((1, -1)))]
    rng.shuffle(evs)
    return NewComponent(name, rng.randint(-2, 2), tuple(evs))


def _candidates(rng: random.Random, d: Diagram) -> list:
    taken = set(d.names())
    name = fresh_name(taken, "n")
    ann = fresh_name(taken | {name}, "q")
    arcs = _arcs(d)
    out = [
        Move("O1_INSERT", {"component": name, "sign": rng.choice((1, -1))}),
        Move("O3_INSERT", {"component": _new_component(rng, d, name), "annulus": ann}),
        Move("O3_INSERT", {"component": NewComponent(name, rng.randint(-2, 2)), "annulus": ann}),
        Move("A1_INSERT", {"pair": fresh_name(d.spot_counts, "P"), "component": name}),
        Move("R1", {"op": "insert", "arc": rng.choice(arcs), "sign": rng.choice((1, -1))}),
    ]
    out += reduction_sites(d)
    for c in d.components:
        out.append(Move("O1_DELETE", {"component": c.name}))
        out.append(Move("O3_DELETE", {"component": c.name, "annulus": rng.choice(d.names())}))
    if len(d.components) >= 2:
        t, o = rng.sample(d.names(), 2)
        tl, ol = len(d.component(t).events), len(d.component(o).events)
        route = ()
        if rng.random() < 0.4:
            a = rng.choice(arcs)
            role = rng.choice("ou")
            route = (RouteStep(a, role), RouteStep(a, rng.choice("ou")))
        band = Band(route, rng.choice((1, -1)), ArcRef(t, rng.randrange(max(tl, 1))),
                    ArcRef(o, rng.randrange(max(ol, 1))))
        for side in "LR":
            out.append(Move("O2_SLIDE", {"target": t, "over": o, "side": side, "band": band}))
    if len(d.crossings) >= 3:
        xs = rng.sample([x for x, _ in d.crossings], 3)
        out.append(Move("R3", {"crossings": tuple(xs)}))
    for pair in d.spot_counts:
        out.append(Move("A1_DELETE", {"pair": pair}))
        out.append(Move("A2_REVERSE", {"pair": pair, "annulus": ann}))
        a = rng.choice(arcs)
        route = (RouteStep(a, rng.choice("ou")), RouteStep(a, rng.choice("ou")))
        out.append(Move("BALL_DRAG", {"pair": pair, "side": rng.choice("AB"),
                                      "band": Band(route if rng.random() < 0.7 else ())}))
        out.append(MacroMove("RECOMBINE_PAIR", {"pair": pair, "band": STRAIGHT}))
    for c in d.components:
        if c.framing == 0 and len(c.events) >= 2 and not c.spot_passages():
            out.append(Move("A2_FORWARD", {"annulus": c.name, "pair": fresh_name(d.spot_counts, "P")}))
    return out


# moves whose caller-chosen routes can leave the plane; the rest are local
_ROUTED = {"O2_SLIDE", "O3_INSERT", "BALL_DRAG", "RECOMBINE_PAIR"}


def _ok(d: Diagram, m) -> bool:
    """Applicable, and the result is still drawable in the plane."""
    if isinstance(m, MacroMove):
        try:
            expand_macro(m, d)
        except MoveError:
            return False
    elif not applicable(d, m).ok:
        return False
    return m.kind not in _ROUTED or _planar(apply_move(d, m))


def random_instance(seed: int, params: FuzzParams | dict | None = None) -> tuple[Diagram, list]:
    """A strict-valid diagram and a non-empty list of moves applicable to it,
    each of which keeps it strict-valid."""
    if isinstance(params, dict):
        params = FuzzParams(**params)
    p = params or FuzzParams()
    rng = random.Random(seed)
    d = _grow(rng, p)
    assert validate(d, strict=True).ok
    moves = [m for m in _candidates(rng, d) if _ok(d, m)]
    return d, moves


def check_instance(d: Diagram, moves: list) -> list[tuple[str, bool]]:
    """Apply each move to ``d`` and compare invariant shadows with the
    expected shift; one (kind, ok) entry per move."""
    from .invariants import invariant_record
    from .runner import expected_shift

    pre = invariant_record(d)
    out = []
    for m in moves:
        try:
            post = invariant_record(apply_move(d, m))
        except MoveError:
            out.append((m.kind, False))
            continue
        ok = post.signature == pre.signature + expected_shift(d, m) and post.h1_factors == pre.h1_factors
        out.append((m.kind, ok))
    return out


__all__ = ["FuzzParams", "check_instance", "random_instance"]
