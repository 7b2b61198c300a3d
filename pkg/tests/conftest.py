from __future__ import annotations

import random

from kirbycalc._edit import is_handle_gap
from kirbycalc.fuzz import FuzzParams, random_instance
from kirbycalc.moves import ArcRef, Band, RouteStep

FRAMED = FuzzParams(max_components=4, max_crossings=10, max_pairs=0)
BRIDGED = FuzzParams(max_components=4, max_crossings=10, max_pairs=2)


def framed_diagrams(count: int, start: int = 0, params: FuzzParams = FRAMED):
    """Yield ``count`` seeded framed diagrams."""
    seed = start
    made = 0
    while made < count:
        d, _ = random_instance(seed, params)
        seed += 1
        if d.pairs:
            continue
        made += 1
        yield seed - 1, d


def bridged_diagrams(start: int = 0, params: FuzzParams = BRIDGED):
    """Yield seeded diagrams carrying at least one ball pair, forever."""
    seed = start
    while True:
        d, _ = random_instance(seed, params)
        if d.pairs:
            yield seed, d
        seed += 1


def arcs(d):
    """Drawn arcs, skipping the gaps between the two spots of a pair."""
    out = []
    for c in d.components:
        out += [ArcRef(c.name, i) for i in range(max(len(c.events), 1))
                if not is_handle_gap(c.events, i)]
    return out


def random_route(rng: random.Random, d, max_pairs: int = 2) -> tuple:
    """Route events in matched couples so every component is crossed an
    even number of times."""
    steps = []
    pool = arcs(d)
    for _ in range(rng.randint(0, max_pairs)):
        a, b = rng.choice(pool), rng.choice(pool)
        if a.component != b.component:
            b = a
        steps += [RouteStep(a, rng.choice("ou")), RouteStep(b, rng.choice("ou"))]
    return tuple(steps)


def random_band(rng: random.Random, d) -> Band:
    return Band(random_route(rng, d), rng.choice((1, -1)))
