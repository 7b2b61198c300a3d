from __future__ import annotations

import time

from kirbycalc.diagram import validate
from kirbycalc.fuzz import FuzzParams, check_instance, random_instance
from kirbycalc.moves import STRAIGHT, MacroMove, apply_move


def test_small_instance_has_insertions():
    d, moves = random_instance(0, FuzzParams(1, 0, 0))
    assert len(d.components) == 1 and not d.crossings and not d.pairs
    kinds = {m.kind for m in moves}
    assert {"O1_INSERT", "O3_INSERT"} <= kinds


def test_deterministic():
    assert random_instance(7) == random_instance(7)
    assert random_instance(7, {"max_components": 3, "max_crossings": 6, "max_pairs": 1}) == \
        random_instance(7, FuzzParams(3, 6, 1))


def test_pairs_recombine_with_straight_band():
    n = 0
    for seed in range(1, 200):
        d, _ = random_instance(seed, FuzzParams(4, 12, 2))
        for p in d.spot_counts:
            apply_move(d, MacroMove("RECOMBINE_PAIR", {"pair": p, "band": STRAIGHT}))
            n += 1
    assert n > 20


def test_bounds_and_validity():
    p = FuzzParams(3, 8, 1)
    for seed in range(300):
        d, moves = random_instance(seed, p)
        assert validate(d, strict=True).ok
        assert len(d.components) <= p.max_components
        assert d.n_crossings() <= p.max_crossings
        assert len(d.pairs) <= p.max_pairs
        assert moves


def test_check_instance_finds_no_failures():
    for seed in range(150):
        d, moves = random_instance(seed)
        checks = check_instance(d, moves)
        assert len(checks) == len(moves)
        assert all(ok for _, ok in checks)


def test_ten_thousand_instances_within_budget():
    t0 = time.perf_counter()
    for seed in range(10_000):
        random_instance(seed, FuzzParams(4, 12, 2))
    assert time.perf_counter() - t0 <= 60.0
