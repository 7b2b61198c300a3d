"""The maps between framed and bridged links, and band-choice certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .diagram import Cross, Diagram, DiagramError, Spot, isomorphic
from .moves import (
    STRAIGHT, ArcRef, Band, MacroMove, Move, MoveError, apply_move, default_route_signs, normalize,
)

BandAssignment = Mapping[str, Band]


def inject(d: Diagram) -> Diagram:
    """A framed link, regarded as a bridged link with no ball pairs."""
    if d.pairs:
        raise DiagramError("HAS_BALL_PAIRS", "inject expects a framed link")
    return d


def recombine_pair(d: Diagram, pair: str, band: Band = STRAIGHT) -> Diagram:
    try:
        return apply_move(d, MacroMove("RECOMBINE_PAIR", {"pair": pair, "band": band}))
    except MoveError as exc:
        raise MoveError(f"pair {pair}: {exc.reason}", exc.step, exc.code) from exc


def recombine(d: Diagram, bands: Optional[BandAssignment] = None) -> Diagram:
    """Trade every ball pair for an annulus, in lexicographic pair order.

    Pairs missing from ``bands`` use the straight band.
    """
    bands = dict(bands or {})
    unknown = set(bands) - set(d.spot_counts)
    if unknown:
        raise MoveError(f"bands given for unknown pairs {sorted(unknown)}", code="BAD_BANDS")
    out = d
    for pair in sorted(d.spot_counts):
        out = recombine_pair(out, pair, bands.get(pair, STRAIGHT))
    return out


@dataclass(frozen=True)
class Certificate:
    """A script carrying ``claims[0]`` to ``claims[1]``.

    ``verdict`` is ``isomorphic`` when the replayed endpoint matches the
    second claim up to relabelling (after normalisation), ``invariant`` when
    only the invariant records agree, and ``fail`` otherwise.
    """

    script: tuple
    claims: tuple
    verdict: str = "unverified"
    notes: tuple = field(default=())

    def replay(self) -> Diagram:
        cur = self.claims[0]
        for i, m in enumerate(self.script):
            try:
                cur = apply_move(cur, m)
            except MoveError as exc:
                raise MoveError(exc.reason, i, exc.code) from exc
        return cur


def _locate(d: Diagram, r: Diagram, pair: str, arc: ArcRef) -> Optional[ArcRef]:
    """Position in the recombination ``r`` of the arc ``arc`` of ``d``.

    The arc is identified by the event that follows it, which survives
    recombination either under its own name or as an annulus crossing.
    """
    ev = d.component(arc.component).events
    if not ev:
        return arc if not r.component(arc.component).events else None
    e = ev[arc.pos % len(ev)]
    target = r.component(arc.component).events
    if isinstance(e, Cross):
        want = e
    else:
        if e.pair != pair:
            return None
        want = _spot_image(d, r, pair, e)
        if want is None:
            return None
    for i, f in enumerate(target):
        if f == want:
            return ArcRef(arc.component, i)
    return None


def _spot_image(d: Diagram, r: Diagram, pair: str, s: Spot) -> Optional[Cross]:
    new = [c for c in r.components if not d.has_component(c.name)]
    if len(new) != 1:
        return None
    k = d.spot_counts[pair]
    ann = new[0].events
    # annulus reads x_1 .. x_k over, then y_k .. y_1 under; x_1 is its least key
    # only after relabelling, so find the block by roles
    overs = [e for e in ann if e.role == "o"]
    unders = [e for e in ann if e.role == "u"]
    if len(overs) != k or len(unders) != k:
        return None
    comp, ia = _spot_owner(d, pair, s.spot)
    cr = r.component(comp).events
    n = len(cr)
    # the A event of this passage becomes an under crossing, B an over one
    # and both sit where the spots were; use the neighbour before A
    prev = d.component(comp).events[(ia - 1) % len(d.component(comp).events)]
    for i, f in enumerate(cr):
        if f == prev and isinstance(cr[(i + 1) % n], Cross):
            a, b = cr[(i + 1) % n], cr[(i + 2) % n]
            return a if s.side == "A" else b
    return None


def _spot_owner(d: Diagram, pair: str, spot: int) -> tuple[str, int]:
    for c in d.components:
        for i, e in enumerate(c.events):
            if isinstance(e, Spot) and e.pair == pair and e.spot == spot and e.side == "A":
                return c.name, i
    raise MoveError(f"spot {spot} of {pair} missing")


def _isotopy_script(d: Diagram, pair: str, band: Band, first: Diagram) -> Optional[list]:
    """R2 insertions in ``first`` reproducing the stub crossings of ``band``.

    Only routes made of consecutive same-role, opposite-sign step pairs on
    one arc, dragging a single strand, are handled.
    """
    if d.spot_counts[pair] != 1:
        return None
    steps = list(band.route)
    if len(steps) % 2:
        return None
    signs = default_route_signs(band)
    comp, ia = _spot_owner(d, pair, 1)
    ev = first.component(comp).events
    ann = [c for c in first.components if not d.has_component(c.name)]
    if len(ann) != 1:
        return None
    ann_x = {e.crossing for e in ann[0].events}
    ys = [i for i, e in enumerate(ev) if e.crossing in ann_x and e.role == "o"]
    if len(ys) != 1:
        return None
    stub = ArcRef(comp, (ys[0] + 1) % len(ev))
    # the B-side stub meets the route last step first
    seq = steps[::-1]
    sg = signs[::-1]
    script = []
    for i in range(0, len(seq), 2):
        s1, s2 = seq[i], seq[i + 1]
        if s1.arc != s2.arc or s1.role != s2.role or sg[i] != -sg[i + 1]:
            return None
        if s1.arc.component == comp:
            return None
        y = _locate(d, first, pair, s1.arc)
        if y is None:
            return None
        arcs = (stub, y) if s1.role == "o" else (y, stub)
        script.append(Move("R2", {"op": "insert", "arcs": arcs, "sign": sg[i]}))
    # later insertions go into the same stub gap, in front of earlier ones
    return script[::-1]


def _same_up_to_moves(a: Diagram, b: Diagram, budget: int) -> bool:
    if isomorphic(a, b):
        return True
    return isomorphic(normalize(a, budget), normalize(b, budget)) is not None


def band_independence_certificate(
    d: Diagram, pair: str, b1: Band, b2: Band, budget: int = 200,
) -> Certificate:
    """Relate the recombinations of ``pair`` along ``b1`` and along ``b2``."""
    from .invariants import invariant_record

    first = recombine_pair(d, pair, b1)
    second = recombine_pair(d, pair, b2)
    if b1 == b2:
        return Certificate((), (first, second), "isomorphic" if isomorphic(first, second) else "fail")
    notes = []
    script = None
    if b1.straight:
        script = _isotopy_script(d, pair, b2, first)
    if script is not None:
        cert = Certificate(tuple(script), (first, second))
        try:
            end = cert.replay()
            if _same_up_to_moves(end, second, budget):
                return Certificate(cert.script, cert.claims, "isomorphic")
            notes.append("replayed endpoint not matched within the normalise budget")
        except MoveError as exc:
            notes.append(f"replay failed: {exc}")
    else:
        notes.append("no syntactic script for this band pair")
    ok = invariant_record(first) == invariant_record(second)
    return Certificate(tuple(script or ()), (first, second), "invariant" if ok else "fail", tuple(notes))


__all__ = [
    "BandAssignment", "Certificate", "band_independence_certificate", "inject", "recombine",
    "recombine_pair",
]
