"""Pattern-matched rewrites for both calculi.

Primitive moves act on a :class:`~kirbycalc.diagram.Diagram` and return a new
one.  Deletions only recognise the canonical local pattern of their move;
``normalize`` is the tool for reaching such a pattern by Reidemeister moves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ._edit import Editor, is_handle_gap, opposite
from .diagram import Component, Cross, Diagram, Spot, fresh_name, linking_number, realizability_genus, self_writhe

PRIMITIVES = (
    "R1", "R2", "R3", "O1_INSERT", "O1_DELETE", "O2_SLIDE", "O3_INSERT", "O3_DELETE",
    "A1_INSERT", "A1_DELETE", "A2_FORWARD", "A2_REVERSE", "BALL_DRAG",
)
MACROS = ("A1GEN_INSERT", "A1GEN_DELETE", "O3_VIA_A1A2", "O2_VIA_A1GEN", "RECOMBINE_PAIR")


class MoveError(Exception):
    def __init__(self, reason: str, step: Optional[int] = None, code: str = "NOT_APPLICABLE"):
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"{code}{where}: {reason}")
        self.code = code
        self.reason = reason
        self.step = step


class _NoMatch(Exception):
    pass


@dataclass(frozen=True)
class ArcRef:
    component: str
    pos: int

    def __str__(self):
        return f"{self.component}[{self.pos}]"


@dataclass(frozen=True)
class RouteStep:
    arc: ArcRef
    role: str  # the band (or dragged ball) passes 'o'ver or 'u'nder the arc
    sign: Optional[int] = None


@dataclass(frozen=True)
class Band:
    route: tuple = ()
    orientation: int = 1
    start: Optional[ArcRef] = None
    end: Optional[ArcRef] = None

    def __post_init__(self):
        object.__setattr__(self, "route", tuple(self.route))

    @property
    def straight(self) -> bool:
        return not self.route


STRAIGHT = Band()


@dataclass(frozen=True)
class SelfCross:
    crossing: str
    role: str
    sign: int


@dataclass(frozen=True)
class ArcCross:
    arc: ArcRef
    role: str
    sign: int


@dataclass(frozen=True)
class NewComponent:
    """A component to be inserted, with its crossings against existing arcs."""

    name: str
    framing: int
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))


@dataclass(frozen=True)
class Move:
    kind: str
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)


@dataclass(frozen=True)
class MacroMove(Move):
    pass


@dataclass(frozen=True)
class Decision:
    ok: bool
    bindings: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.ok


# ------------------------------------------------------------------ helpers


def _need(cond, reason: str):
    if not cond:
        raise _NoMatch(reason)


def _comp(d: Diagram, name: str) -> Component:
    _need(d.has_component(name), f"no component {name}")
    return d.component(name)


def _check_arc(d: Diagram, arc: ArcRef) -> None:
    c = _comp(d, arc.component)
    n = len(c.events)
    _need(0 <= arc.pos < max(n, 1), f"arc {arc} out of range")
    _need(not is_handle_gap(c.events, arc.pos), f"arc {arc} is a handle gap, not a drawn arc")


def _adjacent(n: int, i: int, j: int) -> bool:
    return n >= 2 and ((i + 1) % n == j or (j + 1) % n == i)


def _fresh_name_ok(d: Diagram, name: str) -> None:
    _need(not d.has_component(name), f"component name {name} already used")


def _passage(d: Diagram, pair: str, spot: int) -> tuple[str, int]:
    """Component and index of the A-side event of a spot passage."""
    for c in d.components:
        for i, e in enumerate(c.events):
            if isinstance(e, Spot) and e.pair == pair and e.spot == spot and e.side == "A":
                nxt = c.events[(i + 1) % len(c.events)]
                _need(isinstance(nxt, Spot) and nxt.pair == pair and nxt.spot == spot
                      and nxt.side == "B", f"spot {pair}.{spot} passage is split")
                return c.name, i
    raise _NoMatch(f"spot {pair}.{spot} has no passage")


# --------------------------------------------------------- pattern checks


def _check_R1(d, p):
    if p.get("op", "delete") == "delete":
        x = p["crossing"]
        _need(x in d.sign, f"no crossing {x}")
        occ = d.occurrences()[x]
        (co, io), (cu, iu) = occ["o"], occ["u"]
        _need(co == cu, "R1 kink must be a self-crossing")
        _need(_adjacent(len(d.component(co).events), io, iu), "kink events not consecutive")
        return {"component": co}
    _check_arc(d, p["arc"])
    _need(p.get("sign", 1) in (1, -1), "sign must be +1 or -1")
    return {}


def _check_R2(d, p):
    if p.get("op", "delete") == "delete":
        x, y = p["crossings"]
        _need(x != y and x in d.sign and y in d.sign, "R2 needs two distinct crossings")
        _need(d.sign[x] == -d.sign[y], "R2 crossings must have opposite signs")
        ox, oy = d.occurrences()[x], d.occurrences()[y]
        for role in ("o", "u"):
            (cx, ix), (cy, iy) = ox[role], oy[role]
            _need(cx == cy and _adjacent(len(d.component(cx).events), ix, iy),
                  f"{role}-passages of {x},{y} not consecutive")
        return {}
    a1, a2 = p["arcs"]
    _check_arc(d, a1)
    _check_arc(d, a2)
    _need(a1 != a2, "R2 insertion needs two different arcs")
    _need(p.get("sign", 1) in (1, -1), "sign must be +1 or -1")
    return {}


def _r3_segments(d: Diagram, xs):
    xs = set(xs)
    segs = []
    for c in d.components:
        n = len(c.events)
        for i in range(n if n >= 2 else 0):
            a, b = c.events[i], c.events[(i + 1) % n]
            if (isinstance(a, Cross) and isinstance(b, Cross) and a.crossing in xs
                    and b.crossing in xs and a.crossing != b.crossing):
                segs.append((c.name, i, a, b))
    return segs


def _check_R3(d, p):
    xs = tuple(p["crossings"])
    _need(len(set(xs)) == 3 and all(x in d.sign for x in xs), "R3 needs three crossings")
    segs = _r3_segments(d, xs)
    top = [s for s in segs if s[2].role == "o" and s[3].role == "o"]
    bot = [s for s in segs if s[2].role == "u" and s[3].role == "u"]
    mid = [s for s in segs if s[2].role != s[3].role]
    faceless = False
    for t in top:
        tx = {t[2].crossing, t[3].crossing}
        for b in bot:
            bx = {b[2].crossing, b[3].crossing}
            if len(tx & bx) != 1:
                continue
            want = (tx | bx) - (tx & bx)
            for m in mid:
                mx = {m[2].crossing, m[3].crossing}
                if mx != want:
                    continue
                roles = {m[2].crossing: m[2].role, m[3].crossing: m[3].role}
                if roles[next(iter(tx - bx))] == "u" and roles[next(iter(bx - tx))] == "o":
                    b3 = {"segments": (t[:2], m[:2], b[:2])}
                    # the triangle must bound an empty face
                    if realizability_genus(_apply_R3(d, p, b3)) <= realizability_genus(d):
                        return b3
                    faceless = True
    if faceless:
        raise _NoMatch("R3 triangle does not bound a face")
    raise _NoMatch("no R3 triangle on these crossings")


def _check_O1_INSERT(d, p):
    _fresh_name_ok(d, p["component"])
    _need(p.get("sign", 1) in (1, -1), "sign must be +1 or -1")
    return {}


def _check_O1_DELETE(d, p):
    c = _comp(d, p["component"])
    _need(not c.events, "component has events")
    _need(c.framing in (1, -1), f"framing {c.framing} is not +-1")
    return {}


def _check_new_component(d: Diagram, nc: NewComponent) -> None:
    _fresh_name_ok(d, nc.name)
    selfs: dict[str, list] = {}
    for e in nc.events:
        _need(e.role in ("o", "u") and e.sign in (1, -1), "bad role or sign in new component")
        if isinstance(e, SelfCross):
            _need(e.crossing not in d.sign, f"crossing id {e.crossing} already used")
            selfs.setdefault(e.crossing, []).append(e)
        else:
            _check_arc(d, e.arc)
    for x, occ in selfs.items():
        _need(len(occ) == 2 and {o.role for o in occ} == {"o", "u"}
              and occ[0].sign == occ[1].sign, f"self crossing {x} must appear once over, once under")
    per: dict[str, int] = {}
    for e in nc.events:
        if isinstance(e, ArcCross):
            per[e.arc.component] = per.get(e.arc.component, 0) + 1
    _need(all(v % 2 == 0 for v in per.values()), "new component must cross each component an even number of times")


def _check_O3_INSERT(d, p):
    nc: NewComponent = p["component"]
    _check_new_component(d, nc)
    _need(p["annulus"] != nc.name, "annulus and component need different names")
    _fresh_name_ok(d, p["annulus"])
    _need(0 <= p.get("at", 0) <= len(nc.events), "annulus position out of range")
    return {}


def _check_O3_DELETE(d, p):
    r, a = _comp(d, p["component"]), _comp(d, p["annulus"])
    _need(r.name != a.name, "component and annulus coincide")
    _need(a.framing == 0, "annulus framing is not 0")
    _need(len(a.events) == 2 and all(isinstance(e, Cross) for e in a.events),
          "annulus must have exactly two crossing events")
    e1, e2 = a.events
    _need(e1.role != e2.role, "annulus passages must have opposite roles")
    _need(d.sign[e1.crossing] == d.sign[e2.crossing], "annulus crossings differ in sign")
    parts = [d.partner(a.name, i) for i in (0, 1)]
    _need(all(c == r.name for c, _ in parts), "annulus crosses something other than the component")
    _need(_adjacent(len(r.events), parts[0][1], parts[1][1]), "annulus crossings not on consecutive arcs")
    _need(not r.spot_passages(), "component passes through a ball pair")
    return {}


def _check_A1_INSERT(d, p):
    _need(p["pair"] not in d.spot_counts, f"pair {p['pair']} exists")
    _fresh_name_ok(d, p["component"])
    return {}


def _check_A1_DELETE(d, p):
    pair = p["pair"]
    _need(d.spot_counts.get(pair) == 1, "pair must exist with one spot")
    comp, _ = _passage(d, pair, 1)
    c = d.component(comp)
    _need(len(c.events) == 2 and c.framing == 0, "threading ribbon is not an isolated 0-framed loop")
    return {"component": comp}


def _annulus_blocks(d: Diagram, a: Component):
    """Rotation of an annulus into (over block, under block), or raise."""
    n = len(a.events)
    _need(n >= 2 and n % 2 == 0, "annulus needs an even, positive number of crossings")
    _need(all(isinstance(e, Cross) for e in a.events), "annulus has spot passages")
    k = n // 2
    for r in range(n):
        ev = a.events[r:] + a.events[:r]
        if all(e.role == "o" for e in ev[:k]) and all(e.role == "u" for e in ev[k:]):
            return r, ev[:k], ev[k:]
    raise _NoMatch("annulus roles are not one over block then one under block")


def _check_A2_FORWARD(d, p):
    a = _comp(d, p["annulus"])
    _need(p["pair"] not in d.spot_counts, f"pair {p['pair']} exists")
    _need(a.framing == 0, "annulus framing is not 0")
    _, over, under = _annulus_blocks(d, a)
    k = len(over)
    strands = []
    for i in range(k):
        x, y = over[i], under[k - 1 - i]
        _need(d.sign[x.crossing] == 1 and d.sign[y.crossing] == 1, "annulus crossings must be positive")
        cx, ix = d.occurrences()[x.crossing]["u"]
        cy, iy = d.occurrences()[y.crossing]["o"]
        _need(cx != a.name, "annulus crosses itself")
        n = len(d.component(cx).events)
        _need(cx == cy and (ix + 1) % n == iy, f"strand {i + 1} does not pass straight through the annulus")
        strands.append((cx, ix, iy))
    return {"strands": strands}


def _check_A2_REVERSE(d, p):
    pair = p["pair"]
    _need(pair in d.spot_counts, f"no pair {pair}")
    _fresh_name_ok(d, p["annulus"])
    return {"passages": [_passage(d, pair, j) for j in range(1, d.spot_counts[pair] + 1)]}


def _check_BALL_DRAG(d, p):
    pair, side = p["pair"], p.get("side", "B")
    _need(pair in d.spot_counts, f"no pair {pair}")
    _need(side in ("A", "B"), "side must be A or B")
    passages = [_passage(d, pair, j) for j in range(1, d.spot_counts[pair] + 1)]
    along = p.get("along")
    if along is not None:
        _need(side == "B", "pushing along a ribbon moves the B ball")
        c = _comp(d, along)
        mine = [s for s in c.spot_passages()]
        _need(len(mine) == 2 and mine[0].pair == pair, "ribbon must pass through this pair exactly once")
        return {"passages": passages, "spot": mine[0].spot}
    band: Band = p.get("band", STRAIGHT)
    for st in band.route:
        _check_arc(d, st.arc)
        _need(st.role in ("o", "u"), "route role must be over or under")
    per: dict[str, int] = {}
    for st in band.route:
        per[st.arc.component] = per.get(st.arc.component, 0) + 1
    _need(all(v % 2 == 0 for v in per.values()), "route must cross each component an even number of times")
    return {"passages": passages}


def _check_O2_SLIDE(d, p):
    t, o = p["target"], p["over"]
    _need(t != o, "target and over coincide")
    band: Band = p["band"]
    _need(band.start is not None and band.end is not None, "band endpoints missing")
    _need(band.start.component == t and band.end.component == o, "band endpoints do not resolve")
    _check_arc(d, band.start)
    _check_arc(d, band.end)
    _need(not _comp(d, o).spot_passages(), "cannot slide over a ribbon through a ball pair")
    for st in band.route:
        _check_arc(d, st.arc)
    _need(p.get("side", "R") in ("L", "R"), "copy side must be L or R")
    return {}


_CHECKS = {k: globals()[f"_check_{k}"] for k in PRIMITIVES}


def applicable(d: Diagram, m: Move) -> Decision:
    if m.kind not in _CHECKS:
        return Decision(False, reason=f"{m.kind} is not a primitive move")
    try:
        return Decision(True, _CHECKS[m.kind](d, m.params))
    except _NoMatch as exc:
        return Decision(False, reason=str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        return Decision(False, reason=f"bad parameters: {exc!r}")


# ---------------------------------------------------------------- rewrites


def _apply_R1(d, p, b):
    ed = Editor(d)
    if p.get("op", "delete") == "delete":
        ed.drop_crossing(p["crossing"])
        return ed.commit()
    arc, role = p["arc"], p.get("role", "o")
    x = p.get("crossing") or ed.crossing(p.get("sign", 1))
    ed.reserve(x, p.get("sign", 1))
    ed.insert(arc.component, arc.pos, Cross(x, role), key=(0,))
    ed.insert(arc.component, arc.pos, Cross(x, opposite(role)), key=(1,))
    return ed.commit()


def _apply_R2(d, p, b):
    ed = Editor(d)
    if p.get("op", "delete") == "delete":
        for x in p["crossings"]:
            ed.drop_crossing(x)
        return ed.commit()
    a1, a2 = p["arcs"]
    names = p.get("crossings") or ()
    sg = p.get("sign", 1)
    x = names[0] if names else ed.crossing(sg)
    ed.reserve(x, sg)
    y = names[1] if names else ed.crossing(-sg)
    ed.reserve(y, -sg)
    ed.insert(a1.component, a1.pos, Cross(x, "o"), key=(0,))
    ed.insert(a1.component, a1.pos, Cross(y, "o"), key=(1,))
    first, second = (x, y) if p.get("parallel", True) else (y, x)
    ed.insert(a2.component, a2.pos, Cross(first, "u"), key=(0,))
    ed.insert(a2.component, a2.pos, Cross(second, "u"), key=(1,))
    return ed.commit()


def _apply_R3(d, p, b):
    ed = Editor(d)
    for comp, i in b["segments"]:
        ev = d.component(comp).events
        j = (i + 1) % len(ev)
        ed.replace(comp, i, [ev[j]])
        ed.replace(comp, j, [ev[i]])
    return ed.commit()


def _apply_O1_INSERT(d, p, b):
    ed = Editor(d)
    ed.add(Component(p["component"], p.get("sign", 1)))
    return ed.commit()


def _apply_O1_DELETE(d, p, b):
    ed = Editor(d)
    ed.remove(p["component"])
    return ed.commit()


def _insert_component(ed: Editor, nc: NewComponent, at: int) -> tuple[list, int]:
    """Materialise ``nc``'s events; crossings with existing arcs are keyed by
    their position along ``nc`` read from position ``at``."""
    n = len(nc.events)
    for e in nc.events:
        if isinstance(e, SelfCross):
            ed.reserve(e.crossing, e.sign)
    out = []
    for idx, e in enumerate(nc.events):
        if isinstance(e, SelfCross):
            out.append(Cross(e.crossing, e.role))
        else:
            x = ed.crossing(e.sign)
            out.append(Cross(x, e.role))
            ed.insert(e.arc.component, e.arc.pos, Cross(x, opposite(e.role)), key=((idx - at) % n,))
    return out, n


def _apply_O3_INSERT(d, p, b):
    ed = Editor(d)
    nc: NewComponent = p["component"]
    at = p.get("at", 0)
    evs, _ = _insert_component(ed, nc, at)
    a, c = ed.crossing(1), ed.crossing(1)
    evs = evs[:at] + [Cross(a, "u"), Cross(c, "o")] + evs[at:]
    ed.add(Component(nc.name, nc.framing, tuple(evs)))
    ed.add(Component(p["annulus"], 0, (Cross(a, "o"), Cross(c, "u"))))
    return ed.commit()


def _apply_O3_DELETE(d, p, b):
    ed = Editor(d)
    r = d.component(p["component"])
    for e in r.events:
        ed.drop_crossing(e.crossing)
    ed.remove(r.name)
    ed.remove(p["annulus"])
    return ed.commit()


def _apply_A1_INSERT(d, p, b):
    ed = Editor(d)
    pair = p["pair"]
    ed.pairs[pair] = 1
    ed.add(Component(p["component"], 0, (Spot(pair, 1, "A"), Spot(pair, 1, "B"))))
    return ed.commit()


def _apply_A1_DELETE(d, p, b):
    ed = Editor(d)
    ed.remove(b["component"])
    del ed.pairs[p["pair"]]
    return ed.commit()


def _apply_A2_FORWARD(d, p, b):
    ed = Editor(d)
    pair = p["pair"]
    for j, (comp, ix, iy) in enumerate(b["strands"], start=1):
        ed.replace(comp, ix, [Spot(pair, j, "A")])
        ed.replace(comp, iy, [Spot(pair, j, "B")])
    ed.remove(p["annulus"])
    ed.pairs[pair] = len(b["strands"])
    return ed.commit()


def _apply_A2_REVERSE(d, p, b):
    ed = Editor(d)
    xs, ys = [], []
    for comp, i in b["passages"]:
        x, y = ed.crossing(1), ed.crossing(1)
        n = len(d.component(comp).events)
        ed.replace(comp, i, [Cross(x, "u")])
        ed.replace(comp, (i + 1) % n, [Cross(y, "o")])
        xs.append(Cross(x, "o"))
        ys.append(Cross(y, "u"))
    ed.add(Component(p["annulus"], 0, tuple(xs + ys[::-1])))
    del ed.pairs[p["pair"]]
    return ed.commit()


def default_route_signs(band: Band) -> list[int]:
    """Signs of the crossings a route creates when none are given.

    Successive crossings with the same component alternate in direction, so
    an over/under pair around an arc links and an over/over pair does not.
    """
    seen: dict[str, int] = {}
    out = []
    for st in band.route:
        k = seen.get(st.arc.component, 0)
        seen[st.arc.component] = k + 1
        if st.sign is not None:
            out.append(st.sign)
        else:
            out.append(band.orientation * (1 if st.role == "o" else -1) * (-1) ** k)
    return out


def _stub_slots(d: Diagram, pair: str, side: str, spots):
    """(spot, component, gap, key) where a stub of ``side`` takes new events."""
    out = []
    for j in spots:
        comp, ia = _passage(d, pair, j)
        n = len(d.component(comp).events)
        if side == "B":
            out.append((j, comp, (ia + 2) % n, (-1,)))
        else:
            out.append((j, comp, ia, (10 ** 9,)))
    return out


def lane_order(lanes: list, role: str, sign: int) -> list:
    """Order in which a strand with ``role`` at a crossing of ``sign`` meets a
    bundle of parallel lanes listed left to right along their direction."""
    return list(lanes) if (role == "o") == (sign == 1) else list(lanes)[::-1]


def _twist_events(ed: Editor, lanes: list, t: int) -> dict:
    """Events of ``t`` full twists of a bundle, as the braid (s1...s_{k-1})^k.

    In a positive generator the left strand passes over its right neighbour.
    """
    lists = {s: [] for s in lanes}
    if not t or len(lanes) < 2:
        return lists
    sg = 1 if t > 0 else -1
    pos = list(lanes)
    k = len(pos)
    for _ in range(abs(t) * k):
        for i in range(k - 1):
            left, right = pos[i], pos[i + 1]
            x = ed.crossing(sg)
            lists[left].append(Cross(x, "o" if sg > 0 else "u"))
            lists[right].append(Cross(x, "u" if sg > 0 else "o"))
            pos[i], pos[i + 1] = right, left
    return lists


def _apply_drag_route(d: Diagram, p, b) -> Diagram:
    pair, side = p["pair"], p.get("side", "B")
    band: Band = p.get("band", STRAIGHT)
    t = p.get("twist", 0)
    ed = Editor(d)
    slots = _stub_slots(d, pair, side, range(1, d.spot_counts[pair] + 1))
    spots = [s[0] for s in slots]
    comp_of = {s[0]: s[1] for s in slots}
    lists = _twist_events(ed, spots, t)
    signs = default_route_signs(band)
    steps = list(range(len(band.route)))
    seq = steps[::-1] if side == "B" else steps
    for q, m in enumerate(seq):
        st = band.route[m]
        yrole = opposite(st.role)
        for rank, j in enumerate(lane_order(spots, yrole, signs[m])):
            x = ed.crossing(signs[m])
            lists[j].append(Cross(x, st.role))
            ed.insert(st.arc.component, st.arc.pos, Cross(x, yrole), key=(q, rank))
    for j, comp, gap, key in slots:
        for i, e in enumerate(lists[j]):
            ed.insert(comp, gap, e, key=key + (j, i))
    _charge_self_crossings(ed, d, [comp_of[j] for j in spots], t)
    return ed.commit()


def _charge_self_crossings(ed: Editor, d: Diagram, stub_comps, t: int) -> None:
    """Framing bookkeeping for a ball move: each stub takes ``t`` from the
    twist and every new self-crossing of a stub component adds its sign."""
    for comp in stub_comps:
        ed.framing[comp] += t
    old = set(d.sign)
    new = Diagram.build(
        [Component(n, 0, tuple(ed.events_of(n))) for n in ed.events if n not in ed.removed],
        ed.signs,
    )
    for x, s in new.crossings:
        if x in old:
            continue
        a, c = new.crossing_components(x)
        if a == c and a in stub_comps:
            ed.framing[a] += s


def _apply_push_along(d: Diagram, p, b) -> Diagram:
    pair, along = p["pair"], p["along"]
    c = d.component(along)
    j0 = b["spot"]
    n = len(c.events)
    ia = next(i for i, e in enumerate(c.events) if isinstance(e, Spot) and e.side == "A")
    path = [(ia + 2 + q) % n for q in range(n - 2)]
    pos_of = {ci: q for q, ci in enumerate(path)}
    t = c.framing - self_writhe(d, along)
    ed = Editor(d)
    slots = _stub_slots(d, pair, "B", [j for j in range(1, d.spot_counts[pair] + 1) if j != j0])
    stubs = [s[0] for s in slots]
    comp_of = {s[0]: s[1] for s in slots}
    twist = _twist_events(ed, stubs, t)
    at = {s: [[] for _ in path] for s in stubs}
    ext: dict[tuple[str, int], list] = {}
    for q, ci in enumerate(path):
        e = c.events[ci]
        sg = d.sign[e.crossing]
        yc, yi = d.partner(along, ci)
        if yc == along:
            if e.role != "o":
                continue
            q2 = pos_of[yi]
            xs = {(s, s2): ed.crossing(sg) for s in stubs for s2 in stubs}
            for s in stubs:
                at[s][q] = [Cross(xs[s, s2], "o") for s2 in lane_order(stubs, "o", sg)]
            for s2 in stubs:
                at[s2][q2] = [Cross(xs[s, s2], "u") for s in lane_order(stubs, "u", sg)]
        else:
            yrole = opposite(e.role)
            xs = {s: ed.crossing(sg) for s in stubs}
            for s in stubs:
                at[s][q].append(Cross(xs[s], e.role))
            ext[(yc, yi)] = [Cross(xs[s], yrole) for s in lane_order(stubs, yrole, sg)]
        ed.replace(along, ci, [])
    for (yc, yi), evs in ext.items():
        ed.replace(yc, yi, evs)
    for j, comp, gap, key in slots:
        evs = twist[j] + [e for chunk in at[j] for e in chunk]
        for i, e in enumerate(evs):
            ed.insert(comp, gap, e, key=key + (j, i))
    ed.framing[along] = 0
    _charge_self_crossings(ed, d, [comp_of[s] for s in stubs], t)
    return ed.commit()


def _apply_BALL_DRAG(d, p, b):
    if p.get("along") is not None:
        return _apply_push_along(d, p, b)
    return _apply_drag_route(d, p, b)


def _copy_order(with_c, with_p, role: str, sign: int, right: bool = True) -> list:
    """Order in which a strand meets a crossing pair of strands, the original
    and its blackboard parallel copy on the given side of it."""
    c_first = ((role == "o") == (sign == 1)) == right
    return [with_c, with_p] if c_first else [with_p, with_c]


def _apply_O2_SLIDE(d, p, b):
    t_name, c_name, band = p["target"], p["over"], p["band"]
    eps = band.orientation
    try:
        lk = linking_number(d, c_name, t_name)
    except Exception as exc:  # odd parity between the two
        raise _NoMatch(str(exc))
    c = d.component(c_name)
    m = len(c.events)
    q0 = band.end.pos
    path = [(q0 + i) % m for i in range(m)] if m else []
    pos_of = {ci: i for i, ci in enumerate(path)}
    twist = c.framing - self_writhe(d, c_name)
    right = p.get("side", "R") == "R"
    ed = Editor(d)
    P = [[] for _ in path]
    c_repl = {ci: [c.events[ci]] for ci in path}
    ext: dict[tuple[str, int], list] = {}
    for i, ci in enumerate(path):
        e = c.events[ci]
        sg = d.sign[e.crossing]
        yc, yi = d.partner(c_name, ci)
        if yc == c_name:
            if e.role != "o":
                continue
            j = pos_of[yi]
            x_cp, x_pc, x_pp = ed.crossing(sg * eps), ed.crossing(sg * eps), ed.crossing(sg)
            c_repl[ci] = _copy_order(e, Cross(x_cp, "o"), "o", sg, right)
            c_repl[yi] = _copy_order(c.events[yi], Cross(x_pc, "u"), "u", sg, right)
            P[i] = _copy_order(Cross(x_pc, "o"), Cross(x_pp, "o"), "o", sg, right)
            P[j] = _copy_order(Cross(x_cp, "u"), Cross(x_pp, "u"), "u", sg, right)
        else:
            x = ed.crossing(sg * eps)
            P[i].append(Cross(x, e.role))
            yrole = opposite(e.role)
            ext[(yc, yi)] = _copy_order(d.component(yc).events[yi], Cross(x, yrole), yrole, sg, right)
    for ci, evs in c_repl.items():
        ed.replace(c_name, ci, evs)
    for (yc, yi), evs in ext.items():
        ed.replace(yc, yi, evs)
    pseq = []
    sg = eps * (1 if twist > 0 else -1)
    for k in range(abs(twist)):
        k1, k2 = ed.crossing(sg), ed.crossing(sg)
        r1, r2 = ("o", "u") if (twist > 0) == right else ("u", "o")
        ed.insert(c_name, q0, Cross(k1, r1), key=(10 ** 9, 2 * k))
        ed.insert(c_name, q0, Cross(k2, r2), key=(10 ** 9, 2 * k + 1))
        pseq += [Cross(k1, r2), Cross(k2, r1)]
    pseq += [e for chunk in P for e in chunk]
    if eps < 0:
        pseq = pseq[::-1]
    signs = default_route_signs(band)
    going, back = [], []
    for mi, st in enumerate(band.route):
        g, r = ed.crossing(signs[mi]), ed.crossing(-signs[mi])
        going.append(Cross(g, st.role))
        back.append(Cross(r, st.role))
        ed.insert(st.arc.component, st.arc.pos, Cross(g, opposite(st.role)), key=(mi, 0))
        ed.insert(st.arc.component, st.arc.pos, Cross(r, opposite(st.role)), key=(mi, 1))
    block = going + pseq + back[::-1]
    for i, e in enumerate(block):
        ed.insert(t_name, band.start.pos, e, key=(10 ** 9 + 1, i))
    ed.framing[t_name] += c.framing + 2 * eps * lk
    return ed.commit()


_APPLY = {k: globals()[f"_apply_{k}"] for k in PRIMITIVES}


def apply_move(d: Diagram, m: Move) -> Diagram:
    if isinstance(m, MacroMove) or m.kind in MACROS:
        out = d
        for i, step in enumerate(expand_macro(m, d)):
            out = apply_move(out, step)
        return out
    dec = applicable(d, m)
    if not dec.ok:
        raise MoveError(f"{m.kind}: {dec.reason}")
    try:
        return _APPLY[m.kind](d, m.params, dec.bindings)
    except _NoMatch as exc:
        raise MoveError(f"{m.kind}: {exc}")


def o2_slide(d: Diagram, target: str, over: str, band: Band, side: Optional[str] = None) -> Diagram:
    """Slide ``target`` over ``over`` along ``band``.

    The new target is the band sum with a parallel copy of ``over`` that has
    linking number ``framing(over)`` with it; its framing becomes
    ``f_target + f_over + 2 * eps * lk(over, target)``.  Without ``side`` the
    copy goes right unless only the left copy keeps a planar diagram planar.
    """
    def slide(s: str) -> Diagram:
        return apply_move(d, Move("O2_SLIDE", {"target": target, "over": over, "band": band, "side": s}))

    if side is not None:
        return slide(side)
    out = slide("R")
    if realizability_genus(out) and not realizability_genus(d):
        left = slide("L")
        if not realizability_genus(left):
            return left
    return out


# ------------------------------------------------------------------ macros


class _Names:
    def __init__(self, d: Diagram):
        self.comps = set(d.names())
        self.pairs = set(d.spot_counts)

    def comp(self, prefix: str) -> str:
        n = fresh_name(self.comps, prefix)
        self.comps.add(n)
        return n

    def pair(self, prefix: str = "P") -> str:
        n = fresh_name(self.pairs, prefix)
        self.pairs.add(n)
        return n


def _cancelling(d: Diagram, pair: str, cancel: Optional[str]) -> tuple[str, int]:
    best = None
    for c in d.components:
        if cancel is not None and c.name != cancel:
            continue
        sp = c.spot_passages()
        if (c.framing == 0 and len(c.events) == 2 and len(sp) == 2 and sp[0].pair == pair):
            if best is None or sp[0].spot < best[1]:
                best = (c.name, sp[0].spot)
    if best is None:
        raise MoveError(f"pair {pair} has no isolated 0-framed cancelling ribbon")
    return best


def _expand(mm: Move, d: Diagram) -> list[Move]:
    p = mm.params
    names = _Names(d)
    if mm.kind == "RECOMBINE_PAIR":
        pair = p["pair"]
        ann = p.get("annulus") or names.comp(f"ann_{pair}_")
        return [Move("BALL_DRAG", {"pair": pair, "side": "B", "band": p.get("band", STRAIGHT)}),
                Move("A2_REVERSE", {"pair": pair, "annulus": ann})]
    if mm.kind == "A1GEN_INSERT":
        strands = list(p["strands"])
        if len(set(strands)) != len(strands):
            raise MoveError("A1GEN_INSERT strands must sit on distinct arcs")
        tmp = p.get("annulus") or names.comp("tmp")
        evs = [ArcCross(a, "o", 1) for a in strands] + [ArcCross(a, "u", 1) for a in strands[::-1]]
        return [Move("O3_INSERT", {"component": NewComponent(tmp, 0, evs), "annulus": p["component"], "at": 0}),
                Move("A2_FORWARD", {"annulus": tmp, "pair": p["pair"]})]
    if mm.kind == "A1GEN_DELETE":
        pair = p["pair"]
        if pair not in d.spot_counts:
            raise MoveError(f"no pair {pair}")
        cancel, spot = _cancelling(d, pair, p.get("cancel"))
        k = d.spot_counts[pair]
        if k == 1:
            return [Move("A1_DELETE", {"pair": pair})]
        if spot not in (1, k):
            raise MoveError("cancelling ribbon must use the first or last spot")
        ann = p.get("annulus") or names.comp("tmp")
        return [Move("A2_REVERSE", {"pair": pair, "annulus": ann}),
                Move("O3_DELETE", {"component": ann, "annulus": cancel})]
    if mm.kind == "O3_VIA_A1A2":
        nc: NewComponent = p["component"]
        if any(isinstance(e, SelfCross) for e in nc.events):
            raise MoveError("a dragged ribbon cannot realise self-crossings")
        at = p.get("at", 0)
        g = list(nc.events[at:] + nc.events[:at])
        route = tuple(RouteStep(e.arc, e.role, e.sign) for e in g[::-1])
        pair = names.pair()
        return [Move("A1_INSERT", {"pair": pair, "component": nc.name}),
                Move("BALL_DRAG", {"pair": pair, "side": "B", "band": Band(route), "twist": nc.framing}),
                Move("A2_REVERSE", {"pair": pair, "annulus": p["annulus"]})]
    if mm.kind == "O2_VIA_A1GEN":
        band: Band = p["band"]
        if band.route or band.orientation != 1:
            raise MoveError("the ball-push realisation needs a flat, positively oriented, unrouted band")
        t, c = p["target"], p["over"]
        if band.start is None or band.end is None or band.start.component != t or band.end.component != c:
            raise MoveError("band endpoints do not resolve")
        pair, u, tmp, ann = names.pair(), names.comp("c"), names.comp("tmp"), names.comp("tmp")
        steps = _expand(MacroMove("A1GEN_INSERT", {"pair": pair, "component": u, "annulus": tmp,
                                                   "strands": [band.start, band.end]}), d)
        steps.append(Move("BALL_DRAG", {"pair": pair, "side": "B", "along": c}))
        steps += [Move("A2_REVERSE", {"pair": pair, "annulus": ann}),
                  Move("O3_DELETE", {"component": ann, "annulus": c})]
        return steps
    raise MoveError(f"unknown macro {mm.kind}")


def expand_macro(mm: Move, d: Diagram) -> list[Move]:
    """Primitive moves realising ``mm``; every step is checked in turn."""
    steps = _expand(mm, d)
    cur = d
    for i, st in enumerate(steps):
        dec = applicable(cur, st)
        if not dec.ok:
            raise MoveError(f"{st.kind}: {dec.reason}", step=i)
        cur = _APPLY[st.kind](cur, st.params, dec.bindings)
    return steps


def delete_a1gen(d: Diagram, pair: str, cancel: Optional[str] = None) -> Diagram:
    """Remove a generalised cancelling configuration in one step."""
    cancel, _ = _cancelling(d, pair, cancel)
    ed = Editor(d)
    ed.remove(cancel)
    for c in d.components:
        for i, e in enumerate(c.events):
            if isinstance(e, Spot) and e.pair == pair:
                ed.replace(c.name, i, [])
    del ed.pairs[pair]
    return ed.commit()


# --------------------------------------------------------------- normalize


def reduction_sites(d: Diagram) -> list[Move]:
    """Crossing-reducing R1/R2 sites, in deterministic site order."""
    out = []
    for c in d.components:
        n = len(c.events)
        for i in range(n if n >= 2 else 0):
            a, b = c.events[i], c.events[(i + 1) % n]
            if not (isinstance(a, Cross) and isinstance(b, Cross)):
                continue
            if a.crossing == b.crossing:
                out.append(Move("R1", {"op": "delete", "crossing": a.crossing}))
            elif a.role == b.role:
                mv = Move("R2", {"op": "delete", "crossings": (a.crossing, b.crossing)})
                if applicable(d, mv).ok:
                    out.append(mv)
    return out


def normalize(d: Diagram, budget: int) -> Diagram:
    cur = d
    for _ in range(budget):
        sites = reduction_sites(cur)
        if not sites:
            break
        cur = apply_move(cur, sites[0])
    return cur
