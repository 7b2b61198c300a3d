"""Combinatorial framed and bridged link diagrams.

A diagram is a set of oriented components.  Each component is a cyclic list
of events: a passage through a crossing (over or under) or a passage through
a spot of a ball pair.  A strand always passes a spot as two consecutive
events ``@P.j.A`` then ``@P.j.B``: it enters ball A at spot ``j`` and
re-emerges from ball B at spot ``j``.  The gap between those two events is
the 1-handle, not a drawn arc.

Framings are explicit integers and are never derived from the writhe.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


class DiagramError(Exception):
    """Raised by diagram queries whose preconditions fail."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


@dataclass(frozen=True, order=True)
class Cross:
    crossing: str
    role: str  # 'o' or 'u'

    def key(self) -> str:
        return f"{self.crossing}.{self.role}"


@dataclass(frozen=True, order=True)
class Spot:
    pair: str
    spot: int
    side: str  # 'A' or 'B'

    def key(self) -> str:
        return f"@{self.pair}.{self.spot}.{self.side}"


Event = Union[Cross, Spot]


def _rotate_least(events: tuple) -> tuple:
    if not events:
        return events
    keys = [e.key() for e in events]
    i = keys.index(min(keys))
    return events[i:] + events[:i]


@dataclass(frozen=True)
class Component:
    name: str
    framing: int
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", _rotate_least(tuple(self.events)))

    def __len__(self) -> int:
        return len(self.events)

    def spot_passages(self) -> list[Spot]:
        return [e for e in self.events if isinstance(e, Spot)]

    def crossings(self) -> list[Cross]:
        return [e for e in self.events if isinstance(e, Cross)]


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v[0] for v in self.violations]


@dataclass(frozen=True)
class Diagram:
    """Immutable diagram value.

    ``crossings`` and ``pairs`` are sorted tuples of ``(id, sign)`` and
    ``(id, spot_count)``; use :meth:`build` rather than the raw constructor.
    """

    components: tuple = ()
    crossings: tuple = ()
    pairs: tuple = ()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    @classmethod
    def build(
        cls,
        components: Iterable[Component],
        signs: Mapping[str, int],
        pairs: Mapping[str, int] | None = None,
    ) -> "Diagram":
        """Assemble a diagram, keeping only the crossing signs that are used."""
        comps = tuple(sorted(components, key=lambda c: c.name))
        used = {e.crossing for c in comps for e in c.events if isinstance(e, Cross)}
        xs = tuple(sorted((x, int(signs[x])) for x in used if x in signs))
        ps = tuple(sorted((p, int(k)) for p, k in (pairs or {}).items()))
        return cls(comps, xs, ps)

    # lookups
    @property
    def sign(self) -> dict[str, int]:
        return dict(self.crossings)

    @property
    def spot_counts(self) -> dict[str, int]:
        return dict(self.pairs)

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise DiagramError("UNKNOWN_COMPONENT", name)

    def has_component(self, name: str) -> bool:
        return any(c.name == name for c in self.components)

    def names(self) -> list[str]:
        return [c.name for c in self.components]

    def occurrences(self) -> dict[str, dict[str, tuple[str, int]]]:
        """crossing -> role -> (component, index); first occurrence wins."""
        if self._index is None:
            occ: dict[str, dict[str, tuple[str, int]]] = {}
            for c in self.components:
                for i, e in enumerate(c.events):
                    if isinstance(e, Cross):
                        occ.setdefault(e.crossing, {}).setdefault(e.role, (c.name, i))
            object.__setattr__(self, "_index", occ)
        return self._index

    def partner(self, comp: str, index: int) -> tuple[str, int]:
        e = self.component(comp).events[index]
        other = "u" if e.role == "o" else "o"
        return self.occurrences()[e.crossing][other]

    def crossing_components(self, x: str) -> tuple[str, str]:
        occ = self.occurrences()[x]
        return occ["o"][0], occ["u"][0]

    def is_framed(self) -> bool:
        return not self.pairs

    def n_crossings(self) -> int:
        return len(self.crossings)

    def n_events(self) -> int:
        return sum(len(c) for c in self.components)

    def replace(self, components=None, signs=None, pairs=None) -> "Diagram":
        return Diagram.build(
            self.components if components is None else components,
            self.sign if signs is None else signs,
            self.spot_counts if pairs is None else pairs,
        )

    def rename(self, comp_map=None, cross_map=None, pair_map=None) -> "Diagram":
        comp_map = comp_map or {}
        cross_map = cross_map or {}
        pair_map = pair_map or {}

        def ev(e):
            if isinstance(e, Cross):
                return Cross(cross_map.get(e.crossing, e.crossing), e.role)
            return Spot(pair_map.get(e.pair, e.pair), e.spot, e.side)

        comps = [
            Component(comp_map.get(c.name, c.name), c.framing, tuple(ev(e) for e in c.events))
            for c in self.components
        ]
        signs = {cross_map.get(x, x): s for x, s in self.crossings}
        pairs = {pair_map.get(p, p): k for p, k in self.pairs}
        return Diagram.build(comps, signs, pairs)


# ----------------------------------------------------------------- validation


def validate(d: Diagram, strict: bool = False, planar: Optional[bool] = None) -> ValidationReport:
    """Report every structural violation of ``d``.

    ``strict`` adds the even-parity requirement between distinct components
    and realizability genus 0; ``planar`` toggles the genus check alone.
    """
    planar = strict if planar is None else planar
    out: list[tuple[str, str, str]] = []
    signs = d.sign
    counts = d.spot_counts
    seen_names: set[str] = set()
    roles: dict[str, dict[str, int]] = {}
    spots: dict[tuple[str, int, str], int] = {}

    for x, s in d.crossings:
        if s not in (1, -1):
            out.append(("BAD_SIGN", x, f"sign {s} not in {{+1,-1}}"))
    for p, k in d.pairs:
        if k < 1:
            out.append(("BAD_PAIR", p, f"spot count {k} < 1"))

    for c in d.components:
        if c.name in seen_names:
            out.append(("DUP_COMPONENT", c.name, "component name repeated"))
        seen_names.add(c.name)
        n = len(c.events)
        for i, e in enumerate(c.events):
            loc = f"{c.name}[{i}]"
            if isinstance(e, Cross):
                if e.role not in ("o", "u"):
                    out.append(("BAD_ROLE", loc, e.role))
                    continue
                if e.crossing not in signs:
                    out.append(("UNKNOWN_CROSSING", loc, e.crossing))
                r = roles.setdefault(e.crossing, {"o": 0, "u": 0})
                r[e.role] += 1
                if r[e.role] == 2:
                    code = "DUP_OVER" if e.role == "o" else "DUP_UNDER"
                    out.append((code, loc, f"crossing {e.crossing} repeated in role {e.role}"))
            else:
                if e.side not in ("A", "B"):
                    out.append(("BAD_SIDE", loc, e.side))
                    continue
                if e.pair not in counts:
                    out.append(("UNKNOWN_PAIR", loc, e.pair))
                elif not 1 <= e.spot <= counts[e.pair]:
                    out.append(("BAD_SPOT", loc, f"spot {e.spot} outside 1..{counts[e.pair]}"))
                key = (e.pair, e.spot, e.side)
                spots[key] = spots.get(key, 0) + 1
                if spots[key] == 2:
                    out.append(("DUP_SPOT", loc, e.key()))
                if e.side == "A":
                    nxt = c.events[(i + 1) % n]
                    if not (isinstance(nxt, Spot) and nxt.pair == e.pair
                            and nxt.spot == e.spot and nxt.side == "B") or n < 2:
                        out.append(("BROKEN_PASSAGE", loc, f"{e.key()} not followed by its B side"))
                else:
                    prv = c.events[(i - 1) % n]
                    if not (isinstance(prv, Spot) and prv.pair == e.pair
                            and prv.spot == e.spot and prv.side == "A") or n < 2:
                        out.append(("BROKEN_PASSAGE", loc, f"{e.key()} not preceded by its A side"))

    for x in signs:
        r = roles.get(x, {"o": 0, "u": 0})
        if r["o"] == 0:
            out.append(("MISSING_OVER", x, "crossing has no over passage"))
        if r["u"] == 0:
            out.append(("MISSING_UNDER", x, "crossing has no under passage"))
    for p, k in counts.items():
        for j in range(1, max(k, 0) + 1):
            for side in ("A", "B"):
                if spots.get((p, j, side), 0) == 0:
                    out.append(("MISSING_SPOT", f"@{p}.{j}.{side}", "spot side unused"))

    if strict and not out:
        for (a, b), cnt in sorted(_pair_counts(d).items()):
            if a != b and cnt % 2:
                out.append(("ODD_PARITY", f"{a}|{b}", f"{cnt} crossings between distinct components"))
    if planar and not out and realizability_genus(d) != 0:
        out.append(("NONPLANAR", "", "realizability genus is positive"))
    return ValidationReport(tuple(out))


def _pair_counts(d: Diagram) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for x in d.sign:
        a, b = d.crossing_components(x)
        key = tuple(sorted((a, b)))
        counts[key] = counts.get(key, 0) + 1
    return counts


# ---------------------------------------------------------- numeric queries


def linking_number(d: Diagram, c1: str, c2: str) -> int:
    """Half the sum of crossing signs between ``c1`` and ``c2``."""
    if c1 == c2:
        raise DiagramError("SELF_LINK", "use the framing for a component with itself")
    d.component(c1), d.component(c2)
    total = 0
    for x, s in d.crossings:
        if {*d.crossing_components(x)} == {c1, c2}:
            total += s
    if total % 2:
        raise DiagramError("NON_INTEGER", f"odd crossing sum between {c1} and {c2}")
    return total // 2


def self_writhe(d: Diagram, c: str) -> int:
    d.component(c)
    return sum(s for x, s in d.crossings if d.crossing_components(x) == (c, c))


# -------------------------------------------------------------- isomorphism


@dataclass(frozen=True)
class DiagramMapping:
    components: dict
    crossings: dict
    pairs: dict


def _comp_profile(c: Component, d: Diagram) -> tuple:
    kinds = sorted(
        (e.role, d.sign.get(e.crossing, 0)) if isinstance(e, Cross) else ("@", e.side)
        for e in c.events
    )
    return (c.framing, len(c.events), tuple(kinds))


def isomorphic(d1: Diagram, d2: Diagram) -> Optional[DiagramMapping]:
    """Find an id bijection carrying ``d1`` onto ``d2``, or ``None``.

    Components are matched by backtracking over anchors (which component,
    which rotation), most constrained first.  Spot indices are preserved.
    """
    if (len(d1.components) != len(d2.components) or len(d1.crossings) != len(d2.crossings)
            or sorted(k for _, k in d1.pairs) != sorted(k for _, k in d2.pairs)):
        return None
    prof1 = {c.name: _comp_profile(c, d1) for c in d1.components}
    prof2 = {c.name: _comp_profile(c, d2) for c in d2.components}
    if sorted(prof1.values()) != sorted(prof2.values()):
        return None
    s1, s2 = d1.sign, d2.sign
    k1, k2 = d1.spot_counts, d2.spot_counts
    order = sorted(d1.components, key=lambda c: (-len(c.events), prof1[c.name], c.name))

    cmap: dict[str, str] = {}
    xmap: dict[str, str] = {}
    pmap: dict[str, str] = {}

    def try_align(c: Component, t: Component, rot: int):
        added_x, added_p = [], []
        n = len(c.events)
        for i in range(n):
            a = c.events[i]
            b = t.events[(i + rot) % n]
            if type(a) is not type(b):
                break
            if isinstance(a, Cross):
                if a.role != b.role or s1[a.crossing] != s2[b.crossing]:
                    break
                m = xmap.get(a.crossing)
                if m is None:
                    if b.crossing in xinv:
                        break
                    xmap[a.crossing] = b.crossing
                    xinv[b.crossing] = a.crossing
                    added_x.append(a.crossing)
                elif m != b.crossing:
                    break
            else:
                if a.side != b.side or a.spot != b.spot or k1[a.pair] != k2[b.pair]:
                    break
                m = pmap.get(a.pair)
                if m is None:
                    if b.pair in pinv:
                        break
                    pmap[a.pair] = b.pair
                    pinv[b.pair] = a.pair
                    added_p.append(a.pair)
                elif m != b.pair:
                    break
        else:
            return added_x, added_p
        for x in added_x:
            del xinv[xmap.pop(x)]
        for p in added_p:
            del pinv[pmap.pop(p)]
        return None

    xinv: dict[str, str] = {}
    pinv: dict[str, str] = {}
    used: set[str] = set()

    def search(k: int) -> bool:
        if k == len(order):
            return True
        c = order[k]
        for t in d2.components:
            if t.name in used or prof2[t.name] != prof1[c.name]:
                continue
            for rot in range(max(len(t.events), 1)):
                got = try_align(c, t, rot)
                if got is None:
                    continue
                cmap[c.name] = t.name
                used.add(t.name)
                if search(k + 1):
                    return True
                used.discard(t.name)
                del cmap[c.name]
                for x in got[0]:
                    del xinv[xmap.pop(x)]
                for p in got[1]:
                    del pinv[pmap.pop(p)]
        return False

    if not search(0):
        return None
    # pairs touched by no component (never valid, but keep the bijection total)
    free1 = sorted(p for p in k1 if p not in pmap)
    free2 = sorted(p for p in k2 if p not in pinv)
    for p, q in zip(sorted(free1, key=k1.get), sorted(free2, key=k2.get)):
        pmap[p] = q
    return DiagramMapping(dict(cmap), dict(xmap), dict(pmap))


# ----------------------------------------------------------- realizability

# Counter-clockwise half-edge order at a crossing, by sign.  With this choice
# the standard positive trefoil and the Hopf diagrams are planar.
_ROTATION = {
    1: (("o", "in"), ("u", "in"), ("o", "out"), ("u", "out")),
    -1: (("o", "in"), ("u", "out"), ("o", "out"), ("u", "in")),
}


def realizability_genus(d: Diagram) -> int:
    """Euler genus of the ribbon graph of ``d``.

    Vertices are crossings and balls.  Ball A carries the arriving strands and
    ball B the departing ones, both ordered by spot index.
    """
    signs = d.sign
    rot: dict[tuple, list] = {}
    for x, s in signs.items():
        rot[("x", x)] = [(r, io) for r, io in _ROTATION[1 if s > 0 else -1]]
    for p, k in d.pairs:
        rot[("A", p)] = [(j, "in") for j in range(1, k + 1)]
        rot[("B", p)] = [(j, "out") for j in range(1, k + 1)]

    def half(e, io):
        if isinstance(e, Cross):
            return (("x", e.crossing), (e.role, io))
        return ((e.side, e.pair), (e.spot, io))

    edge: dict[tuple, tuple] = {}
    for c in d.components:
        n = len(c.events)
        for i, e in enumerate(c.events):
            f = c.events[(i + 1) % n]
            if isinstance(e, Spot) and e.side == "A":
                continue  # the handle gap is not a drawn arc
            a = half(e, "out")
            b = half(f, "in")
            edge[a] = b
            edge[b] = a

    verts = list(rot)
    if not verts:
        return 0
    darts = [(v, h) for v in verts for h in rot[v]]
    # connected components of the graph
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (va, _), (vb, _) in edge.items():
        parent[find(va)] = find(vb)
    n_comp = len({find(v) for v in verts})
    n_edges = len(edge) // 2

    seen: set = set()
    faces = 0
    for dart in darts:
        if dart in seen:
            continue
        faces += 1
        cur = dart
        while cur not in seen:
            seen.add(cur)
            v, h = cur
            w, g = edge[(v, h)]
            cyc = rot[w]
            cur = (w, cyc[(cyc.index(g) + 1) % len(cyc)])
    chi = len(verts) - n_edges + faces
    return 2 * n_comp - chi


def fresh_name(taken: Iterable[str], prefix: str) -> str:
    taken = set(taken)
    for i in itertools.count(1):
        cand = f"{prefix}{i}"
        if cand not in taken:
            return cand
    raise AssertionError  # pragma: no cover
