"""Positional rewriting of a diagram against its original event indices."""
from __future__ import annotations

import itertools

from .diagram import Component, Cross, Diagram, Spot, fresh_name


class Editor:
    """Collects replacements and gap insertions, then builds a new diagram.

    Indices always refer to the diagram the editor was created from, so a
    move can schedule all of its edits without tracking shifts.  Gap ``g``
    of a component is the drawn arc just before event ``g``.
    """

    def __init__(self, d: Diagram):
        self.d = d
        self.events = {c.name: list(c.events) for c in d.components}
        self.framing = {c.name: c.framing for c in d.components}
        self.signs = d.sign
        self.pairs = d.spot_counts
        self.repl: dict[tuple[str, int], list] = {}
        self.gaps: dict[tuple[str, int], list] = {}
        self.new: dict[str, Component] = {}
        self.removed: set[str] = set()
        self._taken = set(self.signs)
        self._seq = itertools.count()

    def crossing(self, sign: int, prefix: str = "k") -> str:
        x = fresh_name(self._taken, prefix)
        self._taken.add(x)
        self.signs[x] = sign
        return x

    def reserve(self, x: str, sign: int) -> None:
        self._taken.add(x)
        self.signs[x] = sign

    def insert(self, comp: str, gap: int, event, key=()) -> None:
        n = len(self.events[comp])
        gap = gap % n if n else 0
        self.gaps.setdefault((comp, gap), []).append((key, next(self._seq), event))

    def replace(self, comp: str, idx: int, events) -> None:
        self.repl[(comp, idx)] = list(events)

    def drop_crossing(self, x: str) -> None:
        for role, (comp, idx) in self.d.occurrences()[x].items():
            self.replace(comp, idx, [])

    def remove(self, comp: str) -> None:
        self.removed.add(comp)

    def add(self, comp: Component) -> None:
        self.new[comp.name] = comp

    def events_of(self, comp: str) -> list:
        """Committed event list of one component (ignoring removal)."""
        old = self.events[comp]
        out = []
        for i in range(max(len(old), 1)):
            for _, _, e in sorted(self.gaps.get((comp, i), []), key=lambda t: (t[0], t[1])):
                out.append(e)
            if i < len(old):
                out.extend(self.repl.get((comp, i), [old[i]]))
        return out

    def commit(self) -> Diagram:
        comps = [
            Component(name, self.framing[name], tuple(self.events_of(name)))
            for name in self.events
            if name not in self.removed
        ]
        comps.extend(self.new.values())
        return Diagram.build(comps, self.signs, self.pairs)


def is_handle_gap(events, gap: int) -> bool:
    n = len(events)
    if n < 2:
        return False
    e = events[gap % n]
    return isinstance(e, Spot) and e.side == "B"


def opposite(role: str) -> str:
    return "u" if role == "o" else "o"


__all__ = ["Editor", "is_handle_gap", "opposite", "Cross", "Spot"]
