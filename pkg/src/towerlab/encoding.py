"""Pairing, bit-string coding, and event-log representations of stagewise sets.

Every set that a construction produces is represented as a membership event
log: a finite list of timed insert/remove events from which "the set at stage
s" is a pure function.  Families of sets are packed into a single log over
pair codes, one column per index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt

PAIR_LIMIT = 2**64

CE = "ce"
COCE = "coce"
DCE = "dce"

MODES = (CE, COCE, DCE)

INSERT = "insert"
REMOVE = "remove"


class EventLogError(ValueError):
    """An event log violates stage order, polarity, or mode discipline."""


def pair(x: int, n: int) -> int:
    """Cantor pairing (x+n)(x+n+1)/2 + n.  Always >= max(x, n)."""
    if x < 0 or n < 0:
        raise ValueError(f"pair needs naturals, got ({x}, {n})")
    c = (x + n) * (x + n + 1) // 2 + n
    if c >= PAIR_LIMIT:
        raise OverflowError(f"pair({x}, {n}) exceeds 64-bit code range")
    return c


def unpair(c: int) -> tuple[int, int]:
    """Inverse of pair, by triangular root."""
    if c < 0:
        raise ValueError(f"unpair needs a natural, got {c}")
    w = (isqrt(8 * c + 1) - 1) // 2
    t = w * (w + 1) // 2
    n = c - t
    return w - n, n


def str_to_num(bits: str) -> int:
    """The number whose binary expansion is 1 followed by the given bits."""
    if any(b not in "01" for b in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return int("1" + bits, 2)


def num_to_str(v: int) -> str:
    """Inverse of str_to_num; defined for v >= 1 only."""
    if v < 1:
        raise ValueError(f"no bit string codes to {v}; codes start at 1")
    return bin(v)[3:]


@dataclass(frozen=True)
class Event:
    element: int
    stage: int
    polarity: str


class MembershipEventLog:
    """Timed insert/remove events defining a stagewise set approximation.

    mode CE: inserts only (set grows from empty).
    mode COCE: removes only (set shrinks from all of omega).
    mode DCE: per element at most insert-then-remove (starts empty).

    `horizon` is the stage horizon; membership queries beyond it are errors,
    never silent defaults.
    """

    def __init__(self, mode: str, horizon: int):
        if mode not in MODES:
            raise EventLogError(f"unknown mode {mode!r}")
        if horizon < 0:
            raise EventLogError("horizon must be a natural")
        self.mode = mode
        self.horizon = horizon
        # element -> [(stage, is_insert)], kept stage-sorted per element
        self._per_elem: dict[int, list[tuple[int, bool]]] = {}

    def add_event(self, element: int, stage: int, polarity: str) -> None:
        if polarity not in (INSERT, REMOVE):
            raise EventLogError(f"bad polarity {polarity!r}")
        if element < 0 or stage < 0:
            raise EventLogError("elements and stages are naturals")
        if stage > self.horizon:
            raise EventLogError(f"event at stage {stage} beyond horizon {self.horizon}")
        is_insert = polarity == INSERT
        history = self._per_elem.setdefault(element, [])
        if history:
            last_stage, last_ins = history[-1]
            if stage <= last_stage:
                raise EventLogError(
                    f"events for element {element} must be strictly stage-increasing"
                )
            if last_ins == is_insert:
                raise EventLogError(
                    f"events for element {element} must alternate polarity"
                )
        self._check_mode(element, history, is_insert)
        history.append((stage, is_insert))

    def _check_mode(self, element: int, history: list, is_insert: bool) -> None:
        if self.mode == CE:
            if not is_insert:
                raise EventLogError(f"CE log cannot remove (element {element})")
            if history:
                raise EventLogError(f"CE log inserts element {element} twice")
        elif self.mode == COCE:
            if is_insert:
                raise EventLogError(f"CoCE log cannot insert (element {element})")
            if history:
                raise EventLogError(f"CoCE log removes element {element} twice")
        else:  # DCE
            if is_insert and history:
                raise EventLogError(f"DCE log re-inserts element {element}")
            if not is_insert and not history:
                raise EventLogError(f"DCE log removes element {element} before insert")
            if not is_insert and len(history) > 1:
                raise EventLogError(f"DCE log exceeds one alternation for {element}")

    def insert(self, element: int, stage: int) -> None:
        self.add_event(element, stage, INSERT)

    def remove(self, element: int, stage: int) -> None:
        self.add_event(element, stage, REMOVE)

    def membership_at(self, x: int, s: int) -> bool:
        if s < 0 or s > self.horizon:
            raise EventLogError(f"stage {s} outside [0, {self.horizon}]")
        history = self._per_elem.get(x)
        state = self.mode == COCE  # CoCE sets start full
        if not history:
            return state
        for stage, is_insert in history:
            if stage > s:
                break
            state = is_insert
        return state

    def members(self, s: int, bound: int) -> set[int]:
        """Members at stage s restricted to [0, bound)."""
        if s < 0 or s > self.horizon:
            raise EventLogError(f"stage {s} outside [0, {self.horizon}]")
        if self.mode == COCE:
            gone = {
                x
                for x, hist in self._per_elem.items()
                if x < bound and hist and hist[0][0] <= s
            }
            return {x for x in range(bound) if x not in gone}
        out = set()
        for x, hist in self._per_elem.items():
            if x >= bound:
                continue
            state = False
            for stage, is_insert in hist:
                if stage > s:
                    break
                state = is_insert
            if state:
                out.add(x)
        return out

    def events(self) -> list[Event]:
        """All events in (stage, element) order."""
        flat = [
            Event(x, stage, INSERT if ins else REMOVE)
            for x, hist in self._per_elem.items()
            for stage, ins in hist
        ]
        flat.sort(key=lambda ev: (ev.stage, ev.element, ev.polarity))
        return flat

    def elements_touched(self) -> set[int]:
        return set(self._per_elem)

    @classmethod
    def from_events(
        cls, events, mode: str, horizon: int
    ) -> "MembershipEventLog":
        """Build and validate a log from (element, stage, polarity) triples.

        Events may arrive in any order; they are replayed stage-sorted per
        element so that discipline violations surface as EventLogError.
        """
        log = cls(mode, horizon)
        triples = sorted(events, key=lambda t: (t[1], t[0]))
        for element, stage, polarity in triples:
            log.add_event(element, stage, polarity)
        return log


class CodedFamily:
    """A sequence of stagewise sets packed as columns of one event log.

    Column n at stage s is {u : pair(u, n) in the base log at stage s}.
    `depth`, when set, bounds the meaningful column indices; `element_window`
    bounds the elements that co-c.e. columns are materialized over.
    """

    def __init__(
        self,
        base: MembershipEventLog,
        depth: int | None = None,
        element_window: int | None = None,
    ):
        self.base = base
        self.depth = depth
        self.element_window = element_window

    @property
    def mode(self) -> str:
        return self.base.mode

    @property
    def horizon(self) -> int:
        return self.base.horizon

    def _check_column(self, n: int) -> None:
        if n < 0:
            raise IndexError(f"column {n} out of range")
        if self.depth is not None and n >= self.depth:
            raise IndexError(f"column {n} out of range (depth {self.depth})")

    def column(self, n: int, s: int, bound: int | None = None) -> set[int]:
        """Column n as a set at stage s, elements below `bound`."""
        self._check_column(n)
        if s < 0 or s > self.horizon:
            raise IndexError(f"stage {s} outside [0, {self.horizon}]")
        if bound is None:
            bound = self.element_window
        if self.mode == COCE:
            if bound is None:
                raise ValueError("co-c.e. column needs an element bound")
            return {
                u for u in range(bound) if self.base.membership_at(pair(u, n), s)
            }
        out = set()
        for code in self.base.elements_touched():
            u, m = unpair(code)
            if m != n:
                continue
            if bound is not None and u >= bound:
                continue
            if self.base.membership_at(code, s):
                out.add(u)
        return out

    def column_events(self, n: int) -> list[Event]:
        """The events of column n, decoded, in stage order."""
        self._check_column(n)
        out = []
        for ev in self.base.events():
            u, m = unpair(ev.element)
            if m == n:
                out.append(Event(u, ev.stage, ev.polarity))
        return out

    def insert(self, u: int, n: int, stage: int) -> None:
        self.base.insert(pair(u, n), stage)

    def remove(self, u: int, n: int, stage: int) -> None:
        self.base.remove(pair(u, n), stage)

    @classmethod
    def from_columns(
        cls,
        columns,
        mode: str = CE,
        horizon: int = 0,
        element_window: int | None = None,
    ) -> "CodedFamily":
        """Pack static sets (all events at stage 0) into a family.

        For CE mode the given sets are the columns; for CoCE mode they are
        the columns' complements' removal targets, i.e. the sets themselves
        are what remains, so everything outside them (below element_window)
        is removed at stage 0.
        """
        base = MembershipEventLog(mode, horizon)
        fam = cls(base, depth=len(columns), element_window=element_window)
        for n, col in enumerate(columns):
            if mode == CE:
                for u in sorted(col):
                    base.insert(pair(u, n), 0)
            elif mode == COCE:
                if element_window is None:
                    raise ValueError("co-c.e. from_columns needs element_window")
                for u in range(element_window):
                    if u not in col:
                        base.remove(pair(u, n), 0)
            else:
                raise ValueError("from_columns supports CE and CoCE modes")
        return fam
