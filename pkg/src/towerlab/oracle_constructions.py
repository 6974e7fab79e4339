"""The two constructions driven by a fast-growing oracle function: the
stream-tree ultrafilter base and the interval-phase independent family, plus
the exact leftmost-path oracle used to verify them.

Streams live on the tree {0,1,2}^{<omega}.  The root stream at stage s is
[0, s); a node's 2-child is its thinned stream (every other element), and its
0/1-children are the thinned stream filtered through the pair listing at the
node's level.  Streams are append-only and enumerate in increasing order, so
each node is kept as a pair of parallel arrays (elements, entry stages) and
children are materialized lazily, only when a query reaches them.

The leftmost-path oracle reasons symbolically: every limit stream over a
table/formula universe is eventually periodic, so infinitude is decided
exactly, never sampled.
"""

from __future__ import annotations

from array import array
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from math import lcm

from .encoding import CE, CodedFamily, MembershipEventLog
from .records import RunRecord
from .universe import FinitePsiLimit, ResiduePsiLimit, Universe


def f_sigma(columns: list[set[int]], sigma: str, horizon: int) -> set[int]:
    """Boolean combination cell: members of every column sigma marks 1 and of
    no column it marks 0, within [0, horizon)."""
    if any(b not in "01" for b in sigma):
        raise ValueError(f"not a bit string: {sigma!r}")
    if len(sigma) > len(columns):
        raise IndexError(f"string {sigma!r} longer than the family")
    cell = set(range(horizon))
    for i, b in enumerate(sigma):
        cell = cell & columns[i] if b == "1" else cell - columns[i]
    return cell


# ---------------------------------------------------------------------------
# Eventually periodic sets: the exact reasoning backend for limit streams.


@dataclass(frozen=True)
class PeriodicSet:
    """{prefix elements below threshold} united with
    {x >= threshold : x mod period in residues}; empty residues = finite."""

    prefix: tuple[int, ...]
    threshold: int
    period: int
    residues: tuple[int, ...]

    @classmethod
    def omega(cls) -> "PeriodicSet":
        return cls((), 0, 1, (0,))

    @classmethod
    def finite(cls, elements) -> "PeriodicSet":
        elems = tuple(sorted(elements))
        bound = elems[-1] + 1 if elems else 0
        return cls(elems, bound, 1, ())

    @property
    def is_infinite(self) -> bool:
        return bool(self.residues)

    def __contains__(self, x: int) -> bool:
        if x < self.threshold:
            return x in self.prefix
        return bool(self.residues) and x % self.period in self.residues

    def members_below(self, bound: int) -> list[int]:
        out = [x for x in self.prefix if x < bound]
        if self.residues:
            rs = set(self.residues)
            out.extend(x for x in range(self.threshold, bound) if x % self.period in rs)
        return out

    def _block_offsets(self) -> list[int]:
        """Residues ordered by position within a period block starting at the
        threshold; index i is the i-th element of every block."""
        return sorted((r - self.threshold) % self.period for r in self.residues)

    def thin(self) -> "PeriodicSet":
        """Elements at even positions of the increasing enumeration."""
        kept_prefix = tuple(self.prefix[::2])
        m = len(self.prefix)
        if not self.residues:
            return PeriodicSet(kept_prefix, self.threshold, 1, ())
        offs = self._block_offsets()
        c = len(offs)
        t, p = self.threshold, self.period
        if c % 2 == 0:
            kept = [
                (t + o) % p for i, o in enumerate(offs) if (m + i) % 2 == 0
            ]
            return PeriodicSet(kept_prefix, t, p, tuple(sorted(kept)))
        kept = []
        for i, o in enumerate(offs):
            if (m + i) % 2 == 0:
                kept.append((t + o) % (2 * p))  # even blocks
            else:
                kept.append((t + o + p) % (2 * p))  # odd blocks
        return PeriodicSet(kept_prefix, t, 2 * p, tuple(sorted(kept)))

    def intersect_residues(self, modulus: int, allowed) -> "PeriodicSet":
        allowed = set(allowed)
        kept_prefix = tuple(x for x in self.prefix if x % modulus in allowed)
        if not self.residues:
            return PeriodicSet(kept_prefix, self.threshold, 1, ())
        p = lcm(self.period, modulus)
        kept = tuple(
            sorted(
                rho
                for rho in range(p)
                if rho % self.period in self.residues and rho % modulus in allowed
            )
        )
        return PeriodicSet(kept_prefix, self.threshold, p, kept)

    def intersect_finite(self, elements) -> "PeriodicSet":
        return PeriodicSet.finite(x for x in elements if x in self)


def _limit_child(stream: PeriodicSet, limit, k: int) -> PeriodicSet:
    if isinstance(limit, FinitePsiLimit):
        return stream.intersect_finite(limit.side(k))
    assert isinstance(limit, ResiduePsiLimit)
    return stream.intersect_residues(limit.modulus, limit.side_residues(k))


def limit_stream(universe: Universe, alpha: str) -> PeriodicSet:
    """The limit of S_alpha, computed symbolically.

    Raises UniverseNotDecidable when some index along alpha is machine-backed.
    """
    stream = PeriodicSet.omega()
    for e, symbol in enumerate(alpha):
        thinned = stream.thin()
        if symbol == "2":
            stream = thinned
        elif symbol in "01":
            stream = _limit_child(thinned, universe.psi_limit(e), int(symbol))
        else:
            raise ValueError(f"bad tree symbol {symbol!r} in {alpha!r}")
    return stream


def leftmost_path(universe: Universe, depth: int, alphabet: str = "012") -> str:
    """Leftmost alpha of the given depth all of whose streams are infinite.

    Exact over table/formula universes; machine-backed indices raise
    UniverseNotDecidable.
    """
    path = ""
    stream = PeriodicSet.omega()
    for e in range(depth):
        thinned = stream.thin()
        chosen = None
        for symbol in alphabet:
            if symbol == "2":
                child = thinned
            else:
                child = _limit_child(thinned, universe.psi_limit(e), int(symbol))
            if child.is_infinite:
                chosen = (symbol, child)
                break
        if chosen is None:
            raise ValueError(f"no infinite child at level {e} over {alphabet!r}")
        path += chosen[0]
        stream = chosen[1]
    return path


# ---------------------------------------------------------------------------
# The live stream tree (stagewise, append-only, lazily materialized).


class _RootStream:
    """S at the root: stage s holds [0, s); element x enters at stage x+1."""

    def __init__(self, horizon: int):
        self.horizon = horizon

    def size_at(self, t: int) -> int:
        return min(t, self.horizon)

    def element(self, i: int) -> int:
        return i

    def entry(self, i: int) -> int:
        return i + 1

    def ensure(self, t: int) -> None:
        pass


class _ThinView:
    """The thinned stream of a parent: positions 0, 2, 4, ... Positions never
    change after an append, so the view is exact at every stage."""

    def __init__(self, parent):
        self.parent = parent

    def size_at(self, t: int) -> int:
        return (self.parent.size_at(t) + 1) // 2

    def element(self, i: int) -> int:
        return self.parent.element(2 * i)

    def entry(self, i: int) -> int:
        return self.parent.entry(2 * i)

    def ensure(self, t: int) -> None:
        self.parent.ensure(t)


class _FilteredStream:
    """Thinned parent filtered through side k of the pair listing at level e.

    An element is admitted at the first stage where it is both present in the
    source and inside the listing's stagewise domain; admission order equals
    increasing element order, so plain appends suffice.
    """

    def __init__(self, source, schedule, k: int, horizon: int):
        self.source = source
        self.schedule = schedule
        self.k = k
        self.horizon = horizon
        self.elements = array("q")
        self.entries = array("q")
        self._src_idx = 0
        self._pumped_to = -1

    def ensure(self, t: int) -> None:
        if t <= self._pumped_to:
            return
        self.source.ensure(t)
        src = self.source
        available = src.size_at(t)
        i = self._src_idx
        while i < available:
            x = src.element(i)
            gate = self.schedule.entry_stage(x, self.horizon)
            if gate is None:
                break  # domain never reaches x, nor anything larger
            admit = max(src.entry(i), gate)
            if admit > t:
                break  # admission stages are nondecreasing along the source
            if self.schedule.converged_value(x, admit) % 2 == self.k:
                self.elements.append(x)
                self.entries.append(admit)
            i += 1
        self._src_idx = i
        self._pumped_to = t

    def size_at(self, t: int) -> int:
        self.ensure(t)
        return bisect_right(self.entries, t)

    def element(self, i: int) -> int:
        return self.elements[i]

    def entry(self, i: int) -> int:
        return self.entries[i]


class StreamTree:
    """Lazy stage-monotone stream tree over {0,1,2}^{<=depth}."""

    def __init__(self, universe: Universe, depth: int, stage_horizon: int):
        self.universe = universe
        self.depth = depth
        self.stage_horizon = stage_horizon
        self._nodes: dict[str, object] = {"": _RootStream(stage_horizon)}

    def node(self, alpha: str):
        found = self._nodes.get(alpha)
        if found is not None:
            return found
        if len(alpha) > self.depth:
            raise IndexError(f"node {alpha!r} beyond depth {self.depth}")
        parent = self.node(alpha[:-1])
        symbol = alpha[-1]
        if symbol == "2":
            made = _ThinView(parent)
        elif symbol in "01":
            e = len(alpha) - 1
            made = _FilteredStream(
                _ThinView(parent),
                self.universe.schedules[e],
                int(symbol),
                self.stage_horizon,
            )
        else:
            raise ValueError(f"bad tree symbol in {alpha!r}")
        self._nodes[alpha] = made
        return made

    def size_at(self, alpha: str, t: int) -> int:
        return self.node(alpha).size_at(t)

    def members_at(self, alpha: str, t: int) -> list[int]:
        node = self.node(alpha)
        node.ensure(t)
        return [node.element(i) for i in range(node.size_at(t))]

    def leftmost_per_level(self, t: int, threshold: int) -> dict[int, str]:
        """For each level, the lexicographically least node whose stream has
        at least `threshold` elements at stage t.  Subtrees below the
        threshold are pruned, which is sound because streams only shrink
        along extensions."""
        found: dict[int, str] = {}

        def visit(alpha: str) -> None:
            node = self.node(alpha)
            node.ensure(t)
            if node.size_at(t) < threshold:
                return
            level = len(alpha)
            if level not in found:
                found[level] = alpha
            if level == self.depth:
                return
            for symbol in "012":
                visit(alpha + symbol)

        visit("")
        return found


@dataclass
class UFBaseRun:
    record: RunRecord
    family: CodedFamily
    tree: StreamTree
    depth: int
    stages: int
    a_final: list[int]


def build_uf_base(
    universe: Universe,
    h,
    stages: int,
    depth: int,
    label: str = "",
) -> UFBaseRun:
    """Run the stream-tree base construction for the given number of steps.

    At step s > 0 each level e picks the leftmost alpha of length e whose
    stream at stage h(s) has at least s elements and takes that stream's s-th
    smallest element as the next output candidate, keeping the per-level
    output sequences nondecreasing.  Column e of the result collects level
    e's outputs.
    """
    if stages < 0 or depth < 0:
        raise ValueError("stages and depth must be naturals")
    if depth > len(universe):
        raise IndexError("depth exceeds the universe's listing")
    stage_horizon = max([h(s) for s in range(1, stages)], default=0)
    tree = StreamTree(universe, depth, stage_horizon)
    record = RunRecord(
        "uf-base",
        {
            "stages": stages,
            "depth": depth,
            "h": getattr(h, "spec", lambda: {"kind": "opaque"})(),
            "universe": label,
        },
    )

    log = MembershipEventLog(CE, horizon=max(stages - 1, 0))
    family = CodedFamily(log, depth=depth + 1)
    a = [0] * (depth + 1)
    for e in range(depth + 1):
        family.insert(0, e, 0)
        record.log(t="seed", s=0, e=e, a=0)

    for s in range(1, stages):
        t = h(s)
        chosen = tree.leftmost_per_level(t, s)
        for e in range(depth + 1):
            alpha = chosen.get(e)
            if alpha is None:
                continue
            node = tree.node(alpha)
            value = node.element(s - 1)
            if value > a[e]:
                a[e] = value
                family.insert(value, e, s)
                record.log(t="gamma", s=s, e=e, alpha=alpha, a=value)

    return UFBaseRun(record, family, tree, depth, stages, a)


# ---------------------------------------------------------------------------
# The interval-phase independent family.


@dataclass
class Phase:
    index: int
    breakpoints: list[int]
    stalled_at: int | None


@dataclass
class IndepRun:
    record: RunRecord
    family: CodedFamily
    columns: list[list[int]]  # per phase, 0/1 values on [0, coverage)
    phases: list[Phase]
    coverage: int

    def column_sets(self, horizon: int) -> list[set[int]]:
        return [
            {x for x in range(min(horizon, len(vals))) if vals[x]}
            for vals in self.columns
        ]


def build_indep_family(
    universe: Universe,
    h,
    stages: int,
    depth: int,
    label: str = "",
) -> IndepRun:
    """Phase construction of an independent family over [0, stages).

    Phase e walks breakpoints r_0 = 0 < r_1 < ... choosing each next
    breakpoint least such that (a) every cell of the previous columns has two
    elements inside the interval and (b) when the pair listing at level e
    shows a 1-before-0 pair inside a cell (consulted at stage h(r_n)), the
    interval stretches past the least such 0.  On each interval a cell either
    copies the listing (when a pair was found and the listing's stagewise
    domain covers the whole interval) or puts exactly its least element in.
    """
    record = RunRecord(
        "indep-family",
        {
            "stages": stages,
            "depth": depth,
            "h": getattr(h, "spec", lambda: {"kind": "opaque"})(),
            "universe": label,
        },
    )
    if depth > len(universe):
        raise IndexError("depth exceeds the universe's listing")

    cell_ids = [0] * stages  # bit i of cell_ids[x] = column i's value at x
    columns: list[list[int]] = []
    phases: list[Phase] = []
    coverage = stages  # the window every phase so far has fully defined

    for e in range(depth):
        cells: dict[int, list[int]] = {}
        for x in range(coverage):
            cells.setdefault(cell_ids[x], []).append(x)
        sched = universe.schedules[e]
        # Values are stable once converged, so a single split of each cell
        # into 1-valued and 0-valued members (within the largest stagewise
        # domain this run can see) serves every interval's pair search.
        dom_max = universe.psi_dom_bound(e, h(stages))
        split: dict[int, tuple[list[int], list[int]]] = {}
        for cid, elems in cells.items():
            ones_l: list[int] = []
            zeros_l: list[int] = []
            for x in elems:
                if x >= dom_max:
                    break
                if sched.converged_value(x, h(stages)) % 2 == 1:
                    ones_l.append(x)
                else:
                    zeros_l.append(x)
            split[cid] = (ones_l, zeros_l)
        values = [0] * coverage
        breaks = [0]
        stalled = None
        lo = 0
        while lo < coverage:
            stage_q = h(lo)
            m = universe.psi_dom_bound(e, stage_q)
            hi = 0
            follow: set[int] = set()
            dry = False
            for cid, elems in sorted(cells.items()):
                start = bisect_left(elems, lo)
                if start + 1 >= len(elems):
                    dry = True
                    break
                hi = max(hi, elems[start + 1] + 1)
                pair_w = _first_pair_w(split[cid], lo, m)
                if pair_w is not None:
                    follow.add(cid)
                    hi = max(hi, pair_w + 1)
            if dry:
                stalled = lo
                record.log(t="phase-stalled", e=e, at=lo)
                break
            ones: list[int] = []
            for cid, elems in sorted(cells.items()):
                start = bisect_left(elems, lo)
                stop = bisect_left(elems, hi)
                chunk = elems[start:stop]
                if cid in follow and m >= hi:
                    for x in chunk:
                        if sched.converged_value(x, stage_q) % 2 == 1:
                            values[x] = 1
                            ones.append(x)
                elif chunk:
                    values[chunk[0]] = 1
                    ones.append(chunk[0])
            ones.sort()
            record.log(
                t="interval",
                e=e,
                n=len(breaks) - 1,
                lo=lo,
                hi=hi,
                follow=sorted(follow),
                ones=ones,
            )
            breaks.append(hi)
            lo = hi
        phases.append(Phase(e, breaks, stalled))
        columns.append(values)
        # A failed breakpoint search ends the phase but not the run: deeper
        # phases work over the window this phase did define.
        coverage = min(coverage, breaks[-1])
        for x in range(coverage):
            cell_ids[x] |= values[x] << e

    col_sets = [
        {x for x in range(coverage) if vals[x]} for vals in columns
    ]
    family = CodedFamily.from_columns(col_sets, CE, horizon=0)
    family.element_window = coverage
    record.parameters["coverage"] = coverage
    return IndepRun(record, family, columns, phases, coverage)


def _first_pair_w(split: tuple[list[int], list[int]], lo: int, m: int) -> int | None:
    """Least 0-valued cell element w preceded by a 1-valued cell element u
    with lo <= u < w, both inside the consulted domain [0, m)."""
    ones_l, zeros_l = split
    i = bisect_left(ones_l, lo)
    if i >= len(ones_l) or ones_l[i] >= m:
        return None
    u = ones_l[i]
    j = bisect_right(zeros_l, u)
    if j >= len(zeros_l) or zeros_l[j] >= m:
        return None
    return zeros_l[j]
