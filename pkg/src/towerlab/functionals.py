"""Explicitly-defined functionals over towers and listings: associated
functions, the Diff/Cp transforms, alternating-block sets, the
limit-index-approximation family, jump-prefix towers, and oracle-splitting
search with index guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoding import (
    CE,
    COCE,
    DCE,
    CodedFamily,
    MembershipEventLog,
    str_to_num,
)
from .machine import oracle_code, run_machine
from .universe import JumpScenario, Universe


@dataclass
class TowerView:
    """A coded family read as a descending tower of its first `depth` columns."""

    family: CodedFamily
    depth: int

    def column_sets(self, horizon: int, stage: int | None = None) -> list[set[int]]:
        s = self.family.horizon if stage is None else stage
        return [self.family.column(n, s, bound=horizon) for n in range(self.depth)]


class Exhausted(Exception):
    """A bounded search ran out of window, not a construction failure."""

    def __init__(self, k: int, prefix=None):
        super().__init__(f"exhausted at step {k}")
        self.k = k
        self.prefix = prefix


@dataclass
class AssociatedFunction:
    values: list[int]
    # how many columns were intersected for each value (capped at the depth)
    provenance: list[int] = field(default_factory=list)

    def __call__(self, n: int) -> int:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def assoc(view: TowerView, n: int, horizon: int) -> AssociatedFunction:
    """The increasing selector through the tower's nested intersections.

    Value 0 is the least element of column 0; each next value is the least
    element of the intersection of all columns so far (capped at the view's
    depth) above its predecessor.  Raises Exhausted, carrying the prefix
    found, when the window runs dry before step n.
    """
    cols = view.column_sets(horizon)
    if not cols:
        raise Exhausted(0, AssociatedFunction([], []))
    running = sorted(cols[0])
    out = AssociatedFunction([], [])
    prev = -1
    for k in range(n + 1):
        if k > 0 and k < view.depth:
            col = cols[k]
            running = [x for x in running if x in col]
        nxt = next((x for x in running if x > prev), None)
        if nxt is None:
            raise Exhausted(k, out)
        out.values.append(nxt)
        out.provenance.append(min(k + 1, view.depth))
        prev = nxt
    return out


def _flip_stages(log: MembershipEventLog, u: int) -> list[tuple[int, bool]]:
    hist = log._per_elem.get(u, [])
    return list(hist)


def _membership_curve(log: MembershipEventLog, u: int) -> list[tuple[int, bool]]:
    """Membership of u as (from_stage, value) steps, starting at stage 0."""
    start = log.mode == COCE
    curve = [(0, start)]
    for stage, is_insert in _flip_stages(log, u):
        if is_insert != curve[-1][1]:
            curve.append((stage, is_insert))
    return curve


def diff(view: TowerView) -> CodedFamily:
    """Stagewise column differences: output column n is column n minus
    column n+1 at every stage, as a d.c.e. event log."""
    fam = view.family
    out_log = MembershipEventLog(DCE, horizon=fam.horizon)
    out = CodedFamily(out_log, depth=view.depth - 1,
                      element_window=fam.element_window)
    for n in range(view.depth - 1):
        touched: set[int] = set()
        for ev in fam.column_events(n):
            touched.add(ev.element)
        for ev in fam.column_events(n + 1):
            touched.add(ev.element)
        if fam.mode == COCE:
            if fam.element_window is None:
                raise ValueError("co-c.e. diff needs an element window")
            touched = set(range(fam.element_window))
        for u in sorted(touched):
            upper = _membership_curve(_col_log(fam, n), u)
            lower = _membership_curve(_col_log(fam, n + 1), u)
            stages = sorted({s for s, _ in upper} | {s for s, _ in lower})
            state = False
            for s in stages:
                now = _value_at(upper, s) and not _value_at(lower, s)
                if now != state:
                    out_log.add_event(
                        _pair(u, n), s, "insert" if now else "remove"
                    )
                    state = now
    return out


def _pair(u: int, n: int) -> int:
    from .encoding import pair

    return pair(u, n)


def _col_log(fam: CodedFamily, n: int) -> MembershipEventLog:
    log = MembershipEventLog(fam.mode, fam.horizon)
    for ev in fam.column_events(n):
        log.add_event(ev.element, ev.stage, ev.polarity)
    return log


def _value_at(curve: list[tuple[int, bool]], s: int) -> bool:
    value = curve[0][1]
    for stage, v in curve:
        if stage > s:
            break
        value = v
    return value


def cp(family: CodedFamily, depth: int, window: int | None = None) -> CodedFamily:
    """The complement-chain transform: output column n holds x exactly when
    no input column below n holds x, at every stage.

    Maps insert-only families to removal-only ones and vice versa; nesting of
    the output is exact, not merely almost.  Column 0 is all of omega.
    """
    if family.mode == CE:
        out_log = MembershipEventLog(COCE, horizon=family.horizon)
        out = CodedFamily(out_log, depth=depth, element_window=window)
        entry: dict[int, list[tuple[int, int]]] = {}
        for i in range(min(depth - 1, family.depth or depth - 1)):
            for ev in family.column_events(i):
                if ev.polarity == "insert":
                    entry.setdefault(ev.element, []).append((ev.stage, i))
        for u, hits in sorted(entry.items()):
            for n in range(1, depth):
                relevant = [s for s, i in hits if i < n]
                if relevant:
                    # x leaves column n as soon as any input column below n
                    # catches it; deeper columns lose it no later
                    out_log.remove(_pair(u, n), min(relevant))
        return out
    if family.mode == COCE:
        if window is None:
            window = family.element_window
        if window is None:
            raise ValueError("complement chain over a co-c.e. family needs a window")
        out_log = MembershipEventLog(CE, horizon=family.horizon)
        out = CodedFamily(out_log, depth=depth, element_window=window)
        removal_stage: dict[tuple[int, int], int] = {}
        for i in range(min(depth - 1, family.depth or depth - 1)):
            for ev in family.column_events(i):
                if ev.polarity == "remove":
                    removal_stage[(ev.element, i)] = ev.stage
        for u in range(window):
            out_log.insert(_pair(u, 0), 0)
            worst = 0
            for n in range(1, depth):
                stage = removal_stage.get((u, n - 1))
                if stage is None:
                    break  # u never leaves column n-1: absent from here down
                worst = max(worst, stage)
                out_log.insert(_pair(u, n), worst)
        return out
    raise ValueError("complement chain is defined for CE and CoCE families")


class EsetExhausted(Exception):
    """The block recurrence left the window before two blocks existed."""


def eset(f, horizon: int) -> MembershipEventLog:
    """Alternating blocks [n_0, n_1), [n_2, n_3), ... with n_0 = 0 and
    n_{k+1} = f(n_k) + 1, intersected with [0, horizon)."""
    log = MembershipEventLog(CE, horizon=0)
    if horizon <= 0:
        return log
    bounds = [0]
    while bounds[-1] < horizon:
        bounds.append(f(bounds[-1]) + 1)
    if len(bounds) < 3 or bounds[2] >= horizon:
        raise EsetExhausted(f"window {horizon} too small for two blocks")
    for i in range(0, len(bounds) - 1, 2):
        lo, hi = bounds[i], min(bounds[i + 1], horizon)
        for x in range(lo, hi):
            log.insert(x, 0)
    return log


@dataclass
class HatG:
    """Cellwise verdicts of the limit-index approximation family."""

    depth: int
    horizon: int
    cells: dict[tuple[int, int], bool | None]

    def verdict(self, n: int, x: int) -> bool | None:
        return self.cells[(n, x)]

    def pending(self) -> set[tuple[int, int]]:
        return {key for key, v in self.cells.items() if v is None}

    def column(self, n: int) -> set[int]:
        return {
            x for x in range(self.horizon) if self.cells[(n, x)] is True
        }


def hat_g(
    approx: list[list[tuple[int, int]]],
    universe: Universe,
    horizon: int,
    stage_horizon: int,
) -> HatG:
    """Decide each cell (n, x) by the first stage s > x at which the
    approximated index's function has converged on x; the cell joins the
    column when that output is nonzero, and stays pending when no such stage
    exists below the stage horizon."""
    cells: dict[tuple[int, int], bool | None] = {}
    for n, history in enumerate(approx):
        segments = _segments(history, stage_horizon)
        for x in range(horizon):
            verdict: bool | None = None
            for lo, hi, e in segments:
                sched = universe.schedules[e]
                s_min = max(lo, x + 1)
                if s_min > hi or sched.converged_value(x, hi) is None:
                    continue
                # convergence is monotone in the stage: bisect for the least
                # converged stage within the segment
                lo_s, hi_s = s_min, hi
                while lo_s < hi_s:
                    mid = (lo_s + hi_s) // 2
                    if sched.converged_value(x, mid) is None:
                        lo_s = mid + 1
                    else:
                        hi_s = mid
                verdict = sched.converged_value(x, lo_s) != 0
                break
            cells[(n, x)] = verdict
    return HatG(len(approx), horizon, cells)


def _segments(history, stage_horizon: int):
    """Constant-index segments [lo, hi] covering [0, stage_horizon]."""
    if not history or history[0][0] != 0:
        raise ValueError("approximation histories start at stage 0")
    stages = [s for s, _ in history]
    if stages != sorted(set(stages)):
        raise ValueError("approximation history must be stage-increasing")
    out = []
    for i, (s, e) in enumerate(history):
        hi = history[i + 1][0] - 1 if i + 1 < len(history) else stage_horizon
        out.append((s, min(hi, stage_horizon), e))
    return out


def jump_tower(scenario: JumpScenario, depth: int, max_len: int) -> CodedFamily:
    """Columns of strings agreeing with the scripted jump approximation at
    the stage given by their own length.

    A string of length l sits in column n (n <= l) exactly when its first n
    bits match the stage-l approximation, so the columns nest exactly.
    """
    if depth - 1 > scenario.width:
        raise IndexError("scenario too narrow for the requested depth")
    log = MembershipEventLog(CE, horizon=max_len)
    fam = CodedFamily(log, depth=depth)
    for length in range(max_len + 1):
        z = scenario.prefix(min(depth - 1, length), length)
        for v in range(1 << length, 2 << length):
            bits = bin(v)[3:]
            agree = 0
            for n in range(len(z)):
                if bits[n] != z[n]:
                    break
                agree = n + 1
            for n in range(0, agree + 1):
                log.insert(_pair(v, n), length)
    return fam


def recover_jump(codes, k: int, min_witnesses: int) -> int | None:
    """The stable bit k among the longest strings of the set, or None.

    Sorts by code value (length-lexicographic over strings), keeps those long
    enough to have a bit k, and demands the last min_witnesses agree.
    """
    eligible = sorted(v for v in codes if v.bit_length() - 1 > k)
    if len(eligible) < min_witnesses or min_witnesses <= 0:
        return None
    tail = eligible[-min_witnesses:]
    bits = {(v >> (v.bit_length() - 2 - k)) & 1 for v in tail}
    return bits.pop() if len(bits) == 1 else None


# ---------------------------------------------------------------------------
# Oracle functionals, splitting search, and index guessing.


class MachineFunctional:
    """A counter-machine program queried with an explicit oracle prefix."""

    def __init__(self, program, fuel_unit: int = 1):
        self.program = program
        self.fuel_unit = fuel_unit

    def apply(self, tau: str, p: int, fuel: int) -> int | None:
        result = run_machine(
            self.program, p, fuel * self.fuel_unit, oracle_code=oracle_code(tau)
        )
        return result.output if result.halted else None


class PyFunctional:
    """A python-native functional for scripted scenarios; the callable gets
    (tau, p) and returns an output or None for divergence-at-this-prefix."""

    def __init__(self, fn):
        self.fn = fn

    def apply(self, tau: str, p: int, fuel: int) -> int | None:
        return self.fn(tau, p)


@dataclass(frozen=True)
class SplittingWitness:
    p: int
    tau1: str
    tau2: str
    value1: int
    value2: int


def _extensions(sigma: str, length: int):
    """Extensions of sigma with the given total length, lexicographically."""
    extra = length - len(sigma)
    if extra <= 0:
        yield sigma
        return
    for v in range(1 << extra):
        yield sigma + format(v, f"0{extra}b")


def find_splitting(
    phi,
    sigma: str,
    max_len: int,
    fuel: int,
    p_max: int | None = None,
) -> SplittingWitness | None:
    """Deterministic bounded search for two proper extensions of sigma on
    which the functional converges to different outputs at some input.

    Enumerates extension lengths then strings lexicographically, so equal
    inputs always return the identical witness.  None is a bounded-search
    verdict, not a proof that no splitting exists.
    """
    if p_max is None:
        p_max = max_len
    for l1 in range(len(sigma) + 1, max_len + 1):
        for tau1 in _extensions(sigma, l1):
            for l2 in range(len(sigma) + 1, max_len + 1):
                for tau2 in _extensions(sigma, l2):
                    if tau2 == tau1:
                        continue
                    for p in range(p_max + 1):
                        v1 = phi.apply(tau1, p, fuel)
                        if v1 is None:
                            continue
                        v2 = phi.apply(tau2, p, fuel)
                        if v2 is None or v1 == v2:
                            continue
                        return SplittingWitness(p, tau1, tau2, v1, v2)
    return None


@dataclass
class GuessedIndex:
    """The splitting-free prefix together with the evaluation procedure it
    licenses: answer queries by the first converging extension of the prefix."""

    k: int
    prefix: str
    phi: object
    fuel_per_symbol: int
    search_len: int

    def evaluate(self, p: int) -> int | None:
        for length in range(len(self.prefix), self.search_len + 1):
            for tau in _extensions(self.prefix, max(length, len(self.prefix))):
                value = self.phi.apply(tau, p, max(1, length) * self.fuel_per_symbol)
                if value is not None:
                    return value
        return None


def guess_index(
    phi,
    oracle_bits: str,
    max_len: int,
    fuel: int,
    fuel_per_symbol: int = 1000,
    search_len: int | None = None,
) -> GuessedIndex | None:
    """Find the least prefix of the oracle with no splitting above it (at the
    given bounds) and package the induced evaluation procedure.

    Returns None (not guessable at these bounds) when every prefix up to the
    full scripted oracle still splits.
    """
    if search_len is None:
        search_len = max_len + 8
    for k in range(len(oracle_bits) + 1):
        sigma = oracle_bits[:k]
        if find_splitting(phi, sigma, max_len, fuel) is None:
            return GuessedIndex(k, sigma, phi, fuel_per_symbol, search_len)
    return None
