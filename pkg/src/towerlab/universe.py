"""Scripted effective universes: listings of partial functions with explicit
convergence schedules, and the derived listings the constructions consume.

A universe fixes, for each index e, a schedule telling when (at which stage)
each input converges and to what raw value.  From it we derive:

  * phi_at(e, x, s): stage-bounded evaluation.  Converged values are stable
    under increasing s.  By convention an input x is only visible at stages
    s >= x, which keeps every stagewise listing finite.
  * psi_at(e, x, s): the normalized {0,1}-valued listing.  psi_e(x) is
    defined at stage s iff phi_e(y) has converged by s for every y <= x, and
    its value is phi_e(x) mod 2, so its domain is an initial segment at every
    stage and total indices stay total in the limit.
  * v_at(e, k, s): the pair listing V_{e,k} = {x : psi_e(x) = k}.
  * m_at(e, s): the interleaved listing with even columns the domains of the
    phi's and odd columns all of omega (as [0, s) at stage s).

Schedules come in three kinds: finite tables, closed-form residue formulas,
and counter-machine programs metered by a per-stage fuel budget (overridable
via the TOWERLAB_FUEL environment variable).  Table and formula schedules
declare their own limit behavior exactly, which the path oracles require;
machine schedules do not.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .machine import Instruction, parse_program, run_machine

DEFAULT_FUEL_UNIT = 1000
FUEL_ENV_VAR = "TOWERLAB_FUEL"


class ScriptError(ValueError):
    """A universe script is malformed."""


class UniverseNotDecidable(ValueError):
    """An index lacks declared limit behavior (machine-backed schedule)."""


def fuel_unit_from_env(default: int = DEFAULT_FUEL_UNIT) -> int:
    raw = os.environ.get(FUEL_ENV_VAR)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ScriptError(f"{FUEL_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ScriptError(f"{FUEL_ENV_VAR} must be positive")
    return value


@dataclass(frozen=True)
class FinitePsiLimit:
    """Limit of a psi listing with bounded domain [0, dom_bound)."""

    dom_bound: int
    values: tuple[int, ...]  # psi values on the domain

    def side(self, k: int) -> set[int]:
        return {x for x, v in enumerate(self.values) if v == k}


@dataclass(frozen=True)
class ResiduePsiLimit:
    """Limit of a total psi listing: psi(x) = 1 iff x mod modulus in ones."""

    modulus: int
    ones: frozenset[int]

    def value(self, x: int) -> int:
        return 1 if x % self.modulus in self.ones else 0

    def side_residues(self, k: int) -> frozenset[int]:
        if k == 1:
            return self.ones
        return frozenset(r for r in range(self.modulus) if r not in self.ones)


class TableSchedule:
    """Finite explicit table; anything outside the table diverges."""

    kind = "table"
    decidable = True

    def __init__(self, entries: dict[int, tuple[int, int]]):
        self.entries = entries
        # contiguous prefix [0, prefix_len) and running max of converge stages
        self.prefix_len = 0
        while self.prefix_len in entries:
            self.prefix_len += 1
        self._prefix_max = []
        running = -1
        for x in range(self.prefix_len):
            running = max(running, entries[x][1])
            self._prefix_max.append(running)

    def converged_value(self, x: int, s: int) -> int | None:
        if x > s:
            return None
        entry = self.entries.get(x)
        if entry is None or entry[1] > s:
            return None
        return entry[0]

    def dom_bound(self, s: int) -> int:
        """Least x with phi(x) not converged by stage s."""
        hi = min(self.prefix_len, s + 1)
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if self._prefix_max[mid] <= s:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def entry_stage(self, x: int, cap: int | None = None) -> int | None:
        """Least stage whose psi domain covers x; None when it never does."""
        if x >= self.prefix_len:
            return None
        return max(x, self._prefix_max[x])

    def psi_limit(self) -> FinitePsiLimit:
        values = tuple(self.entries[x][0] % 2 for x in range(self.prefix_len))
        return FinitePsiLimit(self.prefix_len, values)

    def limit_value(self, x: int) -> int | None:
        entry = self.entries.get(x)
        return None if entry is None else entry[0]


class FormulaSchedule:
    """Closed form: value(x) = 1 if x mod modulus in ones else 0, converging
    at stage stage_slope * x + stage_offset; diverges at x >= domain_bound
    when a bound is declared."""

    kind = "formula"
    decidable = True

    def __init__(
        self,
        modulus: int,
        ones: frozenset[int],
        stage_slope: int,
        stage_offset: int,
        domain_bound: int | None,
    ):
        self.modulus = modulus
        self.ones = ones
        self.stage_slope = stage_slope
        self.stage_offset = stage_offset
        self.domain_bound = domain_bound

    def _value(self, x: int) -> int:
        return 1 if x % self.modulus in self.ones else 0

    def converged_value(self, x: int, s: int) -> int | None:
        if x > s:
            return None
        if self.domain_bound is not None and x >= self.domain_bound:
            return None
        if self.stage_slope * x + self.stage_offset > s:
            return None
        return self._value(x)

    def dom_bound(self, s: int) -> int:
        if self.stage_offset > s:
            return 0
        if self.stage_slope == 0:
            by_formula = s + 1
        else:
            by_formula = (s - self.stage_offset) // self.stage_slope + 1
        bound = min(by_formula, s + 1)
        if self.domain_bound is not None:
            bound = min(bound, self.domain_bound)
        return bound

    def entry_stage(self, x: int, cap: int | None = None) -> int | None:
        if self.domain_bound is not None and x >= self.domain_bound:
            return None
        # converge stages grow with x, so the prefix max is the stage at x
        return max(x, self.stage_slope * x + self.stage_offset)

    def psi_limit(self):
        if self.domain_bound is None:
            return ResiduePsiLimit(self.modulus, frozenset(self.ones))
        values = tuple(self._value(x) % 2 for x in range(self.domain_bound))
        return FinitePsiLimit(self.domain_bound, values)

    def limit_value(self, x: int) -> int | None:
        if self.domain_bound is not None and x >= self.domain_bound:
            return None
        return self._value(x)


class MachineSchedule:
    """Counter-machine program; phi(x) converges at the first stage whose
    cumulative fuel budget covers the run."""

    kind = "machine"
    decidable = False

    def __init__(self, program: tuple[Instruction, ...], fuel_unit: int):
        self.program = program
        self.fuel_unit = fuel_unit
        # x -> (steps, output) once halted; x -> None while only known pending
        self._runs: dict[int, tuple[int, int] | None] = {}
        self._fuel_tried: dict[int, int] = {}

    def _run(self, x: int, fuel: int) -> tuple[int, int] | None:
        known = self._runs.get(x)
        if known is not None:
            return known
        if self._fuel_tried.get(x, -1) >= fuel:
            return None
        result = run_machine(self.program, x, fuel)
        self._fuel_tried[x] = fuel
        if result.halted:
            self._runs[x] = (result.steps, result.output)
            return self._runs[x]
        return None

    def converge_stage(self, x: int, budget_stage: int) -> int | None:
        """Stage at which phi(x) converges, searching up to budget_stage."""
        run = self._run(x, budget_stage * self.fuel_unit)
        if run is None:
            return None
        steps = run[0]
        return max(x, -(-steps // self.fuel_unit))

    def converged_value(self, x: int, s: int) -> int | None:
        if x > s:
            return None
        run = self._run(x, s * self.fuel_unit)
        if run is None:
            return None
        steps, output = run
        return output if steps <= s * self.fuel_unit else None

    def dom_bound(self, s: int) -> int:
        x = 0
        while x <= s and self.converged_value(x, s) is not None:
            x += 1
        return x

    def entry_stage(self, x: int, cap: int | None = None) -> int | None:
        """Binary search over the monotone domain bound, capped because a
        machine's divergence cannot be decided."""
        if cap is None:
            raise UniverseNotDecidable(
                "machine-backed index needs a stage cap for admission queries"
            )
        if self.dom_bound(cap) <= x:
            return None
        lo, hi = x, cap
        while lo < hi:
            mid = (lo + hi) // 2
            if self.dom_bound(mid) > x:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def psi_limit(self):
        raise UniverseNotDecidable("machine-backed index has no declared limit")

    def limit_value(self, x: int) -> int | None:
        raise UniverseNotDecidable("machine-backed index has no declared limit")


class JumpScenario:
    """Scripted stagewise jump approximation with declared settling."""

    def __init__(self, histories: list[list[tuple[int, int]]]):
        for e, history in enumerate(histories):
            stages = [s for s, _ in history]
            if stages != sorted(set(stages)):
                raise ScriptError(f"jump history for bit {e} not stage-increasing")
            if any(b not in (0, 1) for _, b in history):
                raise ScriptError(f"jump history for bit {e} has non-bit values")
        self.histories = histories

    @property
    def width(self) -> int:
        return len(self.histories)

    def bit(self, e: int, s: int) -> int:
        if e >= len(self.histories):
            raise IndexError(f"jump scenario has no bit {e}")
        value = 0
        for stage, b in self.histories[e]:
            if stage > s:
                break
            value = b
        return value

    def settling(self, e: int) -> int:
        history = self.histories[e]
        return history[-1][0] if history else 0

    def settled_bit(self, e: int) -> int:
        history = self.histories[e]
        return history[-1][1] if history else 0

    def prefix(self, n: int, s: int) -> str:
        """The scripted approximation restricted to its first n bits."""
        return "".join(str(self.bit(e, s)) for e in range(n))


class DominatingOracle:
    """Total oracle function h with h(s) >= s on the queried range."""

    def __init__(self, a: int, b: int):
        self.a = a
        self.b = b

    def __call__(self, s: int) -> int:
        value = self.a * s + self.b
        if value < s:
            raise ValueError(f"dominating oracle violates h(s) >= s at s={s}")
        return value

    def spec(self) -> dict:
        return {"kind": "affine", "a": self.a, "b": self.b}


class CeEnumeration:
    """Stagewise enumeration of a c.e. set: (stage, element) insertions."""

    def __init__(self, insertions: list[tuple[int, int]]):
        stages = [s for s, _ in insertions]
        if stages != sorted(stages):
            raise ScriptError("enumeration stages must be nondecreasing")
        if any(s < 0 or x < 0 for s, x in insertions):
            raise ScriptError("enumeration stages and elements are naturals")
        self.insertions = insertions
        self._by_stage: dict[int, list[int]] = {}
        for s, x in insertions:
            self._by_stage.setdefault(s, []).append(x)

    def members_at(self, s: int) -> set[int]:
        return {x for stage, x in self.insertions if stage <= s}

    def min_new_at(self, s: int) -> int | None:
        new = self._by_stage.get(s)
        return min(new) if new else None

    def changed_below(self, x: int, s: int) -> bool:
        """Whether the stage-s approximation differs from stage s-1 below x."""
        lowest = self.min_new_at(s)
        return lowest is not None and lowest < x


class Universe:
    """An immutable indexed family of schedules plus optional side oracles."""

    def __init__(
        self,
        schedules: list,
        jump: JumpScenario | None = None,
        dominating: DominatingOracle | None = None,
        a_enumeration: CeEnumeration | None = None,
    ):
        self.schedules = schedules
        self.jump = jump
        self.dominating = dominating
        self.a_enumeration = a_enumeration

    def __len__(self) -> int:
        return len(self.schedules)

    def _schedule(self, e: int):
        if not 0 <= e < len(self.schedules):
            raise IndexError(f"index {e} beyond listing of {len(self.schedules)}")
        return self.schedules[e]

    def phi_at(self, e: int, x: int, s: int) -> int | None:
        """Stage-bounded evaluation; None means still pending at s."""
        return self._schedule(e).converged_value(x, s)

    def psi_dom_bound(self, e: int, s: int) -> int:
        """dom(psi_e) at stage s is [0, psi_dom_bound(e, s))."""
        return self._schedule(e).dom_bound(s)

    def psi_at(self, e: int, x: int, s: int) -> int | None:
        if x >= self.psi_dom_bound(e, s):
            return None
        value = self._schedule(e).converged_value(x, s)
        assert value is not None
        return value % 2

    def v_at(self, e: int, k: int, s: int) -> set[int]:
        if k not in (0, 1):
            raise ValueError("pair listing sides are 0 and 1")
        bound = self.psi_dom_bound(e, s)
        sched = self._schedule(e)
        return {
            x for x in range(bound) if sched.converged_value(x, s) % 2 == k
        }

    def m_at(self, e: int, s: int) -> set[int]:
        """Interleaved listing: even columns are phi domains, odd are omega."""
        if e % 2 == 1:
            return set(range(s))
        sched = self._schedule(e // 2)
        return {x for x in range(s + 1) if sched.converged_value(x, s) is not None}

    def m_member(self, e: int, x: int, s: int) -> bool:
        if e % 2 == 1:
            return 0 <= x < s
        return x <= s and self._schedule(e // 2).converged_value(x, s) is not None

    def psi_limit(self, e: int):
        """Declared limit of psi_e; raises UniverseNotDecidable for machines."""
        return self._schedule(e).psi_limit()

    def psi_limit_value(self, e: int, x: int) -> int | None:
        limit = self.psi_limit(e)
        if isinstance(limit, FinitePsiLimit):
            return limit.values[x] if x < limit.dom_bound else None
        return limit.value(x)

    def v_limit(self, e: int, k: int, bound: int) -> set[int]:
        """Limit pair listing side restricted to [0, bound)."""
        return {x for x in range(bound) if self.psi_limit_value(e, x) == k}


def _require_fields(doc: dict, required: set[str], optional: set[str], where: str):
    if not isinstance(doc, dict):
        raise ScriptError(f"{where}: expected an object")
    keys = set(doc)
    missing = required - keys
    if missing:
        raise ScriptError(f"{where}: missing fields {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ScriptError(f"{where}: unknown fields {sorted(unknown)}")


def _load_index(entry: dict, fuel_unit: int):
    if not isinstance(entry, dict) or "kind" not in entry or "e" not in entry:
        raise ScriptError("index entries need 'e' and 'kind'")
    kind = entry["kind"]
    where = f"index {entry['e']}"
    if kind == "table":
        _require_fields(entry, {"e", "kind", "entries"}, {"default"}, where)
        if entry.get("default", "divergent") != "divergent":
            raise ScriptError(f"{where}: table default must be 'divergent'")
        table: dict[int, tuple[int, int]] = {}
        for cell in entry["entries"]:
            _require_fields(cell, {"x", "value", "stage"}, set(), f"{where} entry")
            x, value, stage = cell["x"], cell["value"], cell["stage"]
            if not all(isinstance(v, int) and v >= 0 for v in (x, value, stage)):
                raise ScriptError(f"{where}: entries must be naturals")
            if x in table:
                raise ScriptError(f"{where}: duplicate input {x}")
            table[x] = (value, stage)
        return TableSchedule(table)
    if kind == "machine":
        _require_fields(entry, {"e", "kind", "program"}, set(), where)
        return MachineSchedule(parse_program(entry["program"]), fuel_unit)
    if kind == "formula":
        _require_fields(
            entry,
            {"e", "kind", "modulus", "ones"},
            {"stageSlope", "stageOffset", "domainBound"},
            where,
        )
        modulus = entry["modulus"]
        if not isinstance(modulus, int) or modulus < 1:
            raise ScriptError(f"{where}: modulus must be a positive integer")
        ones = entry["ones"]
        if not isinstance(ones, list) or any(
            not isinstance(r, int) or not 0 <= r < modulus for r in ones
        ):
            raise ScriptError(f"{where}: ones must be residues below the modulus")
        slope = entry.get("stageSlope", 1)
        offset = entry.get("stageOffset", 0)
        bound = entry.get("domainBound")
        if bound is not None and (not isinstance(bound, int) or bound < 0):
            raise ScriptError(f"{where}: domainBound must be a natural or null")
        if slope < 0 or offset < 0:
            raise ScriptError(f"{where}: stage schedule must be nonnegative")
        return FormulaSchedule(modulus, frozenset(ones), slope, offset, bound)
    raise ScriptError(f"{where}: unknown kind {kind!r}")


def load_universe(doc: dict, fuel_unit: int | None = None) -> Universe:
    """Build a universe from a script document, validating strictly."""
    _require_fields(
        doc, {"indices"}, {"jump", "dominating", "aEnumeration"}, "universe script"
    )
    if fuel_unit is None:
        fuel_unit = fuel_unit_from_env()

    if not isinstance(doc["indices"], list):
        raise ScriptError("'indices' must be a list")
    by_index: dict[int, object] = {}
    for entry in doc["indices"]:
        sched = _load_index(entry, fuel_unit)
        e = entry["e"]
        if not isinstance(e, int) or e < 0:
            raise ScriptError("index 'e' must be a natural")
        if e in by_index:
            raise ScriptError(f"duplicate index {e}")
        by_index[e] = sched
    if set(by_index) != set(range(len(by_index))):
        raise ScriptError("indices must cover 0..n-1 without gaps")
    schedules = [by_index[e] for e in range(len(by_index))]

    jump = None
    if "jump" in doc:
        _require_fields(doc["jump"], {"entries"}, set(), "jump scenario")
        rows = doc["jump"]["entries"]
        by_bit: dict[int, list[tuple[int, int]]] = {}
        for row in rows:
            _require_fields(row, {"e", "history"}, set(), "jump entry")
            if row["e"] in by_bit:
                raise ScriptError(f"duplicate jump bit {row['e']}")
            by_bit[row["e"]] = [tuple(p) for p in row["history"]]
        if set(by_bit) != set(range(len(by_bit))):
            raise ScriptError("jump bits must cover 0..n-1 without gaps")
        jump = JumpScenario([by_bit[e] for e in range(len(by_bit))])

    dominating = None
    if "dominating" in doc:
        spec = doc["dominating"]
        _require_fields(spec, {"kind", "a", "b"}, set(), "dominating oracle")
        if spec["kind"] != "affine":
            raise ScriptError(f"unknown dominating kind {spec['kind']!r}")
        dominating = DominatingOracle(spec["a"], spec["b"])
        if dominating(0) < 0 or dominating(1) < 1:
            raise ScriptError("dominating oracle must satisfy h(s) >= s")

    a_enum = None
    if "aEnumeration" in doc:
        rows = doc["aEnumeration"]
        if not isinstance(rows, list) or any(len(r) != 2 for r in rows):
            raise ScriptError("aEnumeration must be a list of [stage, element]")
        a_enum = CeEnumeration([(int(s), int(x)) for s, x in rows])

    return Universe(schedules, jump, dominating, a_enum)


def parse_universe(text: str, fuel_unit: int | None = None) -> Universe:
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScriptError(f"universe script is not valid JSON: {exc}") from exc
    return load_universe(doc, fuel_unit)
