"""Windowed verifiers for tower, almost-disjointness, independence, and
decision properties, with explicit witnesses.

Asymptotic properties ("infinite", almost inclusion, almost equality) are
systematically reinterpreted over a finite element window [0, horizon) with
witness counts W and reported thresholds.  A Pass never claims the asymptotic
statement, only its window instance.  Fail always carries a concrete
counterexample; Inconclusive is reserved for windows too small to witness the
demanded count either way (W exceeding the window size).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoding import CodedFamily

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Witness:
    kind: str
    indices: tuple = ()
    elements: tuple = ()
    threshold: int | None = None


@dataclass
class CheckReport:
    check: str
    verdict: str
    parameters: dict
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def failures(self) -> list[Witness]:
        return [w for w in self.witnesses if w.kind.startswith("violation")]

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "parameters": self.parameters,
            "witnesses": [
                {
                    "kind": w.kind,
                    "indices": list(w.indices),
                    "elements": list(w.elements),
                    "threshold": w.threshold,
                }
                for w in self.witnesses
            ],
        }


def columns_of(
    family: CodedFamily,
    depth: int,
    horizon: int,
    stage: int | None = None,
) -> list[set[int]]:
    """Materialize columns 0..depth-1 at a stage (default: the final one)."""
    s = family.horizon if stage is None else stage
    return [family.column(n, s, bound=horizon) for n in range(depth)]


def subset_star_witness(a: set[int], b: set[int], horizon: int) -> int | None:
    """Least m with a ∩ [m, horizon) ⊆ b, or None when only m = horizon works."""
    worst = -1
    for x in a:
        if x < horizon and x not in b and x > worst:
            worst = x
    m = worst + 1
    return None if m >= horizon else m


def equal_star_witness(a: set[int], b: set[int], horizon: int) -> int | None:
    """Least m with a ∩ [m, horizon) = b ∩ [m, horizon), or None."""
    worst = -1
    for x in a.symmetric_difference(b):
        if x < horizon and x > worst:
            worst = x
    m = worst + 1
    return None if m >= horizon else m


def _count_verdict(count: int, needed: int, horizon: int) -> str:
    if count >= needed:
        return PASS
    return INCONCLUSIVE if needed > horizon else FAIL


def tower_check(
    columns: list[set[int]], depth: int, horizon: int, witness_count: int
) -> CheckReport:
    """Window instance of the tower property for columns 0..depth.

    Checks that column 0 covers the window, that each deeper column almost
    includes into its predecessor (finite threshold), and that consecutive
    differences carry at least witness_count elements.
    """
    params = {"depth": depth, "horizon": horizon, "witness": witness_count}
    report = CheckReport("tower", PASS, params)
    window = set(range(horizon))
    if depth + 1 > len(columns):
        raise ValueError(f"tower check needs {depth + 1} columns")

    missing = sorted(window - columns[0])
    if missing:
        report.verdict = FAIL
        report.witnesses.append(
            Witness("violation:ground", (0,), tuple(missing[:10]))
        )
        return report

    inconclusive = False
    for n in range(depth):
        upper, lower = columns[n], columns[n + 1]
        m = subset_star_witness(lower, upper, horizon)
        if m is None:
            escapees = sorted(x for x in lower - upper if x < horizon)
            report.verdict = FAIL
            report.witnesses.append(
                Witness("violation:nesting", (n + 1, n), tuple(escapees[:10]))
            )
            continue
        report.witnesses.append(Witness("threshold", (n + 1, n), (), m))
        diff = [x for x in upper - lower if x < horizon]
        verdict = _count_verdict(len(diff), witness_count, horizon)
        if verdict == FAIL:
            report.verdict = FAIL
            report.witnesses.append(
                Witness("violation:diff-count", (n,), (len(diff),))
            )
        elif verdict == INCONCLUSIVE:
            inconclusive = True
            report.witnesses.append(
                Witness("starved:diff-count", (n,), (len(diff),))
            )
    if report.verdict == PASS and inconclusive:
        report.verdict = INCONCLUSIVE
    return report


def ad_check(
    columns: list[set[int]], depth: int, horizon: int, bound: int
) -> CheckReport:
    """Window instance of almost disjointness with per-column size floor."""
    params = {"depth": depth, "horizon": horizon, "bound": bound}
    report = CheckReport("almost-disjoint", PASS, params)
    inconclusive = False
    for n in range(depth):
        size = sum(1 for x in columns[n] if x < horizon)
        verdict = _count_verdict(size, bound, horizon)
        if verdict == FAIL:
            report.verdict = FAIL
            report.witnesses.append(Witness("violation:column-size", (n,), (size,)))
        elif verdict == INCONCLUSIVE:
            inconclusive = True
            report.witnesses.append(Witness("starved:column-size", (n,), (size,)))
    for n in range(depth):
        for k in range(n + 1, depth):
            overlap = sorted(
                x for x in columns[n] & columns[k] if x < horizon
            )
            if len(overlap) > bound:
                report.verdict = FAIL
                report.witnesses.append(
                    Witness(
                        "violation:intersection", (n, k), tuple(overlap[: bound + 3])
                    )
                )
    if report.verdict == PASS and inconclusive:
        report.verdict = INCONCLUSIVE
    return report


def independence_check(
    columns: list[set[int]], depth: int, horizon: int, witness_count: int
) -> CheckReport:
    """Every boolean combination over strings up to the depth has witnesses."""
    from .oracle_constructions import f_sigma

    params = {"depth": depth, "horizon": horizon, "witness": witness_count}
    report = CheckReport("independence", PASS, params)
    inconclusive = False
    sigmas = [""]
    frontier = [""]
    for _ in range(depth):
        frontier = [s + b for s in frontier for b in "01"]
        sigmas.extend(frontier)
    for sigma in sigmas:
        cell = f_sigma(columns, sigma, horizon)
        verdict = _count_verdict(len(cell), witness_count, horizon)
        if verdict == FAIL:
            report.verdict = FAIL
            report.witnesses.append(
                Witness("violation:cell-size", (sigma,), (len(cell),))
            )
        elif verdict == INCONCLUSIVE:
            inconclusive = True
            report.witnesses.append(
                Witness("starved:cell-size", (sigma,), (len(cell),))
            )
    if report.verdict == PASS and inconclusive:
        report.verdict = INCONCLUSIVE
    return report


@dataclass(frozen=True)
class Decision:
    side: int
    column: int
    threshold: int


def uf_decision_check(
    columns: list[set[int]],
    universe,
    e: int,
    depth: int,
    horizon: int,
    min_tail: int = 5,
) -> Decision | None:
    """Least (column, side) whose window tail sits inside one side of pair e.

    A decision only counts when the agreeing tail actually carries at least
    min_tail column elements; without that floor every column would be
    vacuously decided by an almost-empty tail just below the horizon.
    Returns None (undecided) when no column up to the depth qualifies.
    """
    sides = (universe.v_limit(e, 0, horizon), universe.v_limit(e, 1, horizon))
    for n in range(min(depth + 1, len(columns))):
        for side in (0, 1):
            m = subset_star_witness(columns[n], sides[side], horizon)
            if m is None:
                continue
            tail = sum(1 for x in columns[n] if m <= x < horizon)
            if tail >= min_tail:
                return Decision(side, n, m)
    return None


def maximality_probe(
    columns: list[set[int]], universe, depth: int, horizon: int, witness_count: int
) -> dict[int, int | None]:
    """For each total index with an infinite 0-side, the least column the side
    escapes from with enough witnesses; None when it never escapes.

    A probe over the scripted universe only, never a maximality proof.
    """
    from .universe import ResiduePsiLimit

    out: dict[int, int | None] = {}
    for e in range(len(universe)):
        try:
            limit = universe.psi_limit(e)
        except Exception:
            continue
        if not isinstance(limit, ResiduePsiLimit):
            continue
        if not limit.side_residues(0):
            continue  # 0-side empty, not an infinite computable set
        r_set = universe.v_limit(e, 0, horizon)
        found = None
        for n in range(depth):
            escape = sum(1 for x in r_set if x not in columns[n])
            if escape >= witness_count:
                found = n
                break
        out[e] = found
    return out


def d_e_classify(
    universe, columns: list[set[int]], e: int, horizon: int, witness_count: int
) -> set[str]:
    """Strings of length e whose cell meets both sides of pair e amply."""
    from .oracle_constructions import f_sigma

    v0 = universe.v_limit(e, 0, horizon)
    v1 = universe.v_limit(e, 1, horizon)
    out = set()
    frontier = [""]
    for _ in range(e):
        frontier = [s + b for s in frontier for b in "01"]
    for sigma in frontier:
        cell = f_sigma(columns, sigma, horizon)
        if len(cell & v0) >= witness_count and len(cell & v1) >= witness_count:
            out.add(sigma)
    return out
