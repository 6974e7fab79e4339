import random

import pytest

from towerlab.checker import independence_check, subset_star_witness
from towerlab.oracle_constructions import (
    PeriodicSet,
    StreamTree,
    build_indep_family,
    build_uf_base,
    f_sigma,
    leftmost_path,
    limit_stream,
)
from towerlab.universe import DominatingOracle, UniverseNotDecidable, load_universe


def formula(e, modulus, ones, bound=None, slope=1, offset=0):
    return {
        "e": e,
        "kind": "formula",
        "modulus": modulus,
        "ones": ones,
        "domainBound": bound,
        "stageSlope": slope,
        "stageOffset": offset,
    }


PARITY1 = {"indices": [formula(0, 2, [1])]}
DIVERGENT2 = {"indices": [formula(0, 2, [1], bound=3), formula(1, 2, [1], bound=0)]}
DIVERGENT3 = {
    "indices": [
        formula(0, 2, [1], bound=3),
        formula(1, 2, [1], bound=0),
        formula(2, 2, [1], bound=5),
    ]
}


def test_f_sigma_examples():
    cols = [set(range(0, 50, 2)), set(range(0, 50, 3))]
    assert f_sigma(cols, "", 50) == set(range(50))
    assert f_sigma(cols, "1", 50) == cols[0]
    assert f_sigma(cols, "10", 50) == cols[0] - cols[1]


def brute_thin(members):
    return members[::2]


def test_periodic_thin_matches_brute_force():
    rng = random.Random(5)
    for _ in range(60):
        period = rng.randrange(1, 9)
        residues = tuple(
            sorted(rng.sample(range(period), rng.randrange(0, period + 1)))
        )
        threshold = rng.randrange(0, 12)
        prefix = tuple(sorted(rng.sample(range(threshold), rng.randrange(0, threshold + 1)))) if threshold else ()
        s = PeriodicSet(prefix, threshold, period, residues)
        bound = 400
        expected = brute_thin(s.members_below(bound))
        got = s.thin().members_below(bound)
        # ignore the tail where brute enumeration is cut off
        cut = bound - period * 2 - threshold
        assert [x for x in got if x < cut] == [x for x in expected if x < cut]


def test_periodic_intersections():
    evens = PeriodicSet.omega().thin()
    assert evens.members_below(10) == [0, 2, 4, 6, 8]
    mult6 = evens.intersect_residues(3, {0})
    assert mult6.members_below(20) == [0, 6, 12, 18]
    finite = evens.intersect_finite({0, 1, 2, 3, 4})
    assert not finite.is_infinite
    assert finite.members_below(100) == [0, 2, 4]


def test_limit_stream_divergent_universe():
    u = load_universe(DIVERGENT2)
    assert limit_stream(u, "22").members_below(17) == [0, 4, 8, 12, 16]
    assert not limit_stream(u, "20").is_infinite
    assert limit_stream(u, "20").members_below(100) == []  # psi_1 domain empty
    assert limit_stream(u, "0").members_below(100) == [0, 2]  # dom psi_0 = [0,3)


def test_leftmost_path_examples():
    u2 = load_universe(DIVERGENT2)
    assert leftmost_path(u2, 0) == ""
    assert leftmost_path(u2, 2) == "22"
    u1 = load_universe(PARITY1)
    assert leftmost_path(u1, 1) == "0"  # thinned root is even, parity side 0
    with pytest.raises(UniverseNotDecidable):
        leftmost_path(
            load_universe({"indices": [{"e": 0, "kind": "machine", "program": "HALT"}]}),
            1,
        )


def test_stream_tree_matches_limits():
    u = load_universe(DIVERGENT3)
    tree = StreamTree(u, 3, 200)
    for alpha in ("", "2", "22", "20", "21", "222", "220"):
        live = tree.members_at(alpha, 200)
        sym = limit_stream(u, alpha).members_below(120)
        assert [x for x in live if x < 120] == sym


def test_stream_tree_discipline():
    u = load_universe(DIVERGENT3)
    tree = StreamTree(u, 2, 100)
    for t in range(0, 100, 7):
        for alpha in ("0", "1", "2"):
            child = set(tree.members_at(alpha, t))
            parent = tree.members_at("", t)
            thinned = set(parent[::2])
            assert child <= thinned
    # streams only grow
    previous: dict[str, set] = {}
    for t in range(100):
        for alpha in ("", "2", "22"):
            cur = set(tree.members_at(alpha, t))
            assert previous.get(alpha, set()) <= cur
            previous[alpha] = cur


def test_uf_base_zero_stages_seeds_only():
    u = load_universe(DIVERGENT2)
    run = build_uf_base(u, DominatingOracle(2, 2), stages=0, depth=2)
    for e in range(3):
        assert run.family.column(e, 0) == {0}


def test_uf_base_parity_threshold():
    # one total parity index, h(s) = s: deep levels starve, output degenerate
    u = load_universe(PARITY1)
    run = build_uf_base(u, DominatingOracle(1, 0), stages=60, depth=1)
    f1 = run.family.column(1, run.family.horizon)
    v00 = u.v_limit(0, 0, 100)
    m = subset_star_witness(f1, v00, 100)
    assert m is not None


def test_uf_base_all_divergent_tracks_rightmost():
    u = load_universe(DIVERGENT2)
    run = build_uf_base(u, DominatingOracle(8, 8), stages=300, depth=2)
    f2 = run.family.column(2, run.family.horizon)
    expected = set(range(0, max(f2) + 1, 4))
    assert f2 == expected  # multiples of 2^2, no junk in this universe
    # monotone, unbounded growth
    assert run.a_final[2] >= 300


def test_uf_base_events_deterministic():
    u = load_universe(DIVERGENT3)
    h = DominatingOracle(9, 5)
    first = build_uf_base(u, h, stages=120, depth=3)
    second = build_uf_base(u, h, stages=120, depth=3)
    assert first.record.events == second.record.events


def test_indep_zero_stages_empty():
    u = load_universe(PARITY1)
    run = build_indep_family(u, DominatingOracle(2, 2), stages=0, depth=1)
    assert run.coverage == 0


def test_indep_single_parity_follows_listing():
    u = load_universe(PARITY1)
    run = build_indep_family(u, DominatingOracle(2, 10), stages=400, depth=1)
    cols = run.column_sets(300)
    # the column copies the parity listing except possibly a startup interval
    odds = {x for x in range(300) if x % 2 == 1}
    assert subset_star_witness(cols[0], odds, 300) is not None
    assert subset_star_witness(odds, cols[0], 300) is not None
    # tau-level split: F_"0" inside side 0, F_"1" disjoint from it
    v0 = u.v_limit(0, 0, 300)
    f0 = f_sigma(cols, "0", 300)
    f1 = f_sigma(cols, "1", 300)
    assert subset_star_witness(f0, v0, 300) is not None
    assert subset_star_witness(f1, set(range(300)) - v0, 300) is not None


def test_indep_divergent_universe_min_rule():
    u = load_universe(DIVERGENT3)
    run = build_indep_family(u, DominatingOracle(3, 4), stages=2000, depth=3)
    report = independence_check(run.column_sets(run.coverage), 3, run.coverage, 12)
    assert report.verdict == "pass"
    # no interval ever followed a listing: domains are bounded
    assert all(not ev["follow"] for ev in run.record.events if ev["t"] == "interval" and ev["e"] >= 0 and ev["lo"] >= 10)


def test_indep_intervals_satisfy_condition_a():
    u = load_universe(DIVERGENT3)
    run = build_indep_family(u, DominatingOracle(3, 4), stages=1500, depth=3)
    cols = run.column_sets(run.coverage)
    for ev in run.record.events:
        if ev["t"] != "interval":
            continue
        e, lo, hi = ev["e"], ev["lo"], ev["hi"]
        if hi > run.coverage:
            continue
        sigmas = [""]
        for i in range(e):
            sigmas = [s + b for s in sigmas for b in "01"]
        for sigma in sigmas:
            cell = f_sigma(cols, sigma, run.coverage)
            assert len({x for x in cell if lo <= x < hi}) >= 2


def test_indep_deterministic():
    u = load_universe(DIVERGENT3)
    h = DominatingOracle(3, 4)
    a = build_indep_family(u, h, stages=800, depth=3)
    b = build_indep_family(u, h, stages=800, depth=3)
    assert a.record.events == b.record.events
