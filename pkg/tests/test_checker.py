from towerlab.checker import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    ad_check,
    d_e_classify,
    equal_star_witness,
    independence_check,
    maximality_probe,
    subset_star_witness,
    tower_check,
    uf_decision_check,
)
from towerlab.universe import load_universe

HORIZON = 100
EVENS = {x for x in range(HORIZON) if x % 2 == 0}
ODDS = {x for x in range(HORIZON) if x % 2 == 1}
MULT4 = {x for x in range(HORIZON) if x % 4 == 0}
OMEGA = set(range(HORIZON))


def test_subset_star_witness():
    assert subset_star_witness(EVENS | {1}, EVENS, HORIZON) == 2
    assert subset_star_witness(EVENS, OMEGA, HORIZON) == 0
    assert subset_star_witness(ODDS, EVENS, HORIZON) is None


def test_subset_star_zero_iff_contained():
    assert subset_star_witness(MULT4, EVENS, HORIZON) == 0
    assert subset_star_witness({98}, EVENS, HORIZON) == 0


def test_equal_star_witness():
    assert equal_star_witness(EVENS, EVENS, HORIZON) == 0
    assert equal_star_witness(EVENS | {3}, EVENS, HORIZON) == 4
    assert equal_star_witness(EVENS, ODDS, HORIZON) is None


def test_tower_check_passes_classic():
    report = tower_check([OMEGA, EVENS, MULT4], 2, HORIZON, 10)
    assert report.verdict == PASS
    thresholds = [w.threshold for w in report.witnesses if w.kind == "threshold"]
    assert thresholds == [0, 0]


def test_tower_check_fails_on_escapees():
    bad_g1 = ODDS | EVENS - {0}  # not almost inside G_0 if G_0 = evens
    report = tower_check([EVENS | {1}, bad_g1, MULT4], 2, HORIZON, 5)
    assert report.verdict == FAIL
    assert report.failures()


def test_tower_check_inconclusive_when_window_too_small():
    report = tower_check([OMEGA, EVENS, MULT4], 2, HORIZON, HORIZON + 1)
    assert report.verdict == INCONCLUSIVE


def test_tower_check_fails_ground_level():
    report = tower_check([EVENS, MULT4], 1, HORIZON, 5)
    assert report.verdict == FAIL


def test_ad_check_residues():
    cols = [{x for x in range(HORIZON) if x % 8 == r} for r in range(8)]
    report = ad_check(cols, 8, HORIZON, 6)
    assert report.verdict == PASS


def test_ad_check_fails_equal_columns():
    cols = [EVENS, EVENS]
    report = ad_check(cols, 2, HORIZON, 6)
    assert report.verdict == FAIL


def test_independence_check_bits():
    cols = [{x for x in range(256) if (x >> n) & 1} for n in range(3)]
    report = independence_check(cols, 3, 256, 8)
    assert report.verdict == PASS


def test_independence_check_fails_on_duplicate():
    cols = [EVENS, EVENS]
    report = independence_check(cols, 2, HORIZON, 2)
    assert report.verdict == FAIL
    assert any(w.indices == ("10",) for w in report.failures())


def test_independence_depth_zero_vacuous():
    report = independence_check([], 0, HORIZON, 5)
    assert report.verdict == PASS


PARITY = {"indices": [{"e": 0, "kind": "formula", "modulus": 2, "ones": [1]}]}


def test_uf_decision_check_decides_parity():
    u = load_universe(PARITY)
    decision = uf_decision_check([OMEGA, EVENS], u, 0, 1, HORIZON)
    assert decision is not None
    assert (decision.side, decision.column, decision.threshold) == (0, 1, 0)


def test_uf_decision_check_undecided_on_interleaving():
    u = load_universe(PARITY)
    mixed = {x for x in range(HORIZON) if x % 4 in (0, 1)}
    assert uf_decision_check([OMEGA, mixed], u, 0, 1, HORIZON) is None


def test_maximality_probe():
    u = load_universe(PARITY)
    towers = [OMEGA, ODDS]  # evens escape column 1 entirely
    out = maximality_probe(towers, u, 2, HORIZON, 10)
    assert out[0] == 1
    assert maximality_probe([OMEGA, OMEGA], u, 2, HORIZON, 10)[0] is None
    assert maximality_probe([OMEGA], u, 1, HORIZON, 0)[0] == 0


def test_d_e_classify():
    two = {
        "indices": [
            {"e": 0, "kind": "formula", "modulus": 4, "ones": [3]},
            {"e": 1, "kind": "formula", "modulus": 2, "ones": [1]},
        ]
    }
    u = load_universe(two)
    cols = [{x for x in range(256) if (x >> 3) & 1}]
    # parity (pair index 1) splits both cells of the bit-3 family
    assert d_e_classify(u, cols, 1, 256, 8) == {"0", "1"}
    aligned = [EVENS]
    # F_"1" = evens sits inside V_{1,0}: one side starves
    assert "1" not in d_e_classify(u, aligned, 1, HORIZON, 8)
