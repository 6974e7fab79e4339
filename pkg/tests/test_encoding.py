import pytest
from hypothesis import given, strategies as st

from towerlab.encoding import (
    CE,
    COCE,
    DCE,
    INSERT,
    REMOVE,
    CodedFamily,
    EventLogError,
    MembershipEventLog,
    num_to_str,
    pair,
    str_to_num,
    unpair,
)


def test_pair_base_cases():
    assert pair(0, 0) == 0
    assert pair(1, 0) == 1
    assert pair(2, 3) == 18


def test_unpair_base_cases():
    assert unpair(0) == (0, 0)
    assert unpair(18) == (2, 3)


def test_pair_bijective_on_square():
    seen = {}
    for x in range(200):
        for n in range(200):
            c = pair(x, n)
            assert c >= x and c >= n
            assert c not in seen
            seen[c] = (x, n)
            assert unpair(c) == (x, n)


def test_unpair_round_trip_prefix():
    for c in range(100_000):
        x, n = unpair(c)
        assert pair(x, n) == c


def test_pair_overflow():
    with pytest.raises(OverflowError):
        pair(2**33, 2**33)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_pair_unpair_inverse(x, n):
    assert unpair(pair(x, n)) == (x, n)


def test_str_num_identification():
    assert str_to_num("000") == 8
    assert str_to_num("") == 1
    assert str_to_num("10") == 6
    assert num_to_str(8) == "000"
    with pytest.raises(ValueError):
        num_to_str(0)


@given(st.integers(1, 10**6))
def test_num_str_round_trip(v):
    assert str_to_num(num_to_str(v)) == v


@given(st.text(alphabet="01", max_size=30))
def test_str_num_round_trip(bits):
    assert num_to_str(str_to_num(bits)) == bits


def test_ce_log_monotone():
    log = MembershipEventLog(CE, horizon=10)
    log.insert(3, 2)
    log.insert(5, 7)
    assert not log.membership_at(3, 1)
    assert log.membership_at(3, 2)
    assert log.membership_at(3, 10)
    for s in range(10):
        assert log.members(s, 100) <= log.members(s + 1, 100)


def test_coce_log_antitone():
    log = MembershipEventLog(COCE, horizon=10)
    log.remove(4, 3)
    assert log.membership_at(4, 2)
    assert not log.membership_at(4, 3)
    assert log.membership_at(9, 10)
    for s in range(10):
        assert log.members(s + 1, 50) <= log.members(s, 50)


def test_dce_log_one_alternation():
    log = MembershipEventLog(DCE, horizon=10)
    log.insert(2, 1)
    log.remove(2, 4)
    assert not log.membership_at(2, 0)
    assert log.membership_at(2, 3)
    assert not log.membership_at(2, 4)
    with pytest.raises(EventLogError):
        log.insert(2, 6)


def test_rejects_stage_disorder():
    log = MembershipEventLog(DCE, horizon=10)
    log.insert(1, 5)
    with pytest.raises(EventLogError):
        log.remove(1, 5)
    with pytest.raises(EventLogError):
        log.remove(1, 3)


def test_rejects_mode_violations():
    ce = MembershipEventLog(CE, horizon=10)
    ce.insert(0, 0)
    with pytest.raises(EventLogError):
        ce.remove(0, 5)
    coce = MembershipEventLog(COCE, horizon=10)
    with pytest.raises(EventLogError):
        coce.insert(1, 1)


def test_rejects_horizon_overflow():
    log = MembershipEventLog(CE, horizon=4)
    with pytest.raises(EventLogError):
        log.insert(0, 5)
    log.insert(0, 4)
    with pytest.raises(EventLogError):
        log.membership_at(0, 5)


@given(
    st.lists(
        st.tuples(st.integers(0, 20), st.integers(0, 20)),
        max_size=40,
    )
)
def test_from_events_validates_or_builds(pairs):
    # Duplicate inserts of one element must be rejected; distinct ones are fine.
    events = [(e, s, INSERT) for e, s in pairs]
    elems = [e for e, _ in pairs]
    if len(set(elems)) == len(elems):
        log = MembershipEventLog.from_events(events, CE, horizon=20)
        for e, s in pairs:
            assert log.membership_at(e, s)
    else:
        with pytest.raises(EventLogError):
            MembershipEventLog.from_events(events, CE, horizon=20)


def test_injected_corruption_rejected():
    good = [(1, 0, INSERT), (1, 3, REMOVE), (2, 1, INSERT)]
    MembershipEventLog.from_events(good, DCE, horizon=5)
    bad_polarity = [(1, 0, INSERT), (1, 3, INSERT)]
    with pytest.raises(EventLogError):
        MembershipEventLog.from_events(bad_polarity, DCE, horizon=5)
    bad_order = [(1, 2, REMOVE), (1, 3, INSERT)]
    with pytest.raises(EventLogError):
        MembershipEventLog.from_events(bad_order, DCE, horizon=5)


def test_family_single_code():
    base = MembershipEventLog(CE, horizon=0)
    fam = CodedFamily(base)
    fam.insert(5, 2, 0)
    assert fam.column(2, 0) == {5}
    assert fam.column(0, 0) == set()


def test_family_round_trip_random_columns():
    import random

    rng = random.Random(7)
    for _ in range(100):
        cols = [
            {rng.randrange(200) for _ in range(rng.randrange(12))} for _ in range(4)
        ]
        fam = CodedFamily.from_columns(cols, CE, horizon=0)
        for n, col in enumerate(cols):
            assert fam.column(n, 0) == col


def test_family_coce_columns():
    fam = CodedFamily.from_columns(
        [set(range(10)), {x for x in range(10) if x % 2 == 0}],
        COCE,
        horizon=0,
        element_window=10,
    )
    assert fam.column(0, 0) == set(range(10))
    assert fam.column(1, 0) == {0, 2, 4, 6, 8}


def test_family_column_range_errors():
    fam = CodedFamily.from_columns([{1}], CE, horizon=2)
    with pytest.raises(IndexError):
        fam.column(1, 0)
    with pytest.raises(IndexError):
        fam.column(0, 3)
