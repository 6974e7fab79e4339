import pytest

from towerlab.machine import (
    MachineResult,
    ProgramError,
    bit_probe_program,
    oracle_code,
    parse_program,
    run_machine,
)

CONST_ONE = "INC 1\nHALT"
LOOP_FOREVER = "spin:\nINC 3\nDECJZ 4 spin"
SUCCESSOR = """
copy:
DECJZ 0 done
INC 1
DECJZ 4 copy
done:
INC 1
HALT
"""


def test_const_one_ignores_input():
    prog = parse_program(CONST_ONE)
    assert run_machine(prog, 9, fuel=10) == MachineResult(True, 1, 2)


def test_infinite_loop_never_halts():
    prog = parse_program(LOOP_FOREVER)
    for fuel in (0, 1, 10, 1000):
        assert not run_machine(prog, 0, fuel).halted


def test_successor_program():
    prog = parse_program(SUCCESSOR)
    for x in (0, 1, 5, 30):
        res = run_machine(prog, x, fuel=5 * x + 10)
        assert res.halted and res.output == x + 1


def test_halt_stable_under_more_fuel():
    prog = parse_program(SUCCESSOR)
    first = run_machine(prog, 7, fuel=100)
    assert first.halted
    again = run_machine(prog, 7, fuel=10_000)
    assert (again.output, again.steps) == (first.output, first.steps)


def test_determinism():
    prog = parse_program(SUCCESSOR)
    runs = [run_machine(prog, 12, fuel=200) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_bad_label_rejected():
    with pytest.raises(ProgramError):
        parse_program("DECJZ 0 nowhere")
    with pytest.raises(ProgramError):
        parse_program("DECJZ 0 99")
    with pytest.raises(ProgramError):
        parse_program("JMP 0")
    with pytest.raises(ProgramError):
        parse_program("INC 9")


def test_oracle_code_round_trip():
    assert oracle_code("") == 1
    assert oracle_code("1") == 0b11
    assert oracle_code("10") == 0b101  # reversed "01" under the sentinel
    code = oracle_code("0110")
    assert [(code >> i) & 1 for i in range(4)] == [0, 1, 1, 0]


@pytest.mark.parametrize("k", [0, 1, 3])
def test_bit_probe_reads_oracle(k):
    prog = parse_program(bit_probe_program(k))
    for tau in ("0101", "1010", "1111", "0000"):
        res = run_machine(prog, 0, fuel=2000, oracle_code=oracle_code(tau))
        assert res.halted
        assert res.output == int(tau[k])


@pytest.mark.parametrize("k", [0, 2, 5])
def test_bit_probe_diverges_beyond_prefix(k):
    prog = parse_program(bit_probe_program(k))
    for tau in ("", "0" * k):
        res = run_machine(prog, 0, fuel=5000, oracle_code=oracle_code(tau))
        assert not res.halted
