"""Fuel-bounded counter machine: the concrete substrate behind machine-backed
listings and oracle functionals.

Instructions: INC r | DECJZ r target | HALT, over 8 registers.  Input arrives
in register 0, output is register 1 at halt.  Targets may be numeric
instruction indices or symbolic labels declared as "name:" lines.

Oracle convention: a bit-string prefix tau is passed in register 2 as the
number whose binary expansion is 1 followed by reversed(tau), so bit i of tau
is the i-th low bit of the register.  A program that needs a bit beyond the
prefix simply never halts, which the fuel bound turns into a pending verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

NUM_REGISTERS = 8

INC = "INC"
DECJZ = "DECJZ"
HALT = "HALT"


class ProgramError(ValueError):
    """Malformed program text: bad opcode, register, or jump target."""


@dataclass(frozen=True)
class Instruction:
    op: str
    reg: int = 0
    target: int = 0


@dataclass(frozen=True)
class MachineResult:
    halted: bool
    output: int = 0
    steps: int = 0


OUT_OF_FUEL = MachineResult(halted=False)


def parse_program(text: str) -> tuple[Instruction, ...]:
    """Parse and validate program text; raises ProgramError on any defect."""
    labels: dict[str, int] = {}
    raw: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.endswith(":"):
            name = stripped[:-1].strip()
            if not name or name in labels:
                raise ProgramError(f"line {lineno}: bad or duplicate label")
            labels[name] = len(raw)
            continue
        raw.append((lineno, stripped.split()))

    program: list[Instruction] = []
    for lineno, tokens in raw:
        op = tokens[0].upper()
        if op == HALT:
            if len(tokens) != 1:
                raise ProgramError(f"line {lineno}: HALT takes no operands")
            program.append(Instruction(HALT))
        elif op == INC:
            if len(tokens) != 2:
                raise ProgramError(f"line {lineno}: INC takes one register")
            program.append(Instruction(INC, _reg(tokens[1], lineno)))
        elif op == DECJZ:
            if len(tokens) != 3:
                raise ProgramError(f"line {lineno}: DECJZ takes register and target")
            if tokens[2].lstrip("-").isdigit():
                target = int(tokens[2])
            elif tokens[2] in labels:
                target = labels[tokens[2]]
            else:
                raise ProgramError(f"line {lineno}: unknown label {tokens[2]!r}")
            if not 0 <= target <= len(raw):
                raise ProgramError(f"line {lineno}: jump target {target} out of range")
            program.append(Instruction(DECJZ, _reg(tokens[1], lineno), target))
        else:
            raise ProgramError(f"line {lineno}: unknown opcode {tokens[0]!r}")
    return tuple(program)


def _reg(token: str, lineno: int) -> int:
    if not token.isdigit() or not 0 <= int(token) < NUM_REGISTERS:
        raise ProgramError(f"line {lineno}: bad register {token!r}")
    return int(token)


def run_machine(
    program: tuple[Instruction, ...],
    input_value: int,
    fuel: int,
    oracle_code: int = 0,
) -> MachineResult:
    """Run deterministically for at most `fuel` steps.

    Register 0 holds the input, register 2 the oracle code (0 when absent).
    Falling off the end of the program counts as halting.
    """
    regs = [0] * NUM_REGISTERS
    regs[0] = input_value
    regs[2] = oracle_code
    pc = 0
    steps = 0
    while steps < fuel:
        if pc >= len(program):
            return MachineResult(True, regs[1], steps)
        inst = program[pc]
        steps += 1
        if inst.op == HALT:
            return MachineResult(True, regs[1], steps)
        if inst.op == INC:
            regs[inst.reg] += 1
            pc += 1
        else:  # DECJZ
            if regs[inst.reg] == 0:
                pc = inst.target
            else:
                regs[inst.reg] -= 1
                pc += 1
    return OUT_OF_FUEL


def oracle_code(tau: str) -> int:
    """Encode an oracle prefix for register 2 (reversed, 1-sentinel on top)."""
    if any(b not in "01" for b in tau):
        raise ValueError(f"not a bit string: {tau!r}")
    return int("1" + tau[::-1], 2) if tau else 1


def bit_probe_program(k: int) -> str:
    """Program text outputting oracle bit k, diverging when |tau| <= k.

    Halves the oracle code k times, then checks that at least one real bit
    remains above the sentinel before emitting the parity.
    """
    lines: list[str] = []

    def emit(s: str) -> None:
        lines.append(s)

    for i in range(k):
        # r2 = r2 // 2: repeatedly remove 2 from r2, add 1 to r3; then swap.
        emit(f"div{i}:")
        emit(f"DECJZ 2 swap{i}")
        emit(f"DECJZ 2 swapodd{i}")
        emit("INC 3")
        emit(f"DECJZ 4 div{i}")  # r4 is always 0: unconditional jump
        emit(f"swapodd{i}:")  # odd leftover: floor division drops it
        emit(f"swap{i}:")
        emit(f"DECJZ 3 done{i}")
        emit("INC 2")
        emit(f"DECJZ 4 swap{i}")
        emit(f"done{i}:")
    # Now r2 = code >> k.  Bit k exists iff r2 >= 2 (sentinel not yet reached).
    emit("DECJZ 2 spin")  # r2 == 0: beyond the prefix entirely
    emit("DECJZ 2 spin")  # r2 == 1: only the sentinel left
    # r2 held v >= 2 and now holds v - 2, which has the same parity.
    emit("parity:")
    emit("DECJZ 2 even")
    emit("DECJZ 2 odd")
    emit("DECJZ 4 parity")  # r4 stays 0: unconditional jump
    emit("odd:")
    emit("INC 1")
    emit("HALT")
    emit("even:")
    emit("HALT")
    emit("spin:")
    emit("INC 5")
    emit("DECJZ 4 spin")
    return "\n".join(lines)
