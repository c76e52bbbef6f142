"""Toy universal-style machines and exhaustive, budgeted complexity tables.

Two inner machines V are defined bit-exactly (docs/machine.md):

* plain: mode ``00`` prints the rest of the program; mode ``01`` runs the
  interpreter over the whole program.
* prefix-free: mode ``00`` is an Elias-gamma length header plus that many
  literal bits; mode ``01`` runs the interpreter, fetching program bits on
  demand; mode ``10`` (conditional runs only) reads exactly aux[0] literal
  bits. A program is in the domain only if the machine halts having read
  exactly its bits, which makes the domain an antichain.

Reported values are for the wrapped machine U with U(1p) = V(p) and
U(0p) = 0^{|V(p)|}, so that value(0^n) <= value(x) whenever |x| = n. The
budget's program-length bound applies to U programs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .bits import llex_key, strings_of_length
from .errors import BudgetExceeded, CoverageGap, NonPrefixFreeDomain

MAX_PROGRAM_LENGTH = 24
MAX_STEPS = 1 << 16
OUTPUT_CAP = 64

# opcodes
EMIT0, EMIT1, PUSH, DJ, DUP, HALT, READ, AUX = range(8)
OPCODE_NAMES = ("EMIT0", "EMIT1", "PUSH", "DJ", "DUP", "HALT", "READ", "AUX")
_HAS_IMMEDIATE = {PUSH, DUP, AUX}


class MachineKind(str, Enum):
    PLAIN = "plain"
    PREFIX_FREE = "prefix"


class Status(Enum):
    HALT = "halt"
    NEED = "need-input"
    FAIL = "undefined"
    TIMEOUT = "timeout"
    AUX = "needs-aux"


@dataclass(frozen=True)
class Budget:
    max_program_length: int = 18
    max_steps: int = 512

    def __post_init__(self):
        if not 1 <= self.max_program_length <= MAX_PROGRAM_LENGTH:
            raise BudgetExceeded(f"program length bound must be in [1, {MAX_PROGRAM_LENGTH}]")
        if not 1 <= self.max_steps <= MAX_STEPS:
            raise BudgetExceeded(f"step bound must be in [1, {MAX_STEPS}]")


DEFAULT_BUDGET = Budget()


@dataclass
class RunResult:
    status: Status
    output: str = ""
    consumed: int = 0
    steps: int = 0


class _Stop(Exception):
    def __init__(self, status: Status):
        self.status = status


class _Tape:
    """Program bits read left to right; running out means NEED (prefix-free) or end (plain)."""

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def read(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise _Stop(Status.NEED)
        s = self.bits[self.pos:self.pos + k]
        self.pos += k
        return s


def _interpret(tape: _Tape, plain: bool, aux, max_steps: int) -> RunResult:
    cells: list[tuple[int, int]] = []
    stack: list[list[int]] = []
    out: list[str] = []
    out_len = 0
    pc = 0
    steps = 0
    try:
        while True:
            if pc == len(cells):
                if plain and tape.pos == len(tape.bits):
                    return RunResult(Status.HALT, "".join(out), tape.pos, steps)
                try:
                    op = int(tape.read(3), 2)
                    arg = 0
                    if op in _HAS_IMMEDIATE:
                        arg = int(tape.read(3), 2)
                    elif op == READ:
                        arg = int(tape.read(1))
                except _Stop:
                    if plain:
                        return RunResult(Status.FAIL, consumed=tape.pos, steps=steps)
                    raise
                cells.append((op, arg))
            op, arg = cells[pc]
            steps += 1
            if steps > max_steps:
                return RunResult(Status.TIMEOUT, consumed=tape.pos, steps=steps)
            pc += 1
            if op == EMIT0 or op == EMIT1:
                out.append("0" if op == EMIT0 else "1")
                out_len += 1
            elif op == READ:
                out.append(str(arg))
                out_len += 1
            elif op == PUSH:
                stack.append([arg + 1, pc])
            elif op == AUX:
                if aux is None:
                    return RunResult(Status.AUX, consumed=tape.pos, steps=steps)
                if arg >= len(aux):
                    return RunResult(Status.FAIL, consumed=tape.pos, steps=steps)
                stack.append([aux[arg], pc])
            elif op == DJ:
                if not stack:
                    return RunResult(Status.FAIL, consumed=tape.pos, steps=steps)
                top = stack[-1]
                top[0] -= 1
                if top[0] > 0:
                    pc = top[1]
                else:
                    stack.pop()
            elif op == DUP:
                if out_len == 0:
                    out.append("0" * (arg + 1))
                    out_len = arg + 1
                else:
                    cur = "".join(out)
                    out = [cur * (arg + 2)]
                    out_len *= arg + 2
            elif op == HALT:
                if plain and tape.pos != len(tape.bits):
                    return RunResult(Status.FAIL, consumed=tape.pos, steps=steps)
                return RunResult(Status.HALT, "".join(out), tape.pos, steps)
            if out_len > OUTPUT_CAP:
                return RunResult(Status.FAIL, consumed=tape.pos, steps=steps)
    except _Stop as stop:
        return RunResult(stop.status, consumed=tape.pos, steps=steps)


def run_inner(kind: MachineKind, program: str, aux=None, max_steps: int = MAX_STEPS) -> RunResult:
    """Run the inner machine V on ``program``.

    For the prefix-free machine a HALT result means "halts after reading
    ``consumed`` bits"; ``program`` is in the domain iff consumed == len(program).
    """
    plain = kind == MachineKind.PLAIN
    tape = _Tape(program)
    try:
        mode = tape.read(2)
    except _Stop:
        return RunResult(Status.FAIL if plain else Status.NEED)
    if mode == "00":
        if plain:
            payload = program[2:]
            if len(payload) > max_steps:
                return RunResult(Status.TIMEOUT, consumed=len(program), steps=len(payload))
            return RunResult(Status.HALT, payload, len(program), len(payload))
        try:
            z = 0
            while tape.read(1) == "0":
                z += 1
            m = int("1" + tape.read(z), 2) - 1
            if m > OUTPUT_CAP:
                return RunResult(Status.FAIL, consumed=tape.pos)
            payload = tape.read(m)
        except _Stop:
            return RunResult(Status.NEED, consumed=tape.pos)
        steps = tape.pos - 2
        if steps > max_steps:
            return RunResult(Status.TIMEOUT, consumed=tape.pos, steps=steps)
        return RunResult(Status.HALT, payload, tape.pos, steps)
    if mode == "01":
        return _interpret(tape, plain, aux, max_steps)
    if mode == "10" and not plain:
        if aux is None:
            return RunResult(Status.AUX, consumed=2)
        m = aux[0]
        if m > OUTPUT_CAP or m > max_steps:
            return RunResult(Status.FAIL, consumed=2)
        try:
            payload = tape.read(m)
        except _Stop:
            return RunResult(Status.NEED, consumed=tape.pos)
        return RunResult(Status.HALT, payload, tape.pos, m)
    return RunResult(Status.FAIL, consumed=2)


def run_wrapped(kind: MachineKind, program: str, aux=None, max_steps: int = MAX_STEPS) -> str | None:
    """U(1p) = V(p), U(0p) = 0^{|V(p)|}; None when U is undefined on ``program``."""
    if not program:
        return None
    r = run_inner(kind, program[1:], aux, max_steps)
    if r.status != Status.HALT or r.consumed != len(program) - 1:
        return None
    return r.output if program[0] == "1" else "0" * len(r.output)


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class _Outputs:
    """Halting inner programs: output -> shortest (then llex-least) program."""

    best: dict = field(default_factory=dict)
    programs: list = field(default_factory=list)

    def add(self, program: str, output: str):
        self.programs.append(program)
        cur = self.best.get(output)
        if cur is None or llex_key(program) < llex_key(cur):
            self.best[output] = program


def _enumerate_plain(max_len: int, max_steps: int, aux, roots: Sequence[str] | None, sink: _Outputs, aux_roots: list):
    if roots is None:
        candidates: Iterable[str] = (p for L in range(2, max_len + 1) for p in strings_of_length(L))
    else:
        candidates = roots
    for p in candidates:
        r = run_inner(MachineKind.PLAIN, p, aux, max_steps)
        if r.status == Status.HALT:
            sink.add(p, r.output)
        elif r.status == Status.AUX:
            aux_roots.append(p)


def _enumerate_prefix(max_len: int, max_steps: int, aux, roots: Sequence[str], sink: _Outputs, aux_roots: list):
    stack = list(reversed(roots))
    while stack:
        p = stack.pop()
        r = run_inner(MachineKind.PREFIX_FREE, p, aux, max_steps)
        if r.status == Status.HALT:
            if r.consumed == len(p):
                sink.add(p, r.output)
        elif r.status == Status.NEED:
            if len(p) < max_len:
                stack.append(p + "1")
                stack.append(p + "0")
        elif r.status == Status.AUX:
            aux_roots.append(p)


def _inner_outputs(kind: MachineKind, budget: Budget, aux=None, roots=None):
    sink = _Outputs()
    aux_roots: list[str] = []
    max_len = budget.max_program_length - 1
    if kind == MachineKind.PLAIN:
        _enumerate_plain(max_len, budget.max_steps, aux, roots, sink, aux_roots)
    else:
        _enumerate_prefix(max_len, budget.max_steps, aux, roots if roots is not None else [""], sink, aux_roots)
    return sink, aux_roots


def _wrap(best: dict) -> dict:
    """Apply the normalising wrapper to inner shortest programs."""
    values: dict[str, tuple[int, str]] = {}

    def offer(x, prog):
        cur = values.get(x)
        cand = (len(prog), prog)
        if cur is None or llex_key(prog) < llex_key(cur[1]):
            values[x] = cand

    for x, p in best.items():
        offer(x, "1" + p)
    shortest_by_len: dict[int, str] = {}
    for x, p in best.items():
        cur = shortest_by_len.get(len(x))
        if cur is None or llex_key(p) < llex_key(cur):
            shortest_by_len[len(x)] = p
    for n, p in shortest_by_len.items():
        offer("0" * n, "0" + p)
    return values


@dataclass
class ComplexityTable:
    kind: MachineKind
    budget: Budget
    values: dict  # string -> (value, witness U-program)
    cond: dict = field(default_factory=dict)  # aux tuple -> {string: (value, witness)}
    tags: dict = field(default_factory=dict)  # tag -> {n: aux tuple}
    normalized: bool = True

    def value(self, x: str) -> int:
        try:
            return self.values[x][0]
        except KeyError:
            raise CoverageGap(f"{self.kind.value} table has no value for {x!r}") from None

    def witness(self, x: str) -> str:
        return self.values[x][1]

    def has(self, x: str) -> bool:
        return x in self.values

    def length_value(self, n: int) -> int:
        """K(n) or C(n), read off the string 0^n."""
        return self.value("0" * n)

    def cond_value(self, x: str, tag: str, n: int | None = None) -> int:
        n = len(x) if n is None else n
        try:
            key = self.tags[tag][n]
            return self.cond[key][x][0]
        except KeyError:
            raise CoverageGap(f"no conditional value for {x!r} given {tag} at n={n}") from None

    @property
    def coverage(self) -> int:
        """Largest n such that every string of length <= n has a value."""
        n = 0
        while n <= OUTPUT_CAP and all(s in self.values for s in strings_of_length(n)):
            n += 1
        return n - 1

    def min_value(self, n: int) -> int:
        return min(self.value(x) for x in strings_of_length(n))

    def max_value(self, n: int) -> int:
        return max(self.value(x) for x in strings_of_length(n))

    def rows(self):
        for x in sorted(self.values, key=llex_key):
            v, w = self.values[x]
            yield x, v, w


CONDITION_TAGS = ("n", "(n, C(n))", "(n, K(n))", "d")


def _resolve_tag(tag: str, n: int, plain_vals: dict | None, prefix_vals: dict | None) -> tuple:
    if tag in ("n", "d"):
        return (n,)
    if tag == "(n, C(n))":
        return (n, plain_vals["0" * n][0])
    if tag == "(n, K(n))":
        return (n, prefix_vals["0" * n][0])
    raise ValueError(f"unknown condition tag {tag!r}")


def enumerate_table(kind: MachineKind | str, budget: Budget = DEFAULT_BUDGET,
                    conditions: Sequence[str] = (), cond_max_n: int = 8,
                    _other: "ComplexityTable | None" = None) -> ComplexityTable:
    """Exhaustive table of U-complexities for every output of a program within budget.

    Conditional values are computed for each tag in ``conditions`` and each
    n <= cond_max_n by re-running only the programs that touch the
    auxiliary tape; all others produce the same output under any condition.
    """
    kind = MachineKind(kind)
    sink, aux_roots = _inner_outputs(kind, budget)
    if kind == MachineKind.PREFIX_FREE:
        _check_antichain(sink.programs)
    table = ComplexityTable(kind, budget, _wrap(sink.best))
    if not conditions:
        return table

    need_plain = any(t == "(n, C(n))" for t in conditions)
    need_prefix = any(t == "(n, K(n))" for t in conditions)
    plain_vals = prefix_vals = None
    if kind == MachineKind.PLAIN:
        plain_vals = table.values
    else:
        prefix_vals = table.values
    if need_plain and plain_vals is None:
        plain_vals = (_other or enumerate_table(MachineKind.PLAIN, budget)).values
    if need_prefix and prefix_vals is None:
        prefix_vals = (_other or enumerate_table(MachineKind.PREFIX_FREE, budget)).values

    for tag in conditions:
        table.tags[tag] = {}
        for n in range(cond_max_n + 1):
            key = _resolve_tag(tag, n, plain_vals, prefix_vals)
            table.tags[tag][n] = key
            if key in table.cond:
                continue
            csink, _ = _inner_outputs(kind, budget, aux=key, roots=aux_roots)
            merged = dict(sink.best)
            for x, p in csink.best.items():
                cur = merged.get(x)
                if cur is None or llex_key(p) < llex_key(cur):
                    merged[x] = p
            table.cond[key] = _wrap(merged)
    return table


def _check_antichain(programs: list[str]) -> None:
    ps = sorted(programs)
    for a, b in zip(ps, ps[1:]):
        if b.startswith(a):
            raise NonPrefixFreeDomain(f"{a!r} and {b!r} both halt")


@dataclass
class Lab:
    """The pair of tables every analytic needs: C from ``plain``, K from ``prefix``."""

    plain: ComplexityTable
    prefix: ComplexityTable

    def C(self, x: str) -> int:
        return self.plain.value(x)

    def K(self, x: str) -> int:
        return self.prefix.value(x)


def build_lab(budget: Budget = DEFAULT_BUDGET, cond_max_n: int = 8, with_conditions: bool = True) -> Lab:
    plain = enumerate_table(MachineKind.PLAIN, budget)
    prefix = enumerate_table(MachineKind.PREFIX_FREE, budget)
    if with_conditions:
        plain = enumerate_table(MachineKind.PLAIN, budget, ("n", "d"), cond_max_n, _other=prefix)
        prefix = enumerate_table(MachineKind.PREFIX_FREE, budget, ("n", "(n, C(n))", "(n, K(n))"), cond_max_n, _other=plain)
    return Lab(plain, prefix)


# ---------------------------------------------------------------------------
# counting bounds and the triple-condition probe


@dataclass
class CountingReport:
    plain_counts: dict  # r -> #{x : C(x) < r}
    plain_ok: bool
    prefix_counts: dict  # (n, d) -> #{|x| = n : K(x) <= n + K(n) - d}
    prefix_constant: int  # smallest c with count <= 2^{n+c-d} for every (n, d)


def counting_check(lab: Lab, n: int, max_deficit: int, max_r: int = 12) -> CountingReport:
    plain_vals = [v for v, _ in lab.plain.values.values()]
    plain_counts = {r: sum(1 for v in plain_vals if v < r) for r in range(1, max_r + 1)}
    plain_ok = all(cnt <= 2 ** r - 1 for r, cnt in plain_counts.items())
    prefix_counts = {}
    c = -math.inf
    for m in range(n + 1):
        for s in strings_of_length(m):
            if not lab.prefix.has(s):
                raise CoverageGap(f"prefix table misses {s!r}")
        km = lab.prefix.length_value(m)
        vals = [lab.prefix.value(s) for s in strings_of_length(m)]
        for d in range(max_deficit + 1):
            cnt = sum(1 for v in vals if v <= m + km - d)
            prefix_counts[(m, d)] = cnt
            if cnt:
                c = max(c, math.ceil(math.log2(cnt)) - m + d)
    return CountingReport(plain_counts, plain_ok, prefix_counts, int(c) if c != -math.inf else 0)


def number_string(m: int) -> str:
    """A natural number written as 0^m (the identification used for lengths)."""
    return "0" * m


def probe_triple_condition(lab: Lab, max_n: int) -> list[tuple[int, int, int, int]]:
    """Rows (n, C(n), K(n), K(C(n) | n, K(n))) for n <= max_n; diagnostic only."""
    rows = []
    for n in range(max_n + 1):
        cn = lab.plain.length_value(n)
        kn = lab.prefix.length_value(n)
        rows.append((n, cn, kn, lab.prefix.cond_value(number_string(cn), "(n, K(n))", n)))
    return rows


# ---------------------------------------------------------------------------
# golden tables


def write_tsv(table: ComplexityTable, path: Path | str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# kind={table.kind.value} L={table.budget.max_program_length} S={table.budget.max_steps}\n")
        for x, v, w in table.rows():
            fh.write(f"{x}\t{v}\t{w}\n")


def tsv_text(table: ComplexityTable) -> str:
    lines = [f"# kind={table.kind.value} L={table.budget.max_program_length} S={table.budget.max_steps}"]
    lines += [f"{x}\t{v}\t{w}" for x, v, w in table.rows()]
    return "\n".join(lines) + "\n"


def read_tsv(path: Path | str) -> ComplexityTable:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        meta = dict(kv.split("=") for kv in header.lstrip("# ").split())
        values = {}
        for line in fh:
            x, v, w = line.rstrip("\n").split("\t")
            values[x] = (int(v), w)
    budget = Budget(int(meta["L"]), int(meta["S"]))
    return ComplexityTable(MachineKind(meta["kind"]), budget, values)


GOLDEN_DIR = Path(__file__).parent / "data"


def golden_path(kind: MachineKind | str) -> Path:
    return GOLDEN_DIR / f"golden_{MachineKind(kind).value}.tsv"


def load_golden(kind: MachineKind | str) -> ComplexityTable:
    return read_tsv(golden_path(kind))
