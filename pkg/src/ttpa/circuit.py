"""Boolean circuits as flat netlists.

A circuit is an immutable list of gates in topological order (every gate
argument points at an earlier gate), a fixed input width, and one output
gate.  INPUT gates carry a wire index, CONST gates carry 0/1, and
AND/OR gates have unbounded fan-in (>= 1).

Size counts AND/OR/NOT gates.  Depth counts AND/OR layers on the longest
input-to-output path; NOT gates are free, i.e. negations are treated as
pushed onto literals.  Multi-bit values are big-endian throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import CircuitFormatError, InputShapeError

INPUT = "INPUT"
CONST = "CONST"
NOT = "NOT"
AND = "AND"
OR = "OR"

_OPS = (INPUT, CONST, NOT, AND, OR)

# widths where 2^width bitmask tricks stay cheap
_MAX_EXHAUSTIVE_WIDTH = 20
_MAX_DNF_WIDTH = 16


class Gate(NamedTuple):
    op: str
    args: tuple[int, ...] = ()
    aux: int = -1  # input wire for INPUT, value for CONST, unused otherwise


@dataclass(frozen=True, slots=True)
class Circuit:
    input_width: int
    gates: tuple[Gate, ...]
    output: int

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True, slots=True)
class CircuitMetrics:
    size: int   # number of AND/OR/NOT gates
    depth: int  # AND/OR layers on the longest path; NOT gates free


class CircuitBuilder:
    """Append-only netlist builder; gate ids are list positions.

    Input gates for all wires are created up front, so wire w is gate w.
    NOT and CONST gates are deduplicated (they are pure and cheap to
    share); AND/OR gates are not.
    """

    def __init__(self, input_width: int):
        if input_width < 0:
            raise InputShapeError(f"input width must be >= 0, got {input_width}")
        self._width = input_width
        self._gates: list[Gate] = [Gate(INPUT, (), w) for w in range(input_width)]
        self._not_cache: dict[int, int] = {}
        self._const_cache: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._gates)

    def input(self, wire: int) -> int:
        if not 0 <= wire < self._width:
            raise InputShapeError(f"input wire {wire} outside width {self._width}")
        return wire

    def const(self, value: int) -> int:
        if value not in (0, 1):
            raise CircuitFormatError(f"CONST value must be 0 or 1, got {value!r}")
        got = self._const_cache.get(value)
        if got is None:
            got = self._append(Gate(CONST, (), value))
            self._const_cache[value] = got
        return got

    def not_(self, arg: int) -> int:
        self._check_arg(arg)
        got = self._not_cache.get(arg)
        if got is None:
            got = self._append(Gate(NOT, (arg,)))
            self._not_cache[arg] = got
        return got

    def and_(self, args: Iterable[int]) -> int:
        return self._append(Gate(AND, self._check_fanin(args)))

    def or_(self, args: Iterable[int]) -> int:
        return self._append(Gate(OR, self._check_fanin(args)))

    def literal(self, wire: int, positive: bool) -> int:
        w = self.input(wire)
        return w if positive else self.not_(w)

    def build(self, output: int) -> Circuit:
        self._check_arg(output)
        return Circuit(self._width, tuple(self._gates), output)

    def _append(self, gate: Gate) -> int:
        self._gates.append(gate)
        return len(self._gates) - 1

    def _check_arg(self, arg: int) -> None:
        if not 0 <= arg < len(self._gates):
            raise CircuitFormatError(f"gate argument {arg} not yet defined")

    def _check_fanin(self, args: Iterable[int]) -> tuple[int, ...]:
        t = tuple(args)
        if not t:
            raise CircuitFormatError("AND/OR gates need fan-in >= 1")
        for a in t:
            self._check_arg(a)
        return t


def _eval_packed(circ: Circuit, cols: Sequence[int], mask: int) -> int:
    """Forward pass with one machine word (or bigint) per gate.

    cols[w] holds the bits of wire w across all evaluation points; the
    return value holds the output bit for each point.
    """
    vals: list[int] = []
    append = vals.append
    for op, args, aux in circ.gates:
        if op == AND:
            v = vals[args[0]]
            for a in args[1:]:
                v &= vals[a]
        elif op == OR:
            v = vals[args[0]]
            for a in args[1:]:
                v |= vals[a]
        elif op == NOT:
            v = vals[args[0]] ^ mask
        elif op == INPUT:
            v = cols[aux]
        else:
            v = mask if aux else 0
        append(v)
    return vals[circ.output]


def pack_rows(rows: np.ndarray) -> list[int]:
    """Pack a (points, width) bit matrix into one int per wire (column)."""
    arr = np.asarray(rows, dtype=np.uint8)
    if arr.ndim != 2:
        raise InputShapeError("expected a 2-d bit matrix")
    return [
        int.from_bytes(np.packbits(arr[:, w], bitorder="little").tobytes(), "little")
        for w in range(arr.shape[1])
    ]


def _unpack_bits(value: int, count: int) -> np.ndarray:
    buf = np.frombuffer(value.to_bytes((count + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(buf, bitorder="little")[:count]


def eval_circuit(circ: Circuit, x: Sequence[int]) -> int:
    """Evaluate on a single input; x must hold exactly input_width 0/1 values."""
    if len(x) != circ.input_width:
        raise InputShapeError(
            f"input length {len(x)} != circuit width {circ.input_width}"
        )
    cols = []
    for b in x:
        b = int(b)
        if b not in (0, 1):
            raise InputShapeError(f"input bits must be 0/1, got {b!r}")
        cols.append(b)
    return _eval_packed(circ, cols, 1)


def eval_on_rows(circ: Circuit, rows: np.ndarray) -> np.ndarray:
    """Evaluate on every row of a (points, width) bit matrix at once."""
    arr = np.asarray(rows, dtype=np.uint8)
    if arr.ndim != 2 or arr.shape[1] != circ.input_width:
        raise InputShapeError(
            f"row matrix shape {arr.shape} does not match circuit width "
            f"{circ.input_width}"
        )
    m = arr.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    out = _eval_packed(circ, pack_rows(arr), (1 << m) - 1)
    return _unpack_bits(out, m)


def exhaustive_columns(width: int) -> list[int]:
    """Packed wire columns enumerating all 2^width assignments.

    Bit i of column w is the value of wire w in assignment i, where
    assignment i sets the wires to the big-endian bits of i.
    """
    if not 1 <= width <= _MAX_EXHAUSTIVE_WIDTH:
        raise InputShapeError(f"exhaustive enumeration supports width 1..{_MAX_EXHAUSTIVE_WIDTH}")
    total = 1 << width
    cols = []
    for w in range(width):
        block = 1 << (width - 1 - w)
        period = 2 * block
        pattern = ((1 << block) - 1) << block
        reps = total // period
        cols.append(pattern * (((1 << (period * reps)) - 1) // ((1 << period) - 1)))
    return cols


def truth_table(circ: Circuit) -> int:
    """Output bits over all 2^width assignments, packed LSB-first by assignment."""
    width = circ.input_width
    return _eval_packed(circ, exhaustive_columns(width), (1 << (1 << width)) - 1)


def circuits_equivalent(a: Circuit, b: Circuit) -> bool:
    """Exact equivalence by exhaustive truth table (widths must match)."""
    if a.input_width != b.input_width:
        return False
    return truth_table(a) == truth_table(b)


def circuit_metrics(circ: Circuit) -> CircuitMetrics:
    depths = [0] * len(circ.gates)
    size = 0
    for i, (op, args, _aux) in enumerate(circ.gates):
        if op == AND or op == OR:
            size += 1
            d = 0
            for a in args:
                if depths[a] > d:
                    d = depths[a]
            depths[i] = d + 1
        elif op == NOT:
            size += 1
            depths[i] = depths[args[0]]
    return CircuitMetrics(size=size, depth=depths[circ.output])


def indicator_circuit(value: int, width: int) -> Circuit:
    """Conjunction of literals that fires exactly on the big-endian encoding of value."""
    if width < 1:
        raise InputShapeError("indicator needs width >= 1")
    if not 0 <= value < (1 << width):
        raise InputShapeError(f"value {value} does not fit in {width} bits")
    b = CircuitBuilder(width)
    args = [b.literal(w, bool((value >> (width - 1 - w)) & 1)) for w in range(width)]
    return b.build(b.and_(args))


def append_minterm_dnf(b: CircuitBuilder, table: Sequence[int], wires: Sequence[int]) -> int:
    """Append the canonical minterm DNF of a truth table onto existing wires.

    table[a] is the function value on the assignment whose big-endian
    encoding is a; wires maps the function's variables onto builder
    wires.  Returns the output gate id (a CONST 0 for the empty DNF).
    """
    nvars = len(wires)
    if len(table) != (1 << nvars):
        raise InputShapeError(
            f"table length {len(table)} != 2^{nvars}"
        )
    terms = []
    for a, v in enumerate(table):
        if v not in (0, 1):
            raise InputShapeError("truth table entries must be 0/1")
        if v:
            lits = [
                b.literal(wires[t], bool((a >> (nvars - 1 - t)) & 1))
                for t in range(nvars)
            ]
            terms.append(b.and_(lits) if len(lits) > 1 else lits[0])
    if not terms:
        return b.const(0)
    return b.or_(terms)


def dnf_of_function(table: Sequence[int], width: int) -> Circuit:
    """Canonical minterm DNF of an explicit truth table (width <= 16)."""
    if not 1 <= width <= _MAX_DNF_WIDTH:
        raise InputShapeError(f"dnf_of_function supports width 1..{_MAX_DNF_WIDTH}")
    b = CircuitBuilder(width)
    return b.build(append_minterm_dnf(b, table, list(range(width))))


def table_of_function(fn: Callable[[tuple[int, ...]], int], width: int) -> list[int]:
    """Tabulate a python predicate over all big-endian assignments."""
    table = []
    for a in range(1 << width):
        bits = tuple((a >> (width - 1 - t)) & 1 for t in range(width))
        table.append(int(fn(bits)) & 1)
    return table


def _prune_dead(circ: Circuit) -> Circuit:
    """Rebuild keeping only gates reachable from the output."""
    needed = bytearray(len(circ.gates))
    needed[circ.output] = 1
    for i in range(len(circ.gates) - 1, -1, -1):
        if needed[i]:
            for a in circ.gates[i].args:
                needed[a] = 1
    b = CircuitBuilder(circ.input_width)
    remap = [0] * len(circ.gates)
    for i, (op, args, aux) in enumerate(circ.gates):
        if not needed[i]:
            continue
        if op == INPUT:
            remap[i] = b.input(aux)
        elif op == CONST:
            remap[i] = b.const(aux)
        elif op == NOT:
            remap[i] = b.not_(remap[args[0]])
        elif op == AND:
            remap[i] = b.and_(remap[a] for a in args)
        else:
            remap[i] = b.or_(remap[a] for a in args)
    return b.build(remap[circ.output])


def constant_fold(circ: Circuit) -> Circuit:
    """Propagate constants, drop dead gates, and collapse trivial gates.

    The result is semantically equivalent and never larger (in size or
    depth).  Constants absorbed by AND/OR disappear; single-argument
    AND/OR become aliases; unreachable gates are pruned, including ones
    orphaned by the propagation itself.
    """
    needed = bytearray(len(circ.gates))
    needed[circ.output] = 1
    for i in range(len(circ.gates) - 1, -1, -1):
        if needed[i]:
            for a in circ.gates[i].args:
                needed[a] = 1

    b = CircuitBuilder(circ.input_width)
    # each needed gate folds to ("c", bit) or ("g", new id)
    folded: list[tuple[str, int] | None] = [None] * len(circ.gates)
    for i, (op, args, aux) in enumerate(circ.gates):
        if not needed[i]:
            continue
        if op == INPUT:
            folded[i] = ("g", b.input(aux))
        elif op == CONST:
            folded[i] = ("c", aux)
        elif op == NOT:
            kind, v = folded[args[0]]
            folded[i] = ("c", 1 - v) if kind == "c" else ("g", b.not_(v))
        else:
            absorb = 0 if op == AND else 1
            new_args: list[int] = []
            seen: set[int] = set()
            dead = False
            for a in args:
                kind, v = folded[a]
                if kind == "c":
                    if v == absorb:
                        folded[i] = ("c", absorb)
                        dead = True
                        break
                elif v not in seen:
                    seen.add(v)
                    new_args.append(v)
            if dead:
                continue
            if not new_args:
                folded[i] = ("c", 1 - absorb)
            elif len(new_args) == 1:
                folded[i] = ("g", new_args[0])
            else:
                folded[i] = ("g", b.and_(new_args) if op == AND else b.or_(new_args))

    kind, v = folded[circ.output]
    # A gate emitted early can be orphaned when its consumer later absorbs
    # to a constant, so a final liveness pass is required for idempotence.
    return _prune_dead(b.build(b.const(v) if kind == "c" else v))


def circuit_to_json(circ: Circuit) -> dict:
    gates = []
    for i, (op, args, aux) in enumerate(circ.gates):
        g: dict = {"id": i, "op": op, "args": list(args)}
        if op == INPUT:
            g["input_index"] = aux
        elif op == CONST:
            g["value"] = aux
        gates.append(g)
    return {"input_width": circ.input_width, "gates": gates, "output": circ.output}


def circuit_dumps(circ: Circuit) -> str:
    """Canonical JSON netlist text (stable key order, no whitespace)."""
    return json.dumps(circuit_to_json(circ), sort_keys=True, separators=(",", ":"))


def circuit_from_json(obj: dict) -> Circuit:
    try:
        width = int(obj["input_width"])
        raw_gates = obj["gates"]
        output = int(obj["output"])
    except (KeyError, TypeError, ValueError) as e:
        raise CircuitFormatError(f"netlist missing or malformed field: {e}") from e
    if width < 0:
        raise CircuitFormatError("input_width must be >= 0")
    gates: list[Gate] = []
    for pos, g in enumerate(raw_gates):
        if int(g.get("id", -1)) != pos:
            raise CircuitFormatError(f"gate ids must be dense from 0; got {g.get('id')!r} at {pos}")
        op = g.get("op")
        if op not in _OPS:
            raise CircuitFormatError(f"unknown op {op!r}")
        args = tuple(int(a) for a in g.get("args", ()))
        for a in args:
            if not 0 <= a < pos:
                raise CircuitFormatError(f"gate {pos} argument {a} must point at an earlier gate")
        if op == INPUT:
            aux = int(g.get("input_index", -1))
            if args or not 0 <= aux < width:
                raise CircuitFormatError(f"INPUT gate {pos} malformed")
        elif op == CONST:
            aux = int(g.get("value", -1))
            if args or aux not in (0, 1):
                raise CircuitFormatError(f"CONST gate {pos} malformed")
        elif op == NOT:
            aux = -1
            if len(args) != 1:
                raise CircuitFormatError(f"NOT gate {pos} needs exactly one argument")
        else:
            aux = -1
            if not args:
                raise CircuitFormatError(f"{op} gate {pos} needs fan-in >= 1")
        gates.append(Gate(op, args, aux))
    if not 0 <= output < len(gates):
        raise CircuitFormatError("output gate id out of range")
    return Circuit(width, tuple(gates), output)


def circuit_loads(text: str) -> Circuit:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitFormatError(f"netlist is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise CircuitFormatError("netlist JSON must be an object")
    return circuit_from_json(obj)
