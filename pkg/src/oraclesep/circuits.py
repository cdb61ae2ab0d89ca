"""Oracle-aided quantum circuit IR, canonical byte encoding, and simulator.

A circuit is a gate list over ``num_qubits`` wires plus a declared output
split into registers A and B.  Oracle calls are gates: ``xor`` style XORs
the oracle's output into a response register, ``phase`` style multiplies
the amplitude by ``(-1)**O(x)`` for single-bit oracles.  ``MEASURE`` gates
mark segment boundaries for programs that interleave projective
measurements with unitary evolution.

The canonical encoding is length-prefixed, field-ordered binary with no
redundancy: two circuits are equal iff their encodings are equal, and
``encode(decode(b)) == b`` for every valid byte string.  Oracles are keyed
by these bytes, so the encoding is part of the semantics.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .qstate import ATOL, MAX_QUBITS, BotExtendedState, FiniteDistribution

__all__ = [
    "GateOp",
    "OracleAidedCircuit",
    "QueryTrace",
    "OracleWidthError",
    "canonical_encode",
    "canonical_decode",
    "parse_circuit",
    "format_circuit",
    "simulate",
    "simulate_traced",
    "conjugate_circuit",
    "circuit_unitary",
    "random_circuit",
]

_SQ2 = 1.0 / np.sqrt(2.0)
GATE_1Q: dict[str, np.ndarray] = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "S": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=np.complex128),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128),
    "TDG": np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=np.complex128),
}
GATE_2Q: dict[str, np.ndarray] = {
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
}
_CONJUGATE_NAME = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}


class OracleWidthError(ValueError):
    """Oracle output incompatible with the declared response register."""


@dataclass(frozen=True, eq=False)
class GateOp:
    """One circuit step: a named gate, a matrix literal, an oracle call,
    or a projective measurement marker."""

    name: str
    targets: tuple[int, ...] = ()
    matrix: np.ndarray | None = None
    style: str | None = None
    query: tuple[int, ...] = ()
    response: tuple[int, ...] = ()

    @classmethod
    def gate(cls, name: str, *targets: int) -> "GateOp":
        return cls(name=name, targets=tuple(targets))

    @classmethod
    def mat(cls, matrix: np.ndarray, *targets: int) -> "GateOp":
        m = np.asarray(matrix, dtype=np.complex128)
        name = "MAT1" if m.shape == (2, 2) else "MAT2"
        return cls(name=name, targets=tuple(targets), matrix=m)

    @classmethod
    def oracle(cls, style: str, query: tuple[int, ...], response: tuple[int, ...] = ()) -> "GateOp":
        return cls(name="ORACLE", style=style, query=tuple(query), response=tuple(response))

    @classmethod
    def measurement(cls, *targets: int) -> "GateOp":
        return cls(name="MEASURE", targets=tuple(sorted(targets)))

    @property
    def touched(self) -> tuple[int, ...]:
        if self.name == "ORACLE":
            return self.query + self.response
        return self.targets


@dataclass(frozen=True, eq=False)
class OracleAidedCircuit:
    num_qubits: int
    gates: tuple[GateOp, ...]
    split_a: tuple[int, ...] = ()
    split_b: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.split_a and not self.split_b:
            object.__setattr__(self, "split_b", tuple(range(self.num_qubits)))
        problem = _validate(self)
        if problem is not None:
            raise ValueError(f"invalid circuit: {problem}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OracleAidedCircuit):
            return NotImplemented
        return canonical_encode(self) == canonical_encode(other)

    def __hash__(self) -> int:
        return hash(canonical_encode(self))

    @property
    def oracle_calls(self) -> int:
        return sum(1 for g in self.gates if g.name == "ORACLE")

    @property
    def running_time(self) -> int:
        """Number of time steps: every gate, oracle call included, is one."""
        return len(self.gates)

    @property
    def is_segmented(self) -> bool:
        return any(g.name == "MEASURE" for g in self.gates)

    def segments(self) -> list[tuple[tuple[GateOp, ...], tuple[int, ...]]]:
        """Split ``(C_1, M_1, ..., C_T, M_T)`` form into (gates, measured) pairs."""
        if not self.gates or self.gates[-1].name != "MEASURE":
            raise ValueError("segmented form requires a trailing MEASURE marker")
        out: list[tuple[tuple[GateOp, ...], tuple[int, ...]]] = []
        current: list[GateOp] = []
        for g in self.gates:
            if g.name == "MEASURE":
                out.append((tuple(current), g.targets))
                current = []
            else:
                current.append(g)
        return out


def _validate(c: OracleAidedCircuit) -> str | None:
    n = c.num_qubits
    if not 1 <= n <= MAX_QUBITS:
        return f"qubit count {n} outside [1, {MAX_QUBITS}]"
    for g in c.gates:
        if g.name in GATE_1Q:
            if len(g.targets) != 1:
                return f"{g.name} takes one target"
        elif g.name in GATE_2Q:
            if len(g.targets) != 2 or g.targets[0] == g.targets[1]:
                return f"{g.name} takes two distinct targets"
            if g.name == "CZ" and g.targets[0] > g.targets[1]:
                return "CZ targets must be ascending"
        elif g.name == "MAT1":
            if len(g.targets) != 1 or g.matrix is None or g.matrix.shape != (2, 2):
                return "MAT1 takes one target and a 2x2 matrix"
            if not _is_unitary(g.matrix):
                return "MAT1 matrix is not unitary"
        elif g.name == "MAT2":
            if len(g.targets) != 2 or g.targets[0] == g.targets[1]:
                return "MAT2 takes two distinct targets"
            if g.matrix is None or g.matrix.shape != (4, 4) or not _is_unitary(g.matrix):
                return "MAT2 matrix is not unitary"
        elif g.name == "ORACLE":
            if g.style not in ("xor", "phase"):
                return f"unknown oracle style {g.style!r}"
            if not g.query or len(set(g.query)) != len(g.query):
                return "oracle query register must be nonempty and distinct"
            if len(set(g.response)) != len(g.response):
                return "oracle response register must be distinct"
            if set(g.query) & set(g.response):
                return "oracle query and response registers overlap"
            if g.style == "phase" and g.response:
                return "phase-style calls take no response register"
            if g.style == "xor" and not g.response:
                return "xor-style calls need a response register"
        elif g.name == "MEASURE":
            if tuple(sorted(set(g.targets))) != g.targets:
                return "MEASURE indices must be strictly increasing"
        else:
            return f"unknown gate {g.name!r}"
        if any(t < 0 or t >= n for t in g.touched):
            return f"gate {g.name} touches qubits outside range({n})"

    a, b = set(c.split_a), set(c.split_b)
    if len(c.split_a) != len(a) or len(c.split_b) != len(b):
        return "output split registers contain duplicates"
    if a & b:
        return "output split registers overlap"
    if a | b != set(range(n)):
        return "output split must partition the qubits"

    if any(g.name == "MEASURE" for g in c.gates):
        frozen: set[int] = set()
        in_segment_call = False
        for g in c.gates:
            if g.name == "MEASURE":
                frozen |= set(g.targets)
                in_segment_call = False
                continue
            if in_segment_call:
                return "an oracle call must be the last gate of its segment"
            if set(g.touched) & frozen:
                return "gate touches a qubit already measured"
            if g.name == "ORACLE":
                in_segment_call = True
        if in_segment_call or (c.gates and c.gates[-1].name != "MEASURE"):
            return "segmented circuits must end with a MEASURE marker"
    return None


def _is_unitary(m: np.ndarray) -> bool:
    if not np.all(np.isfinite(m.view(np.float64))):
        return False
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=ATOL))


# --- canonical byte encoding -------------------------------------------------

_MAGIC = b"QC\x01"
_OP_NAMED_1Q = {"H": 0x01, "X": 0x02, "Z": 0x03, "S": 0x04, "SDG": 0x05, "T": 0x06, "TDG": 0x07}
_OP_NAMED_2Q = {"CNOT": 0x10, "CZ": 0x11}
_OP_MAT1, _OP_MAT2, _OP_ORACLE, _OP_MEASURE = 0x20, 0x21, 0x30, 0x40
_NAME_1Q = {v: k for k, v in _OP_NAMED_1Q.items()}
_NAME_2Q = {v: k for k, v in _OP_NAMED_2Q.items()}


def _pack_matrix(m: np.ndarray) -> bytes:
    out = bytearray()
    for value in m.reshape(-1):
        out += struct.pack(">dd", float(value.real), float(value.imag))
    return bytes(out)


def canonical_encode(c: OracleAidedCircuit) -> bytes:
    """Deterministic, injective byte encoding of a circuit."""
    out = bytearray(_MAGIC)
    out.append(c.num_qubits)
    out += struct.pack(">H", len(c.gates))
    for g in c.gates:
        if g.name in _OP_NAMED_1Q:
            out.append(_OP_NAMED_1Q[g.name])
            out.append(g.targets[0])
        elif g.name in _OP_NAMED_2Q:
            out.append(_OP_NAMED_2Q[g.name])
            out += bytes(g.targets)
        elif g.name == "MAT1":
            out.append(_OP_MAT1)
            out.append(g.targets[0])
            out += _pack_matrix(g.matrix)
        elif g.name == "MAT2":
            out.append(_OP_MAT2)
            out += bytes(g.targets)
            out += _pack_matrix(g.matrix)
        elif g.name == "ORACLE":
            out.append(_OP_ORACLE)
            out.append(0 if g.style == "xor" else 1)
            out.append(len(g.query))
            out += bytes(g.query)
            out.append(len(g.response))
            out += bytes(g.response)
        elif g.name == "MEASURE":
            out.append(_OP_MEASURE)
            out.append(len(g.targets))
            out += bytes(g.targets)
        else:  # pragma: no cover - _validate rejects unknown gates
            raise AssertionError(g.name)
    out.append(len(c.split_a))
    out += bytes(c.split_a)
    out.append(len(c.split_b))
    out += bytes(c.split_b)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise IndexError("truncated")
        chunk = self.data[self.pos : self.pos + k]
        self.pos += k
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def matrix(self, dim: int) -> np.ndarray:
        flat = np.empty(dim * dim, dtype=np.complex128)
        for i in range(dim * dim):
            re, im = struct.unpack(">dd", self.take(16))
            flat[i] = complex(re, im)
        return flat.reshape(dim, dim)

    def done(self) -> bool:
        return self.pos == len(self.data)


def canonical_decode(data: bytes) -> OracleAidedCircuit | None:
    """Decode canonical bytes; returns None for any invalid input."""
    try:
        r = _Reader(data)
        if r.take(3) != _MAGIC:
            return None
        n = r.u8()
        count = r.u16()
        gates: list[GateOp] = []
        for _ in range(count):
            op = r.u8()
            if op in _NAME_1Q:
                gates.append(GateOp.gate(_NAME_1Q[op], r.u8()))
            elif op in _NAME_2Q:
                gates.append(GateOp.gate(_NAME_2Q[op], r.u8(), r.u8()))
            elif op == _OP_MAT1:
                t = r.u8()
                gates.append(GateOp(name="MAT1", targets=(t,), matrix=r.matrix(2)))
            elif op == _OP_MAT2:
                t0, t1 = r.u8(), r.u8()
                gates.append(GateOp(name="MAT2", targets=(t0, t1), matrix=r.matrix(4)))
            elif op == _OP_ORACLE:
                style_code = r.u8()
                if style_code not in (0, 1):
                    return None
                nq = r.u8()
                query = tuple(r.take(nq))
                nr = r.u8()
                response = tuple(r.take(nr))
                style = "xor" if style_code == 0 else "phase"
                gates.append(GateOp.oracle(style, query, response))
            elif op == _OP_MEASURE:
                nm = r.u8()
                gates.append(GateOp(name="MEASURE", targets=tuple(r.take(nm))))
            else:
                return None
        na = r.u8()
        split_a = tuple(r.take(na))
        nb = r.u8()
        split_b = tuple(r.take(nb))
        if not r.done():
            return None
        circuit = OracleAidedCircuit.__new__(OracleAidedCircuit)
        object.__setattr__(circuit, "num_qubits", n)
        object.__setattr__(circuit, "gates", tuple(gates))
        object.__setattr__(circuit, "split_a", split_a)
        object.__setattr__(circuit, "split_b", split_b)
        if _validate(circuit) is not None:
            return None
        return circuit
    except (IndexError, ValueError, struct.error):
        return None


# --- text format --------------------------------------------------------------

def parse_circuit(text: str) -> OracleAidedCircuit:
    """Compile the one-gate-per-line authoring format.

    Example::

        QUBITS 3
        H 0
        CNOT 0 1
        ORACLE xor q=0,1 r=2
        MEASURE 0,1
        SPLIT A=0 B=1,2
    """
    num_qubits = None
    gates: list[GateOp] = []
    split_a: tuple[int, ...] = ()
    split_b: tuple[int, ...] | None = None

    def indices(spec: str) -> tuple[int, ...]:
        spec = spec.strip()
        return tuple(int(tok) for tok in spec.split(",")) if spec else ()

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split(None, 1)
        arg = rest[0] if rest else ""
        head = head.upper()
        if head == "QUBITS":
            num_qubits = int(arg)
        elif head in GATE_1Q or head in GATE_2Q:
            gates.append(GateOp.gate(head, *(int(t) for t in arg.split())))
        elif head in ("MAT1", "MAT2"):
            toks = arg.split()
            ntargets = 1 if head == "MAT1" else 2
            targets = tuple(int(t) for t in toks[:ntargets])
            dim = 2 if head == "MAT1" else 4
            entries = [complex(float(p.split(",")[0]), float(p.split(",")[1])) for p in toks[ntargets:]]
            if len(entries) != dim * dim:
                raise ValueError(f"{head} expects {dim * dim} re,im entries")
            gates.append(GateOp.mat(np.array(entries).reshape(dim, dim), *targets))
        elif head == "ORACLE":
            toks = arg.split()
            style = toks[0]
            query: tuple[int, ...] = ()
            response: tuple[int, ...] = ()
            for tok in toks[1:]:
                key, val = tok.split("=", 1)
                if key == "q":
                    query = indices(val)
                elif key == "r":
                    response = indices(val)
                else:
                    raise ValueError(f"unknown oracle field {key!r}")
            gates.append(GateOp.oracle(style, query, response))
        elif head == "MEASURE":
            gates.append(GateOp.measurement(*indices(arg)))
        elif head == "SPLIT":
            for tok in arg.split():
                key, val = tok.split("=", 1)
                if key == "A":
                    split_a = indices(val)
                elif key == "B":
                    split_b = indices(val)
                else:
                    raise ValueError(f"unknown split register {key!r}")
        else:
            raise ValueError(f"unknown directive {head!r}")
    if num_qubits is None:
        raise ValueError("missing QUBITS line")
    if split_b is None:
        split_b = tuple(i for i in range(num_qubits) if i not in split_a)
    return OracleAidedCircuit(num_qubits, tuple(gates), split_a, split_b)


def format_circuit(c: OracleAidedCircuit) -> str:
    lines = [f"QUBITS {c.num_qubits}"]
    for g in c.gates:
        if g.name in GATE_1Q or g.name in GATE_2Q:
            lines.append(f"{g.name} " + " ".join(map(str, g.targets)))
        elif g.name in ("MAT1", "MAT2"):
            entries = " ".join(f"{v.real!r},{v.imag!r}" for v in g.matrix.reshape(-1))
            lines.append(f"{g.name} " + " ".join(map(str, g.targets)) + " " + entries)
        elif g.name == "ORACLE":
            parts = [f"ORACLE {g.style}", "q=" + ",".join(map(str, g.query))]
            if g.response:
                parts.append("r=" + ",".join(map(str, g.response)))
            lines.append(" ".join(parts))
        elif g.name == "MEASURE":
            lines.append("MEASURE " + ",".join(map(str, g.targets)))
    lines.append(
        "SPLIT A=" + ",".join(map(str, c.split_a)) + " B=" + ",".join(map(str, c.split_b))
    )
    return "\n".join(lines) + "\n"


# --- simulation ---------------------------------------------------------------

def _register_values(n: int, register: tuple[int, ...]) -> np.ndarray:
    """For every basis index, the integer read off the given wires."""
    idx = np.arange(2**n)
    val = np.zeros(2**n, dtype=np.int64)
    for pos in register:
        val = (val << 1) | ((idx >> (n - 1 - pos)) & 1)
    return val


def _apply_unitary_gate(state: np.ndarray, g: GateOp, n: int) -> np.ndarray:
    """Apply a non-oracle gate to ``state`` of shape (2**n, batch)."""
    batch = state.shape[1]
    if g.name in GATE_1Q or g.name == "MAT1":
        m = GATE_1Q[g.name] if g.name in GATE_1Q else g.matrix
        t = g.targets[0]
        cube = state.reshape(2**t, 2, 2 ** (n - t - 1) * batch)
        return np.einsum("ab,ibj->iaj", m, cube).reshape(2**n, batch)
    if g.name in GATE_2Q or g.name == "MAT2":
        m = GATE_2Q[g.name] if g.name in GATE_2Q else g.matrix
        t0, t1 = g.targets
        cube = state.reshape([2] * n + [batch])
        cube = np.moveaxis(cube, (t0, t1), (0, 1)).reshape(4, -1)
        cube = (m @ cube).reshape([2, 2] + [2] * (n - 2) + [batch])
        cube = np.moveaxis(cube, (0, 1), (t0, t1))
        return cube.reshape(2**n, batch)
    raise ValueError(f"cannot apply gate {g.name} as a unitary")


def _oracle_lookup(oracle, x: str) -> str:
    y = oracle(x)
    if y is None:
        raise OracleWidthError(f"oracle returned ⊥ on input {x!r} during unitary simulation")
    if not isinstance(y, str) or set(y) - {"0", "1"}:
        raise OracleWidthError(f"oracle output {y!r} is not a bitstring")
    return y


def _apply_oracle(state: np.ndarray, g: GateOp, n: int, oracle) -> np.ndarray:
    w = len(g.query)
    xvals = _register_values(n, g.query)
    if g.style == "phase":
        signs = np.empty(2**w, dtype=np.complex128)
        for v in range(2**w):
            y = _oracle_lookup(oracle, format(v, f"0{w}b"))
            if len(y) != 1:
                raise OracleWidthError(f"phase-style oracle output {y!r} is not one bit")
            signs[v] = -1.0 if y == "1" else 1.0
        return state * signs[xvals][:, None]
    masks = np.empty(2**w, dtype=np.int64)
    for v in range(2**w):
        y = _oracle_lookup(oracle, format(v, f"0{w}b"))
        if len(y) != len(g.response):
            raise OracleWidthError(
                f"oracle output width {len(y)} != response register width {len(g.response)}"
            )
        mask = 0
        for bit, pos in zip(y, g.response):
            if bit == "1":
                mask |= 1 << (n - 1 - pos)
        masks[v] = mask
    perm = np.arange(2**n) ^ masks[xvals]
    return state[perm]


def apply_gates(state: np.ndarray, gates, n: int, oracle) -> np.ndarray:
    """Run a gate sequence over a (2**n, batch)-shaped amplitude array."""
    for g in gates:
        if g.name == "ORACLE":
            state = _apply_oracle(state, g, n, oracle)
        elif g.name == "MEASURE":
            raise ValueError("MEASURE gates require the segmented sampler")
        else:
            state = _apply_unitary_gate(state, g, n)
    return state


@dataclass(frozen=True)
class QueryTrace:
    """Pre-query snapshots: one (state, query-register distribution) per call."""

    states: tuple[BotExtendedState, ...]
    query_marginals: tuple[FiniteDistribution, ...]

    def __len__(self) -> int:
        return len(self.states)

    def mass_on(self, differing: set[str]) -> float:
        """Total query mass landing on the given query-register values."""
        return sum(
            d.probability(x) for d in self.query_marginals for x in differing
        )


def _initial(n: int) -> np.ndarray:
    state = np.zeros((2**n, 1), dtype=np.complex128)
    state[0, 0] = 1.0
    return state


def simulate(c: OracleAidedCircuit, oracle) -> BotExtendedState:
    """Run the circuit on |0...0> and return the output state."""
    state = apply_gates(_initial(c.num_qubits), c.gates, c.num_qubits, oracle)
    return BotExtendedState(c.num_qubits, state[:, 0])


def simulate_traced(c: OracleAidedCircuit, oracle) -> tuple[BotExtendedState, QueryTrace]:
    """As :func:`simulate`, also snapshotting the state before each call."""
    n = c.num_qubits
    state = _initial(n)
    snaps: list[BotExtendedState] = []
    margs: list[FiniteDistribution] = []
    for g in c.gates:
        if g.name == "ORACLE":
            snaps.append(BotExtendedState(n, state[:, 0]))
            w = len(g.query)
            xvals = _register_values(n, g.query)
            probs = np.bincount(xvals, weights=np.abs(state[:, 0]) ** 2, minlength=2**w)
            margs.append(
                FiniteDistribution(
                    {format(v, f"0{w}b"): float(p) for v, p in enumerate(probs) if p > 0.0}
                )
            )
            state = _apply_oracle(state, g, n, oracle)
        else:
            state = _apply_unitary_gate(state, g, n)
    return BotExtendedState(n, state[:, 0]), QueryTrace(tuple(snaps), tuple(margs))


def conjugate_circuit(c: OracleAidedCircuit) -> OracleAidedCircuit:
    """Entrywise complex conjugate of every gate; oracle calls unchanged."""
    gates = []
    for g in c.gates:
        if g.name in _CONJUGATE_NAME:
            gates.append(GateOp.gate(_CONJUGATE_NAME[g.name], *g.targets))
        elif g.name in ("MAT1", "MAT2"):
            gates.append(GateOp(name=g.name, targets=g.targets, matrix=g.matrix.conj()))
        else:
            gates.append(g)
    return OracleAidedCircuit(c.num_qubits, tuple(gates), c.split_a, c.split_b)


def circuit_unitary(c: OracleAidedCircuit, oracle) -> np.ndarray:
    """The full 2**n x 2**n unitary, built column by column.

    Independent of :func:`simulate`'s single-vector path in how states are
    assembled, which makes it a usable cross-check at small sizes.
    """
    n = c.num_qubits
    if n > 8:
        raise ValueError("unitary reconstruction capped at 8 qubits")
    return apply_gates(np.eye(2**n, dtype=np.complex128), c.gates, n, oracle)


def random_circuit(
    rng: np.random.Generator,
    num_qubits: int,
    oracle_calls: int = 0,
    query_width: int = 1,
    response_width: int = 1,
    style: str = "xor",
    moment_gates: tuple[int, int] = (4, 7),
    gate_names: tuple[str, ...] = ("H", "X", "Z", "S", "T", "CNOT", "CZ"),
) -> OracleAidedCircuit:
    """Seeded random circuit: blocks of random gates around each oracle call.

    Every oracle call is preceded and followed by at least
    ``moment_gates[0]`` ordinary gates, so the total step count stays well
    above the call count.
    """
    n = num_qubits
    if oracle_calls and style == "xor" and query_width + response_width > n:
        raise ValueError("query and response registers do not fit")
    gates: list[GateOp] = []

    def random_block() -> None:
        for _ in range(int(rng.integers(moment_gates[0], moment_gates[1] + 1))):
            name = gate_names[rng.integers(len(gate_names))]
            if name in GATE_2Q:
                if n < 2:
                    name = "H"
                else:
                    t0, t1 = rng.choice(n, size=2, replace=False)
                    if name == "CZ":
                        t0, t1 = min(t0, t1), max(t0, t1)
                    gates.append(GateOp.gate(name, int(t0), int(t1)))
                    continue
            gates.append(GateOp.gate(name, int(rng.integers(n))))

    wires = rng.permutation(n)
    query = tuple(int(w) for w in wires[:query_width])
    response = () if style == "phase" else tuple(int(w) for w in wires[query_width : query_width + response_width])
    random_block()
    for _ in range(oracle_calls):
        gates.append(GateOp.oracle(style, query, response))
        random_block()
    a_count = int(rng.integers(0, n + 1))
    split = [int(w) for w in rng.permutation(n)]
    return OracleAidedCircuit(n, tuple(gates), tuple(split[:a_count]), tuple(split[a_count:]))
