"""Compression unitaries and the stateful compressed-oracle simulation.

For a per-input output distribution ``D_x``, the local compression
unitary swaps |⊥> with |D_x> = sum_z sqrt(D_x(z)) |z> and acts as the
identity on the orthogonal complement.  A compressed-oracle query
conjugates the XOR step by this swap on the queried row:

    U_x . CNOT_{D_x,Y} . U_x

Local database registers hold only the support of ``D_x`` plus the ⊥
slot (top index), and rows that are exactly |⊥> are dropped from the
explicit joint state.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuits import GateOp, OracleAidedCircuit, _apply_unitary_gate, _register_values
from .oracles import TableOracle
from .qstate import BotExtendedState, FiniteDistribution

__all__ = [
    "ProductDistribution",
    "CompressedDatabase",
    "compression_matrix",
    "compression_apply",
    "swap_with_bot_matrix",
    "oracle_from_distribution",
    "enumerate_oracles",
    "run_adversary_csto",
    "accept_probability",
]

_DROP_TOL = 1e-14


@dataclass(frozen=True)
class ProductDistribution:
    """Independent per-input output distributions over fixed-width strings."""

    domain: tuple[str, ...]
    rows: dict[str, FiniteDistribution]
    out_width: int

    def __post_init__(self) -> None:
        for x in self.domain:
            if x not in self.rows:
                raise ValueError(f"no output distribution for input {x!r}")
            for z in self.rows[x].probs:
                if len(z) != self.out_width:
                    raise ValueError(f"output {z!r} is not {self.out_width} bits")

    @classmethod
    def uniform(cls, in_width: int, out_width: int) -> "ProductDistribution":
        domain = tuple(format(v, f"0{in_width}b") for v in range(2**in_width))
        outs = [format(v, f"0{out_width}b") for v in range(2**out_width)]
        rows = {x: FiniteDistribution.uniform(outs) for x in domain}
        return cls(domain, rows, out_width)

    @classmethod
    def from_rows(cls, rows: dict[str, FiniteDistribution]) -> "ProductDistribution":
        domain = tuple(sorted(rows))
        widths = {len(z) for d in rows.values() for z in d.probs}
        if len(widths) != 1:
            raise ValueError("all outputs must share one width")
        return cls(domain, dict(rows), widths.pop())

    def support_order(self, x: str) -> list[str]:
        return self.rows[x].support()

    def row_state(self, x: str) -> np.ndarray:
        """|D_x> over the row basis (support order, ⊥ slot at the top)."""
        support = self.support_order(x)
        vec = np.zeros(len(support) + 1, dtype=np.complex128)
        for i, z in enumerate(support):
            vec[i] = np.sqrt(self.rows[x].probs[z])
        return vec


def swap_with_bot_matrix(phi: np.ndarray) -> np.ndarray:
    """The involution |phi><⊥| + |⊥><phi| + (I - |⊥><⊥| - |phi><phi|).

    ``phi`` lives in a space whose last index is the ⊥ slot; it may itself
    be |⊥>, in which case the result is the identity.
    """
    dim = phi.shape[0]
    bot = np.zeros(dim, dtype=np.complex128)
    bot[-1] = 1.0
    return (
        np.outer(phi, bot.conj())
        + np.outer(bot, phi.conj())
        + np.eye(dim)
        - np.outer(bot, bot.conj())
        - np.outer(phi, phi.conj())
    )


def compression_matrix(row: FiniteDistribution) -> np.ndarray:
    """U_x over the row basis support(D_x) + ⊥."""
    support = row.support()
    phi = np.zeros(len(support) + 1, dtype=np.complex128)
    for i, z in enumerate(support):
        phi[i] = np.sqrt(row.probs[z])
    return swap_with_bot_matrix(phi)


def compression_apply(vec: np.ndarray, row: FiniteDistribution) -> np.ndarray:
    return compression_matrix(row) @ np.asarray(vec, dtype=np.complex128)


def oracle_from_distribution(dist: ProductDistribution, rng: np.random.Generator) -> TableOracle:
    """One independent truth-table draw, row by row in domain order."""
    widths = {len(x) for x in dist.domain}
    if len(widths) != 1:
        raise ValueError("domain inputs must share one width")
    table = {x: dist.rows[x].sample(rng) for x in dist.domain}
    return TableOracle(table, widths.pop(), dist.out_width)


def enumerate_oracles(dist: ProductDistribution):
    """All truth tables in the product support with their probabilities."""
    in_width = len(dist.domain[0])
    supports = [dist.support_order(x) for x in dist.domain]
    for combo in product(*supports):
        prob = 1.0
        table = {}
        for x, z in zip(dist.domain, combo):
            prob *= dist.rows[x].probs[z]
            table[x] = z
        yield prob, TableOracle(table, in_width, dist.out_width)


class CompressedDatabase:
    """Joint querier ⊗ sparse-database state under compressed-oracle queries.

    The querier is an ``n``-qubit register; each active row ``x`` carries a
    local register over support(D_x) + ⊥.  Rows start (implicitly) at |⊥>
    and are only materialized once a query puts amplitude on them.
    """

    def __init__(self, dist: ProductDistribution, querier_qubits: int):
        self.dist = dist
        self.n = querier_qubits
        self.active: list[str] = []
        joint = np.zeros(2**querier_qubits, dtype=np.complex128)
        joint[0] = 1.0
        self.joint = joint.reshape((2**querier_qubits,))

    # -- bookkeeping ------------------------------------------------------

    def _row_axis(self, x: str) -> int:
        return 1 + self.active.index(x)

    def _activate(self, x: str) -> None:
        if x in self.active:
            return
        d = len(self.dist.support_order(x)) + 1
        block = np.zeros(d, dtype=np.complex128)
        block[-1] = 1.0  # fresh rows are |⊥>
        self.joint = np.tensordot(self.joint, block, axes=0)
        self.active.append(x)

    def _canonicalize(self) -> None:
        for x in list(self.active):
            axis = self._row_axis(x)
            moved = np.moveaxis(self.joint, axis, -1)
            non_bot = np.linalg.norm(moved[..., :-1])
            if non_bot < _DROP_TOL:
                self.joint = np.ascontiguousarray(moved[..., -1])
                norm = np.linalg.norm(self.joint)
                self.joint = self.joint / norm
                self.active.remove(x)

    def row_is_bot(self, x: str) -> bool:
        return x not in self.active

    # -- operations -------------------------------------------------------

    def apply_compression(self, x: str) -> None:
        """Apply U_x to row x of the joint state."""
        self._activate(x)
        axis = self._row_axis(x)
        u = compression_matrix(self.dist.rows[x])
        moved = np.moveaxis(self.joint, axis, -1)
        moved = moved @ u.T
        self.joint = np.moveaxis(moved, -1, axis)
        self._canonicalize()

    def apply_querier_gate(self, gate: GateOp) -> None:
        shape = self.joint.shape
        flat = self.joint.reshape(2**self.n, -1)
        flat = _apply_unitary_gate(flat, gate, self.n)
        self.joint = flat.reshape(shape)

    def query(self, query: tuple[int, ...], response: tuple[int, ...]) -> None:
        """One compressed-oracle query: U_x, XOR of the row into Y, U_x.

        Controlled on the querier's query register holding |x>, the row x
        is decompressed, its string content XORed into the response
        register, and recompressed.  A residual ⊥ component leaves the
        response untouched.
        """
        w = len(query)
        if w != len(self.dist.domain[0]):
            raise ValueError("query register width does not match the domain")
        xvals = _register_values(self.n, query)

        for v in range(2**w):
            x = format(v, f"0{w}b")
            sel = np.nonzero(xvals == v)[0]
            slab = self.joint.reshape(2**self.n, -1)[sel]
            if x not in self.active and not np.any(slab):
                continue
            self._activate(x)

            axis = self._row_axis(x)
            support = self.dist.support_order(x)
            u = compression_matrix(self.dist.rows[x])

            sub = self.joint[sel]
            moved = np.moveaxis(sub, axis, -1)
            moved = moved @ u.T  # decompress

            # XOR the decompressed content into the response register: for
            # row basis j holding string s_j, permute querier indices.  The
            # response bits are disjoint from the query bits, so XOR maps
            # the slice sel onto itself.
            for j, s in enumerate(support):
                mask = 0
                for bit, pos in zip(s, response):
                    if bit == "1":
                        mask |= 1 << (self.n - 1 - pos)
                if mask == 0:
                    continue
                perm = np.searchsorted(sel, sel ^ mask)
                moved[..., j] = moved[perm, ..., j]

            moved = moved @ u.T  # recompress
            out = self.joint.copy()
            out[sel] = np.moveaxis(moved, -1, axis)
            self.joint = out
        self._canonicalize()

    def accept_probability(self, qubit: int = 0) -> float:
        flat = np.abs(self.joint.reshape(2**self.n, -1)) ** 2
        idx = np.arange(2**self.n)
        ones = ((idx >> (self.n - 1 - qubit)) & 1) == 1
        return float(flat[ones].sum())


def accept_probability(state: BotExtendedState, qubit: int = 0) -> float:
    """Probability that the given qubit measures 1."""
    n = state.num_qubits
    probs = np.abs(state.string_part()) ** 2
    idx = np.arange(2**n)
    ones = ((idx >> (n - 1 - qubit)) & 1) == 1
    return float(probs[ones].sum())


def run_adversary_csto(circuit: OracleAidedCircuit, dist: ProductDistribution) -> CompressedDatabase:
    """Run an adversary circuit with its oracle calls answered statefully.

    Every ORACLE gate must be xor style; the database register is private
    and persists across calls.
    """
    db = CompressedDatabase(dist, circuit.num_qubits)
    for g in circuit.gates:
        if g.name == "ORACLE":
            if g.style != "xor":
                raise ValueError("compressed-oracle simulation answers xor-style calls only")
            db.query(g.query, g.response)
        elif g.name == "MEASURE":
            raise ValueError("adversary circuits must be unitary between queries")
        else:
            db.apply_querier_gate(g)
    return db
