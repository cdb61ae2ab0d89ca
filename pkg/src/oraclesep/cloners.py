"""The three separation oracles over a classical oracle O.

* ``Col``: keyed by circuit bytes, returns a computational-basis sample of
  the doubled state sum_s sqrt(p_s) |s>|psi_s>|psi_s> built from
  C^O|0> = sum_s sqrt(p_s)|s>_A |psi_s>_B.  Invalid keys map to ⊥.
* ``QCol``: the unitary swapping |⊥> with that doubled state, controlled
  on the circuit key.
* ``Q``: runs a segmented program, collapsing declared registers and
  additionally emitting full-basis samples that do not disturb the state.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuits import (
    GateOp,
    OracleAidedCircuit,
    OracleWidthError,
    _register_values,
    apply_gates,
    canonical_decode,
    simulate,
)
from .compressed import swap_with_bot_matrix
from .qstate import (
    BOT,
    MAX_QUBITS,
    ZERO_BRANCH,
    BotExtendedState,
    FiniteDistribution,
    born_distribution,
    measure,
    project_outcome,
    sample_noncollapsing,
)
from .seeding import derive_rng

__all__ = [
    "ColState",
    "MarkovTranscript",
    "col_state",
    "dcol_distribution",
    "col_sample",
    "pad_circuit",
    "qcol_swap_state",
    "qcol_matrix",
    "qcol_apply_payload",
    "qcol_apply",
    "q_sample",
    "dq_distribution",
    "dq_query_mass",
]


@dataclass(frozen=True)
class ColState:
    """The doubled output state for one circuit key, or the literal ⊥."""

    key: bytes
    is_bot: bool
    a_width: int = 0
    b_width: int = 0
    state: BotExtendedState | None = None
    #: (serial bitstring, branch probability, normalized B-register vector)
    branches: tuple[tuple[str, float, np.ndarray], ...] = ()

    @property
    def doubled_qubits(self) -> int:
        return self.a_width + 2 * self.b_width


def _branch_decomposition(
    out: BotExtendedState, split_a: tuple[int, ...], split_b: tuple[int, ...]
) -> list[tuple[str, float, np.ndarray]]:
    """Schmidt-style data: group amplitudes by the A-register value s and
    normalize each branch; branches below the probability floor drop."""
    n = out.num_qubits
    avals = _register_values(n, split_a)
    bvals = _register_values(n, split_b)
    mat = np.zeros((2 ** len(split_a), 2 ** len(split_b)), dtype=np.complex128)
    mat[avals, bvals] = out.string_part()
    branches = []
    for s_val in range(mat.shape[0]):
        p = float(np.sum(np.abs(mat[s_val]) ** 2))
        if p <= ZERO_BRANCH:
            continue
        branches.append((format(s_val, f"0{len(split_a)}b"), p, mat[s_val] / np.sqrt(p)))
    return branches


def col_state(key: bytes, oracle) -> ColState:
    """Decode the key, run it, and assemble the doubled state.

    Any failure (undecodable bytes, non-unitary program, oracle width
    mismatch, register budget) lands in the defined ⊥ branch rather than
    raising.
    """
    circuit = canonical_decode(key)
    if circuit is None or circuit.is_segmented:
        return ColState(key, is_bot=True)
    a_width, b_width = len(circuit.split_a), len(circuit.split_b)
    if a_width + 2 * b_width > MAX_QUBITS:
        return ColState(key, is_bot=True)
    try:
        out = simulate(circuit, oracle)
    except (OracleWidthError, ValueError):
        return ColState(key, is_bot=True)

    branches = _branch_decomposition(out, circuit.split_a, circuit.split_b)
    dim_b = 2**b_width
    doubled = np.zeros((2**a_width, dim_b, dim_b), dtype=np.complex128)
    for s, p, psi in branches:
        doubled[int(s, 2) if s else 0] += np.sqrt(p) * np.outer(psi, psi)
    amps = np.concatenate([doubled.reshape(-1), [0.0]])
    state = BotExtendedState(a_width + 2 * b_width, amps, has_bot=True)
    return ColState(key, False, a_width, b_width, state, tuple(branches))


def dcol_distribution(key: bytes, oracle) -> FiniteDistribution:
    """The exact measurement distribution of the doubled state (⊥ for
    invalid keys)."""
    cs = col_state(key, oracle)
    if cs.is_bot:
        return FiniteDistribution.point_mass(BOT)
    return born_distribution(cs.state)


def col_sample(
    key: bytes,
    oracle,
    rng: np.random.Generator | None = None,
    *,
    master_seed: int | None = None,
) -> str | None:
    """Sample the doubled state in the computational basis; None means ⊥.

    In fixed-function mode (``master_seed`` given) the randomness is
    derived from the key, so repeated calls at the same key return the
    same answer and the whole map behaves as one sampled function.
    """
    if (rng is None) == (master_seed is None):
        raise ValueError("pass exactly one of rng or master_seed")
    if master_seed is not None:
        rng = derive_rng(master_seed, "col", key)
    cs = col_state(key, oracle)
    if cs.is_bot:
        return None
    return sample_noncollapsing(cs.state, rng)


def pad_circuit(circuit: OracleAidedCircuit, pad: str) -> OracleAidedCircuit:
    """Append a classical pad register so equal programs get distinct keys.

    The pad qubits are prepared to the pad bits and listed at the end of
    register A; the original wiring is untouched, so the padded circuit
    computes the same thing with the pad riding along in the serial part.
    """
    n = circuit.num_qubits
    extra = len(pad)
    gates = [GateOp.gate("X", n + i) for i, bit in enumerate(pad) if bit == "1"]
    return OracleAidedCircuit(
        n + extra,
        tuple(gates) + circuit.gates,
        circuit.split_a + tuple(range(n, n + extra)),
        circuit.split_b,
    )


# --- the cloning unitary -------------------------------------------------------

def qcol_swap_state(key: bytes, oracle, payload_qubits: int) -> np.ndarray:
    """|psi^O_C> embedded in the ⊥-extended payload space.

    Keys that fail to decode, or whose doubled register does not match the
    payload budget, contribute |⊥> (so the controlled swap acts as the
    identity there).
    """
    dim = 2**payload_qubits + 1
    cs = col_state(key, oracle)
    if cs.is_bot or cs.doubled_qubits != payload_qubits:
        vec = np.zeros(dim, dtype=np.complex128)
        vec[-1] = 1.0
        return vec
    return cs.state.amplitudes.copy()


def qcol_matrix(key: bytes, oracle, payload_qubits: int) -> np.ndarray:
    """The payload-space unitary for one key: swap(|⊥>, |psi^O_C>)."""
    return swap_with_bot_matrix(qcol_swap_state(key, oracle, payload_qubits))


def qcol_apply_payload(
    payload: np.ndarray | BotExtendedState, key: bytes, oracle
) -> np.ndarray:
    """Apply the swap involution for a classical key to a payload vector."""
    vec = payload.amplitudes if isinstance(payload, BotExtendedState) else np.asarray(payload)
    vec = vec.astype(np.complex128)
    m = int(np.log2(vec.shape[0] - 1))
    if 2**m + 1 != vec.shape[0]:
        raise ValueError("payload must live in a ⊥-extended register")
    phi = qcol_swap_state(key, oracle, m)
    overlap = np.vdot(phi, vec)
    bot_amp = vec[-1]
    out = vec.copy()
    out += phi * (bot_amp - overlap)
    out[-1] += overlap - bot_amp
    return out


def qcol_apply(keyed: dict[bytes, np.ndarray], oracle) -> dict[bytes, np.ndarray]:
    """Controlled-on-key application over a sparse key superposition.

    ``keyed`` maps each key basis value to its (possibly unnormalized)
    payload branch; the unitary is block diagonal over keys, so each
    branch transforms independently.
    """
    return {key: qcol_apply_payload(vec, key, oracle) for key, vec in keyed.items()}


# --- the non-collapsing measurement oracle --------------------------------------

@dataclass(frozen=True)
class MarkovTranscript:
    """Per-segment non-collapsing samples, with optional step conditionals."""

    outcomes: tuple[str, ...]
    collapsed: tuple[str, ...]
    conditionals: tuple[FiniteDistribution, ...] | None = None

    def joined(self) -> str:
        return "".join(self.outcomes)


def _check_segmented(circuit: OracleAidedCircuit) -> list:
    if not circuit.is_segmented:
        raise ValueError("program must carry measurement markers")
    segments = circuit.segments()
    for gates, _ in segments:
        for g in gates:
            if g.name == "ORACLE" and g.style != "phase":
                raise ValueError("segmented programs query the oracle in phase style")
    return segments


def q_sample(
    circuit: OracleAidedCircuit,
    oracle,
    rng: np.random.Generator,
    with_conditionals: bool = False,
) -> MarkovTranscript:
    """Run (C_1, M_1, ..., C_T, M_T): collapse each M_i, then draw a full
    non-collapsing sample of the post-measurement state.

    Measured registers are frozen structurally (the circuit validator
    rejects later gates on them), so each sample v_i reveals the collapse
    history and the sample sequence forms a Markov chain.
    """
    segments = _check_segmented(circuit)
    n = circuit.num_qubits
    state = BotExtendedState.computational(n, 0)
    outcomes: list[str] = []
    collapsed: list[str] = []
    conds: list[FiniteDistribution] = []
    for gates, measured in segments:
        vec = apply_gates(state.amplitudes[:, None], gates, n, oracle)
        state = BotExtendedState(n, vec[:, 0])
        if measured:
            u, state = measure(state, measured, rng)
            collapsed.append(u)
        else:
            collapsed.append("")
        if with_conditionals:
            conds.append(born_distribution(state))
        outcomes.append(sample_noncollapsing(state, rng))
    return MarkovTranscript(
        tuple(outcomes), tuple(collapsed), tuple(conds) if with_conditionals else None
    )


def dq_distribution(circuit: OracleAidedCircuit, oracle) -> FiniteDistribution:
    """Exact joint law of (v_1, ..., v_T) by enumerating every collapse
    branch; the outcome space is capped at 16 bits."""
    segments = _check_segmented(circuit)
    n = circuit.num_qubits
    total_bits = n * len(segments)
    if total_bits > 16:
        raise ValueError(f"outcome space of {total_bits} bits exceeds the 16-bit cap")

    joint: dict[str, float] = {}

    def recurse(state: BotExtendedState, prob: float, dists: list[dict[str, float]], i: int):
        if i == len(segments):
            for combo in product(*(d.items() for d in dists)):
                key = "".join(v for v, _ in combo)
                p = prob
                for _, pv in combo:
                    p *= pv
                joint[key] = joint.get(key, 0.0) + p
            return
        gates, measured = segments[i]
        vec = apply_gates(state.amplitudes[:, None], gates, n, oracle)
        state = BotExtendedState(n, vec[:, 0])
        branches: list[tuple[float, BotExtendedState]] = []
        if measured:
            for u_val in range(2 ** len(measured)):
                u = format(u_val, f"0{len(measured)}b")
                p_u, post = project_outcome(state, measured, u)
                if post is not None:
                    branches.append((p_u, post))
        else:
            branches.append((1.0, state))
        for p_u, post in branches:
            recurse(post, prob * p_u, dists + [born_distribution(post).probs], i + 1)

    recurse(BotExtendedState.computational(n, 0), 1.0, [], 0)
    return FiniteDistribution(joint)


def dq_query_mass(circuit: OracleAidedCircuit, oracle, differing: set[str]) -> list[float]:
    """Expected query mass on the differing inputs at each oracle call,
    averaged over the collapse branches that precede the call."""
    segments = _check_segmented(circuit)
    n = circuit.num_qubits
    n_calls = circuit.oracle_calls
    masses = [0.0] * n_calls

    def recurse(state: BotExtendedState, prob: float, call_idx: int, i: int):
        if i == len(segments):
            return
        gates, measured = segments[i]
        vec = state.amplitudes[:, None]
        for g in gates:
            if g.name == "ORACLE":
                w = len(g.query)
                xvals = _register_values(n, g.query)
                weights = np.bincount(xvals, weights=np.abs(vec[:, 0]) ** 2, minlength=2**w)
                masses[call_idx] += prob * sum(
                    float(weights[int(x, 2)]) for x in differing if len(x) == w
                )
                call_idx += 1
            vec = apply_gates(vec, [g], n, oracle)
        state = BotExtendedState(n, vec[:, 0])
        if measured:
            for u_val in range(2 ** len(measured)):
                u = format(u_val, f"0{len(measured)}b")
                p_u, post = project_outcome(state, measured, u)
                if post is not None:
                    recurse(post, prob * p_u, call_idx, i + 1)
        else:
            recurse(state, prob, call_idx, i + 1)

    recurse(BotExtendedState.computational(n, 0), 1.0, 0, 0)
    return masses
