"""Dense statevectors with an optional ⊥ slot, measurements, and distances.

States are immutable value objects.  Amplitude vectors have length
``2**n`` (ordinary states) or ``2**n + 1`` (states living in a
⊥-extended space, with the ⊥ amplitude stored at the top index).
Basis index ``i`` corresponds to the bitstring ``format(i, f"0{n}b")``,
so qubit 0 is the leftmost (most significant) bit.

All sampling uses inverse-CDF transforms over lexicographically ordered
outcomes, so a fixed RNG stream determines outputs bit-exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-9
ZERO_BRANCH = 1e-12
MAX_QUBITS = 14

#: Out-of-band symbol used as a distribution key for the ⊥ outcome.
BOT = "⊥"

__all__ = [
    "ATOL",
    "ZERO_BRANCH",
    "MAX_QUBITS",
    "BOT",
    "BotExtendedState",
    "FiniteDistribution",
    "measure",
    "project_outcome",
    "sample_noncollapsing",
    "born_distribution",
    "statistical_distance",
    "euclidean_distance",
    "trace_distance_pure",
    "min_phase_distance",
    "dist_state",
]


@dataclass(frozen=True)
class BotExtendedState:
    """A normalized pure state over ``num_qubits`` qubits, plus an
    optional distinguished ⊥ dimension at index ``2**num_qubits``."""

    num_qubits: int
    amplitudes: np.ndarray
    has_bot: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"register size {self.num_qubits} outside [0, {MAX_QUBITS}]")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = 2**self.num_qubits + (1 if self.has_bot else 0)
        if amps.shape != (expected,):
            raise ValueError(f"amplitude vector has shape {amps.shape}, expected ({expected},)")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than {ATOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def computational(cls, num_qubits: int, bits: str | int = 0) -> "BotExtendedState":
        index = int(bits, 2) if isinstance(bits, str) else bits
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def bot_state(cls, num_qubits: int) -> "BotExtendedState":
        """The pure ⊥ state of the ⊥-extended space over ``num_qubits``."""
        amps = np.zeros(2**num_qubits + 1, dtype=np.complex128)
        amps[-1] = 1.0
        return cls(num_qubits, amps, has_bot=True)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def bot_amplitude(self) -> complex:
        return complex(self.amplitudes[-1]) if self.has_bot else 0.0

    def string_part(self) -> np.ndarray:
        """The amplitudes over computational basis states (⊥ excluded)."""
        return self.amplitudes[: 2**self.num_qubits]

    def with_bot_slot(self) -> "BotExtendedState":
        """Embed an ordinary state into the ⊥-extended space."""
        if self.has_bot:
            return self
        amps = np.concatenate([self.amplitudes, [0.0]])
        return BotExtendedState(self.num_qubits, amps, has_bot=True)

    def without_bot_slot(self) -> "BotExtendedState":
        """Drop a ⊥ slot carrying no amplitude."""
        if not self.has_bot:
            return self
        if abs(self.amplitudes[-1]) > ZERO_BRANCH:
            raise ValueError("cannot drop a ⊥ slot holding amplitude")
        amps = self.amplitudes[:-1]
        amps = amps / np.linalg.norm(amps)
        return BotExtendedState(self.num_qubits, amps)


@dataclass(frozen=True)
class FiniteDistribution:
    """A finite probability distribution over outcome strings."""

    probs: dict[str, float]

    def __post_init__(self) -> None:
        total = 0.0
        for key, p in self.probs.items():
            if p < -ATOL:
                raise ValueError(f"negative probability {p} for outcome {key!r}")
            total += p
        if abs(total - 1.0) > ATOL:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probs", dict(self.probs))

    @classmethod
    def point_mass(cls, outcome: str) -> "FiniteDistribution":
        return cls({outcome: 1.0})

    @classmethod
    def uniform(cls, outcomes: list[str]) -> "FiniteDistribution":
        p = 1.0 / len(outcomes)
        return cls({o: p for o in outcomes})

    def support(self) -> list[str]:
        return sorted(k for k, p in self.probs.items() if p > 0.0)

    def probability(self, outcome: str) -> float:
        return self.probs.get(outcome, 0.0)

    def sample(self, rng: np.random.Generator) -> str:
        """Inverse-CDF draw over lexicographically ordered outcomes."""
        u = rng.random()
        acc = 0.0
        keys = sorted(self.probs)
        for key in keys:
            acc += self.probs[key]
            if u < acc:
                return key
        return keys[-1]


def _amps(state: BotExtendedState | np.ndarray) -> np.ndarray:
    if isinstance(state, BotExtendedState):
        return state.amplitudes
    return np.asarray(state, dtype=np.complex128)


def _target_probabilities(state: BotExtendedState, targets: tuple[int, ...]) -> np.ndarray:
    """Probabilities of each target-register outcome, ordered by the
    targets' bit order (targets[0] is the outcome's leading bit)."""
    n = state.num_qubits
    grid = np.abs(state.string_part().reshape([2] * n)) ** 2 if n else np.abs(
        state.string_part()
    ) ** 2
    if n == 0:
        return np.atleast_1d(grid)
    other = tuple(i for i in range(n) if i not in targets)
    marg = grid.sum(axis=other) if other else grid
    # axes of marg follow ascending qubit index; reorder to target order
    order = [sorted(targets).index(t) for t in targets]
    return marg.transpose(order).reshape(-1)


def measure(
    state: BotExtendedState, targets: list[int] | tuple[int, ...], rng: np.random.Generator
) -> tuple[str, BotExtendedState]:
    """Projective computational-basis measurement of ``targets``.

    Outcomes are sampled with Born probabilities via inverse CDF over
    lexicographically ordered outcomes.  Returns the outcome bitstring
    (bit order given by ``targets``) and the renormalized post state;
    measured qubits retain the outcome value.
    """
    targets = tuple(targets)
    n = state.num_qubits
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"measurement targets {targets} out of range for {n} qubits")
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate measurement targets")
    if state.has_bot and abs(state.bot_amplitude) > ZERO_BRANCH:
        raise ValueError("cannot measure qubits of a state holding ⊥ amplitude")
    if not targets:
        return "", state

    probs = _target_probabilities(state, targets)
    if probs.max() < ZERO_BRANCH:
        raise ValueError("malformed state: every measurement branch is empty")

    u = rng.random()
    acc = 0.0
    outcome_index = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            outcome_index = i
            break
    outcome = format(outcome_index, f"0{len(targets)}b")
    _, post = project_outcome(state, targets, outcome)
    return outcome, post


def project_outcome(
    state: BotExtendedState, targets: list[int] | tuple[int, ...], outcome: str
) -> tuple[float, BotExtendedState | None]:
    """Probability of the outcome and the renormalized projected state.

    Returns ``(0.0, None)`` when the branch carries no probability.
    """
    targets = tuple(targets)
    n = state.num_qubits
    string_amps = state.string_part()
    indices = np.arange(2**n)
    keep = np.ones(2**n, dtype=bool)
    for bit, t in zip(outcome, targets):
        keep &= ((indices >> (n - 1 - t)) & 1) == int(bit)
    post = np.where(keep, string_amps, 0.0)
    norm = np.linalg.norm(post)
    if norm**2 < ZERO_BRANCH:
        return float(norm**2), None
    post = post / norm
    if state.has_bot:
        post = np.concatenate([post, [0.0]])
    return float(norm**2), BotExtendedState(n, post, has_bot=state.has_bot)


def born_distribution(state: BotExtendedState) -> FiniteDistribution:
    """Exact full computational-basis measurement distribution.

    A ⊥ slot contributes the out-of-band outcome :data:`BOT`.
    """
    n = state.num_qubits
    probs: dict[str, float] = {}
    for i, amp in enumerate(state.string_part()):
        p = abs(amp) ** 2
        if p > 0.0:
            probs[format(i, f"0{n}b")] = probs.get(format(i, f"0{n}b"), 0.0) + p
    if state.has_bot:
        p = abs(state.bot_amplitude) ** 2
        if p > 0.0:
            probs[BOT] = p
    return FiniteDistribution(probs)


def sample_noncollapsing(state: BotExtendedState, rng: np.random.Generator) -> str:
    """Full computational-basis sample leaving the caller's state untouched."""
    if state.has_bot and abs(state.bot_amplitude) > ZERO_BRANCH:
        raise ValueError("cannot sample a state holding ⊥ amplitude")
    n = state.num_qubits
    probs = np.abs(state.string_part()) ** 2
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return format(i, f"0{n}b")
    return format(len(probs) - 1, f"0{n}b")


def statistical_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Half the L1 difference over the union support."""
    keys = set(p.probs) | set(q.probs)
    return 0.5 * sum(abs(p.probability(k) - q.probability(k)) for k in sorted(keys))


def euclidean_distance(
    a: BotExtendedState | np.ndarray, b: BotExtendedState | np.ndarray
) -> float:
    va, vb = _amps(a), _amps(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return float(np.linalg.norm(va - vb))


def trace_distance_pure(
    a: BotExtendedState | np.ndarray, b: BotExtendedState | np.ndarray
) -> float:
    """Trace distance of two pure states, sqrt(1 - |<a|b>|^2)."""
    va, vb = _amps(a), _amps(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    overlap = abs(np.vdot(va, vb)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - overlap)))


def min_phase_distance(
    a: BotExtendedState | np.ndarray, b: BotExtendedState | np.ndarray
) -> float:
    """min over theta of ||a - e^{i theta} b||, which is sqrt(2 - 2|<a|b>|)."""
    va, vb = _amps(a), _amps(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(va, vb)))))


def dist_state(p: FiniteDistribution) -> BotExtendedState:
    """Map a distribution over n-bit strings to the state sum_x sqrt(p(x)) |x>."""
    keys = [k for k, v in p.probs.items() if v > 0.0]
    if not keys:
        raise ValueError("empty distribution")
    if BOT in p.probs and p.probs[BOT] > 0.0:
        raise ValueError("dist_state requires bitstring outcomes only")
    widths = {len(k) for k in keys}
    if len(widths) != 1 or not all(set(k) <= {"0", "1"} for k in keys):
        raise ValueError("outcomes must be equal-length bitstrings")
    n = widths.pop()
    amps = np.zeros(2**n, dtype=np.complex128)
    for k in keys:
        amps[int(k, 2)] = np.sqrt(p.probs[k])
    return BotExtendedState(n, amps / np.linalg.norm(amps))
