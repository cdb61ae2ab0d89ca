"""End-to-end separation experiments at desk scale.

* The collision extractor: one query to the sampled-collision oracle on
  the puzzle sampler's unitary reproduces the ideal collision
  distribution exactly.
* The cloner: one swap query on |gen>|⊥>, then a serial-number
  measurement, duplicates any generator's output state.
* The permutation-inversion hybrid games over the punctured bundles, and
  the obfuscation distinguishing game with its punctured-challenge
  symmetry check.
* The collision finder driven by non-collapsing samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuits import GateOp, OracleAidedCircuit, canonical_encode, simulate
from .cloners import (
    _branch_decomposition,
    col_state,
    dcol_distribution,
    q_sample,
    qcol_apply,
)
from .oracles import (
    ClassicalOracle,
    OracleBundleS,
    classical_functionally_equivalent,
    eval_oracle,
    find,
    obf_puncture_set,
    puncture,
    sample_permutation,
)
from .qstate import (
    BotExtendedState,
    FiniteDistribution,
    measure,
)
from .seeding import derive_rng

__all__ = [
    "PuzzleSampler",
    "LightningScheme",
    "ExperimentRecord",
    "dcrpuzz_extract",
    "extractor_distribution",
    "ideal_collision_distribution",
    "lightning_clone",
    "lightning_rates",
    "HYBRIDS",
    "owp_hybrid_experiment",
    "random_guess_adversary",
    "exhaustive_search_adversary",
    "probe_adversary",
    "find_augmented",
    "IOAdversary",
    "io_game",
    "check_challenge_symmetry",
    "collision_via_q",
    "linear_prep_circuit",
]


# --- distributional collision puzzles --------------------------------------------

@dataclass(frozen=True)
class PuzzleSampler:
    """A sampling unitary with declared puzzle / answer / junk registers."""

    pp: str
    circuit: OracleAidedCircuit
    puzz: tuple[int, ...]
    ans: tuple[int, ...]
    junk: tuple[int, ...] = ()

    def col_key(self) -> bytes:
        """The circuit keyed for collision queries: A = puzzle register,
        B = answer plus junk."""
        keyed = OracleAidedCircuit(
            self.circuit.num_qubits, self.circuit.gates, self.puzz, self.ans + self.junk
        )
        return canonical_encode(keyed)


def dcrpuzz_extract(
    sampler: PuzzleSampler,
    oracle,
    rng: np.random.Generator | None = None,
    *,
    master_seed: int | None = None,
) -> tuple[str, str, str]:
    """One collision-oracle query, then drop the junk registers."""
    from .cloners import col_sample

    result = col_sample(sampler.col_key(), oracle, rng, master_seed=master_seed)
    if result is None:
        raise RuntimeError("sampler circuit unexpectedly keyed the ⊥ branch")
    na, nb, nj = len(sampler.puzz), len(sampler.ans), len(sampler.junk)
    puzz = result[:na]
    ans = result[na : na + nb]
    ans_prime = result[na + nb + nj : na + 2 * nb + nj]
    return puzz, ans, ans_prime


def extractor_distribution(sampler: PuzzleSampler, oracle) -> FiniteDistribution:
    """Exact law of the extractor's (puzz, ans, ans') output."""
    na, nb, nj = len(sampler.puzz), len(sampler.ans), len(sampler.junk)
    full = dcol_distribution(sampler.col_key(), oracle)
    out: dict[str, float] = {}
    for z, p in full.probs.items():
        key = z[:na] + z[na : na + nb] + z[na + nb + nj : na + 2 * nb + nj]
        out[key] = out.get(key, 0.0) + p
    return FiniteDistribution(out)


def ideal_collision_distribution(sampler: PuzzleSampler, oracle) -> FiniteDistribution:
    """Run the sampler, then resample the answer conditioned on the puzzle:

        (puzz, ans) <- Samp;  ans' ~ Pr[ans' | puzz];  output all three.
    """
    out_state = simulate(sampler.circuit, oracle)
    n = sampler.circuit.num_qubits
    joint: dict[tuple[str, str], float] = {}
    amps = out_state.string_part()
    for idx, amp in enumerate(amps):
        p = abs(amp) ** 2
        if p <= 0.0:
            continue
        bits = format(idx, f"0{n}b")
        puzz = "".join(bits[i] for i in sampler.puzz)
        ans = "".join(bits[i] for i in sampler.ans)
        joint[(puzz, ans)] = joint.get((puzz, ans), 0.0) + p
    puzz_marginal: dict[str, float] = {}
    for (puzz, _), p in joint.items():
        puzz_marginal[puzz] = puzz_marginal.get(puzz, 0.0) + p
    out: dict[str, float] = {}
    for (puzz, ans), p in joint.items():
        for (puzz2, ans2), p2 in joint.items():
            if puzz2 != puzz:
                continue
            key = puzz + ans + ans2
            out[key] = out.get(key, 0.0) + p * p2 / puzz_marginal[puzz]
    return FiniteDistribution(out)


# --- quantum lightning -------------------------------------------------------------

@dataclass(frozen=True)
class LightningScheme:
    """Toy scheme: a generation unitary plus the exact projective verifier
    onto the bolt state belonging to each serial number."""

    circuit: OracleAidedCircuit
    serial: tuple[int, ...]
    bolt: tuple[int, ...]

    def key(self) -> bytes:
        keyed = OracleAidedCircuit(
            self.circuit.num_qubits, self.circuit.gates, self.serial, self.bolt
        )
        return canonical_encode(keyed)

    def bolt_states(self, oracle) -> dict[str, np.ndarray]:
        out = simulate(self.circuit, oracle)
        return {
            s: psi for s, _, psi in _branch_decomposition(out, self.serial, self.bolt)
        }

    def verify_probability(self, oracle, s: str, state: np.ndarray) -> float:
        """The rank-one verifier: squared overlap with the reference bolt."""
        bolts = self.bolt_states(oracle)
        if s not in bolts:
            return 0.0
        return float(abs(np.vdot(bolts[s], state)) ** 2)


def lightning_clone(
    scheme: LightningScheme, oracle, rng: np.random.Generator
) -> tuple[str, np.ndarray]:
    """Swap |⊥> to the doubled state, measure the serial register, and
    return (serial, joint two-bolt state over B x B')."""
    key = scheme.key()
    cs = col_state(key, oracle)
    if cs.is_bot:
        raise RuntimeError("generator circuit unexpectedly keyed the ⊥ branch")
    payload = BotExtendedState.bot_state(cs.doubled_qubits)
    keyed = qcol_apply({key: payload.amplitudes}, oracle)
    doubled = BotExtendedState(cs.doubled_qubits, keyed[key], has_bot=True)
    s, post = measure(doubled, tuple(range(cs.a_width)), rng)
    joint = post.string_part().reshape(2**cs.a_width, -1)[int(s, 2) if s else 0]
    return s, joint


def lightning_rates(scheme: LightningScheme, oracle) -> tuple[float, float]:
    """(both cloned copies verify, generator's own copy verifies), exactly.

    Both rates enumerate the serial branches; no sampling is involved.
    """
    bolts = scheme.bolt_states(oracle)
    key = scheme.key()
    cs = col_state(key, oracle)
    both = 0.0
    gen = 0.0
    for s, p, psi in cs.branches:
        ref = bolts[s]
        joint = np.outer(psi, psi).reshape(-1)
        pair_ref = np.outer(ref, ref).reshape(-1)
        both += p * abs(np.vdot(pair_ref, joint)) ** 2
        gen += p * abs(np.vdot(ref, psi)) ** 2
    return both, gen


# --- permutation inversion hybrids ---------------------------------------------------

HYBRIDS = ("s1", "s2", "s3", "s4")


def _puncture_set(hybrid: str, x: str, x_prime: str) -> set[str]:
    return {
        "s1": {x_prime},
        "s2": {x, x_prime},
        "s3": {x},
        "s4": set(),
    }[hybrid]


def _differ_set(hybrid: str, x: str, x_prime: str) -> set[str]:
    """Where the permutation part differs from the neighbouring hybrid."""
    return {"s1": {x}, "s2": {x_prime}, "s3": {x}, "s4": {x}}[hybrid]


@dataclass
class ExperimentRecord:
    """Seeds, parameters, and measured rates of one experiment run."""

    name: str
    seed: int
    lam: int
    trials: int
    params: dict[str, str] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def rate(self, event: str) -> float:
        return self.counts.get(event, 0) / self.trials

    def interval(self, event: str) -> tuple[float, float]:
        """Three-sigma binomial interval around the measured rate."""
        p = self.rate(event)
        half = 3.0 * np.sqrt(max(p * (1 - p), 1e-12) / self.trials)
        return p - half, p + half

    def rows(self) -> list[dict[str, object]]:
        out = []
        for event in sorted(self.counts):
            lo, hi = self.interval(event)
            out.append(
                {
                    "experiment": self.name,
                    "seed": self.seed,
                    "lambda": self.lam,
                    "trials": self.trials,
                    "event": event,
                    "rate": self.rate(event),
                    "ci_low": lo,
                    "ci_high": hi,
                    **self.params,
                }
            )
        return out


Adversary = Callable[[str, ClassicalOracle, np.random.Generator], str]


def random_guess_adversary(y: str, oracle: ClassicalOracle, rng: np.random.Generator) -> str:
    return format(int(rng.integers(2 ** len(y))), f"0{len(y)}b")


def exhaustive_search_adversary(
    y: str, oracle: ClassicalOracle, rng: np.random.Generator
) -> str:
    """Query-unbounded inversion by scanning the whole domain."""
    for v in range(2 ** len(y)):
        x = format(v, f"0{len(y)}b")
        if oracle(x) == y:
            return x
    return random_guess_adversary(y, oracle, rng)


def probe_adversary(y: str, oracle: ClassicalOracle, rng: np.random.Generator) -> str:
    """A fixed low-query strategy whose output depends only on its view.

    It probes the oracle at the challenge and its bitwise complement and
    hashes the transcript into a guess; with the challenge point itself
    punctured away, its view is symmetric under swapping the planted
    preimages.
    """
    from .seeding import derive_seed

    flipped = "".join("1" if b == "0" else "0" for b in y)
    a1 = oracle(y) or ""
    a2 = oracle(flipped) or ""
    digest = derive_seed(0xC0FFEE, "probe", y, a1, a2)
    return format(digest & (2 ** len(y) - 1), f"0{len(y)}b")


def find_augmented(base: Adversary, bundle: OracleBundleS) -> Adversary:
    """Wrap an adversary with the disagreement-extraction postprocessor."""

    def wrapped(y: str, oracle: ClassicalOracle, rng: np.random.Generator) -> str:
        out = base(y, oracle, rng)
        refined = find(oracle, bundle, out, rng)
        return refined if refined is not None else out

    return wrapped


def owp_hybrid_experiment(
    lam: int,
    hybrid: str,
    adversary: Adversary,
    trials: int,
    seed: int,
    challenge: str = "x",
    bundle: OracleBundleS | None = None,
) -> ExperimentRecord:
    """Run the inversion game with a punctured permutation oracle.

    Per trial a fresh permutation and the pair (x, x') are drawn; the
    adversary sees f(x) (or f(x') when ``challenge="xprime"``) and query
    access to the hybrid's punctured permutation.  When a bundle is
    supplied, its obfuscation table stays fixed across trials and outputs
    that parse as (obfuscation, input) pairs are also checked against the
    evaluator's disagreement set.
    """
    if hybrid not in HYBRIDS:
        raise ValueError(f"unknown hybrid {hybrid!r}")
    counts = {"out_eq_x": 0, "out_eq_xprime": 0, "out_in_differ": 0}
    for t in range(trials):
        rng = derive_rng(seed, "owp", hybrid, challenge, t)
        f = sample_permutation(lam, rng)
        x = format(int(rng.integers(2**lam)), f"0{lam}b")
        x_prime = format(int(rng.integers(2**lam)), f"0{lam}b")
        punctured = puncture(f, _puncture_set(hybrid, x, x_prime))
        y = f(x) if challenge == "x" else f(x_prime)
        out = adversary(y, punctured, rng)
        if out == x:
            counts["out_eq_x"] += 1
        if out == x_prime:
            counts["out_eq_xprime"] += 1
        differ = _differ_set(hybrid, x, x_prime)
        in_differ = out in differ
        if not in_differ and bundle is not None and len(out) >= 3 * bundle.lam:
            c_tilde, x_in = out[: 3 * bundle.lam], out[3 * bundle.lam :]
            neighbour = puncture(f, _puncture_set_neighbour(hybrid, x, x_prime))
            left = eval_oracle(bundle, c_tilde, x_in, punctured)
            right = eval_oracle(bundle, c_tilde, x_in, neighbour)
            in_differ = left != right
        if in_differ:
            counts["out_in_differ"] += 1
    record = ExperimentRecord(
        name="owp-hybrid",
        seed=seed,
        lam=lam,
        trials=trials,
        params={"hybrid": hybrid, "challenge": challenge},
        counts=counts,
    )
    return record


def _puncture_set_neighbour(hybrid: str, x: str, x_prime: str) -> set[str]:
    neighbour = {"s1": "s2", "s2": "s3", "s3": "s4", "s4": "s3"}[hybrid]
    return _puncture_set(neighbour, x, x_prime)


# --- the obfuscation game -------------------------------------------------------------

@dataclass
class IOAdversary:
    propose: Callable[[int, np.random.Generator], tuple[str, str]]
    guess: Callable[[str, OracleBundleS, np.random.Generator], str]


def io_game(
    b: int,
    lam: int,
    adversary: IOAdversary,
    bundle: OracleBundleS,
    rng: np.random.Generator,
) -> str | None:
    """The distinguishing game; returns the guess bit, or None (⊥) when the
    proposal is malformed or functionally inequivalent."""
    c0, c1 = adversary.propose(lam, rng)
    if len(c0) != lam or len(c1) != lam:
        return None
    if set(c0 + c1) - {"0", "1"}:
        return None
    if not classical_functionally_equivalent(c0, c1, bundle.f):
        return None
    r = format(int(rng.integers(2**lam)), f"0{lam}b")
    challenge = bundle.obf(c1 if b else c0, r)
    return adversary.guess(challenge, bundle, rng)


@dataclass(frozen=True)
class ChallengeSymmetryReport:
    equivalent: bool
    punctured_views_match: bool
    eval_tables_match: bool
    challenges_swapped: bool

    @property
    def identical_distributions(self) -> bool:
        """Swapping the two challenge entries is a measure-preserving
        bijection on bundles that fixes the adversary's view, so the b=0
        and b=1 challenge distributions coincide exactly."""
        return (
            self.equivalent
            and self.punctured_views_match
            and self.eval_tables_match
            and self.challenges_swapped
        )


def _swap_obf_entries(bundle: OracleBundleS, c0: str, c1: str, r: str) -> OracleBundleS:
    table = dict(bundle.obf_table)
    table[c0 + r], table[c1 + r] = table[c1 + r], table[c0 + r]
    inverse = {v: (k[: bundle.lam], k[bundle.lam :]) for k, v in table.items()}
    return OracleBundleS(bundle.lam, bundle.f, table, inverse)


def check_challenge_symmetry(
    bundle: OracleBundleS, c0: str, c1: str, r_star: str
) -> ChallengeSymmetryReport:
    """Exact comparison of the two challenge-string distributions when the
    obfuscator is punctured on every input carrying the challenge
    randomness.

    Everything visible to the adversary (the permutation, the punctured
    obfuscation table, and the full evaluator table) is checked to be
    invariant under swapping the two challenge entries; the challenge
    strings themselves exchange, which makes the two distributions equal
    point for point.
    """
    lam = bundle.lam
    if lam > 4:
        raise ValueError("full evaluator-table comparison is capped at λ=4")
    equivalent = classical_functionally_equivalent(c0, c1, bundle.f)
    swapped = _swap_obf_entries(bundle, c0, c1, r_star)

    removed = obf_puncture_set(lam, r_star)
    view = {k: v for k, v in bundle.obf_table.items() if k not in removed}
    view_swapped = {k: v for k, v in swapped.obf_table.items() if k not in removed}
    punctured_match = view == view_swapped

    tables_match = True
    for c_tilde in sorted(bundle.image()):
        for v in range(2**lam):
            x = format(v, f"0{lam}b")
            if eval_oracle(bundle, c_tilde, x) != eval_oracle(swapped, c_tilde, x):
                tables_match = False
                break
        if not tables_match:
            break

    challenges_swapped = (
        swapped.obf(c0, r_star) == bundle.obf(c1, r_star)
        and swapped.obf(c1, r_star) == bundle.obf(c0, r_star)
    )
    return ChallengeSymmetryReport(equivalent, punctured_match, tables_match, challenges_swapped)


# --- collision finding through non-collapsing samples -----------------------------------

def linear_prep_circuit(matrix: list[list[int]], n_in: int) -> OracleAidedCircuit:
    """Gates preparing sum_x |x>|Ax> for a GF(2) matrix A (rows = output bits)."""
    m = len(matrix)
    gates = [GateOp.gate("H", j) for j in range(n_in)]
    for i, row in enumerate(matrix):
        for j, bit in enumerate(row):
            if bit:
                gates.append(GateOp.gate("CNOT", j, n_in + i))
    return OracleAidedCircuit(
        n_in + m, tuple(gates), tuple(range(n_in)), tuple(range(n_in, n_in + m))
    )


def collision_via_q(
    prep: OracleAidedCircuit,
    input_reg: tuple[int, ...],
    image_reg: tuple[int, ...],
    rng: np.random.Generator,
    oracle=None,
    sampler=q_sample,
) -> tuple[str, str] | None:
    """Collapse the image register, then take two non-collapsing samples.

    Returns two preimages of one image value, or None when the samples
    coincide (the caller retries).
    """
    gates = prep.gates + (
        GateOp.measurement(*image_reg),
        GateOp.measurement(),
    )
    program = OracleAidedCircuit(prep.num_qubits, gates, prep.split_a, prep.split_b)
    transcript = sampler(program, oracle, rng)
    v1, v2 = transcript.outcomes
    x1 = "".join(v1[i] for i in input_reg)
    x2 = "".join(v2[i] for i in input_reg)
    if x1 == x2:
        return None
    return x1, x2
