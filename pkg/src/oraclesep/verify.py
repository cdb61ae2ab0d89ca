"""Executable checks for every quantitative bound used by the experiments.

Each checker computes the two sides of one inequality from independent
code paths (full simulation on one side, closed-form or enumeration on
the other) and returns a :class:`SlackReport`.  These are theorems, not
heuristics: a negative slack beyond tolerance on any instance is a
build-breaking event.

Expectations over the extraction algorithm's randomness (its choice of
query index and of measured value) are computed by exact enumeration
whenever the index-alphabet product is at most 2**12, and by seeded
sampling above that.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import OracleAidedCircuit, simulate, simulate_traced
from .cloners import col_state, dcol_distribution, dq_distribution, dq_query_mass
from .compressed import ProductDistribution, swap_with_bot_matrix
from .oracles import TableOracle
from .qstate import (
    ATOL,
    BOT,
    FiniteDistribution,
    dist_state,
    euclidean_distance,
    min_phase_distance,
    statistical_distance,
    trace_distance_pure,
)

__all__ = [
    "SlackReport",
    "AdversaryProgram",
    "ChainSpec",
    "random_adversary",
    "random_haar_state",
    "random_table_oracle",
    "perturb_oracle",
    "run_adversary",
    "adversary_query_marginals",
    "check_ow2h_comp",
    "check_ow2h_dist",
    "check_bbbv",
    "check_markov_tv",
    "check_distance_lemmas",
    "check_abcd",
    "check_real_distances",
    "check_dcol_bridge",
    "check_ccol_compat",
    "check_ncm_compat",
]

ENUMERATION_CAP = 2**12
SAMPLE_FALLBACK = 100_000


@dataclass(frozen=True)
class SlackReport:
    """One verified inequality, oriented as lhs <= rhs."""

    lemma_id: str
    instance: str
    lhs: float
    rhs: float
    seed: int | None = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -ATOL

    def csv_row(self) -> str:
        seed = "" if self.seed is None else str(self.seed)
        return (
            f"{self.lemma_id},{seed},{self.lhs!r},{self.rhs!r},"
            f"{self.slack!r},{str(self.passed).lower()}"
        )

    CSV_HEADER = "lemma_id,seed,lhs,rhs,slack,pass"


# --- adversaries against swap-style unitaries -----------------------------------

@dataclass(frozen=True)
class AdversaryProgram:
    """A q-query algorithm: unitaries A_0..A_q interleaved with oracle calls.

    The workspace factors as query register (dimension ``x_dim``) times
    ⊥-extended target register (``t_dim``) times auxiliary space; a query
    applies the controlled swap sum_x |x><x| (x) U_x on the first two.
    """

    x_dim: int
    t_dim: int
    aux_dim: int
    unitaries: tuple[np.ndarray, ...]

    @property
    def q(self) -> int:
        return len(self.unitaries) - 1

    @property
    def dim(self) -> int:
        return self.x_dim * self.t_dim * self.aux_dim


def random_haar_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_adversary(
    rng: np.random.Generator, x_dim: int, t_dim: int, aux_dim: int, q: int
) -> AdversaryProgram:
    dim = x_dim * t_dim * aux_dim
    return AdversaryProgram(
        x_dim, t_dim, aux_dim, tuple(_haar_unitary(rng, dim) for _ in range(q + 1))
    )


def _apply_swap_oracle(state: np.ndarray, prog: AdversaryProgram, swaps: list[np.ndarray]):
    cube = state.reshape(prog.x_dim, prog.t_dim, prog.aux_dim)
    out = np.empty_like(cube)
    for x in range(prog.x_dim):
        out[x] = swaps[x] @ cube[x]
    return out.reshape(-1)


def _swap_matrices(swap_states: list[np.ndarray]) -> list[np.ndarray]:
    return [swap_with_bot_matrix(phi) for phi in swap_states]


def run_adversary(prog: AdversaryProgram, swap_states: list[np.ndarray]) -> np.ndarray:
    """Purified final state of the program against the given swap family."""
    swaps = _swap_matrices(swap_states)
    state = np.zeros(prog.dim, dtype=np.complex128)
    state[0] = 1.0
    for i, a in enumerate(prog.unitaries):
        state = a @ state
        if i < prog.q:
            state = _apply_swap_oracle(state, prog, swaps)
    return state


def adversary_query_marginals(
    prog: AdversaryProgram, swap_states: list[np.ndarray]
) -> list[np.ndarray]:
    """The query-register distribution just before each call (run on the
    ``swap_states`` side, matching the extraction algorithm's view)."""
    swaps = _swap_matrices(swap_states)
    state = np.zeros(prog.dim, dtype=np.complex128)
    state[0] = 1.0
    marginals = []
    for i, a in enumerate(prog.unitaries):
        state = a @ state
        if i < prog.q:
            cube = np.abs(state.reshape(prog.x_dim, -1)) ** 2
            marginals.append(cube.sum(axis=1))
            state = _apply_swap_oracle(state, prog, swaps)
    return marginals


def _as_bot_extended(vec: np.ndarray, t_dim: int) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128)
    if v.shape != (t_dim,):
        raise ValueError(f"swap state has dimension {v.shape}, expected ({t_dim},)")
    return v


def check_ow2h_comp(
    prog: AdversaryProgram,
    states: list[np.ndarray],
    states_prime: list[np.ndarray],
    seed: int | None = None,
) -> SlackReport:
    """Distinguishing two swap families forces query weight on far pairs:

        E_{x <- B}[ ||phi_x - phi'_x|| ]  >=  Delta^2 / (32 q^2),

    where B halts the run before a uniformly chosen query and measures the
    query register, and Delta is the final-state distance.
    """
    q = prog.q
    phi = [_as_bot_extended(v, prog.t_dim) for v in states]
    phi_p = [_as_bot_extended(v, prog.t_dim) for v in states_prime]
    for v in phi + phi_p:
        if abs(v[-1]) > ATOL:
            raise ValueError("swap states must carry no ⊥ amplitude")
    delta = float(np.linalg.norm(run_adversary(prog, phi) - run_adversary(prog, phi_p)))
    marginals = adversary_query_marginals(prog, phi)
    dists = np.array([np.linalg.norm(a - b) for a, b in zip(phi, phi_p)])
    expectation = float(np.mean([m @ dists for m in marginals]))
    return SlackReport(
        "ow2h-swap", f"q={q},xdim={prog.x_dim}", delta**2 / (32 * q**2), expectation, seed
    )


def _compression_states(dist: ProductDistribution) -> list[np.ndarray]:
    """|D_x> over the full output alphabet plus ⊥, one per domain input."""
    t_dim = 2**dist.out_width + 1
    out = []
    for x in dist.domain:
        vec = np.zeros(t_dim, dtype=np.complex128)
        for z, p in dist.rows[x].probs.items():
            vec[int(z, 2)] = np.sqrt(p)
        out.append(vec)
    return out


def check_ow2h_dist(
    prog: AdversaryProgram,
    dist: ProductDistribution,
    dist_prime: ProductDistribution,
    seed: int | None = None,
) -> SlackReport:
    """The distribution form of the query-weight bound:

        E_{x <- B}[ SD(D_x, D'_x) ]  >=  Delta^2 / (16 q^2).
    """
    if dist.domain != dist_prime.domain:
        raise ValueError("distributions must share a domain")
    q = prog.q
    phi = _compression_states(dist)
    phi_p = _compression_states(dist_prime)
    if prog.t_dim != phi[0].shape[0]:
        raise ValueError("adversary target register does not fit the alphabet")
    delta = float(np.linalg.norm(run_adversary(prog, phi) - run_adversary(prog, phi_p)))
    marginals = adversary_query_marginals(prog, phi)
    sds = np.array(
        [
            statistical_distance(dist.rows[x], dist_prime.rows[x])
            for x in dist.domain
        ]
    )
    expectation = float(np.mean([m @ sds for m in marginals]))
    return SlackReport(
        "ow2h-dist", f"q={q},xdim={prog.x_dim}", delta**2 / (16 * q**2), expectation, seed
    )


# --- query-hybrid displacement bound --------------------------------------------

def oracle_differing_set(o: TableOracle, o_prime: TableOracle) -> set[str]:
    return {x for x in o.domain() if o(x) != o_prime(x)}


def check_bbbv(
    c: OracleAidedCircuit,
    o: TableOracle,
    o_prime: TableOracle,
    differing: set[str] | None = None,
    seed: int | None = None,
) -> SlackReport:
    """Final-state displacement against the running-time bound:

        || C^O|0> - C^O'|0> ||  <=  sqrt(T * eps),

    with T the circuit's step count and eps the traced query mass on the
    differing inputs.  The bound follows from the per-query hybrid bound
    2*sqrt(calls * eps) whenever the circuit spends at least four steps
    per oracle call, which the instance generators guarantee.
    """
    if differing is None:
        differing = oracle_differing_set(o, o_prime)
    final, trace = simulate_traced(c, o)
    final_prime = simulate(c, o_prime)
    eps = trace.mass_on(differing)
    lhs = euclidean_distance(final, final_prime)
    rhs = float(np.sqrt(c.running_time * eps))
    return SlackReport(
        "bbbv", f"steps={c.running_time},calls={c.oracle_calls},eps={eps:.6g}", lhs, rhs, seed
    )


# --- Markov pair bound ------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """A time-inhomogeneous Markov chain over states 0..k-1."""

    initial: np.ndarray
    transitions: tuple[np.ndarray, ...]

    @property
    def steps(self) -> int:
        return len(self.transitions)

    def joint_paths(self) -> dict[tuple[int, ...], float]:
        paths = {(s,): float(p) for s, p in enumerate(self.initial) if p > 0.0}
        for t in self.transitions:
            new: dict[tuple[int, ...], float] = {}
            for path, p in paths.items():
                for nxt, tp in enumerate(t[path[-1]]):
                    if tp > 0.0:
                        new[path + (nxt,)] = new.get(path + (nxt,), 0.0) + p * float(tp)
            paths = new
        return paths

    def pair_marginal(self, i: int) -> dict[tuple[int, int], float]:
        """Joint law of (v_{i-1}, v_i)."""
        out: dict[tuple[int, int], float] = {}
        for path, p in self.joint_paths().items():
            key = (path[i - 1], path[i])
            out[key] = out.get(key, 0.0) + p
        return out


def _dict_sd(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def check_markov_tv(v: ChainSpec, w: ChainSpec, seed: int | None = None) -> SlackReport:
    """Total variation of two chains against twice the summed pair gaps:

        SD(v, w)  <=  2 * sum_i SD((v_{i-1}, v_i), (w_{i-1}, w_i)).
    """
    if v.steps != w.steps:
        raise ValueError("chains must have the same length")
    lhs = _dict_sd(v.joint_paths(), w.joint_paths())
    rhs = 2.0 * sum(
        _dict_sd(v.pair_marginal(i), w.pair_marginal(i)) for i in range(1, v.steps + 1)
    )
    return SlackReport("markov-tv", f"steps={v.steps}", lhs, rhs, seed)


# --- pure-state and distribution distance lemmas -----------------------------------

def check_distance_lemmas(
    count: int, rng: np.random.Generator, dim: int = 8, seed: int | None = None
) -> list[SlackReport]:
    """Random pure pairs and distribution pairs through the three bounds:
    TD <= ED, TD >= min-phase-ED / sqrt(2), and ||dist(p) - dist(q)|| <=
    sqrt(2 SD(p, q))."""
    reports = []
    n_bits = int(np.log2(dim))
    for i in range(count):
        a = random_haar_state(rng, dim)
        b = random_haar_state(rng, dim)
        td = trace_distance_pure(a, b)
        reports.append(SlackReport("td-vs-ed", f"i={i}", td, euclidean_distance(a, b), seed))
        reports.append(
            SlackReport(
                "minphase-vs-td", f"i={i}", min_phase_distance(a, b) / np.sqrt(2), td, seed
            )
        )
        p = _random_distribution(rng, n_bits)
        q = _random_distribution(rng, n_bits)
        lhs = euclidean_distance(dist_state(p), dist_state(q))
        rhs = float(np.sqrt(2 * statistical_distance(p, q)))
        reports.append(SlackReport("ed-vs-sd", f"i={i}", lhs, rhs, seed))
    return reports


def _random_distribution(rng: np.random.Generator, n_bits: int) -> FiniteDistribution:
    weights = rng.dirichlet(np.ones(2**n_bits))
    return FiniteDistribution(
        {format(v, f"0{n_bits}b"): float(p) for v, p in enumerate(weights) if p > 0}
    )


def random_table_oracle(rng: np.random.Generator, in_width: int, out_width: int) -> TableOracle:
    table = {
        format(v, f"0{in_width}b"): format(int(rng.integers(2**out_width)), f"0{out_width}b")
        for v in range(2**in_width)
    }
    return TableOracle(table, in_width, out_width)


def perturb_oracle(
    rng: np.random.Generator, o: TableOracle, points: int
) -> tuple[TableOracle, set[str]]:
    """A copy of ``o`` re-answered on a random set of exactly ``points`` inputs."""
    domain = list(o.domain())
    chosen = [domain[i] for i in rng.choice(len(domain), size=points, replace=False)]
    table = dict(o.table)
    for x in chosen:
        y = o(x)
        while True:
            fresh = format(int(rng.integers(2**o.out_width)), f"0{o.out_width}b")
            if fresh != y:
                table[x] = fresh
                break
    return TableOracle(table, o.in_width, o.out_width), set(chosen)


# --- doubled-state distance claims ---------------------------------------------------

def check_abcd(key: bytes, o, o_prime, seed: int | None = None) -> SlackReport:
    """Doubling a state is 3-Lipschitz in the underlying output distance:

        || psi^O_C - psi^O'_C ||  <=  3 || C^O|0> - C^O'|0> ||.
    """
    cs, cs_p = col_state(key, o), col_state(key, o_prime)
    if cs.is_bot or cs_p.is_bot:
        lhs = 0.0 if cs.is_bot == cs_p.is_bot else 2.0
        return SlackReport("doubling-lipschitz", "invalid-key", lhs, 0.0, seed)
    from .circuits import canonical_decode

    circuit = canonical_decode(key)
    base = euclidean_distance(simulate(circuit, o), simulate(circuit, o_prime))
    lhs = euclidean_distance(cs.state, cs_p.state)
    return SlackReport("doubling-lipschitz", f"qubits={circuit.num_qubits}", lhs, 3.0 * base, seed)


def check_real_distances(
    a: np.ndarray, b: np.ndarray, seed: int | None = None
) -> SlackReport:
    """Taking entrywise absolute amplitudes never increases distance."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    lhs = float(np.linalg.norm(np.abs(a) - np.abs(b)))
    rhs = float(np.linalg.norm(a - b))
    return SlackReport("abs-amplitude-contraction", f"dim={a.shape[0]}", lhs, rhs, seed)


def check_dcol_bridge(key: bytes, o, o_prime, seed: int | None = None) -> SlackReport:
    """Sampled-output states are closer than the doubled states they came
    from (absolute-amplitude contraction applied to the doubled pair)."""
    cs, cs_p = col_state(key, o), col_state(key, o_prime)
    if cs.is_bot or cs_p.is_bot:
        raise ValueError("bridge check needs a key valid under both oracles")
    lhs = euclidean_distance(
        dist_state(dcol_distribution(key, o)), dist_state(dcol_distribution(key, o_prime))
    )
    rhs = euclidean_distance(cs.state, cs_p.state)
    return SlackReport("dcol-bridge", f"qubits={cs.doubled_qubits}", lhs, rhs, seed)


# --- end-to-end extraction bounds -----------------------------------------------------

def _swap_state_from_distribution(dist: FiniteDistribution, n_bits: int) -> np.ndarray:
    """sum_z sqrt(p(z)) |z> over n_bits outcomes, ⊥ key at the top index."""
    vec = np.zeros(2**n_bits + 1, dtype=np.complex128)
    for z, p in dist.probs.items():
        idx = 2**n_bits if z == BOT else int(z, 2)
        vec[idx] = np.sqrt(p)
    return vec


def _circuit_total_mass(key: bytes, oracle, differing: set[str]) -> float:
    """Total query mass on the differing set across a circuit's calls."""
    from .circuits import canonical_decode

    circuit = canonical_decode(key)
    if circuit is None or circuit.is_segmented:
        return 0.0
    try:
        _, trace = simulate_traced(circuit, oracle)
    except ValueError:
        return 0.0
    return trace.mass_on(differing)


def _compat_report(
    lemma_id: str,
    prog: AdversaryProgram,
    swap_states: list[np.ndarray],
    swap_states_prime: list[np.ndarray],
    per_key_mass: list[float],
    per_key_calls: list[int],
    rhs_fn,
    seed: int | None,
) -> SlackReport:
    epsilon = float(
        np.linalg.norm(run_adversary(prog, swap_states) - run_adversary(prog, swap_states_prime))
    )
    # One query budget covers both the adversary and the keyed circuits;
    # extraction indices beyond either run contribute nothing.
    q_eff = max(prog.q, max(per_key_calls, default=1), 1)
    marginals = adversary_query_marginals(prog, swap_states)
    hit = 0.0
    for m in marginals:
        for x, p in enumerate(m):
            hit += p * per_key_mass[x]
    hit /= q_eff**2
    rhs = rhs_fn(q_eff, hit)
    return SlackReport(lemma_id, f"q={q_eff},hit={hit:.6g}", epsilon, rhs, seed)


def check_ccol_compat(
    prog: AdversaryProgram,
    key_map: dict[int, bytes],
    o: TableOracle,
    o_prime: TableOracle,
    payload_bits: int,
    seed: int | None = None,
) -> SlackReport:
    """One-way-to-hiding compatibility of the sampled-collision oracle:

        eps  <=  4 sqrt(6) q^{5/4} Pr[B hits a differing input]^{1/4},

    where B measures a random query of the adversary to learn a circuit
    key, then measures a random query of that circuit run against O.
    """
    differing = oracle_differing_set(o, o_prime)
    swap, swap_p, masses, calls = [], [], [], []
    from .circuits import canonical_decode

    for x in range(prog.x_dim):
        key = key_map[x]
        swap.append(_swap_state_from_distribution(dcol_distribution(key, o), payload_bits))
        swap_p.append(
            _swap_state_from_distribution(dcol_distribution(key, o_prime), payload_bits)
        )
        masses.append(_circuit_total_mass(key, o, differing))
        circuit = canonical_decode(key)
        calls.append(0 if circuit is None else circuit.oracle_calls)
    return _compat_report(
        "col-compat",
        prog,
        swap,
        swap_p,
        masses,
        calls,
        lambda q, hit: 4 * np.sqrt(6) * q**1.25 * hit**0.25,
        seed,
    )


def check_ncm_compat(
    prog: AdversaryProgram,
    key_map: dict[int, bytes],
    o: TableOracle,
    o_prime: TableOracle,
    outcome_bits: int,
    seed: int | None = None,
) -> SlackReport:
    """The same compatibility bound for the non-collapsing sampler:

        eps  <=  sqrt(4/3) q^2 Pr[B hits a differing input]^{1/4}.
    """
    differing = oracle_differing_set(o, o_prime)
    from .circuits import canonical_decode

    swap, swap_p, masses, calls = [], [], [], []
    for x in range(prog.x_dim):
        key = key_map[x]
        circuit = canonical_decode(key)
        if circuit is None or not circuit.is_segmented:
            bot = np.zeros(2**outcome_bits + 1, dtype=np.complex128)
            bot[-1] = 1.0
            swap.append(bot.copy())
            swap_p.append(bot.copy())
            masses.append(0.0)
            calls.append(0)
            continue
        swap.append(
            _swap_state_from_distribution(dq_distribution(circuit, o), outcome_bits)
        )
        swap_p.append(
            _swap_state_from_distribution(dq_distribution(circuit, o_prime), outcome_bits)
        )
        masses.append(sum(dq_query_mass(circuit, o, differing)))
        calls.append(circuit.oracle_calls)
    return _compat_report(
        "ncm-compat",
        prog,
        swap,
        swap_p,
        masses,
        calls,
        lambda q, hit: np.sqrt(4.0 / 3.0) * q**2 * hit**0.25,
        seed,
    )
