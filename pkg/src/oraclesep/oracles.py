"""Classical oracles: tables, lazy seeding, puncturing, and the S bundle.

Oracles map bitstrings to bitstrings and are deterministic once sampled.
⊥ is represented out of band as ``None`` (never as a bitstring), so range
collisions with real outputs are impossible.

The bundle ``S`` packages a random permutation ``f`` on λ-bit strings, a
random injective map ``obf`` from (circuit, randomness) pairs to 3λ-bit
strings, and an evaluator that inverts ``obf`` and runs the recovered
circuit.  Circuits here are the toy *classical* oracle-aided programs
encoded in λ bits; see :func:`classical_eval` for their semantics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qstate import FiniteDistribution
from .seeding import derive_rng, derive_seed

__all__ = [
    "ClassicalOracle",
    "TableOracle",
    "PermutationOracle",
    "LazyOracle",
    "PuncturedOracle",
    "OracleBundleS",
    "sample_bundle",
    "sample_permutation",
    "eval_oracle",
    "puncture",
    "obf_puncture_set",
    "classical_eval",
    "classical_functionally_equivalent",
    "find",
    "find_distribution",
    "dump_oracle",
    "load_oracle",
]

_OBF_RETRY_CAP = 10_000
MAX_BUNDLE_LAMBDA = 10


class ClassicalOracle:
    """Deterministic partial function from bitstrings to bitstrings."""

    kind = "abstract"
    in_width: int
    out_width: int

    def __call__(self, x: str) -> str | None:
        raise NotImplementedError

    def domain(self):
        for v in range(2**self.in_width):
            yield format(v, f"0{self.in_width}b")

    def materialize(self) -> "TableOracle":
        return TableOracle(
            {x: self(x) for x in self.domain()}, self.in_width, self.out_width
        )


@dataclass
class TableOracle(ClassicalOracle):
    table: dict[str, str | None]
    in_width: int
    out_width: int
    kind: str = field(default="table", init=False)

    def __call__(self, x: str) -> str | None:
        if len(x) != self.in_width:
            return None
        return self.table[x]


@dataclass
class LazyOracle(ClassicalOracle):
    """Uniformly random oracle realized by keyed hashing of each input.

    Repeated evaluation is identical by construction and never
    materializes a table.  Output bits are exactly uniform because the
    hash width is a multiple of the output width's power of two.
    """

    seed: int
    label: str
    in_width: int
    out_width: int
    kind: str = field(default="lazy-seeded", init=False)

    def __call__(self, x: str) -> str | None:
        if len(x) != self.in_width:
            return None
        value = derive_seed(self.seed, "lazy-oracle", self.label, x)
        return format(value & ((1 << self.out_width) - 1), f"0{self.out_width}b")


@dataclass
class PuncturedOracle(ClassicalOracle):
    """Wrapper agreeing with the base oracle off the punctured set X."""

    base: ClassicalOracle
    punctured: frozenset[str]
    kind: str = field(default="punctured", init=False)

    def __post_init__(self) -> None:
        self.in_width = self.base.in_width
        self.out_width = self.base.out_width
        self.punctured = frozenset(self.punctured)

    def __call__(self, x: str) -> str | None:
        if x in self.punctured:
            return None
        return self.base(x)


def puncture(oracle: ClassicalOracle, xs) -> PuncturedOracle:
    return PuncturedOracle(oracle, frozenset(xs))


@dataclass
class PermutationOracle(ClassicalOracle):
    """A permutation on λ-bit strings backed by an index array."""

    values: np.ndarray
    lam: int
    kind: str = field(default="table", init=False)

    def __post_init__(self) -> None:
        self.in_width = self.lam
        self.out_width = self.lam

    def __call__(self, x: str) -> str | None:
        if len(x) != self.lam or set(x) - {"0", "1"}:
            return None
        return format(int(self.values[int(x, 2)]), f"0{self.lam}b")

    @property
    def table(self) -> dict[str, str]:
        return {
            format(x, f"0{self.lam}b"): format(int(y), f"0{self.lam}b")
            for x, y in enumerate(self.values)
        }

    def materialize(self) -> TableOracle:
        return TableOracle(self.table, self.lam, self.lam)


def sample_permutation(lam: int, rng: np.random.Generator) -> PermutationOracle:
    """A uniformly random permutation on λ-bit strings (Fisher-Yates shuffle)."""
    return PermutationOracle(rng.permutation(2**lam), lam)


@dataclass
class OracleBundleS:
    """The oracle triple (f, obf, eval) materialized at one length.

    ``f`` is a permutation on λ-bit strings.  ``obf`` maps the 2λ-bit
    concatenation of circuit and randomness injectively into 3λ-bit
    strings.  ``eval`` inverts ``obf`` and runs the circuit against a
    pluggable permutation, defaulting to the bundle's own ``f``.
    Queries at lengths other than λ answer ⊥.
    """

    lam: int
    f: ClassicalOracle
    obf_table: dict[str, str]
    obf_inverse: dict[str, tuple[str, str]]

    def obf(self, circuit_bits: str, randomness: str) -> str | None:
        return self.obf_table.get(circuit_bits + randomness)

    def obf_oracle(self) -> TableOracle:
        """obf as a plain oracle on 2λ-bit strings, usable with puncture()."""
        return TableOracle(dict(self.obf_table), 2 * self.lam, 3 * self.lam)

    def image(self) -> frozenset[str]:
        return frozenset(self.obf_inverse)

    def eval(self, c_tilde: str, x: str, f_prime: ClassicalOracle | None = None) -> str | None:
        return eval_oracle(self, c_tilde, x, f_prime)


def sample_bundle(lam: int, seed: int) -> OracleBundleS:
    """Sample the bundle at length λ: f by Fisher-Yates, obf by rejection.

    Rejection retries are capped; at 3λ output bits the cap is
    unreachable for the supported sizes.
    """
    if lam > MAX_BUNDLE_LAMBDA:
        raise ValueError(f"λ={lam} too large for table materialization (cap {MAX_BUNDLE_LAMBDA})")
    f = sample_permutation(lam, derive_rng(seed, "bundle-f", lam))
    rng = derive_rng(seed, "bundle-obf", lam)
    obf_table: dict[str, str] = {}
    used: set[int] = set()
    out_bits = 3 * lam
    for key_val in range(2 ** (2 * lam)):
        for attempt in range(_OBF_RETRY_CAP):
            y = int(rng.integers(2**out_bits))
            if y not in used:
                used.add(y)
                break
        else:
            raise RuntimeError("obf rejection sampling exceeded its retry cap")
        obf_table[format(key_val, f"0{2 * lam}b")] = format(y, f"0{out_bits}b")
    obf_inverse = {v: (k[:lam], k[lam:]) for k, v in obf_table.items()}
    return OracleBundleS(lam, f, obf_table, obf_inverse)


def obf_puncture_set(lam: int, r_star: str) -> frozenset[str]:
    """The set (*, r*) of all obf inputs whose randomness part is r*."""
    return frozenset(
        format(c, f"0{lam}b") + r_star for c in range(2**lam)
    )


# --- toy classical oracle-aided circuits ---------------------------------------
#
# A circuit is any bitstring C of length >= 2.  Its input and output width
# both equal len(C); the leading two bits select the program:
#
#   00  output x                      (no oracle queries)
#   01  output f(x)                   (queries x)
#   10  output f(x) XOR s             (queries x; s = remaining bits, zero
#                                      padded on the right to the width)
#   11  output f(f(x))                (queries x, then f(x))
#
# Trailing bits beyond the opcode (and s for opcode 10) are semantically
# inert, which supplies distinct encodings of identical functions.  A ⊥
# answer from the oracle makes the circuit output ⊥.


def classical_eval(
    circuit_bits: str, oracle: ClassicalOracle, x: str
) -> tuple[str | None, list[str]]:
    """Run a toy classical circuit; returns (output or ⊥, queries made)."""
    width = len(circuit_bits)
    if width < 2 or len(x) != width:
        return None, []
    op = circuit_bits[:2]
    if op == "00":
        return x, []
    if op == "01":
        y = oracle(x)
        return y, [x]
    if op == "10":
        y = oracle(x)
        if y is None:
            return None, [x]
        s = (circuit_bits[2:] + "0" * width)[:width]
        out = "".join("1" if a != b else "0" for a, b in zip(y, s))
        return out, [x]
    y1 = oracle(x)
    if y1 is None:
        return None, [x]
    y2 = oracle(y1)
    return y2, [x, y1]


def classical_functionally_equivalent(
    c0: str, c1: str, oracle: ClassicalOracle
) -> bool:
    """Exhaustive input scan; widths must match for equivalence."""
    if len(c0) != len(c1):
        return False
    width = len(c0)
    for v in range(2**width):
        x = format(v, f"0{width}b")
        if classical_eval(c0, oracle, x)[0] != classical_eval(c1, oracle, x)[0]:
            return False
    return True


def eval_oracle(
    bundle: OracleBundleS, c_tilde: str, x: str, f_prime: ClassicalOracle | None = None
) -> str | None:
    """The bundle's evaluator: invert obf, then run the circuit on x."""
    hit = bundle.obf_inverse.get(c_tilde)
    if hit is None:
        return None
    circuit_bits, _ = hit
    if len(x) != len(circuit_bits):
        return None
    f = f_prime if f_prime is not None else bundle.f
    out, _ = classical_eval(circuit_bits, f, x)
    return out


# --- the Find procedure ---------------------------------------------------------

def _find_candidates(
    f_prime: ClassicalOracle, bundle: OracleBundleS, y: str
) -> list[str] | None:
    """Tracked queries for Find's circuit branch, or None when it yields ⊥."""
    lam = bundle.lam
    if len(y) < 3 * lam:
        return None
    c_tilde, x_tilde = y[: 3 * lam], y[3 * lam :]
    hit = bundle.obf_inverse.get(c_tilde)
    if hit is None:
        return None
    circuit_bits, _ = hit
    if len(x_tilde) != len(circuit_bits):
        return None
    _, queries = classical_eval(circuit_bits, f_prime, x_tilde)
    return queries or None


def find(
    f_prime: ClassicalOracle,
    bundle: OracleBundleS,
    y: str,
    rng: np.random.Generator,
) -> str | None:
    """Turn a point where the bundles differ into a point where f' differs.

    With probability 1/2 outputs y itself; otherwise parses y as an
    (obfuscation, input) pair, inverts obf with full knowledge of its
    table, replays the circuit against f', and outputs one of the tracked
    queries uniformly at random (⊥ when there is nothing to replay).
    """
    if rng.random() < 0.5:
        return y
    queries = _find_candidates(f_prime, bundle, y)
    if queries is None:
        return None
    return queries[int(rng.integers(len(queries)))]


def find_distribution(
    f_prime: ClassicalOracle, bundle: OracleBundleS, y: str
) -> FiniteDistribution:
    """Exact output distribution of :func:`find` over its coin flips."""
    from .qstate import BOT

    probs: dict[str, float] = {y: 0.5}
    queries = _find_candidates(f_prime, bundle, y)
    if queries is None:
        probs[BOT] = probs.get(BOT, 0.0) + 0.5
    else:
        share = 0.5 / len(queries)
        for q in queries:
            probs[q] = probs.get(q, 0.0) + share
    return FiniteDistribution(probs)


# --- fixture files ---------------------------------------------------------------

def dump_oracle(oracle: ClassicalOracle, path: str) -> None:
    """Write ``hex-input hex-output`` lines for every domain point."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# in_width={oracle.in_width} out_width={oracle.out_width}\n")
        for x in oracle.domain():
            y = oracle(x)
            ytext = "-" if y is None else format(int(y, 2), f"0{(oracle.out_width + 3) // 4}x")
            fh.write(f"{format(int(x, 2), f'0{(oracle.in_width + 3) // 4}x')} {ytext}\n")


def load_oracle(path: str) -> TableOracle:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        fields = dict(part.split("=") for part in header.lstrip("# ").split())
        in_width, out_width = int(fields["in_width"]), int(fields["out_width"])
        table: dict[str, str | None] = {}
        for line in fh:
            xs, ys = line.split()
            x = format(int(xs, 16), f"0{in_width}b")
            table[x] = None if ys == "-" else format(int(ys, 16), f"0{out_width}b")
    return TableOracle(table, in_width, out_width)
