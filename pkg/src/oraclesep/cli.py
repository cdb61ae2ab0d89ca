"""Batch entry point: verification suites, demos, and hybrid experiments.

Every run is driven by a 64-bit master seed (flag ``--seed`` or the
``ORACLESEP_SEED`` environment variable); per-instance randomness is
derived by keyed hashing, so identical configurations produce identical
output bytes regardless of worker count.

Exit status is nonzero exactly when an exact check fails; statistical
checks report their three-sigma intervals and only fail the run under
``--stats-as-errors``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuits import canonical_encode, random_circuit
from .compressed import ProductDistribution
from .oracles import sample_bundle
from .qstate import FiniteDistribution, statistical_distance
from .seeding import derive_rng, derive_seed, rng_from
from .separations import (
    IOAdversary,
    LightningScheme,
    PuzzleSampler,
    check_challenge_symmetry,
    collision_via_q,
    extractor_distribution,
    ideal_collision_distribution,
    io_game,
    lightning_rates,
    linear_prep_circuit,
    owp_hybrid_experiment,
    probe_adversary,
    random_guess_adversary,
)
from .verify import (
    ChainSpec,
    SlackReport,
    check_abcd,
    check_bbbv,
    check_dcol_bridge,
    check_distance_lemmas,
    check_markov_tv,
    check_ow2h_comp,
    check_ow2h_dist,
    perturb_oracle,
    random_adversary,
    random_table_oracle,
)

__all__ = ["RunConfig", "run", "main"]

DEFAULT_SEED = 0
VERIFY_SUITES = ("all", "ow2h", "distances", "bbbv", "markov", "abcd")
DEMOS = ("dcrpuzz", "lightning", "pdqp-collision")


@dataclass
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    lam: int = 8
    q: int = 4
    trials: int = 100
    qubits: int = 4
    out: str | None = None
    fmt: str = "csv"
    jobs: int = 1
    suite: str = "all"
    hybrid: str = "s4"
    stats_as_errors: bool = False
    extra: dict[str, str] = field(default_factory=dict)


def _pmap(fn, count: int, jobs: int) -> list:
    """Order-stable map over instance indices, optionally threaded."""
    if jobs <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(count)))


# --- verify suites ----------------------------------------------------------------

def _ow2h_instance(seed: int, i: int, q_max: int = 4) -> list[SlackReport]:
    rng = derive_rng(seed, "verify-ow2h", i)
    q = int(rng.integers(1, max(2, q_max + 1)))
    x_dim = int(rng.integers(2, 5))
    t_dim = int(rng.integers(3, 6))
    prog = random_adversary(rng, x_dim, t_dim, int(rng.integers(1, 3)), q)

    def bot_free(r):
        v = r.normal(size=t_dim - 1) + 1j * r.normal(size=t_dim - 1)
        return np.concatenate([v / np.linalg.norm(v), [0.0]])

    comp = check_ow2h_comp(
        prog, [bot_free(rng) for _ in range(x_dim)], [bot_free(rng) for _ in range(x_dim)], seed=i
    )
    out_w = int(rng.integers(1, 3))
    rows = {}
    for v in range(2):
        weights = rng.dirichlet(np.ones(2**out_w))
        rows[format(v, "01b")] = FiniteDistribution(
            {format(z, f"0{out_w}b"): float(p) for z, p in enumerate(weights) if p > 0}
        )
    rows_p = {}
    for v in range(2):
        weights = rng.dirichlet(np.ones(2**out_w))
        rows_p[format(v, "01b")] = FiniteDistribution(
            {format(z, f"0{out_w}b"): float(p) for z, p in enumerate(weights) if p > 0}
        )
    d, d_p = ProductDistribution.from_rows(rows), ProductDistribution.from_rows(rows_p)
    prog2 = random_adversary(rng, 2, 2**out_w + 1, 2, q)
    dist_rep = check_ow2h_dist(prog2, d, d_p, seed=i)
    return [comp, dist_rep]


def _bbbv_instance(seed: int, i: int) -> list[SlackReport]:
    rng = derive_rng(seed, "verify-bbbv", i)
    in_w = int(rng.integers(1, 3))
    out_w = int(rng.integers(1, 3))
    n = in_w + out_w + int(rng.integers(0, 2))
    calls = int(rng.integers(1, 6))
    c = random_circuit(rng, n, oracle_calls=calls, query_width=in_w, response_width=out_w)
    o = random_table_oracle(rng, in_w, out_w)
    o_prime, differ = perturb_oracle(rng, o, int(rng.integers(1, 2**in_w + 1)))
    return [check_bbbv(c, o, o_prime, differ, seed=i)]


def _markov_instance(seed: int, i: int) -> list[SlackReport]:
    rng = derive_rng(seed, "verify-markov", i)
    k = int(rng.integers(2, 5))

    def chain():
        init = rng.dirichlet(np.ones(k))
        steps = tuple(np.array([rng.dirichlet(np.ones(k)) for _ in range(k)]) for _ in range(3))
        return ChainSpec(init, steps)

    return [check_markov_tv(chain(), chain(), seed=i)]


def _abcd_instance(seed: int, i: int, qubit_cap: int = 4, with_bridge: bool = False) -> list[SlackReport]:
    rng = derive_rng(seed, "verify-abcd", i)
    in_w = int(rng.integers(1, 3))
    out_w = int(rng.integers(1, 3))
    n = min(qubit_cap, in_w + out_w)
    c = random_circuit(
        rng, n, oracle_calls=int(rng.integers(0, 3)), query_width=in_w,
        response_width=min(out_w, n - in_w) or 1,
    )
    oracle_out_w = len(next((g.response for g in c.gates if g.name == "ORACLE"), ())) or out_w
    o = random_table_oracle(rng, in_w, oracle_out_w)
    o_prime, _ = perturb_oracle(rng, o, 1)
    key = canonical_encode(c)
    reports = [check_abcd(key, o, o_prime, seed=i)]
    if with_bridge:
        reports.append(check_dcol_bridge(key, o, o_prime, seed=i))
    return reports


def _run_verify(cfg: RunConfig) -> tuple[list[dict], int, int]:
    suites = {
        "ow2h": lambda i: _ow2h_instance(cfg.seed, i, cfg.q),
        "bbbv": lambda i: _bbbv_instance(cfg.seed, i),
        "markov": lambda i: _markov_instance(cfg.seed, i),
        "abcd": lambda i: _abcd_instance(
            cfg.seed, i, min(4, cfg.qubits), with_bridge=cfg.suite == "all"
        ),
    }
    reports: list[SlackReport] = []
    wanted = VERIFY_SUITES[1:] if cfg.suite == "all" else (cfg.suite,)
    for name in wanted:
        if name == "distances":
            rng = derive_rng(cfg.seed, "verify-distances")
            reports.extend(check_distance_lemmas(cfg.trials, rng, seed=cfg.seed))
            continue
        batches = _pmap(suites[name], cfg.trials, cfg.jobs)
        for batch in batches:
            reports.extend(batch)
    rows = [
        {
            "lemma_id": r.lemma_id,
            "seed": r.seed if r.seed is not None else cfg.seed,
            "lhs": float(r.lhs),
            "rhs": float(r.rhs),
            "slack": float(r.slack),
            "pass": r.passed,
        }
        for r in reports
    ]
    exact_failures = sum(1 for r in reports if not r.passed)
    return rows, exact_failures, 0


# --- demos -------------------------------------------------------------------------

def _toy_samplers(seed: int, count: int) -> list[tuple[PuzzleSampler, object]]:
    out = []
    for i in range(count):
        rng = derive_rng(seed, "demo-sampler", i)
        n = int(rng.integers(2, 5))
        calls = int(rng.integers(0, 2))
        c = random_circuit(rng, n, oracle_calls=calls, query_width=1, response_width=1)
        o = random_table_oracle(rng, 1, 1) if calls else None
        wires = list(rng.permutation(n))
        na = int(rng.integers(1, n))
        nb = int(rng.integers(1, n - na + 1))
        sampler = PuzzleSampler(
            f"pp{i}", c, tuple(wires[:na]), tuple(wires[na : na + nb]), tuple(wires[na + nb :])
        )
        out.append((sampler, o))
    return out


def _run_demo(cfg: RunConfig) -> tuple[list[dict], int, int]:
    rows: list[dict] = []
    exact_failures = 0
    stat_failures = 0
    if cfg.command == "dcrpuzz":
        for i, (sampler, o) in enumerate(_toy_samplers(cfg.seed, max(1, cfg.trials // 5))):
            sd = statistical_distance(
                extractor_distribution(sampler, o), ideal_collision_distribution(sampler, o)
            )
            ok = sd <= 1e-9
            exact_failures += 0 if ok else 1
            rows.append(
                {"demo": "dcrpuzz", "seed": cfg.seed, "instance": i, "sd": float(sd), "pass": ok}
            )
    elif cfg.command == "lightning":
        for i in range(max(1, cfg.trials // 5)):
            rng = derive_rng(cfg.seed, "demo-lightning", i)
            n = int(rng.integers(2, min(cfg.qubits, 4) + 1))
            c = random_circuit(rng, n, oracle_calls=0)
            wires = list(rng.permutation(n))
            na = int(rng.integers(1, n))
            scheme = LightningScheme(c, tuple(wires[:na]), tuple(wires[na:]))
            both, gen = lightning_rates(scheme, None)
            ok = abs(both - gen) <= 1e-9
            exact_failures += 0 if ok else 1
            rows.append(
                {
                    "demo": "lightning",
                    "seed": cfg.seed,
                    "instance": i,
                    "both_verify": float(both),
                    "generator_verify": float(gen),
                    "pass": ok,
                }
            )
    else:  # pdqp-collision
        matrix = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
        prep = linear_prep_circuit(matrix, 3)
        rng = derive_rng(cfg.seed, "demo-pdqp")
        hits = 0
        for _ in range(cfg.trials):
            if collision_via_q(prep, (0, 1, 2), (3, 4, 5), rng) is not None:
                hits += 1
        rate = hits / cfg.trials
        half = 3.0 * float(np.sqrt(0.25 / cfg.trials))
        ok = abs(rate - 0.5) <= half
        stat_failures += 0 if ok else 1
        rows.append(
            {
                "demo": "pdqp-collision",
                "seed": cfg.seed,
                "trials": cfg.trials,
                "rate": rate,
                "expected": 0.5,
                "ci_low": rate - half,
                "ci_high": rate + half,
                "pass": ok,
            }
        )
    return rows, exact_failures, stat_failures


# --- experiments --------------------------------------------------------------------

def _run_owp(cfg: RunConfig) -> tuple[list[dict], int, int]:
    rows: list[dict] = []
    stat_failures = 0
    adversaries = {"random-guess": random_guess_adversary, "probe": probe_adversary}
    for name, adv in adversaries.items():
        record = owp_hybrid_experiment(cfg.lam, cfg.hybrid, adv, cfg.trials, cfg.seed)
        for row in record.rows():
            row["adversary"] = name
            row["rate"] = float(row["rate"])
            row["ci_low"] = float(row["ci_low"])
            row["ci_high"] = float(row["ci_high"])
            rows.append(row)
        if name == "random-guess" and cfg.hybrid == "s4":
            lo, hi = record.interval("out_eq_x")
            if not lo <= 2.0**-cfg.lam <= hi:
                stat_failures += 1
    return rows, 0, stat_failures


def _run_io_game(cfg: RunConfig) -> tuple[list[dict], int, int]:
    lam = min(cfg.lam, 4)
    bundle = sample_bundle(lam, derive_seed(cfg.seed, "io-bundle"))
    c0, c1 = "0" * lam, "0" * (lam - 1) + "1"
    rows: list[dict] = []
    exact_failures = 0
    for r_val in range(2**lam):
        r = format(r_val, f"0{lam}b")
        rep = check_challenge_symmetry(bundle, c0, c1, r)
        if not rep.identical_distributions:
            exact_failures += 1
        rows.append(
            {
                "experiment": "io-game-symmetry",
                "seed": cfg.seed,
                "lambda": lam,
                "r": r,
                "identical": rep.identical_distributions,
            }
        )
    adv = IOAdversary(
        propose=lambda lam_, rng: ("0" * lam_, "1" + "0" * (lam_ - 1)),
        guess=lambda ch, b, rng: "0",
    )
    bot = io_game(0, lam, adv, bundle, rng_from(derive_seed(cfg.seed, "io-bot"))) is None
    exact_failures += 0 if bot else 1
    rows.append(
        {
            "experiment": "io-game-inequivalent",
            "seed": cfg.seed,
            "lambda": lam,
            "r": "",
            "identical": bot,
        }
    )
    return rows, exact_failures, 0


# --- plumbing -----------------------------------------------------------------------

def _coerce(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def _write_rows(rows: list[dict], cfg: RunConfig) -> str:
    rows = [{k: _coerce(v) for k, v in row.items()} for row in rows]
    if cfg.fmt == "jsonl":
        text = "\n".join(json.dumps(row, sort_keys=True) for row in rows) + "\n"
    else:
        if not rows:
            text = ""
        else:
            headers = list(rows[0].keys())
            lines = [",".join(headers)]
            for row in rows:
                lines.append(",".join(_csv_cell(row.get(h)) for h in headers))
            text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_manifest(cfg, text)
    else:
        sys.stdout.write(text)
    return text


def _write_manifest(cfg: RunConfig, payload: str) -> None:
    """A machine-readable record of the run next to its artifact."""
    import hashlib

    config = {
        "command": cfg.command,
        "seed": cfg.seed,
        "lambda": cfg.lam,
        "q": cfg.q,
        "trials": cfg.trials,
        "qubits": cfg.qubits,
        "format": cfg.fmt,
        "jobs": cfg.jobs,
    }
    manifest = {
        "seed": cfg.seed,
        "parameters": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest(),
        "output_hash": hashlib.sha256(payload.encode()).hexdigest(),
    }
    with open(cfg.out + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run(cfg: RunConfig) -> int:
    """Dispatch a configured run; returns the process exit status."""
    if cfg.command in VERIFY_SUITES:
        cfg.suite = cfg.command
        rows, exact, stat = _run_verify(cfg)
    elif cfg.command in DEMOS:
        rows, exact, stat = _run_demo(cfg)
    elif cfg.command == "owp":
        rows, exact, stat = _run_owp(cfg)
    elif cfg.command == "io-game":
        rows, exact, stat = _run_io_game(cfg)
    else:
        raise ValueError(f"unknown command {cfg.command!r}")
    _write_rows(rows, cfg)
    if exact:
        print(f"error: {exact} exact check(s) failed", file=sys.stderr)
        return 1
    if stat:
        print(f"warning: {stat} statistical check(s) outside 3σ", file=sys.stderr)
        if cfg.stats_as_errors:
            return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oraclesep",
        description="Verification suites and separation demos over exact toy oracles.",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--lambda", dest="lam", type=int, default=8)
        p.add_argument("--q", type=int, default=4)
        p.add_argument("--qubits", type=int, default=4)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--stats-as-errors", action="store_true")

    p_verify = sub.add_parser("verify", help="run lemma verification suites")
    p_verify.add_argument("suite", choices=VERIFY_SUITES)
    common(p_verify)

    p_demo = sub.add_parser("demo", help="run separation demos")
    p_demo.add_argument("demo", choices=DEMOS)
    common(p_demo)

    p_owp = sub.add_parser("owp", help="permutation-inversion hybrid experiment")
    p_owp.add_argument("--hybrid", choices=("s1", "s2", "s3", "s4"), default="s4")
    common(p_owp)

    p_io = sub.add_parser("io-game", help="obfuscation distinguishing game checks")
    common(p_io)
    return parser


_DEFAULT_TRIALS = {"verify": 100, "demo": 10_000, "owp": 100_000, "io-game": 1_000}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("ORACLESEP_SEED", DEFAULT_SEED))
    trials = args.trials if args.trials is not None else _DEFAULT_TRIALS[args.group]
    command = {
        "verify": lambda: args.suite,
        "demo": lambda: args.demo,
        "owp": lambda: "owp",
        "io-game": lambda: "io-game",
    }[args.group]()
    cfg = RunConfig(
        command=command,
        seed=seed,
        lam=args.lam,
        q=args.q,
        trials=trials,
        qubits=args.qubits,
        out=args.out,
        fmt=args.fmt,
        jobs=args.jobs,
        stats_as_errors=args.stats_as_errors,
    )
    if args.group == "owp":
        cfg.hybrid = args.hybrid
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
