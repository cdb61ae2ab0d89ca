import numpy as np
import pytest

from oraclesep.circuits import GateOp, OracleAidedCircuit, random_circuit
from oraclesep.oracles import classical_functionally_equivalent, sample_bundle
from oraclesep.qstate import statistical_distance
from oraclesep.seeding import derive_rng, rng_from
from oraclesep.separations import (
    IOAdversary,
    LightningScheme,
    PuzzleSampler,
    check_challenge_symmetry,
    collision_via_q,
    dcrpuzz_extract,
    exhaustive_search_adversary,
    extractor_distribution,
    find_augmented,
    ideal_collision_distribution,
    io_game,
    lightning_clone,
    lightning_rates,
    linear_prep_circuit,
    owp_hybrid_experiment,
    probe_adversary,
    random_guess_adversary,
)
from oraclesep.verify import random_table_oracle

SQ2 = 1 / np.sqrt(2)


def bell_sampler():
    c = OracleAidedCircuit(2, (GateOp.gate("H", 0), GateOp.gate("CNOT", 0, 1)), (0,), (1,))
    return PuzzleSampler("bell", c, (0,), (1,), ())


class TestDcrpuzz:
    def test_bell_outputs(self):
        dist = extractor_distribution(bell_sampler(), None)
        assert dist.probs == {
            "000": pytest.approx(0.5),
            "111": pytest.approx(0.5),
        }
        out = dcrpuzz_extract(bell_sampler(), None, rng_from(0))
        assert out in (("0", "0", "0"), ("1", "1", "1"))

    def test_deterministic_sampler_point_mass(self):
        c = OracleAidedCircuit(2, (GateOp.gate("X", 1),), (0,), (1,))
        s = PuzzleSampler("det", c, (0,), (1,), ())
        dist = extractor_distribution(s, None)
        assert dist.probs == {"011": pytest.approx(1.0)}

    def test_two_to_one_distinct_half(self):
        prep = linear_prep_circuit([[1, 0], [0, 0]], 2)
        s = PuzzleSampler("2to1", prep, (2, 3), (0, 1), ())
        dist = extractor_distribution(s, None)
        distinct = sum(p for z, p in dist.probs.items() if z[2:4] != z[4:6])
        assert distinct == pytest.approx(0.5)

    def test_extractor_equals_ideal(self):
        for i in range(20):
            rng = derive_rng(61, "puzz", i)
            n = int(rng.integers(2, 5))
            calls = int(rng.integers(0, 2))
            c = random_circuit(rng, n, oracle_calls=calls, query_width=1, response_width=1)
            o = random_table_oracle(rng, 1, 1) if calls else None
            wires = list(rng.permutation(n))
            na = int(rng.integers(1, n))
            nb = int(rng.integers(1, n - na + 1))
            s = PuzzleSampler("pp", c, tuple(wires[:na]), tuple(wires[na:na + nb]), tuple(wires[na + nb:]))
            sd = statistical_distance(extractor_distribution(s, o), ideal_collision_distribution(s, o))
            assert sd <= 1e-9


class TestLightning:
    def test_rates_equal_exactly(self):
        for i in range(20):
            rng = derive_rng(62, "light", i)
            n = int(rng.integers(2, 5))
            c = random_circuit(rng, n, oracle_calls=0)
            wires = list(rng.permutation(n))
            na = int(rng.integers(1, n))
            scheme = LightningScheme(c, tuple(wires[:na]), tuple(wires[na:]))
            both, gen = lightning_rates(scheme, None)
            assert abs(both - gen) <= 1e-9

    def test_deterministic_generator(self):
        c = OracleAidedCircuit(2, (GateOp.gate("X", 1),), (0,), (1,))
        scheme = LightningScheme(c, (0,), (1,))
        s, joint = lightning_clone(scheme, None, rng_from(1))
        assert s == "0"
        assert np.allclose(joint, [0, 0, 0, 1])  # |1>|1>

    def test_entangled_generator_product_bolts(self):
        c = OracleAidedCircuit(
            3,
            (GateOp.gate("H", 0), GateOp.gate("CNOT", 0, 1), GateOp.gate("H", 2),
             GateOp.gate("CZ", 1, 2)),
            (0,),
            (1, 2),
        )
        scheme = LightningScheme(c, (0,), (1, 2))
        bolts = scheme.bolt_states(None)
        rng = rng_from(2)
        for _ in range(10):
            s, joint = lightning_clone(scheme, None, rng)
            expected = np.outer(bolts[s], bolts[s]).reshape(-1)
            assert np.allclose(joint, expected, atol=1e-9)
            assert scheme.verify_probability(None, s, bolts[s]) == pytest.approx(1.0)

    def test_both_copies_verify(self):
        c = OracleAidedCircuit(2, (GateOp.gate("H", 0), GateOp.gate("CNOT", 0, 1)), (0,), (1,))
        scheme = LightningScheme(c, (0,), (1,))
        both, gen = lightning_rates(scheme, None)
        assert both == pytest.approx(1.0)
        assert gen == pytest.approx(1.0)


class TestOwpHybrids:
    def test_random_guess_baseline(self):
        lam, trials = 6, 20_000
        rec = owp_hybrid_experiment(lam, "s4", random_guess_adversary, trials, seed=9)
        rate = rec.rate("out_eq_x")
        p = 2.0**-lam
        assert abs(rate - p) < 3 * np.sqrt(p * (1 - p) / trials)

    def test_exhaustive_adversary_wins_without_query_bound(self):
        rec = owp_hybrid_experiment(4, "s4", exhaustive_search_adversary, 300, seed=10)
        assert rec.rate("out_eq_x") == 1.0

    def test_exhaustive_fails_at_punctured_challenge(self):
        # under the doubly punctured oracle the planted preimage is gone
        rec = owp_hybrid_experiment(4, "s2", exhaustive_search_adversary, 300, seed=11)
        assert rec.rate("out_eq_x") < 0.2

    def test_symmetry_of_planted_pair(self):
        lam, trials = 8, 20_000
        a = owp_hybrid_experiment(lam, "s2", probe_adversary, trials, seed=12, challenge="x")
        b = owp_hybrid_experiment(lam, "s2", probe_adversary, trials, seed=12, challenge="xprime")
        diff = a.rate("out_eq_x") - b.rate("out_eq_x")
        sigma = np.sqrt(2 * 0.25 / trials)
        assert abs(diff) < 3 * sigma

    def test_find_augmented_runs(self):
        bundle = sample_bundle(4, 13)
        adv = find_augmented(random_guess_adversary, bundle)
        rec = owp_hybrid_experiment(4, "s3", adv, 200, seed=14, bundle=bundle)
        assert rec.trials == 200

    def test_rows_schema(self):
        rec = owp_hybrid_experiment(4, "s1", random_guess_adversary, 50, seed=15)
        rows = rec.rows()
        assert {r["event"] for r in rows} == {"out_eq_x", "out_eq_xprime", "out_in_differ"}
        for r in rows:
            assert r["ci_low"] <= r["rate"] <= r["ci_high"]


class TestIOGame:
    def test_identical_circuits_zero_advantage(self):
        bundle = sample_bundle(4, 16)
        adv = IOAdversary(
            propose=lambda lam, rng: ("0000", "0000"),
            guess=lambda ch, b, rng: ch[0],
        )
        lhs = [io_game(0, 4, adv, bundle, rng_from(i)) for i in range(400)]
        rhs = [io_game(1, 4, adv, bundle, rng_from(i)) for i in range(400)]
        assert lhs == rhs

    def test_inequivalent_pair_bot(self):
        bundle = sample_bundle(4, 17)
        adv = IOAdversary(
            propose=lambda lam, rng: ("0000", "0100"),
            guess=lambda ch, b, rng: "0",
        )
        assert io_game(0, 4, adv, bundle, rng_from(0)) is None

    def test_malformed_lengths_bot(self):
        bundle = sample_bundle(4, 18)
        adv = IOAdversary(propose=lambda lam, rng: ("00", "0000"), guess=lambda ch, b, rng: "0")
        assert io_game(1, 4, adv, bundle, rng_from(0)) is None

    def test_equivalent_distinct_zero_advantage_matched_seeds(self):
        bundle = sample_bundle(4, 19)
        adv = IOAdversary(
            propose=lambda lam, rng: ("0000", "0001"),
            guess=lambda ch, b, rng: format(int(rng.integers(2)), "b"),
        )
        n = 2000
        adv0 = sum(io_game(0, 4, adv, bundle, rng_from(500 + i)) == "1" for i in range(n))
        adv1 = sum(io_game(1, 4, adv, bundle, rng_from(500 + i)) == "1" for i in range(n))
        assert adv0 == adv1

    def test_challenge_symmetry_all_r(self):
        bundle = sample_bundle(3, 20)
        for pair in (("000", "001"), ("010", "100")):
            if not classical_functionally_equivalent(pair[0], pair[1], bundle.f):
                continue
            for r_val in range(8):
                rep = check_challenge_symmetry(bundle, pair[0], pair[1], format(r_val, "03b"))
                assert rep.identical_distributions

    def test_symmetry_detects_inequivalence(self):
        bundle = sample_bundle(3, 21)
        rep = check_challenge_symmetry(bundle, "000", "010", "000")
        assert not rep.identical_distributions


class TestCollisionViaQ:
    def test_two_to_one_rate(self):
        prep = linear_prep_circuit([[1, 0, 0], [0, 1, 0], [0, 0, 0]], 3)
        rng = rng_from(23)
        n = 2000
        hits = sum(
            collision_via_q(prep, (0, 1, 2), (3, 4, 5), rng) is not None for _ in range(n)
        )
        assert abs(hits / n - 0.5) < 3 * np.sqrt(0.25 / n)

    def test_collisions_are_genuine(self):
        matrix = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
        prep = linear_prep_circuit(matrix, 3)
        rng = rng_from(24)
        found = 0
        while found < 50:
            res = collision_via_q(prep, (0, 1, 2), (3, 4, 5), rng)
            if res is None:
                continue
            x1, x2 = res
            assert x1 != x2
            fx = lambda x: "".join(
                str(sum(int(x[j]) * matrix[i][j] for j in range(3)) % 2) for i in range(3)
            )
            assert fx(x1) == fx(x2)
            found += 1

    def test_injective_never_collides(self):
        prep = linear_prep_circuit([[1, 0], [0, 1]], 2)
        rng = rng_from(25)
        assert all(
            collision_via_q(prep, (0, 1), (2, 3), rng) is None for _ in range(200)
        )

    def test_constant_function_three_quarters(self):
        prep = linear_prep_circuit([[0, 0]], 2)
        rng = rng_from(26)
        n = 4000
        hits = sum(collision_via_q(prep, (0, 1), (2,), rng) is not None for _ in range(n))
        assert abs(hits / n - 0.75) < 3 * np.sqrt(0.75 * 0.25 / n)
