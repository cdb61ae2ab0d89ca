import numpy as np
import pytest

from oraclesep.oracles import (
    LazyOracle,
    TableOracle,
    classical_eval,
    classical_functionally_equivalent,
    dump_oracle,
    eval_oracle,
    find,
    find_distribution,
    load_oracle,
    obf_puncture_set,
    puncture,
    sample_bundle,
    sample_permutation,
)
from oraclesep.qstate import BOT
from oraclesep.seeding import derive_rng, rng_from


class TestPermutation:
    def test_bijective_exhaustive(self):
        for lam in (2, 4, 8):
            f = sample_permutation(lam, rng_from(lam))
            images = {f(x) for x in f.domain()}
            assert len(images) == 2**lam

    def test_determinism(self):
        a = sample_permutation(5, rng_from(9))
        b = sample_permutation(5, rng_from(9))
        assert all(a(x) == b(x) for x in a.domain())

    def test_uniform_over_permutations(self):
        # chi-square of the 24 two-bit permutations over 10^4 seeds
        counts = {}
        n = 10_000
        for i in range(n):
            f = sample_permutation(2, derive_rng(1234, "chi", i))
            key = tuple(f(x) for x in f.domain())
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 24
        expected = n / 24
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        # 23 degrees of freedom: mean 23, variance 46
        assert chi2 < 23 + 3 * np.sqrt(46)

    def test_wrong_length_is_bot(self):
        f = sample_permutation(3, rng_from(1))
        assert f("01") is None


class TestBundle:
    def test_same_seed_identical(self):
        a = sample_bundle(3, 55)
        b = sample_bundle(3, 55)
        assert a.obf_table == b.obf_table
        assert all(a.f(x) == b.f(x) for x in a.f.domain())

    def test_obf_injective(self):
        bundle = sample_bundle(4, 7)
        values = list(bundle.obf_table.values())
        assert len(values) == 2**8
        assert len(set(values)) == len(values)
        assert all(len(v) == 12 for v in values)

    def test_lambda_cap(self):
        with pytest.raises(ValueError):
            sample_bundle(11, 0)

    def test_eval_consistency(self):
        bundle = sample_bundle(4, 7)
        rng = rng_from(3)
        for _ in range(200):
            c = format(int(rng.integers(16)), "04b")
            r = format(int(rng.integers(16)), "04b")
            x = format(int(rng.integers(16)), "04b")
            assert eval_oracle(bundle, bundle.obf(c, r), x) == classical_eval(c, bundle.f, x)[0]

    def test_eval_identity_chase(self):
        # a circuit computing f on its input evaluates to f(x)
        bundle = sample_bundle(4, 8)
        c_tilde = bundle.obf("0100", "1111")
        assert eval_oracle(bundle, c_tilde, "1010") == bundle.f("1010")

    def test_eval_bot_cases(self):
        bundle = sample_bundle(4, 9)
        off_image = "0" * 12
        if off_image in bundle.image():
            off_image = "1" * 12
        assert eval_oracle(bundle, off_image, "0000") is None
        some = next(iter(bundle.image()))
        assert eval_oracle(bundle, some, "01") is None


class TestPuncture:
    def test_empty_set(self):
        f = sample_permutation(3, rng_from(2))
        g = puncture(f, set())
        assert all(g(x) == f(x) for x in f.domain())

    def test_single_point(self):
        f = sample_permutation(3, rng_from(2))
        g = puncture(f, {"010"})
        assert g("010") is None
        assert all(g(x) == f(x) for x in f.domain() if x != "010")

    def test_obf_star_puncture(self):
        bundle = sample_bundle(4, 5)
        r_star = "0110"
        punctured = puncture(bundle.obf_oracle(), obf_puncture_set(4, r_star))
        hit = 0
        for key in bundle.obf_table:
            if punctured(key) is None:
                hit += 1
                assert key[4:] == r_star
        assert hit == 16

    def test_eval_unaffected_off_puncture(self):
        bundle = sample_bundle(4, 6)
        z = "0111"
        f_z = puncture(bundle.f, {z})
        rng = rng_from(4)
        for _ in range(100):
            c = format(int(rng.integers(16)), "04b")
            r = format(int(rng.integers(16)), "04b")
            x = format(int(rng.integers(16)), "04b")
            base, queries = classical_eval(c, bundle.f, x)
            if z in queries:
                continue
            assert eval_oracle(bundle, bundle.obf(c, r), x, f_z) == base


class TestClassicalCircuits:
    def test_opcode_semantics(self):
        f = sample_permutation(4, rng_from(10))
        x = "1011"
        assert classical_eval("0011", f, x) == (x, [])
        assert classical_eval("0100", f, x) == (f(x), [x])
        out, queries = classical_eval("1110", f, x)
        assert queries == [x, f(x)] and out == f(f(x))
        masked, _ = classical_eval("1010", f, x)
        expected = "".join(
            "1" if a != b else "0" for a, b in zip(f(x), "1000")
        )
        assert masked == expected

    def test_bot_propagates(self):
        f = puncture(sample_permutation(4, rng_from(10)), {"1011"})
        assert classical_eval("0100", f, "1011") == (None, ["1011"])
        out, queries = classical_eval("1100", f, "1011")
        assert out is None and queries == ["1011"]

    def test_equivalences(self):
        f = sample_permutation(4, rng_from(11))
        assert classical_functionally_equivalent("0000", "0011", f)
        assert classical_functionally_equivalent("0100", "1000", f)  # xor with s=0
        assert not classical_functionally_equivalent("0000", "0100", f)


class TestFind:
    def test_off_image_half_half(self):
        bundle = sample_bundle(4, 12)
        y = "1" * 16
        if y[:12] in bundle.image():
            y = "0" * 16
        dist = find_distribution(bundle.f, bundle, y)
        assert dist.probability(y) == pytest.approx(0.5)
        assert dist.probability(BOT) == pytest.approx(0.5)

    def test_planted_disagreement_bound(self):
        bundle = sample_bundle(4, 13)
        f = bundle.f
        c, r, x = "1100", "0101", "0011"
        z = f(x)  # second query of the double-query program
        table = {k: f(k) for k in f.domain()}
        table[z] = format((int(table[z], 2) + 1) % 16, "04b")
        f_pp = TableOracle(table, 4, 4)
        y = bundle.obf(c, r) + x
        dist = find_distribution(f, bundle, y)
        success = sum(
            p for out, p in dist.probs.items() if out != BOT and f(out) != f_pp(out)
        )
        assert success >= 1 / (2 * len(y)) - 1e-12
        assert success == pytest.approx(0.25)

    def test_disagreement_at_y_itself(self):
        # when the only difference sits at y, the echo branch already wins
        bundle = sample_bundle(4, 14)
        f = bundle.f
        y = "0101"
        table = {k: f(k) for k in f.domain()}
        table[y] = format((int(table[y], 2) + 1) % 16, "04b")
        f_pp = TableOracle(table, 4, 4)
        dist = find_distribution(f, bundle, y)
        success = sum(
            p for out, p in dist.probs.items() if out != BOT and f(out) != f_pp(out)
        )
        assert success >= 0.5 - 1e-12
        assert success >= 1 / (2 * len(y))

    def test_sampler_matches_distribution(self):
        bundle = sample_bundle(4, 15)
        y = bundle.obf("0100", "0000") + "1111"
        dist = find_distribution(bundle.f, bundle, y)
        rng = rng_from(16)
        n = 20_000
        counts = {}
        for _ in range(n):
            out = find(bundle.f, bundle, y, rng)
            key = BOT if out is None else out
            counts[key] = counts.get(key, 0) + 1
        for key, p in dist.probs.items():
            assert abs(counts.get(key, 0) / n - p) < 3 * np.sqrt(p * (1 - p) / n) + 1e-3


class TestLazyOracle:
    def test_deterministic_and_matches_materialization(self):
        lazy = LazyOracle(seed=99, label="f", in_width=4, out_width=3)
        table = lazy.materialize()
        assert all(lazy(x) == table(x) for x in lazy.domain())
        assert all(lazy(x) == lazy(x) for x in lazy.domain())

    def test_rough_uniformity(self):
        lazy = LazyOracle(seed=5, label="g", in_width=10, out_width=1)
        ones = sum(lazy(x) == "1" for x in lazy.domain())
        assert abs(ones / 1024 - 0.5) < 3 * np.sqrt(0.25 / 1024)


def test_dump_and_load(tmp_path):
    f = sample_permutation(3, rng_from(21))
    g = puncture(f, {"001"})
    path = tmp_path / "oracle.kv"
    dump_oracle(g, str(path))
    back = load_oracle(str(path))
    assert all(back(x) == g(x) for x in f.domain())


def test_one_wayness_baseline():
    # a query-free guesser inverts the permutation at the blind-guess rate
    lam, n = 8, 20_000
    hits = 0
    for i in range(n):
        rng = derive_rng(31337, "ow", i)
        f = sample_permutation(lam, rng)
        x = format(int(rng.integers(2**lam)), f"0{lam}b")
        guess = format(int(rng.integers(2**lam)), f"0{lam}b")
        hits += guess == x
    p = 2.0**-lam
    assert abs(hits / n - p) < 3 * np.sqrt(p * (1 - p) / n)
