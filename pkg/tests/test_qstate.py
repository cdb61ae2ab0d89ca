import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oraclesep.qstate import (
    BOT,
    BotExtendedState,
    FiniteDistribution,
    born_distribution,
    dist_state,
    euclidean_distance,
    measure,
    min_phase_distance,
    project_outcome,
    sample_noncollapsing,
    statistical_distance,
    trace_distance_pure,
)
from oraclesep.seeding import rng_from

SQ2 = 1 / np.sqrt(2)


def plus_state():
    return BotExtendedState(1, np.array([SQ2, SQ2]))


def bell_state():
    return BotExtendedState(2, np.array([SQ2, 0, 0, SQ2]))


class TestBotExtendedState:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            BotExtendedState(1, np.array([1.0, 1.0]))

    def test_bot_slot_shape(self):
        s = BotExtendedState.bot_state(2)
        assert s.dim == 5 and abs(s.bot_amplitude - 1.0) < 1e-12
        with pytest.raises(ValueError):
            BotExtendedState(1, np.array([1.0, 0.0, 0.0]), has_bot=False)

    def test_qubit_budget(self):
        with pytest.raises(ValueError):
            BotExtendedState.computational(15, 0)

    def test_bot_slot_round_trip(self):
        s = plus_state().with_bot_slot()
        assert s.has_bot and s.dim == 3
        back = s.without_bot_slot()
        assert not back.has_bot
        with pytest.raises(ValueError):
            BotExtendedState.bot_state(1).without_bot_slot()


class TestMeasure:
    def test_plus_is_unbiased(self):
        counts = {"0": 0, "1": 0}
        rng = rng_from(11)
        n = 4000
        for _ in range(n):
            outcome, _ = measure(plus_state(), (0,), rng)
            counts[outcome] += 1
        assert abs(counts["1"] / n - 0.5) < 3 * np.sqrt(0.25 / n)

    def test_bell_collapse(self):
        # condition on outcome 1 for qubit 0: post must be |11>
        p, post = project_outcome(bell_state(), (0,), "1")
        assert abs(p - 0.5) < 1e-12
        assert np.allclose(post.amplitudes, [0, 0, 0, 1])

    def test_eigenstate(self):
        rng = rng_from(0)
        for _ in range(20):
            outcome, post = measure(BotExtendedState.computational(1, 0), (0,), rng)
            assert outcome == "0"
            assert np.allclose(post.amplitudes, [1, 0])

    def test_measured_bits_retained(self):
        rng = rng_from(5)
        outcome, post = measure(bell_state(), (0, 1), rng)
        assert born_distribution(post).probs == {outcome: pytest.approx(1.0)}

    def test_target_order_sets_bit_order(self):
        state = BotExtendedState(2, np.array([0, 1.0, 0, 0]))  # |01>
        outcome, _ = measure(state, (1, 0), rng_from(1))
        assert outcome == "10"

    def test_bot_mass_rejected(self):
        with pytest.raises(ValueError):
            measure(BotExtendedState.bot_state(1), (0,), rng_from(1))


class TestSampleNoncollapsing:
    def test_basis_state_deterministic(self):
        s = BotExtendedState.computational(4, "0110")
        rng = rng_from(9)
        assert all(sample_noncollapsing(s, rng) == "0110" for _ in range(10))

    def test_two_samples_on_bell(self):
        # independent Born samples: all four pair patterns at 1/4
        rng = rng_from(13)
        n = 100_000
        counts = {}
        bell = bell_state()
        for _ in range(n):
            a = sample_noncollapsing(bell, rng)
            b = sample_noncollapsing(bell, rng)
            counts[(a, b)] = counts.get((a, b), 0) + 1
        for pair in [("00", "00"), ("00", "11"), ("11", "00"), ("11", "11")]:
            assert abs(counts[pair] / n - 0.25) < 3 * np.sqrt(0.25 * 0.75 / n)

    def test_plus_unbiased(self):
        rng = rng_from(17)
        n = 4000
        ones = sum(sample_noncollapsing(plus_state(), rng) == "1" for _ in range(n))
        assert abs(ones / n - 0.5) < 3 * np.sqrt(0.25 / n)

    def test_state_unchanged(self):
        s = plus_state()
        before = s.amplitudes.copy()
        sample_noncollapsing(s, rng_from(3))
        assert np.array_equal(s.amplitudes, before)


class TestDistances:
    def test_trace_distance_examples(self):
        zero = BotExtendedState.computational(1, 0)
        one = BotExtendedState.computational(1, 1)
        assert trace_distance_pure(zero, zero) == 0.0
        assert trace_distance_pure(zero, one) == pytest.approx(1.0)
        assert trace_distance_pure(zero, plus_state()) == pytest.approx(SQ2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance_pure(plus_state(), bell_state())

    def test_statistical_distance_examples(self):
        u = FiniteDistribution.uniform(["0", "1"])
        assert statistical_distance(u, u) == 0.0
        p0 = FiniteDistribution.point_mass("0")
        p1 = FiniteDistribution.point_mass("1")
        assert statistical_distance(p0, p1) == pytest.approx(1.0)

    def test_dist_state_uniform_is_plus(self):
        s = dist_state(FiniteDistribution.uniform(["0", "1"]))
        assert np.allclose(s.amplitudes, plus_state().amplitudes)

    def test_dist_state_rejects_bot(self):
        with pytest.raises(ValueError):
            dist_state(FiniteDistribution({BOT: 1.0}))

    def test_closed_form_pair(self):
        zero = BotExtendedState.computational(1, 0)
        one = BotExtendedState.computational(1, 1)
        assert euclidean_distance(zero, one) == pytest.approx(np.sqrt(2))
        assert min_phase_distance(zero, one) == pytest.approx(np.sqrt(2))
        # TD = 1 >= sqrt(2)/sqrt(2) = 1, with equality
        assert trace_distance_pure(zero, one) >= min_phase_distance(zero, one) / np.sqrt(2) - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_inequalities_random(seed):
    rng = rng_from(seed)
    dim = int(rng.integers(2, 17))
    a = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    b = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    td = trace_distance_pure(a, b)
    assert td <= euclidean_distance(a, b) + 1e-9
    assert td >= min_phase_distance(a, b) / np.sqrt(2) - 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sqrt_embedding_bound_random(seed):
    rng = rng_from(seed)
    bits = int(rng.integers(1, 4))
    def rand_dist():
        w = rng.dirichlet(np.ones(2**bits))
        return FiniteDistribution(
            {format(i, f"0{bits}b"): float(p) for i, p in enumerate(w) if p > 0}
        )
    p, q = rand_dist(), rand_dist()
    lhs = euclidean_distance(dist_state(p), dist_state(q))
    assert lhs <= np.sqrt(2 * statistical_distance(p, q)) + 1e-9


def test_measure_then_sample_matches_enumeration():
    # after a collapse, the sampler's law equals the renormalized restriction
    rng = rng_from(23)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    state = BotExtendedState(3, amps / np.linalg.norm(amps))
    for outcome in ("0", "1"):
        prob, post = project_outcome(state, (1,), outcome)
        if post is None:
            continue
        sampled_law = born_distribution(post)
        expected = {}
        for i, amp in enumerate(state.string_part()):
            bits = format(i, "03b")
            if bits[1] == outcome:
                expected[bits] = abs(amp) ** 2 / prob
        for key, value in expected.items():
            assert sampled_law.probability(key) == pytest.approx(value, abs=1e-12)


def test_inverse_cdf_is_stream_deterministic():
    dist = FiniteDistribution({"00": 0.1, "01": 0.2, "10": 0.3, "11": 0.4})
    draws1 = [dist.sample(rng_from(100 + i)) for i in range(50)]
    draws2 = [dist.sample(rng_from(100 + i)) for i in range(50)]
    assert draws1 == draws2
