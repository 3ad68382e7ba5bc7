import math

import numpy as np
import pytest

from clzsi.sources import (
    EntropyEstimate,
    MarkovModel,
    block_conditional_entropy,
    block_conditional_probability,
    conditional_entropy_rate,
    correlated_binary_model,
    generate,
    joint_entropy_rate,
    rate_bound,
    side_entropy_rate,
    stationary_distribution,
)
from oracles import exact_block_conditional_entropy


def identity_coupled_model():
    """x always equals y: mass moves only between the agreeing states."""
    t = np.zeros((4, 4))
    t[0, :] = 0.5
    t[3, :] = 0.5
    return MarkovModel(t)


class TestModelConstruction:
    def test_uniform_at_quarter(self):
        m = correlated_binary_model(0.25)
        assert np.allclose(m.transition, 0.25)

    def test_persistent_column(self):
        m = correlated_binary_model(0.9)
        assert np.allclose(m.transition[:, 0], [0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3])
        assert np.allclose(m.transition[:, 3], [0.1 / 3, 0.1 / 3, 0.1 / 3, 0.9])
        assert np.allclose(m.transition[:, 1], 0.25)

    @pytest.mark.parametrize("q", [0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
    def test_columns_sum_to_one(self, q):
        m = correlated_binary_model(q)
        assert np.allclose(m.transition.sum(axis=0), 1.0, atol=1e-12)

    def test_q_out_of_range(self):
        for q in (-0.1, 1.1):
            with pytest.raises(ValueError):
                correlated_binary_model(q)

    def test_rejects_non_stochastic(self):
        bad = np.full((4, 4), 0.3)
        with pytest.raises(ValueError):
            MarkovModel(bad)

    def test_state_split(self):
        m = correlated_binary_model(0.5)
        xs, ys = m.split_states(np.array([0, 1, 2, 3]))
        assert list(xs) == [0, 0, 1, 1]
        assert list(ys) == [0, 1, 0, 1]


class TestStationary:
    def test_uniform_case(self):
        pi = stationary_distribution(correlated_binary_model(0.25))
        assert np.allclose(pi, 0.25, atol=1e-11)

    @pytest.mark.parametrize("q", [0.1, 0.5, 0.9, 0.99])
    def test_residual(self, q):
        m = correlated_binary_model(q)
        pi = stationary_distribution(m)
        assert np.abs(m.transition @ pi - pi).max() < 1e-10
        assert abs(pi.sum() - 1.0) < 1e-12

    def test_q09_fixture(self):
        # hand-solved balance equations give (15/34, 1/17, 1/17, 15/34);
        # an eigen solve double-checks the power iteration at run time
        m = correlated_binary_model(0.9)
        pi = stationary_distribution(m)
        assert np.allclose(pi, [15 / 34, 1 / 17, 1 / 17, 15 / 34], atol=1e-9)
        w, v = np.linalg.eig(m.transition)
        lead = np.real(v[:, np.argmin(np.abs(w - 1))])
        lead /= lead.sum()
        assert np.abs(lead - pi).max() < 1e-9

    def test_iteration_cap(self):
        with pytest.raises(ArithmeticError):
            stationary_distribution(correlated_binary_model(0.9), max_iterations=0)


class TestGenerate:
    def test_deterministic(self):
        m = correlated_binary_model(0.9)
        a = generate(m, 500, seed=4)
        b = generate(m, 500, seed=4)
        assert a.x == b.x and a.y == b.y
        c = generate(m, 500, seed=5)
        assert c.x != a.x or c.y != a.y

    def test_uniform_frequencies(self):
        x, y = generate(correlated_binary_model(0.25), 100_000, seed=1)
        states = 2 * x.symbols.astype(int) + y.symbols
        freq = np.bincount(states, minlength=4) / states.size
        se = math.sqrt(0.25 * 0.75 / states.size)
        assert np.abs(freq - 0.25).max() < 3 * se

    def test_transition_frequencies(self):
        m = correlated_binary_model(0.9)
        x, y = generate(m, 100_000, seed=2)
        states = 2 * x.symbols.astype(int) + y.symbols
        for cur in range(4):
            at = np.flatnonzero(states[:-1] == cur)
            nxt = np.bincount(states[at + 1], minlength=4) / at.size
            for s in range(4):
                p = m.transition[s, cur]
                se = math.sqrt(p * (1 - p) / at.size)
                assert abs(nxt[s] - p) <= 3 * se + 1e-9


class TestJointEntropy:
    def test_uniform_two_bits(self):
        assert joint_entropy_rate(correlated_binary_model(0.25)).value == pytest.approx(2.0)

    def test_degenerate_q1(self):
        assert joint_entropy_rate(correlated_binary_model(1.0)).value == pytest.approx(0.0, abs=1e-9)

    def test_against_path_loss_monte_carlo(self):
        # independent oracle: -(1/n) log2 P(path) on a long simulated path
        m = correlated_binary_model(0.9)
        x, y = generate(m, 300_000, seed=8)
        states = 2 * x.symbols.astype(int) + y.symbols
        pi = stationary_distribution(m)
        step = np.log2(m.transition[states[1:], states[:-1]])
        est = -(math.log2(pi[states[0]]) + step.sum()) / states.size
        se = step.std(ddof=1) / math.sqrt(states.size)
        h = joint_entropy_rate(m)
        assert h.std_error == 0.0
        assert abs(h.value - est) <= 3 * se


class TestSideAndConditional:
    def test_uniform_exact(self):
        m = correlated_binary_model(0.25)
        side = side_entropy_rate(m, n=300, trials=24, seed=1)
        assert side.value == pytest.approx(1.0, abs=1e-12)
        assert side.std_error == pytest.approx(0.0, abs=1e-12)
        cond = conditional_entropy_rate(m, n=300, trials=24, seed=1)
        assert cond.value == pytest.approx(1.0, abs=1e-12)

    def test_identity_coupling_has_no_conditional_entropy(self):
        m = identity_coupled_model()
        cond = conditional_entropy_rate(m, n=300, trials=24, seed=1)
        assert cond.value == pytest.approx(0.0, abs=1e-9)

    def test_q09_fixture(self):
        m = correlated_binary_model(0.9)
        side = side_entropy_rate(m, seed=3)
        assert side.method == "sandwich"
        assert side.std_error < 1.5e-3
        assert side.value == pytest.approx(0.5022, abs=0.005)
        cond = conditional_entropy_rate(m, seed=3)
        joint = joint_entropy_rate(m)
        assert cond.value == pytest.approx(joint.value - side.value, abs=1e-12)

    def test_bad_burn_in(self):
        with pytest.raises(ValueError):
            side_entropy_rate(correlated_binary_model(0.5), n=10, trials=4, burn_in=9)


class TestBlockConditionalProbability:
    def test_uniform(self):
        m = correlated_binary_model(0.25)
        assert block_conditional_probability(m, [0, 1, 1], [1, 0, 1]) == pytest.approx(1 / 8)

    def test_identity_coupling(self):
        m = identity_coupled_model()
        assert block_conditional_probability(m, [0, 1], [0, 1]) == pytest.approx(1.0)
        assert block_conditional_probability(m, [0, 1], [0, 0]) == 0.0

    def test_sums_to_one_over_x(self):
        m = correlated_binary_model(0.9)
        for y_block in ([0, 0, 1], [1, 1, 1]):
            total = sum(
                block_conditional_probability(m, [a, b, c], y_block)
                for a in (0, 1) for b in (0, 1) for c in (0, 1)
            )
            assert total == pytest.approx(1.0, abs=1e-12)


class TestBlockConditionalEntropy:
    def test_single_symbol_uniform(self):
        est = block_conditional_entropy(correlated_binary_model(0.25), 1, samples=100, seed=0)
        assert est.value == pytest.approx(1.0, abs=1e-12)
        assert est.std_error == pytest.approx(0.0, abs=1e-12)

    def test_identity_coupling_zero(self):
        est = block_conditional_entropy(identity_coupled_model(), 4, samples=200, seed=0)
        assert est.value == 0.0

    @pytest.mark.parametrize("q,block_len", [(0.9, 1), (0.9, 2), (0.9, 3), (0.5, 3)])
    def test_against_enumeration(self, q, block_len):
        m = correlated_binary_model(q)
        exact = exact_block_conditional_entropy(m, block_len)
        est = block_conditional_entropy(m, block_len, samples=20_000, seed=123)
        assert abs(est.value - exact) <= 4 * est.std_error + 1e-9

    def test_per_symbol_non_increasing(self):
        m = correlated_binary_model(0.9)
        rates = []
        for block_len in (1, 2, 4, 8):
            est = block_conditional_entropy(m, block_len, samples=30_000, seed=7)
            rates.append((est.value / block_len, est.std_error / block_len))
        for (a, sa), (b, sb) in zip(rates, rates[1:]):
            assert b <= a + 3 * math.hypot(sa, sb)


class TestRateBound:
    def test_first_term_arithmetic(self):
        m = correlated_binary_model(0.9)
        for block_len, first in ((2, 1.0), (15, 4 / 15)):
            bound = rate_bound(m, block_len, samples=500, seed=1)
            est = block_conditional_entropy(m, block_len, samples=500, seed=1)
            assert bound.value == pytest.approx(first + est.value / block_len, abs=1e-12)
            assert bound.std_error == pytest.approx(est.std_error / block_len, abs=1e-15)


class TestEntropyEstimate:
    def test_validation(self):
        with pytest.raises(ValueError):
            EntropyEstimate(1.0, -0.1, "sandwich")
        with pytest.raises(ValueError):
            EntropyEstimate(1.0, 0.0, "guesswork")
