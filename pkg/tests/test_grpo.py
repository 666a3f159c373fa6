import math

import numpy as np
import pytest

from oracles import brute_objective
from egokit.grpo import (
    TOY_BOX_GT,
    GrpoConfig,
    PolicyGroup,
    ToyPolicy,
    ascent_step,
    box_grid,
    grpo_objective,
    interval_grid,
    kl_divergence,
    kl_estimate,
    log_softmax,
    make_task,
    normalize_advantages,
    objective_and_grad,
    train_toy,
)


def test_advantage_examples():
    np.testing.assert_allclose(normalize_advantages([1, 0]), [1, -1])
    np.testing.assert_allclose(normalize_advantages([2, 1, 0]), [math.sqrt(1.5), 0, -math.sqrt(1.5)])
    assert np.all(normalize_advantages([0.7] * 5) == 0)
    with pytest.raises(ValueError):
        normalize_advantages([1.0])


def test_kl_estimate_examples():
    assert kl_estimate([0.0], [0.0]) == 0.0
    # d = ln 2: 2 - 1 - ln 2
    assert kl_estimate([0.0], [math.log(2)]) == pytest.approx(1 - math.log(2), abs=1e-15)
    assert kl_estimate([0.0, 0.0], [math.log(2), 0.0]) == pytest.approx((1 - math.log(2)) / 2)
    rng = np.random.default_rng(0)
    assert all(kl_estimate(rng.normal(size=5), rng.normal(size=5)) >= 0 for _ in range(100))


def group(rewards, logp_new, logp_old=None, logp_ref=None):
    n = len(rewards)
    return PolicyGroup("p", tuple(range(n)), tuple(rewards), tuple(logp_new),
                       tuple(logp_old if logp_old is not None else logp_new),
                       tuple(logp_ref if logp_ref is not None else logp_new))


def test_objective_examples():
    # on-policy with ref == new: ratios are 1 and advantages sum to 0
    assert grpo_objective(group([1, 0, 0.5], [-1, -2, -3]), beta=0.04) == pytest.approx(0.0, abs=1e-12)
    # ratio 2 on the winner, 1 on the loser: 2 * 1 + 1 * (-1)
    g = group([1, 0], [math.log(0.4), math.log(0.2)], [math.log(0.2), math.log(0.2)])
    assert grpo_objective(g, beta=0.0) == pytest.approx(1.0)
    g = group([1, 0], [0.0, 0.0], logp_ref=[math.log(2), 0.0])
    assert grpo_objective(g, beta=1.0) == pytest.approx(-(1 - math.log(2)) / 2)


def test_policy_group_validation():
    with pytest.raises(ValueError, match="at least two"):
        group([1], [0.0])
    with pytest.raises(ValueError, match="non-finite"):
        group([1, 0], [0.0, float("-inf")])
    with pytest.raises(ValueError, match="differ in length"):
        PolicyGroup("p", (0, 1), (1.0,), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0))


def test_objective_and_grad_agree_with_group_objective():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=10)
    actions = rng.integers(0, 10, 6)
    old = log_softmax(rng.normal(size=10))[actions]
    ref = log_softmax(np.zeros(10))[actions]
    rewards = rng.random(6)
    value, _ = objective_and_grad(logits, actions, old, ref, rewards, 0.5)
    g = PolicyGroup("p", tuple(actions), tuple(rewards), tuple(log_softmax(logits)[actions]), tuple(old), tuple(ref))
    assert value == pytest.approx(grpo_objective(g, 0.5), abs=1e-12)
    assert value == pytest.approx(brute_objective(list(logits), list(actions), old, ref, rewards, 0.5), abs=1e-12)


def test_one_step_raises_probability_of_the_best_candidate():
    logits = np.zeros(4)
    actions = np.array([0, 1, 2, 3])
    lp = log_softmax(logits)[actions]
    args = (actions, lp, lp, np.array([1.0, 0.0, 0.0, 0.0]), 0.04, 1e-8)
    value, step = ascent_step(logits, args, 0.2)
    p = ToyPolicy(logits + step).probs()
    assert p[0] > 0.25 and value > 0


def test_degenerate_group_with_no_kl_is_a_fixed_point():
    logits = np.zeros(5)
    actions = np.array([1, 1, 3])
    lp = log_softmax(logits)[actions]
    _, grad = objective_and_grad(logits, actions, lp, lp, [0.5, 0.5, 0.5], 0.04)
    assert np.all(grad == 0)


def test_kl_divergence_exact():
    assert kl_divergence(np.zeros(3), np.zeros(3)) == 0.0
    p = np.log([0.5, 0.5])
    q = np.log([0.25, 0.75])
    assert kl_divergence(p, q) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3))


def test_toy_tasks():
    assert len(box_grid()) == 75 and len(interval_grid()) == 200
    box = make_task("box")
    assert box.rewards.max() <= 2.0 and box.rewards.min() >= 1.0  # every rendered candidate is well formed
    assert TOY_BOX_GT.x_min == 0.52
    with pytest.raises(ValueError):
        make_task("polygon")


def test_training_is_deterministic_and_learns():
    cfg = GrpoConfig(beta=0.0, seed=3, iterations=60)
    a, b = train_toy("interval", cfg), train_toy("interval", cfg)
    assert a.expected_reward == b.expected_reward
    assert a.improvement > 0.1
    assert len(a.rows()) == 60 and set(a.rows()[0]) == {"iteration", "expected_reward", "kl", "objective"}


def test_config_validation():
    with pytest.raises(ValueError):
        GrpoConfig(group_size=1)
    with pytest.raises(ValueError):
        GrpoConfig(learning_rate=0)
