"""Group Relative Policy Optimization on a toy softmax policy.

The objective for one group of N sampled candidates is

    J = sum_i exp(logp_new_i - logp_old_i) * A_i - beta * KL_hat

with A the group-standardized rewards and KL_hat the per-sample estimator
mean_i[exp(d_i) - d_i - 1], d_i = logp_ref_i - logp_new_i. There is no
ratio clipping.

The toy policy is a categorical distribution over a fixed grid of boxes or
intervals, so expected reward and KL to the reference are exact sums.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rewards import score_candidate
from .structured import render_box, render_interval, render_response
from .types import BBox, QARecord, TimeInterval


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 8
    beta: float = 0.04
    learning_rate: float = 0.2
    iterations: int = 200
    std_epsilon: float = 1e-8
    seed: int = 0
    max_backtracks: int = 30

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not self.std_epsilon > 0:
            raise ValueError("std_epsilon must be > 0")


@dataclass(frozen=True)
class PolicyGroup:
    prompt_id: str
    candidates: tuple
    rewards: tuple[float, ...]
    logp_new: tuple[float, ...]
    logp_old: tuple[float, ...]
    logp_ref: tuple[float, ...]

    def __post_init__(self):
        n = len(self.candidates)
        if n < 2:
            raise ValueError("a group needs at least two candidates")
        if not (len(self.rewards) == len(self.logp_new) == len(self.logp_old) == len(self.logp_ref) == n):
            raise ValueError("group lists differ in length")
        for name in ("logp_new", "logp_old", "logp_ref"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")


def normalize_advantages(rewards: Sequence[float], std_epsilon: float = 1e-8) -> np.ndarray:
    """(r - mean) / population std; all zeros when the std is below ``std_epsilon``."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or len(r) < 2:
        raise ValueError("need at least two rewards")
    std = r.std()
    if std < std_epsilon:
        return np.zeros_like(r)
    return (r - r.mean()) / std


def kl_estimate(logp_new: Sequence[float], logp_ref: Sequence[float]) -> float:
    d = np.asarray(logp_ref, dtype=np.float64) - np.asarray(logp_new, dtype=np.float64)
    if d.size == 0:
        return 0.0
    return float(np.mean(np.expm1(d) - d))


def grpo_objective(group: PolicyGroup, beta: float, std_epsilon: float = 1e-8) -> float:
    adv = normalize_advantages(group.rewards, std_epsilon)
    ratio = np.exp(np.asarray(group.logp_new) - np.asarray(group.logp_old))
    return float(np.sum(ratio * adv) - beta * kl_estimate(group.logp_new, group.logp_ref))


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    return z - np.log(np.exp(z).sum())


def kl_divergence(logits_p: np.ndarray, logits_q: np.ndarray) -> float:
    """Exact KL(p || q) in nats between two categorical distributions given by logits."""
    lp, lq = log_softmax(logits_p), log_softmax(logits_q)
    return float(np.sum(np.exp(lp) * (lp - lq)))


@dataclass
class ToyPolicy:
    logits: np.ndarray

    @classmethod
    def uniform(cls, n: int) -> "ToyPolicy":
        return cls(np.zeros(n))

    def log_probs(self) -> np.ndarray:
        return log_softmax(self.logits)

    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs())

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(len(self.logits), size=n, p=self.probs())


def objective_and_grad(
    logits: np.ndarray,
    actions: np.ndarray,
    logp_old: np.ndarray,
    logp_ref: np.ndarray,
    rewards: Sequence[float],
    beta: float,
    std_epsilon: float = 1e-8,
) -> tuple[float, np.ndarray]:
    """The group objective at ``logits`` and its gradient with respect to them."""
    logp = log_softmax(logits)
    logp_new = logp[actions]
    adv = normalize_advantages(rewards, std_epsilon)
    ratio = np.exp(logp_new - logp_old)
    d = logp_ref - logp_new
    n = len(actions)
    value = float(np.sum(ratio * adv) - beta * np.mean(np.expm1(d) - d))

    # dJ/dlogp_new_i, then d logp_new_i / d logits = onehot(a_i) - softmax
    coef = ratio * adv + (beta / n) * np.expm1(d)
    grad = np.zeros_like(logits, dtype=np.float64)
    np.add.at(grad, actions, coef)
    grad -= coef.sum() * np.exp(logp)
    return value, grad


def ascent_step(logits, args, learning_rate: float, max_backtracks: int = 30):
    """One gradient-ascent step with Armijo backtracking on the group objective.

    The step starts at ``learning_rate`` and is halved until the objective
    rises by at least 1e-4 of the linear prediction. A large KL coefficient
    makes the objective stiff; a fixed step would overshoot and diverge.
    Returns (objective after the step, the step itself).
    """
    value, grad = objective_and_grad(logits, *args)
    g2 = float(grad @ grad)
    lr = learning_rate
    for _ in range(max_backtracks + 1):
        step = lr * grad
        new_value, _ = objective_and_grad(logits + step, *args)
        if new_value >= value + 1e-4 * lr * g2:
            return new_value, step
        lr *= 0.5
    return value, np.zeros_like(grad)


@dataclass(frozen=True)
class ToyTask:
    name: str
    candidates: tuple
    responses: tuple[str, ...]
    gt: QARecord
    rewards: np.ndarray = field(compare=False)


BOX_CENTERS = (0.1, 0.3, 0.5, 0.7, 0.9)
BOX_SIZES = (0.2, 0.35, 0.5)
TOY_BOX_GT = BBox(0.52, 0.3, 0.88, 0.62)

INTERVAL_STARTS = tuple(3.0 * k for k in range(20))
INTERVAL_LENGTHS = tuple(3.0 * k for k in range(1, 11))
TOY_INTERVAL_GT = TimeInterval(21.5, 33.0)


def box_grid() -> list[BBox]:
    """5 x 5 centers times 3 square sizes, clipped to the unit square."""
    boxes = []
    for cy, cx, s in itertools.product(BOX_CENTERS, BOX_CENTERS, BOX_SIZES):
        h = s / 2
        boxes.append(
            BBox(
                round(max(cx - h, 0.0), 6),
                round(max(cy - h, 0.0), 6),
                round(min(cx + h, 1.0), 6),
                round(min(cy + h, 1.0), 6),
            )
        )
    return boxes


def interval_grid() -> list[TimeInterval]:
    """20 start times times 10 lengths on a 60 s clip."""
    return [
        TimeInterval(s, min(s + n, 60.0))
        for s, n in itertools.product(INTERVAL_STARTS, INTERVAL_LENGTHS)
    ]


def make_task(task: str) -> ToyTask:
    """Build the candidate grid, a well-formed response per candidate, and its reward."""
    if task in ("box", "box_grounding"):
        cands = box_grid()
        gt = QARecord("toy-box", ("toy",), "fg_spatial", "hand_object_grounding",
                      "toy", render_box(TOY_BOX_GT), gt_box=TOY_BOX_GT)
        responses = [render_response("toy", render_box(c)) for c in cands]
        name = "box_grounding"
    elif task in ("interval", "interval_grounding"):
        cands = interval_grid()
        gt = QARecord("toy-interval", ("toy",), "fg_temporal", "fine_grained_temporal_grounding",
                      "toy", render_interval(TOY_INTERVAL_GT), gt_interval=TOY_INTERVAL_GT)
        responses = [render_response("toy", render_interval(c)) for c in cands]
        name = "interval_grounding"
    else:
        raise ValueError(f"unknown toy task {task!r}")
    rewards = np.array([score_candidate(r, gt).total for r in responses])
    return ToyTask(name, tuple(cands), tuple(responses), gt, rewards)


@dataclass
class TrainReport:
    task: str
    config: GrpoConfig
    initial_expected_reward: float
    expected_reward: list[float]
    kl: list[float]
    objective: list[float]
    final_logits: np.ndarray

    @property
    def final_expected_reward(self) -> float:
        return self.expected_reward[-1] if self.expected_reward else self.initial_expected_reward

    @property
    def improvement(self) -> float:
        return self.final_expected_reward - self.initial_expected_reward

    def rows(self) -> list[dict]:
        return [
            {"iteration": i + 1, "expected_reward": r, "kl": k, "objective": o}
            for i, (r, k, o) in enumerate(zip(self.expected_reward, self.kl, self.objective))
        ]


def train_toy(task: str, cfg: GrpoConfig) -> TrainReport:
    """Run GRPO on a toy grounding bandit.

    Each iteration samples ``group_size`` candidates from the current policy
    (which is also the old policy for that iteration), scores them, and
    takes one gradient-ascent step on the group objective. The reference
    policy is the uniform initialization.
    """
    toy = make_task(task)
    rng = np.random.default_rng(cfg.seed)
    policy = ToyPolicy.uniform(len(toy.candidates))
    ref_logits = policy.logits.copy()

    def expected(p: ToyPolicy) -> float:
        return float(p.probs() @ toy.rewards)

    report = TrainReport(toy.name, cfg, expected(policy), [], [], [], policy.logits)
    logp_ref_all = log_softmax(ref_logits)
    for _ in range(cfg.iterations):
        actions = policy.sample(rng, cfg.group_size)
        logp_old = policy.log_probs()[actions]
        rewards = toy.rewards[actions]
        args = (actions, logp_old, logp_ref_all[actions], rewards, cfg.beta, cfg.std_epsilon)
        value, step = ascent_step(policy.logits, args, cfg.learning_rate, cfg.max_backtracks)
        policy = ToyPolicy(policy.logits + step)
        report.expected_reward.append(expected(policy))
        report.kl.append(kl_divergence(policy.logits, ref_logits))
        report.objective.append(value)
    report.final_logits = policy.logits
    return report
