"""Baseline policies: static, diff heuristic, and the logistic risk classifier."""

import dataclasses
import math

import numpy as np
import pytest

from testscope.baselines import (
    ClassifierThresholds,
    LogisticModel,
    classifier_action,
    heuristic_action,
    log_loss,
    make_classifier,
    predict_risk,
    static_action,
    train_classifier,
)
from testscope.commits import generate_trace
from testscope.config import ClassifierConfig, EnvConfig
from testscope.environment import Action

from test_environment import make_commit


def brute_force_auc(scores, labels) -> float:
    """All-pairs ranking oracle: P(score_pos > score_neg), ties half-credit."""
    scores = np.asarray(scores)
    labels = np.asarray(labels, dtype=bool)
    pos, neg = scores[labels], scores[~labels]
    greater = (pos[:, None] > neg[None, :]).sum()
    equal = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * equal) / (len(pos) * len(neg)))


def flat_model(bias: float = 0.0) -> LogisticModel:
    return LogisticModel(weights=np.zeros(5), bias=bias)


class TestStaticPolicy:
    def test_always_full(self):
        assert static_action(make_commit()) == Action.FULL_TESTS

    def test_zero_diff_still_full(self):
        assert static_action(make_commit(diff_size=0)) == Action.FULL_TESTS

    def test_full_on_every_adversarial_commit(self):
        trace = generate_trace(EnvConfig(), 100, seed=3, mode="adversarial")
        assert all(static_action(c) == Action.FULL_TESTS for c in trace)


class TestHeuristicPolicy:
    def test_small_diff_runs_partial(self):
        assert heuristic_action(make_commit(diff_size=19)) == Action.PARTIAL_TESTS

    def test_cutoff_diff_runs_full(self):
        assert heuristic_action(make_commit(diff_size=20)) == Action.FULL_TESTS

    def test_zero_diff_runs_partial(self):
        assert heuristic_action(make_commit(diff_size=0)) == Action.PARTIAL_TESTS

    def test_never_skips(self):
        trace = generate_trace(EnvConfig(), 1000, seed=4)
        assert all(heuristic_action(c) != Action.SKIP_TESTS for c in trace)

    def test_depends_on_diff_size_alone(self):
        base = make_commit(diff_size=10)
        mutated = dataclasses.replace(
            base,
            files_changed=19,
            source_fraction=0.01,
            developer_defect_rate=0.99,
            developer_experience=0.01,
            has_bug=True,
            risk_score=0.99,
        )
        assert heuristic_action(base) == heuristic_action(mutated)


class TestPredictRisk:
    def test_zero_model_predicts_half(self):
        assert predict_risk(flat_model(), make_commit()) == 0.5

    def test_saturated_bias(self):
        assert predict_risk(flat_model(bias=30.0), make_commit()) > 0.999

    def test_prediction_inside_open_interval(self):
        for bias in (-1000.0, 0.0, 1000.0):
            p = predict_risk(flat_model(bias=bias), make_commit())
            assert 0.0 < p < 1.0

    def test_monotone_in_diff_with_positive_weight(self):
        model = LogisticModel(weights=np.array([2.0, 0, 0, 0, 0]), bias=-1.0)
        risks = [
            predict_risk(model, make_commit(diff_size=d)) for d in range(0, 600, 25)
        ]
        assert all(a <= b for a, b in zip(risks, risks[1:]))


class TestTrainClassifier:
    def test_separable_toy_set(self):
        # 200 commits labeled by diff_size > 50: a convex problem any
        # convergent optimizer separates almost perfectly
        rng = np.random.default_rng(5)
        base = generate_trace(EnvConfig(), 200, seed=33)
        toy = [
            dataclasses.replace(c, diff_size=int(d), has_bug=bool(d > 50))
            for c, d in zip(base, rng.integers(0, 501, 200))
        ]
        model = train_classifier(toy, ClassifierConfig())
        accuracy = np.mean([(predict_risk(model, c) >= 0.5) == c.has_bug for c in toy])
        assert accuracy >= 0.99

    def test_single_class_rejected(self):
        commits = [make_commit(has_bug=True) for _ in range(10)]
        with pytest.raises(ValueError):
            train_classifier(commits, ClassifierConfig())

    def test_too_few_examples_rejected(self):
        with pytest.raises(ValueError):
            train_classifier([make_commit()], ClassifierConfig())

    def test_deterministic(self):
        commits = generate_trace(EnvConfig(), 300, seed=8)
        a = train_classifier(commits, ClassifierConfig())
        b = train_classifier(commits, ClassifierConfig())
        np.testing.assert_array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_loss_decreases_monotonically(self):
        # retrain from scratch with growing iteration caps; the fixed-step
        # descent must never increase the regularized objective
        opts = ClassifierConfig(tolerance=1e-300)
        commits = generate_trace(EnvConfig(), 300, seed=8)
        losses = []
        for iterations in range(1, 60, 3):
            model = train_classifier(
                commits, dataclasses.replace(opts, max_iterations=iterations)
            )
            losses.append(log_loss(model, commits, l2_penalty=opts.l2_penalty))
        assert all(a >= b - 1e-12 for a, b in zip(losses, losses[1:]))

    def test_held_out_auc_band(self):
        # the generator must stay learnable but imperfect
        cfg = EnvConfig()
        train = generate_trace(cfg, 5000, seed=101)
        held_out = generate_trace(cfg, 5000, seed=202)
        model = train_classifier(train, ClassifierConfig())
        auc = brute_force_auc(
            [predict_risk(model, c) for c in held_out],
            [c.has_bug for c in held_out],
        )
        assert 0.70 <= auc <= 0.90

    def test_make_classifier_uses_dedicated_history(self):
        model = make_classifier(EnvConfig(), ClassifierConfig(train_size=500, train_seed=7))
        assert model.weights.shape == (5,)
        again = make_classifier(EnvConfig(), ClassifierConfig(train_size=500, train_seed=7))
        np.testing.assert_array_equal(model.weights, again.weights)


class TestClassifierPolicy:
    def test_default_thresholds(self):
        th = ClassifierThresholds()
        low = flat_model(bias=math.log(0.01 / 0.99))  # risk ~ 0.01
        high = flat_model(bias=math.log(0.90 / 0.10))  # risk ~ 0.90
        assert classifier_action(low, th, make_commit()) == Action.SKIP_TESTS
        assert classifier_action(high, th, make_commit()) == Action.FULL_TESTS

    def test_boundary_goes_to_more_thorough_tier(self):
        # sigmoid(0) is exactly 0.5: at tau_skip the policy must not skip,
        # and at tau_partial it must go full
        commit = make_commit()
        model = flat_model(bias=0.0)
        assert (
            classifier_action(model, ClassifierThresholds(0.5, 0.8), commit)
            == Action.PARTIAL_TESTS
        )
        assert (
            classifier_action(model, ClassifierThresholds(0.1, 0.5), commit)
            == Action.FULL_TESTS
        )

    def test_monotone_in_risk(self):
        th = ClassifierThresholds()
        commit = make_commit()
        thoroughness = {Action.SKIP_TESTS: 0, Action.PARTIAL_TESTS: 1, Action.FULL_TESTS: 2}
        previous = -1
        for bias in np.linspace(-8, 8, 200):
            action = classifier_action(flat_model(bias=float(bias)), th, commit)
            assert thoroughness[action] >= previous
            previous = thoroughness[action]

    def test_invalid_thresholds_rejected(self):
        with pytest.raises(ValueError):
            ClassifierThresholds(0.5, 0.2)
        with pytest.raises(ValueError):
            ClassifierThresholds(-0.1, 0.2)
        with pytest.raises(ValueError):
            ClassifierThresholds(0.5, 1.2)
