"""Comparison policies: always-full, diff-size heuristic, and a risk classifier.

The classifier is a from-scratch logistic regression over the observable
commit metadata, trained by full-batch gradient descent on labeled historical
commits. Predicted risk maps to a test scope through two thresholds: very low
risk skips tests, moderate risk runs the partial suite, everything else runs
the full suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .commits import Commit, ObservedCommit, generate_trace
from .config import ClassifierConfig, EnvConfig, StateConfig
from .environment import Action

__all__ = [
    "StaticPolicy",
    "HeuristicPolicy",
    "static_action",
    "heuristic_action",
    "CLASSIFIER_FEATURES",
    "commit_features",
    "LogisticModel",
    "predict_risk",
    "train_classifier",
    "ClassifierThresholds",
    "classifier_action",
    "ClassifierPolicy",
    "AlwaysPolicy",
    "make_classifier",
    "log_loss",
]

CLASSIFIER_FEATURES = (
    "diff_size",
    "files_changed",
    "source_fraction",
    "developer_defect_rate",
    "developer_experience",
)

HEURISTIC_DIFF_CUTOFF = 20  # strictly below runs partial tests


def static_action(commit: ObservedCommit | None = None) -> Action:
    """The always-full baseline: run the entire suite on every commit."""
    return Action.FULL_TESTS


def heuristic_action(commit: ObservedCommit, cutoff: int = HEURISTIC_DIFF_CUTOFF) -> Action:
    """Partial tests for small diffs, full tests otherwise; never skips."""
    return Action.PARTIAL_TESTS if commit.diff_size < cutoff else Action.FULL_TESTS


class StaticPolicy:
    """Policy wrapper around :func:`static_action`."""

    def __call__(self, state: np.ndarray, commit: ObservedCommit) -> Action:
        return static_action(commit)


class HeuristicPolicy:
    """Policy wrapper around :func:`heuristic_action`."""

    def __init__(self, cutoff: int = HEURISTIC_DIFF_CUTOFF):
        self.cutoff = cutoff

    def __call__(self, state: np.ndarray, commit: ObservedCommit) -> Action:
        return heuristic_action(commit, self.cutoff)


class AlwaysPolicy:
    """Fixed-action policy; handy as an oracle in tests and reports."""

    def __init__(self, action: Action):
        self.action = Action(action)

    def __call__(self, state: np.ndarray, commit: ObservedCommit) -> Action:
        return self.action


# --------------------------------------------------------------------------
# logistic risk model
# --------------------------------------------------------------------------

def commit_features(commit: ObservedCommit | Commit, state_cfg: StateConfig | None = None) -> np.ndarray:
    """Normalized metadata features in ``CLASSIFIER_FEATURES`` order."""
    cfg = state_cfg or StateConfig()
    return np.array(
        [
            min(commit.diff_size, cfg.diff_cap) / cfg.diff_cap,
            min(commit.files_changed, cfg.files_cap) / cfg.files_cap,
            commit.source_fraction,
            commit.developer_defect_rate,
            commit.developer_experience,
        ]
    )


@dataclass
class LogisticModel:
    """Logistic regression over normalized commit metadata."""

    weights: np.ndarray
    bias: float
    feature_names: tuple[str, ...] = CLASSIFIER_FEATURES
    state_cfg: StateConfig = field(default_factory=StateConfig)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # evaluated piecewise to stay finite for large |z|
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_risk(model: LogisticModel, commit: ObservedCommit | Commit) -> float:
    """Predicted bug probability, strictly inside (0, 1)."""
    z = float(commit_features(commit, model.state_cfg) @ model.weights + model.bias)
    p = float(_sigmoid(np.array([z]))[0])
    return float(np.clip(p, 1e-15, 1.0 - 1e-15))


def train_classifier(
    commits: list[Commit],
    opts: ClassifierConfig | None = None,
    state_cfg: StateConfig | None = None,
) -> LogisticModel:
    """Fit the risk model on labeled commits by full-batch gradient descent.

    Minimizes mean log-loss plus an L2 penalty on the weights with a fixed
    step size, stopping at the gradient-norm tolerance or the iteration cap.
    Deterministic: zero init, no sampling. Requires both classes present.
    """
    opts = opts or ClassifierConfig()
    cfg = state_cfg or StateConfig()
    if len(commits) < 2:
        raise ValueError("need at least 2 labeled commits")
    x = np.stack([commit_features(c, cfg) for c in commits])
    y = np.array([float(c.has_bug) for c in commits])
    if y.min() == y.max():
        raise ValueError("training set must contain both buggy and clean commits")

    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(opts.max_iterations):
        p = _sigmoid(x @ w + b)
        residual = p - y
        grad_w = x.T @ residual / n + opts.l2_penalty * w
        grad_b = float(residual.mean())
        grad_norm = float(np.sqrt(np.sum(grad_w**2) + grad_b**2))
        if grad_norm <= opts.tolerance:
            break
        w -= opts.learning_rate * grad_w
        b -= opts.learning_rate * grad_b

    return LogisticModel(weights=w, bias=b, feature_names=CLASSIFIER_FEATURES, state_cfg=cfg)


def log_loss(model: LogisticModel, commits: list[Commit], l2_penalty: float = 0.0) -> float:
    """Mean log-loss of the model on labeled commits (plus optional L2 term)."""
    x = np.stack([commit_features(c, model.state_cfg) for c in commits])
    y = np.array([float(c.has_bug) for c in commits])
    p = np.clip(_sigmoid(x @ model.weights + model.bias), 1e-12, 1.0 - 1e-12)
    loss = float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
    return loss + 0.5 * l2_penalty * float(model.weights @ model.weights)


@dataclass
class ClassifierThresholds:
    """Risk cut points: below ``tau_skip`` skip, below ``tau_partial`` partial."""

    tau_skip: float = 0.05
    tau_partial: float = 0.30

    def __post_init__(self):
        if not 0.0 <= self.tau_skip <= self.tau_partial <= 1.0:
            raise ValueError(
                f"need 0 <= tau_skip <= tau_partial <= 1, got "
                f"({self.tau_skip}, {self.tau_partial})"
            )


def classifier_action(
    model: LogisticModel, thresholds: ClassifierThresholds, commit: ObservedCommit
) -> Action:
    """Map predicted risk to a test scope; boundaries go to the more thorough tier."""
    risk = predict_risk(model, commit)
    if risk < thresholds.tau_skip:
        return Action.SKIP_TESTS
    if risk < thresholds.tau_partial:
        return Action.PARTIAL_TESTS
    return Action.FULL_TESTS


class ClassifierPolicy:
    """Policy wrapper around :func:`classifier_action`."""

    def __init__(self, model: LogisticModel, thresholds: ClassifierThresholds | None = None):
        self.model = model
        self.thresholds = thresholds or ClassifierThresholds()

    def __call__(self, state: np.ndarray, commit: ObservedCommit) -> Action:
        return classifier_action(self.model, self.thresholds, commit)


def make_classifier(env_cfg: EnvConfig, opts: ClassifierConfig | None = None) -> LogisticModel:
    """Train the risk model on a dedicated labeled history.

    The training trace uses its own seed and standard mode regardless of the
    evaluation trace mode, standing in for labeled historical commits.
    """
    opts = opts or ClassifierConfig()
    history = generate_trace(env_cfg, opts.train_size, seed=opts.train_seed, mode="standard")
    return train_classifier(history, opts, env_cfg.state)
