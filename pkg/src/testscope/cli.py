"""Experiment command-line interface.

Subcommands::

    trace-gen   generate a commit trace file
    train       train the Q-learning agent, write weights and a training log
    eval        evaluate one policy against the always-full reference
    compare     evaluate all policies on identical traces
    sweep       train and evaluate one agent per escape-penalty value

Every command accepts ``--config`` (path to a key=value file, or ``default``
for built-in defaults), ``--seed`` (overrides both the training and the
evaluation seed), and ``--out`` (output directory). Outputs are written
atomically and named ``<command>-<seed>-<counter>.<ext>`` with no timestamps,
so identical invocations produce byte-identical files. Each report embeds the
full configuration snapshot in its header.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agent import GreedyPolicy, TrainingLog, train_agent
from .baselines import (
    ClassifierPolicy,
    ClassifierThresholds,
    HeuristicPolicy,
    LogisticModel,
    StaticPolicy,
    make_classifier,
)
from .commits import generate_trace, trace_to_text
from .config import ConfigError, ExperimentConfig, config_items, load_config
from .evaluation import (
    compare_policies,
    comparison_rows,
    comparison_to_dict,
    penalty_sweep,
    rows_to_csv,
    sweep_rows,
    sweep_to_dict,
)
from .fileio import atomic_write
from .network import QNetwork
from .persist import KIND_LOGISTIC, KIND_QNETWORK, WeightFileError, load_policy, save_policy

__all__ = ["run_command", "main"]

POLICY_CHOICES = ("static", "heuristic", "classifier", "rl")


class _Outputs:
    """Names output files ``<command>-<seed>-<counter>.<ext>`` in order."""

    def __init__(self, out_dir: str, command: str, seed: int):
        self.dir = Path(out_dir)
        self.command = command
        self.seed = seed
        self.counter = 0
        self.written: list[Path] = []

    def path(self, ext: str) -> Path:
        path = self.dir / f"{self.command}-{self.seed}-{self.counter}.{ext}"
        self.counter += 1
        return path

    def write(self, ext: str, data: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.path(ext)
        atomic_write(path, data)
        self.written.append(path)
        return path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="testscope", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default="default", help="config file path, or 'default'")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory override")

    p = sub.add_parser("trace-gen", help="generate a commit trace file")
    common(p)
    p.add_argument("--n", type=int, default=None, help="number of commits")
    p.add_argument("--mode", choices=("standard", "adversarial"), default=None)

    p = sub.add_parser("train", help="train the agent")
    common(p)
    p.add_argument("--episodes", type=int, default=None, help="episode count override")

    p = sub.add_parser("eval", help="evaluate one policy")
    common(p)
    p.add_argument("--policy", choices=POLICY_CHOICES, required=True)
    p.add_argument("--weights", default=None, help="weight file for rl or classifier")

    p = sub.add_parser("compare", help="evaluate all policies on identical traces")
    common(p)
    p.add_argument("--weights", default=None, help="reuse trained agent weights")

    p = sub.add_parser("sweep", help="train and evaluate across escape penalties")
    common(p)

    return parser


def _load_experiment(args: argparse.Namespace) -> tuple[ExperimentConfig, int]:
    if args.config == "default":
        cfg = ExperimentConfig()
    else:
        cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg.train.seed = args.seed
        cfg.eval.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg, cfg.train.seed


def _snapshot_items(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    # output_dir is where a report lives, not an experiment parameter;
    # leaving it out keeps reruns into different directories diffable
    return [(k, v) for k, v in config_items(cfg) if k != "output_dir"]


def _snapshot_lines(command: str, cfg: ExperimentConfig) -> list[str]:
    lines = [
        "testscope report, format 1",
        f"command: {command}",
    ]
    lines.extend(f"config {key} = {value}" for key, value in _snapshot_items(cfg))
    return lines


def _training_log_csv(log: TrainingLog, comments: list[str]) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append("episode,total_reward,epsilon,mean_td_loss,full_tests,partial_tests,skip_tests")
    for r in log.records:
        lines.append(
            f"{r.episode},{r.total_reward!r},{r.epsilon!r},{r.mean_td_loss!r},"
            f"{r.action_counts[0]},{r.action_counts[1]},{r.action_counts[2]}"
        )
    return "\n".join(lines) + "\n"


def _json_report(command: str, cfg: ExperimentConfig, body: dict) -> str:
    document = {
        "format_version": 1,
        "command": command,
        "config": dict(_snapshot_items(cfg)),
        "report": body,
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _make_policy(name: str, cfg: ExperimentConfig, weights: str | None):
    if name == "static":
        return StaticPolicy()
    if name == "heuristic":
        return HeuristicPolicy()
    if name == "classifier":
        if weights is not None:
            model = load_policy(weights, expect_kind=KIND_LOGISTIC)
            assert isinstance(model, LogisticModel)
        else:
            model = make_classifier(cfg.env, cfg.classifier)
        thresholds = ClassifierThresholds(cfg.classifier.tau_skip, cfg.classifier.tau_partial)
        return ClassifierPolicy(model, thresholds)
    if name == "rl":
        if weights is None:
            raise ConfigError("the rl policy needs --weights pointing at a trained agent")
        net = load_policy(weights, expect_kind=KIND_QNETWORK)
        assert isinstance(net, QNetwork)
        return GreedyPolicy(net)
    raise ConfigError(f"unknown policy {name!r}")


def _cmd_trace_gen(args: argparse.Namespace) -> int:
    cfg, seed = _load_experiment(args)
    n = args.n if args.n is not None else cfg.env.commits_per_episode
    trace = generate_trace(cfg.env, n, seed=seed, mode=args.mode)
    out = _Outputs(cfg.output_dir, "trace-gen", seed)
    path = out.write("csv", trace_to_text(trace))
    print(f"wrote {path} ({n} commits)")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg, seed = _load_experiment(args)
    if args.episodes is not None:
        cfg.train.episodes = args.episodes
        if cfg.train.episodes < 1:
            raise ConfigError("--episodes must be >= 1")
    net, log = train_agent(cfg.env, cfg.train)
    out = _Outputs(cfg.output_dir, "train", seed)
    out.dir.mkdir(parents=True, exist_ok=True)
    weight_path = out.path("json")
    save_policy(weight_path, net, cfg.train)
    out.written.append(weight_path)
    log_path = out.write("csv", _training_log_csv(log, _snapshot_lines("train", cfg)))
    print(f"wrote {weight_path} and {log_path} ({len(log)} episodes)")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg, seed = _load_experiment(args)
    policy = _make_policy(args.policy, cfg, args.weights)
    report, _ = compare_policies(
        {args.policy: policy},
        cfg.env,
        escape_penalty=cfg.train.escape_penalty,
        n_runs=cfg.eval.n_runs,
        base_seed=cfg.eval.seed,
    )
    out = _Outputs(cfg.output_dir, "eval", seed)
    csv_path = out.write("csv", rows_to_csv(comparison_rows(report), _snapshot_lines("eval", cfg)))
    json_path = out.write("json", _json_report("eval", cfg, comparison_to_dict(report)))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg, seed = _load_experiment(args)
    if args.weights is not None:
        net = load_policy(args.weights, expect_kind=KIND_QNETWORK)
        assert isinstance(net, QNetwork)
    else:
        net, _ = train_agent(cfg.env, cfg.train)
    policies = {
        "static": StaticPolicy(),
        "heuristic": HeuristicPolicy(),
        "classifier": _make_policy("classifier", cfg, None),
        "rl": GreedyPolicy(net),
    }
    report, _ = compare_policies(
        policies,
        cfg.env,
        escape_penalty=cfg.train.escape_penalty,
        n_runs=cfg.eval.n_runs,
        base_seed=cfg.eval.seed,
    )
    out = _Outputs(cfg.output_dir, "compare", seed)
    csv_path = out.write(
        "csv", rows_to_csv(comparison_rows(report), _snapshot_lines("compare", cfg))
    )
    json_path = out.write("json", _json_report("compare", cfg, comparison_to_dict(report)))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg, seed = _load_experiment(args)
    sweep = penalty_sweep(
        cfg.env,
        cfg.train,
        penalties=cfg.eval.penalties,
        n_runs=cfg.eval.n_runs,
        eval_seed=cfg.eval.seed,
    )
    out = _Outputs(cfg.output_dir, "sweep", seed)
    csv_path = out.write("csv", rows_to_csv(sweep_rows(sweep), _snapshot_lines("sweep", cfg)))
    json_path = out.write("json", _json_report("sweep", cfg, sweep_to_dict(sweep)))
    print(f"wrote {csv_path} and {json_path} ({len(sweep.entries)} penalty values)")
    return 0


_COMMANDS = {
    "trace-gen": _cmd_trace_gen,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
}


def run_command(argv: list[str]) -> int:
    """Parse ``argv`` and run one subcommand; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, WeightFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
