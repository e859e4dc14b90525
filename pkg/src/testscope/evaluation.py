"""Policy evaluation: seeded episode runs, metric aggregation, and studies.

Metrics (each reported as mean and sample standard deviation over runs):

* ``tp``  - throughput, commits per hour of simulated pipeline time
* ``dmr`` - defect miss rate, escaped bugs as a percent of introduced bugs
* ``tts`` - test-time savings, percent reduction vs the always-full reference
* ``si``  - sustainability impact, core-minutes of test compute saved

Every comparison replays the identical traces for every policy, with the
always-full baseline computed on the same traces as the reference for
``tts``/``si``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .agent import GreedyPolicy, TrainingLog, train_agent
from .baselines import StaticPolicy
from .commits import Commit, ObservedCommit, generate_trace, observe
from .config import EnvConfig, TrainConfig, adversarial, derive_seed
from .environment import Action, PipelineEnv
from .network import QNetwork

__all__ = [
    "Policy",
    "EpisodeStats",
    "run_episode",
    "MetricStat",
    "RunMetrics",
    "MetricsReport",
    "compute_metrics",
    "PolicyDelta",
    "ComparisonReport",
    "compare_policies",
    "SweepEntry",
    "SweepReport",
    "penalty_sweep",
    "AdversarialReport",
    "adversarial_eval",
    "ConvergenceReport",
    "convergence_stats",
    "comparison_rows",
    "comparison_to_dict",
    "sweep_rows",
    "sweep_to_dict",
    "rows_to_csv",
]

# a policy maps (state vector, redacted commit metadata) to an action;
# the latent bug flag and the generator's risk score never reach it
Policy = Callable[[np.ndarray, ObservedCommit], Action]


@dataclass
class EpisodeStats:
    """Accumulated outcomes of one full episode."""

    commits: int
    total_pipeline_minutes: float
    total_test_minutes: float
    bugs_introduced: int
    bugs_caught: int
    bugs_escaped: int
    action_counts: tuple[int, int, int]
    total_reward: float
    actions_taken: tuple[int, ...] | None = None  # per-commit actions, when recorded


def run_episode(
    policy: Policy,
    trace: list[Commit],
    escape_penalty: float,
    env_cfg: EnvConfig,
    seed: int = 0,
    record_actions: bool = False,
) -> EpisodeStats:
    """Play one trace under ``policy`` and accumulate episode statistics."""
    if len(trace) != env_cfg.commits_per_episode:
        raise ValueError(
            f"trace length {len(trace)} != commits_per_episode "
            f"{env_cfg.commits_per_episode}"
        )
    env = PipelineEnv(trace, env_cfg, seed=seed)
    state = env.reset()

    pipeline_minutes = 0.0
    test_minutes = 0.0
    introduced = caught = escaped = 0
    counts = [0, 0, 0]
    total_reward = 0.0
    taken: list[int] = []

    done = False
    index = 0
    while not done:
        commit = trace[index]
        action = Action(policy(state, observe(commit)))
        outcome, state, done = env.step(action, escape_penalty)

        pipeline_minutes += outcome.pipeline_minutes
        test_minutes += outcome.test_minutes
        introduced += int(commit.has_bug)
        caught += int(outcome.detected)
        escaped += int(outcome.escaped)
        counts[action] += 1
        total_reward += outcome.reward
        if record_actions:
            taken.append(int(action))
        index += 1

    return EpisodeStats(
        commits=len(trace),
        total_pipeline_minutes=pipeline_minutes,
        total_test_minutes=test_minutes,
        bugs_introduced=introduced,
        bugs_caught=caught,
        bugs_escaped=escaped,
        action_counts=(counts[0], counts[1], counts[2]),
        total_reward=total_reward,
        actions_taken=tuple(taken) if record_actions else None,
    )


@dataclass
class MetricStat:
    """Mean and sample standard deviation over runs."""

    mean: float
    std: float


@dataclass
class RunMetrics:
    """Metric values of a single run."""

    run: int
    seed: int
    tp: float
    dmr: float
    tts: float
    si: float


@dataclass
class MetricsReport:
    """Aggregated metrics of one policy over independent runs."""

    tp: MetricStat
    dmr: MetricStat
    tts: MetricStat
    si: MetricStat
    runs: int
    per_run: tuple[RunMetrics, ...]


def _stat(values: list[float]) -> MetricStat:
    arr = np.asarray(values, dtype=np.float64)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return MetricStat(mean=float(arr.mean()), std=std)


def compute_metrics(
    stats: list[EpisodeStats],
    reference: list[EpisodeStats],
    run_seeds: list[int] | None = None,
    cores_per_run: float = 1.0,
) -> MetricsReport:
    """Aggregate per-run metrics against the always-full reference runs.

    ``reference`` must come from the static policy on the identical traces.
    Zero-bug runs define the miss rate as 0; a zero-minute reference defines
    the savings as 0.
    """
    if len(stats) != len(reference):
        raise ValueError(f"got {len(stats)} runs but {len(reference)} reference runs")
    if not stats:
        raise ValueError("need at least one run")
    seeds = run_seeds if run_seeds is not None else [0] * len(stats)
    if len(seeds) != len(stats):
        raise ValueError("run_seeds length must match the number of runs")

    per_run = []
    for i, (s, ref) in enumerate(zip(stats, reference)):
        tp = 60.0 * s.commits / s.total_pipeline_minutes if s.total_pipeline_minutes > 0 else float("inf")
        dmr = 100.0 * s.bugs_escaped / s.bugs_introduced if s.bugs_introduced > 0 else 0.0
        if ref.total_test_minutes > 0:
            tts = 100.0 * (1.0 - s.total_test_minutes / ref.total_test_minutes)
        else:
            tts = 0.0
        si = (ref.total_test_minutes - s.total_test_minutes) * cores_per_run
        per_run.append(RunMetrics(run=i, seed=seeds[i], tp=tp, dmr=dmr, tts=tts, si=si))

    return MetricsReport(
        tp=_stat([r.tp for r in per_run]),
        dmr=_stat([r.dmr for r in per_run]),
        tts=_stat([r.tts for r in per_run]),
        si=_stat([r.si for r in per_run]),
        runs=len(per_run),
        per_run=tuple(per_run),
    )


@dataclass
class PolicyDelta:
    """Improvement of a policy over the static baseline."""

    tp_improvement_pct: float
    dmr_delta_pp: float


@dataclass
class ComparisonReport:
    """Metrics for every policy on identical traces, plus deltas vs static."""

    escape_penalty: float
    n_runs: int
    run_seeds: tuple[int, ...]
    reports: dict[str, MetricsReport]
    deltas: dict[str, PolicyDelta]


def compare_policies(
    policies: Mapping[str, Policy],
    env_cfg: EnvConfig,
    escape_penalty: float,
    n_runs: int = 5,
    base_seed: int = 1000,
    record_actions: bool = False,
) -> tuple[ComparisonReport, dict[str, list[EpisodeStats]]]:
    """Evaluate every policy on the same seeded traces.

    Returns the report and the raw per-policy episode stats. The always-full
    reference is computed internally on the identical traces (and reused for
    a policy named ``"static"``).
    """
    if not policies:
        raise ValueError("need at least one policy")
    static = StaticPolicy()
    run_seeds = [derive_seed(base_seed, i) for i in range(n_runs)]

    reference: list[EpisodeStats] = []
    all_stats: dict[str, list[EpisodeStats]] = {name: [] for name in policies}
    for i, run_seed in enumerate(run_seeds):
        trace = generate_trace(env_cfg, env_cfg.commits_per_episode, seed=derive_seed(run_seed, 0))
        env_seed = derive_seed(run_seed, 1)
        ref_stats = run_episode(static, trace, escape_penalty, env_cfg, seed=env_seed)
        reference.append(ref_stats)
        for name, policy in policies.items():
            if isinstance(policy, StaticPolicy) and not record_actions:
                stats = replace(ref_stats)
            else:
                stats = run_episode(
                    policy,
                    trace,
                    escape_penalty,
                    env_cfg,
                    seed=env_seed,
                    record_actions=record_actions,
                )
            all_stats[name].append(stats)

    static_report = compute_metrics(reference, reference, run_seeds)
    reports = {
        name: compute_metrics(stats, reference, run_seeds) for name, stats in all_stats.items()
    }
    deltas = {}
    for name, report in reports.items():
        tp_ref = static_report.tp.mean
        deltas[name] = PolicyDelta(
            tp_improvement_pct=100.0 * (report.tp.mean - tp_ref) / tp_ref if tp_ref else 0.0,
            dmr_delta_pp=report.dmr.mean - static_report.dmr.mean,
        )

    report = ComparisonReport(
        escape_penalty=escape_penalty,
        n_runs=n_runs,
        run_seeds=tuple(run_seeds),
        reports=reports,
        deltas=deltas,
    )
    return report, all_stats


@dataclass
class SweepEntry:
    """One penalty setting: the trained network, its log, and its evaluation."""

    escape_penalty: float
    net: QNetwork
    log: TrainingLog
    comparison: ComparisonReport


@dataclass
class SweepReport:
    """Escape-penalty sweep results, one entry per requested penalty."""

    entries: list[SweepEntry]

    def entry(self, escape_penalty: float) -> SweepEntry:
        for e in self.entries:
            if e.escape_penalty == escape_penalty:
                return e
        raise KeyError(f"no sweep entry for penalty {escape_penalty}")


def penalty_sweep(
    env_cfg: EnvConfig,
    train_cfg: TrainConfig,
    penalties: tuple[float, ...] = (1.0, 3.0, 5.0, 10.0),
    n_runs: int = 5,
    eval_seed: int = 1000,
) -> SweepReport:
    """Train one agent per escape penalty and evaluate each on identical traces.

    Each agent trains with the same seed and differs only in the penalty, so
    the sweep isolates the speed-vs-safety trade-off.
    """
    if not penalties:
        raise ValueError("need at least one penalty value")
    entries = []
    for penalty in penalties:
        cfg = replace(train_cfg, escape_penalty=penalty)
        net, log = train_agent(env_cfg, cfg)
        comparison, _ = compare_policies(
            {"rl": GreedyPolicy(net)},
            env_cfg,
            escape_penalty=penalty,
            n_runs=n_runs,
            base_seed=eval_seed,
        )
        entries.append(
            SweepEntry(escape_penalty=penalty, net=net, log=log, comparison=comparison)
        )
    return SweepReport(entries=entries)


@dataclass
class AdversarialReport:
    """Stress-trace evaluation plus how small diffs were treated."""

    metrics: MetricsReport
    low_diff_partial_fraction: float
    low_diff_cutoff: int


def adversarial_eval(
    policy: Policy,
    env_cfg: EnvConfig,
    escape_penalty: float,
    n_runs: int = 5,
    base_seed: int = 1000,
) -> AdversarialReport:
    """Evaluate a policy on adversarial traces.

    Also reports the fraction of small-diff (streak) commits that received
    partial tests, the behavior diff-based policies exhibit on these traces.
    """
    cfg = adversarial(env_cfg)
    comparison, all_stats = compare_policies(
        {"policy": policy},
        cfg,
        escape_penalty,
        n_runs=n_runs,
        base_seed=base_seed,
        record_actions=True,
    )
    cutoff = cfg.generator.streak_diff_max

    low_total = 0
    low_partial = 0
    for i, stats in enumerate(all_stats["policy"]):
        run_seed = comparison.run_seeds[i]
        trace = generate_trace(cfg, cfg.commits_per_episode, seed=derive_seed(run_seed, 0))
        assert stats.actions_taken is not None
        for commit, action in zip(trace, stats.actions_taken):
            if commit.diff_size <= cutoff:
                low_total += 1
                low_partial += int(action == Action.PARTIAL_TESTS)

    fraction = low_partial / low_total if low_total else 0.0
    return AdversarialReport(
        metrics=comparison.reports["policy"],
        low_diff_partial_fraction=fraction,
        low_diff_cutoff=cutoff,
    )


@dataclass
class ConvergenceReport:
    """First episode where the trailing reward window is stable, if any."""

    converged_episode: int | None
    window: int
    threshold: float


def convergence_stats(
    log: TrainingLog | np.ndarray, window: int = 100, threshold: float = 0.03
) -> ConvergenceReport:
    """Find the first episode whose trailing-window rewards look converged.

    Converged means the coefficient of variation (sample std over |mean|) of
    the last ``window`` episode rewards drops below ``threshold``. Windows
    with zero mean are treated as not converged at that point.
    """
    rewards = log.rewards() if isinstance(log, TrainingLog) else np.asarray(log, dtype=np.float64)
    if rewards.size < window:
        raise ValueError(f"log has {rewards.size} episodes, need at least {window}")
    for end in range(window, rewards.size + 1):
        chunk = rewards[end - window : end]
        mean = float(chunk.mean())
        if mean == 0.0:
            continue
        std = float(np.std(chunk, ddof=1)) if window > 1 else 0.0
        if std / abs(mean) < threshold:
            return ConvergenceReport(converged_episode=end, window=window, threshold=threshold)
    return ConvergenceReport(converged_episode=None, window=window, threshold=threshold)


# --------------------------------------------------------------------------
# report serialization: tabular rows and JSON-ready dicts
# --------------------------------------------------------------------------

REPORT_COLUMNS = ("policy", "beta", "run", "seed", "tp", "dmr", "tts", "si")


def _metric_rows(policy: str, penalty: float, report: MetricsReport) -> list[dict]:
    rows = []
    for r in report.per_run:
        rows.append(
            {
                "policy": policy,
                "beta": penalty,
                "run": r.run,
                "seed": r.seed,
                "tp": r.tp,
                "dmr": r.dmr,
                "tts": r.tts,
                "si": r.si,
            }
        )
    for kind in ("mean", "std"):
        rows.append(
            {
                "policy": policy,
                "beta": penalty,
                "run": kind,
                "seed": "",
                "tp": getattr(report.tp, kind),
                "dmr": getattr(report.dmr, kind),
                "tts": getattr(report.tts, kind),
                "si": getattr(report.si, kind),
            }
        )
    return rows


def comparison_rows(report: ComparisonReport) -> list[dict]:
    """Flatten a comparison into report rows (per run plus mean/std per policy)."""
    rows = []
    for name in sorted(report.reports):
        rows.extend(_metric_rows(name, report.escape_penalty, report.reports[name]))
    return rows


def _metrics_dict(report: MetricsReport) -> dict:
    return {
        "runs": report.runs,
        "tp": {"mean": report.tp.mean, "std": report.tp.std},
        "dmr": {"mean": report.dmr.mean, "std": report.dmr.std},
        "tts": {"mean": report.tts.mean, "std": report.tts.std},
        "si": {"mean": report.si.mean, "std": report.si.std},
        "per_run": [
            {"run": r.run, "seed": r.seed, "tp": r.tp, "dmr": r.dmr, "tts": r.tts, "si": r.si}
            for r in report.per_run
        ],
    }


def comparison_to_dict(report: ComparisonReport) -> dict:
    return {
        "beta": report.escape_penalty,
        "n_runs": report.n_runs,
        "run_seeds": list(report.run_seeds),
        "policies": {name: _metrics_dict(rep) for name, rep in sorted(report.reports.items())},
        "deltas_vs_static": {
            name: {
                "tp_improvement_pct": d.tp_improvement_pct,
                "dmr_delta_pp": d.dmr_delta_pp,
            }
            for name, d in sorted(report.deltas.items())
        },
    }


def sweep_rows(sweep: SweepReport) -> list[dict]:
    rows = []
    for entry in sweep.entries:
        rows.extend(comparison_rows(entry.comparison))
    return rows


def sweep_to_dict(sweep: SweepReport) -> dict:
    return {
        "entries": [
            {
                "beta": e.escape_penalty,
                "comparison": comparison_to_dict(e.comparison),
            }
            for e in sweep.entries
        ]
    }


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict], header_comments: list[str] | None = None) -> str:
    """Render report rows as CSV text with optional ``#`` header comments."""
    lines = [f"# {c}" for c in (header_comments or [])]
    lines.append(",".join(REPORT_COLUMNS))
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"
