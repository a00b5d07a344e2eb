"""End-to-end condition runner: corpus -> workers -> engine -> statistics.

``run_condition`` drives a simulated worker population against the session
engine until every scene has its quota of accepted responses, applies the
spam filter (workers with more than five HITs and an average mIoU below
25 are dropped from analysis), and reduces the survivors to a
ConditionSummary. ``compare_conditions`` reproduces the rank-sum
comparisons against a baseline with Bonferroni adjustment, and
``emit_outputs`` serializes every table and curve as CSV.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .dataset import Corpus, generate_corpus, load_corpus
from .engine import AcceptedResponse, Engine, EngineConfig, Terminal, Workflow, _stable_hash
from .events import EventLog
from .geometry import BoundingBox
from .ledger import ConsequenceMode, TierPolicy, banner as banner_fn
from .payments import (
    BaselineBinned,
    FlatSubtask,
    PaymentPolicy,
    PostTaskBonus,
    RegularBonusPay,
    VariablePay,
)
from .scheduling import Dynamic, FibRegular, NoGold, Regular, SchedulePolicy, Upfront
from .scoring import SizeBucket, size_buckets
from .simulator import (
    PopulationSpec,
    SimContext,
    SimPopulation,
    SimTuning,
    SimWorker,
    decide_continue,
    simulate_hit,
    simulate_iteration,
)
from .stats import StatResult, bonferroni, mann_whitney, significance_marker
from .workflows import AddBoxes, IterationState, MarkerSource, SubTask

SPAM_MIN_HITS = 5  # strictly more than this many HITs ...
SPAM_MIOU_THRESHOLD = 25.0  # ... and an average mIoU strictly below this

DEFAULT_SIZE_BUCKET_EDGES = [2500.0, 6000.0, 12000.0]  # px^2
POPULATION_CAP_FACTOR = 50

CONDITIONS = (
    "baseline",
    "variable_pay",
    "post_task_bonus",
    "decomp_oracle",
    "decomp_manual",
    "iterative",
    "gold_regular",
    "gold_upfront",
    "gold_fib_regular",
    "gold_regular_bonus",
    "gold_improved",
)


class HarnessError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    """Everything needed to run one condition, JSON-serializable."""

    condition: str
    seed: int = 0
    responses_per_scene: int = 3
    corpus_path: str | None = None
    corpus_seed: int = 7
    corpus_spec: dict[int, int] | None = None
    schedule_kind: str = "none"  # none | upfront | regular | fib_regular | dynamic
    upfront_k: int = 5
    regular_block: int = 5
    fib_cutoff: int = 50
    tail_block: int = 20
    payment_kind: str = "baseline_binned"
    post_base_cents: int = 4
    consequence_mode: str = "none"
    workflow: str = "single"
    t_min: float = 50.0
    t_bonus_b: float = 75.0
    t_bonus_a: float = 85.0
    stat_unit: str = "submission"  # or "gt_box"
    population: PopulationSpec = field(default_factory=PopulationSpec)
    tuning: SimTuning = field(default_factory=SimTuning)

    def schedule_policy(self) -> SchedulePolicy:
        kinds = {
            "none": lambda: NoGold(),
            "upfront": lambda: Upfront(self.upfront_k),
            "regular": lambda: Regular(self.regular_block),
            "fib_regular": lambda: FibRegular(self.fib_cutoff, self.tail_block),
            "dynamic": lambda: Dynamic(FibRegular(self.fib_cutoff, self.tail_block), self.t_min),
        }
        if self.schedule_kind not in kinds:
            raise ValueError(f"unknown schedule kind {self.schedule_kind!r}")
        return SchedulePolicy(kind=kinds[self.schedule_kind](), rng_seed=self.seed)

    def payment_policy(self) -> PaymentPolicy:
        kinds: dict[str, PaymentPolicy] = {
            "baseline_binned": BaselineBinned(),
            "variable_pay": VariablePay(),
            "post_task_bonus": PostTaskBonus(base_cents=self.post_base_cents),
            "flat_subtask": FlatSubtask(),
            "regular_bonus": RegularBonusPay(),
        }
        if self.payment_kind not in kinds:
            raise ValueError(f"unknown payment kind {self.payment_kind!r}")
        return kinds[self.payment_kind]

    def tier_policy(self) -> TierPolicy:
        return TierPolicy(t_min=self.t_min, t_bonus_b=self.t_bonus_b, t_bonus_a=self.t_bonus_a)

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            condition=self.condition,
            schedule=self.schedule_policy(),
            tiers=self.tier_policy(),
            consequence_mode=ConsequenceMode(self.consequence_mode),
            payment=self.payment_policy(),
            workflow=Workflow(self.workflow),
            responses_per_scene=self.responses_per_scene,
            seed=self.seed,
        )

    def corpus(self) -> Corpus:
        if self.corpus_path:
            corpus, _ = load_corpus(self.corpus_path)
            return corpus
        spec = None
        if self.corpus_spec is not None:
            spec = {int(k): int(v) for k, v in self.corpus_spec.items()}
        return generate_corpus(self.corpus_seed, spec)

    def to_json(self) -> str:
        rec = asdict(self)
        return json.dumps(rec, indent=2, sort_keys=True)

    @staticmethod
    def from_dict(rec: dict[str, Any]) -> "ExperimentConfig":
        rec = dict(rec)
        pop = rec.pop("population", None)
        tun = rec.pop("tuning", None)
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(rec) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = ExperimentConfig(**rec)
        if pop is not None:
            cfg.population = PopulationSpec(**pop)
        if tun is not None:
            cfg.tuning = SimTuning(**tun)
        return cfg

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        return ExperimentConfig.from_dict(json.loads(text))


def condition_preset(name: str, seed: int = 0, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Canonical configuration for each named condition."""
    presets: dict[str, dict[str, Any]] = {
        "baseline": {},
        "variable_pay": {"payment_kind": "variable_pay"},
        "post_task_bonus": {"payment_kind": "post_task_bonus"},
        "decomp_oracle": {"payment_kind": "flat_subtask", "workflow": "decompose_oracle"},
        "decomp_manual": {"payment_kind": "flat_subtask", "workflow": "decompose_manual"},
        "iterative": {"payment_kind": "flat_subtask", "workflow": "iterative"},
        "gold_regular": {
            "schedule_kind": "regular",
            "consequence_mode": "warning",
            "responses_per_scene": 5,
        },
        "gold_upfront": {
            "schedule_kind": "upfront",
            "consequence_mode": "warning",
            "responses_per_scene": 5,
        },
        "gold_fib_regular": {
            "schedule_kind": "fib_regular",
            "consequence_mode": "warning",
            "responses_per_scene": 5,
        },
        "gold_regular_bonus": {
            "schedule_kind": "regular",
            "payment_kind": "regular_bonus",
            "consequence_mode": "bonus",
            "responses_per_scene": 5,
        },
        "gold_improved": {
            "schedule_kind": "dynamic",
            "consequence_mode": "tiered",
            "responses_per_scene": 5,
        },
    }
    if name not in presets:
        raise ValueError(f"unknown condition {name!r}; expected one of {CONDITIONS}")
    cfg = ExperimentConfig(condition=name, seed=seed, **presets[name])
    for key, value in (overrides or {}).items():
        if key == "population":
            cfg.population = PopulationSpec(**value) if isinstance(value, dict) else value
        elif key == "tuning":
            cfg.tuning = SimTuning(**value) if isinstance(value, dict) else value
        else:
            if not hasattr(cfg, key):
                raise ValueError(f"unknown override {key!r}")
            setattr(cfg, key, value)
    return cfg


@dataclass(frozen=True)
class PerCountRow:
    count: int
    mean_miou: float | None
    mean_recall_05: float | None
    mean_time_s: float | None  # per accepted response
    responses: int


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    seed: int
    stat_unit: str
    n_responses: int
    mean_miou: float
    se_miou: float
    mean_time_s: float  # per HIT
    mean_response_time_s: float  # per accepted response (sums workflow parts)
    mean_hourly_pay: float  # dollars per hour across retained workers
    per_count: tuple[PerCountRow, ...]
    buckets: tuple[SizeBucket, ...]
    hits_per_worker: tuple[int, ...]
    completion_order_bins: tuple[tuple[float, int], ...]  # (mean mIoU, n) for 3 bins
    miou_samples: tuple[float, ...]  # per accepted response
    gt_box_samples: tuple[float, ...]  # per ground-truth box, percent
    filtered_workers: tuple[str, ...]
    blocked_workers: tuple[str, ...]

    def samples(self) -> tuple[float, ...]:
        return self.miou_samples if self.stat_unit == "submission" else self.gt_box_samples


def _spam_filtered(engine: Engine) -> set[str]:
    """Workers excluded from analysis: > SPAM_MIN_HITS HITs and average
    measured mIoU strictly below the threshold."""
    out = set()
    for worker_id, sess in engine.sessions.items():
        if sess.hits_completed > SPAM_MIN_HITS and sess.submission_mious:
            avg = sum(sess.submission_mious) / len(sess.submission_mious)
            if avg < SPAM_MIOU_THRESHOLD:
                out.add(worker_id)
    return out


def run_condition(
    cfg: ExperimentConfig, log_path: str | Path | None = None
) -> tuple[ConditionSummary, EventLog, Engine]:
    """Simulate one condition to quota and summarize the retained responses."""
    corpus = cfg.corpus()
    engine = Engine(cfg.engine_config(), corpus, EventLog(log_path))
    # one pool per experiment seed, shared across conditions: paired draws
    # keep condition comparisons from riding on pool luck
    population = SimPopulation(
        seed=_stable_hash("population", cfg.seed) & 0xFFFFFFFF, spec=cfg.population
    )
    _drive_population(cfg, engine, corpus, population)
    summary = summarize(cfg, engine)
    return summary, engine.log, engine


def _drive_population(
    cfg: ExperimentConfig, engine: Engine, corpus: Corpus, population: SimPopulation
) -> None:
    queue: deque[tuple[SimWorker, np.random.Generator]] = deque()
    spawned = 0
    cap = cfg.population.size * POPULATION_CAP_FACTOR

    def spawn(count: int) -> None:
        nonlocal spawned
        for _ in range(count):
            worker = population.worker(spawned)
            rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, _stable_hash("sim", cfg.condition, spawned)])
            )
            queue.append((worker, rng))
            spawned += 1

    spawn(cfg.population.size)
    while not engine.done:
        if not queue:
            if spawned >= cap:
                raise HarnessError(
                    f"population exhausted before quota in condition {cfg.condition!r} "
                    f"({len(engine.accepted)} responses accepted; event log retained)"
                )
            # abandoning workers are replaced by fresh draws, one at a time
            spawn(1)
            continue
        worker, rng = queue.popleft()
        keep = _one_turn(cfg, engine, corpus, worker, rng)
        if keep:
            queue.append((worker, rng))


def _context(cfg: ExperimentConfig, engine: Engine, worker: SimWorker) -> SimContext:
    sess = engine.session(worker.worker_id)
    mode = ConsequenceMode(cfg.consequence_mode)
    return SimContext(
        tuning=cfg.tuning,
        payment=engine.config.payment,
        consequence_mode=mode,
        banner=banner_fn(sess.ledger, engine.config.tiers) if mode is ConsequenceMode.TIERED else None,
        warnings=sess.ledger.warnings_issued,
        blocked=sess.ledger.blocked,
        pay_cents_so_far=sess.pay_cents,
        seconds_so_far=sess.elapsed_s,
    )


def _one_turn(
    cfg: ExperimentConfig,
    engine: Engine,
    corpus: Corpus,
    worker: SimWorker,
    rng: np.random.Generator,
) -> bool:
    """One HIT for one worker. Returns True if the worker stays in the pool."""
    hit = engine.next_hit(worker.worker_id)
    if isinstance(hit, Terminal):
        return False
    scene = engine.scenes[hit.scene_id]
    ctx = _context(cfg, engine, worker)

    if hit.kind == "subtask":
        task = SubTask(
            hit.scene_id,
            tuple((m[0], m[1]) for m in (hit.markers or [])),
            MarkerSource.ORACLE
            if cfg.workflow == Workflow.DECOMPOSE_ORACLE.value
            else MarkerSource.MANUAL,
        )
        ann = simulate_hit(worker, task, scene, ctx, rng)
        result = engine.submit(worker.worker_id, hit.hit_id, list(ann.boxes), ann.elapsed)
    elif hit.kind == "iteration":
        prior = tuple((BoundingBox(*vals), "prev") for vals in (hit.prior_boxes or []))
        state = IterationState(
            scene_id=hit.scene_id, boxes=prior, iteration_index=hit.iteration or 0
        )
        contribution, elapsed = simulate_iteration(worker, state, scene, ctx, rng)
        if isinstance(contribution, AddBoxes):
            result = engine.submit(
                worker.worker_id, hit.hit_id, list(contribution.boxes), elapsed
            )
        else:
            result = engine.submit(worker.worker_id, hit.hit_id, [], elapsed, complete=True)
    else:
        ann = simulate_hit(worker, scene, scene, ctx, rng)
        result = engine.submit(worker.worker_id, hit.hit_id, list(ann.boxes), ann.elapsed)

    if result.feedback is not None:
        worker.observe_gold_feedback(cfg.tuning)
    else:
        worker.decay_learning(cfg.tuning)
    if result.blocked:
        return False
    sess = engine.session(worker.worker_id)
    if sess.hits_completed >= worker.target_hits:
        engine.mark_abandoned(worker.worker_id)
        return False
    ctx_after = _context(cfg, engine, worker)
    if not decide_continue(worker, ctx_after, rng):
        engine.mark_abandoned(worker.worker_id)
        return False
    return True


def summarize(cfg: ExperimentConfig, engine: Engine) -> ConditionSummary:
    filtered = _spam_filtered(engine)
    responses = [
        r
        for r in engine.accepted
        if not any(w in filtered for w in r.worker_id.split("+"))
    ]
    if not responses:
        raise HarnessError(f"no responses retained for condition {cfg.condition!r}")

    mious = [r.report.miou for r in responses]
    gt_samples = [100.0 * v for r in responses for v in r.report.per_gt_iou]
    n = len(mious)
    mean = sum(mious) / n
    se = (math.sqrt(sum((v - mean) ** 2 for v in mious) / (n - 1)) / math.sqrt(n)) if n > 1 else 0.0
    if cfg.stat_unit == "gt_box":
        gn = len(gt_samples)
        gmean = sum(gt_samples) / gn
        se = (
            math.sqrt(sum((v - gmean) ** 2 for v in gt_samples) / (gn - 1)) / math.sqrt(gn)
            if gn > 1
            else 0.0
        )

    sessions = [
        s for wid, s in engine.sessions.items() if wid not in filtered and s.hits_completed > 0
    ]
    total_hits = sum(s.hits_completed for s in sessions)
    total_time = sum(s.elapsed_s for s in sessions)
    total_pay = sum(s.pay_cents for s in sessions)
    mean_time = total_time / total_hits if total_hits else 0.0
    hourly = (total_pay / 100.0) / (total_time / 3600.0) if total_time > 0 else 0.0

    per_count = []
    by_count: dict[int, list[AcceptedResponse]] = {}
    for r in responses:
        by_count.setdefault(engine.scenes[r.scene_id].count, []).append(r)
    for count in sorted({s.count for s in engine.corpus.scenes}):
        rows = by_count.get(count, [])
        if rows:
            miou_mean = sum(r.report.miou for r in rows) / len(rows)
            recall_mean = sum(
                sum(1 for v in r.report.per_gt_iou if v > 0.5) / len(r.report.per_gt_iou)
                for r in rows
            ) / len(rows)
            time_mean = sum(r.elapsed for r in rows) / len(rows)
        else:
            miou_mean = recall_mean = time_mean = None
        per_count.append(PerCountRow(count, miou_mean, recall_mean, time_mean, len(rows)))

    buckets = size_buckets(
        [(engine.scenes[r.scene_id], r.report) for r in responses], DEFAULT_SIZE_BUCKET_EDGES
    )

    hits_dist = tuple(sorted(s.hits_completed for s in sessions))

    order_bins: list[list[float]] = [[], [], []]
    for r in responses:
        if "+" in r.worker_id or r.worker_id not in engine.sessions:
            continue
        total = engine.sessions[r.worker_id].hits_completed
        if total <= 0 or r.order_ordinal <= 0:
            continue
        b = min(2, (r.order_ordinal - 1) * 3 // total)
        order_bins[b].append(r.report.miou)
    completion = tuple(
        (sum(vals) / len(vals) if vals else 0.0, len(vals)) for vals in order_bins
    )

    return ConditionSummary(
        condition=cfg.condition,
        seed=cfg.seed,
        stat_unit=cfg.stat_unit,
        n_responses=n,
        mean_miou=mean,
        se_miou=se,
        mean_time_s=mean_time,
        mean_response_time_s=sum(r.elapsed for r in responses) / n,
        mean_hourly_pay=hourly,
        per_count=tuple(per_count),
        buckets=tuple(buckets),
        hits_per_worker=hits_dist,
        completion_order_bins=completion,
        miou_samples=tuple(mious),
        gt_box_samples=tuple(gt_samples),
        filtered_workers=tuple(sorted(filtered)),
        blocked_workers=tuple(
            sorted(w for w, s in engine.sessions.items() if s.ledger.blocked)
        ),
    )


@dataclass(frozen=True)
class ComparisonRow:
    condition: str
    baseline: str
    result: StatResult
    mean: float
    baseline_mean: float
    marker: str  # significance at the adjusted p


def compare_conditions(
    summaries: dict[str, ConditionSummary], baseline_name: str
) -> list[ComparisonRow]:
    """Every condition against the baseline, Bonferroni-adjusted as one family."""
    if baseline_name not in summaries:
        raise ValueError(f"baseline {baseline_name!r} not among summaries")
    if len(summaries) < 2:
        raise ValueError("need at least two conditions to compare")
    base = summaries[baseline_name]
    raw: dict[str, StatResult] = {}
    for name, summary in summaries.items():
        if name == baseline_name:
            continue
        raw[name] = mann_whitney(list(summary.samples()), list(base.samples()))
    adjusted = bonferroni(raw)
    rows = []
    for name in sorted(adjusted):
        res = adjusted[name]
        rows.append(
            ComparisonRow(
                condition=name,
                baseline=baseline_name,
                result=res,
                mean=summaries[name].mean_miou,
                baseline_mean=base.mean_miou,
                marker=significance_marker(res.p_adjusted if res.p_adjusted is not None else res.p),
            )
        )
    return rows


def emit_outputs(
    summaries: list[ConditionSummary],
    out_dir: str | Path,
    comparisons: list[ComparisonRow] | None = None,
) -> list[Path]:
    """Write every table and figure data series as CSV; deterministic content."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def _write(name: str, header: list[str], rows: list[list[Any]]) -> None:
        path = out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        written.append(path)

    summaries = sorted(summaries, key=lambda s: s.condition)
    _write(
        "summary.csv",
        [
            "condition",
            "mean_miou",
            "se",
            "mean_time",
            "mean_response_time",
            "mean_hourly_pay",
            "n_responses",
            "stat_unit",
            "filtered_workers",
            "blocked_workers",
        ],
        [
            [
                s.condition,
                f"{s.mean_miou:.3f}",
                f"{s.se_miou:.3f}",
                f"{s.mean_time_s:.1f}",
                f"{s.mean_response_time_s:.1f}",
                f"{s.mean_hourly_pay:.2f}",
                s.n_responses,
                s.stat_unit,
                len(s.filtered_workers),
                len(s.blocked_workers),
            ]
            for s in summaries
        ],
    )
    _write(
        "per_count.csv",
        ["condition", "count", "mean_miou", "recall_at_05", "mean_time", "responses"],
        [
            [
                s.condition,
                row.count,
                "" if row.mean_miou is None else f"{row.mean_miou:.3f}",
                "" if row.mean_recall_05 is None else f"{row.mean_recall_05:.4f}",
                "" if row.mean_time_s is None else f"{row.mean_time_s:.1f}",
                row.responses,
            ]
            for s in summaries
            for row in s.per_count
        ],
    )
    _write(
        "size_buckets.csv",
        ["condition", "area_lo", "area_hi", "count", "mean_iou"],
        [
            [
                s.condition,
                b.lo,
                b.hi,
                b.count,
                "" if b.mean_iou is None else f"{b.mean_iou:.3f}",
            ]
            for s in summaries
            for b in s.buckets
        ],
    )
    _write(
        "miou_histogram.csv",
        ["condition", "bin_lo", "bin_hi", "count"],
        [
            [s.condition, lo, lo + 5, sum(1 for v in s.miou_samples if lo <= v < lo + 5 or (lo == 95 and v == 100.0))]
            for s in summaries
            for lo in range(0, 100, 5)
        ],
    )
    _write(
        "hits_per_worker.csv",
        ["condition", "worker_rank", "hits"],
        [
            [s.condition, i + 1, h]
            for s in summaries
            for i, h in enumerate(sorted(s.hits_per_worker, reverse=True))
        ],
    )
    _write(
        "completion_order.csv",
        ["condition", "bin", "mean_miou", "responses"],
        [
            [s.condition, i + 1, f"{mean:.3f}", count]
            for s in summaries
            for i, (mean, count) in enumerate(s.completion_order_bins)
        ],
    )
    if comparisons is not None:
        _write(
            "comparisons.csv",
            [
                "condition",
                "baseline",
                "mean",
                "baseline_mean",
                "u",
                "p",
                "p_adjusted",
                "n_a",
                "n_b",
                "method",
                "verdict",
            ],
            [
                [
                    c.condition,
                    c.baseline,
                    f"{c.mean:.3f}",
                    f"{c.baseline_mean:.3f}",
                    f"{c.result.u:.1f}",
                    f"{c.result.p:.6g}",
                    f"{c.result.p_adjusted:.6g}" if c.result.p_adjusted is not None else "",
                    c.result.n_a,
                    c.result.n_b,
                    c.result.method,
                    c.marker,
                ]
                for c in comparisons
            ],
        )
    return written
