"""Session engine: assignment, scoring, consequences and payouts.

One engine instance runs one condition. It serves HITs to workers
(simulated or live — it cannot tell the difference), scores submissions,
drives the gold scheduler and consequence ledger, settles payments and
appends everything to the event log. Ground truth and gold status never
appear in client-bound payloads; submissions to standard HITs are scored
internally for measurement but the score is not disclosed.

Workflow variants change what a HIT is: a whole scene, a marked sub-task,
or one pass of an iterative chain. Gold issuance is only defined for the
single-pass workflow.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .dataset import AnnotationSet, Corpus, Scene
from .events import EventKind, EventLog, SessionEvent
from .geometry import BoundingBox
from .ledger import (
    Action,
    ActionKind,
    BannerState,
    ConsequenceMode,
    TierPolicy,
    WorkerLedger,
    banner,
    update_ledger,
)
from .payments import PaymentPolicy, VariablePay, price, settle
from .scheduling import (
    GoldOutcome,
    HitKind,
    NoGold,
    SchedulePolicy,
    ScheduleState,
    advance,
    next_hit_kind,
    record_gold_outcome,
)
from .scoring import ScoreReport, score
from .workflows import (
    AddBoxes,
    Complete,
    IterationState,
    MarkerSource,
    SubTask,
    decompose,
    iterate,
    reassemble,
)


class Workflow(str, Enum):
    SINGLE = "single"
    DECOMPOSE_ORACLE = "decompose_oracle"
    DECOMPOSE_MANUAL = "decompose_manual"
    ITERATIVE = "iterative"


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    condition: str
    schedule: SchedulePolicy
    tiers: TierPolicy
    consequence_mode: ConsequenceMode
    payment: PaymentPolicy
    workflow: Workflow = Workflow.SINGLE
    responses_per_scene: int = 3
    seed: int = 0
    open_enrollment: bool = True
    max_chain_iterations: int = 40

    def __post_init__(self) -> None:
        if self.responses_per_scene < 1:
            raise ValueError("responses_per_scene must be >= 1")
        if self.workflow is not Workflow.SINGLE and not isinstance(self.schedule.kind, NoGold):
            raise ValueError("gold issuance is only supported for the single-pass workflow")


@dataclass
class HitPayload:
    """Client-bound HIT description. Never carries ground truth or gold status."""

    hit_id: str
    scene_id: str
    width: int
    height: int
    advertised_cents: int
    kind: str  # "scene" | "subtask" | "iteration"
    markers: list[list[float]] | None = None
    prior_boxes: list[list[float]] | None = None
    iteration: int | None = None  # passes completed so far on this chain

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "hit_id": self.hit_id,
            "scene_id": self.scene_id,
            "width": self.width,
            "height": self.height,
            "advertised_cents": self.advertised_cents,
            "kind": self.kind,
        }
        if self.markers is not None:
            out["markers"] = self.markers
        if self.prior_boxes is not None:
            out["prior_boxes"] = self.prior_boxes
        if self.iteration is not None:
            out["iteration"] = self.iteration
        return out


@dataclass(frozen=True)
class Terminal:
    status: str  # "blocked" | "exhausted"
    reason: str


@dataclass(frozen=True)
class GoldFeedback:
    """The post-submission reveal for a visible gold, field-complete for the
    feedback overlay: misses, extras, per-box accuracy, average, gold boxes."""

    missed_count: int
    false_positive_count: int
    per_box_iou: list[float]  # percent, one per matched worker box
    average_accuracy: float  # percent, unmatched gold boxes counted as zero
    gold_boxes: list[list[float]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "missed_count": self.missed_count,
            "false_positive_count": self.false_positive_count,
            "per_box_iou": self.per_box_iou,
            "average_accuracy": self.average_accuracy,
            "gold_boxes": self.gold_boxes,
        }


@dataclass(frozen=True)
class SubmitResult:
    feedback: GoldFeedback | None
    banner: BannerState
    payout_cents: int
    bonus_cents: int
    blocked: bool
    warned: bool
    accepted_response: bool  # True when this submission closed out a response unit


@dataclass
class _ResponseUnit:
    """One pending response for one scene under a workflow."""

    scene_id: str
    index: int
    total_subtasks: int = 0
    subtasks_pending: list[SubTask] = field(default_factory=list)
    parts: list[AnnotationSet] = field(default_factory=list)
    chain: IterationState | None = None
    chain_locked: bool = False
    elapsed_total: float = 0.0
    iterations: int = 0


@dataclass
class _Assignment:
    hit_id: str
    scene_id: str
    is_gold: bool
    kind: str  # "scene" | "subtask" | "iteration"
    unit: _ResponseUnit
    subtask: SubTask | None = None


@dataclass
class _WorkerSession:
    worker_id: str
    schedule: ScheduleState
    ledger: WorkerLedger
    order: list[str]
    assigned: _Assignment | None = None
    done_scenes: set[str] = field(default_factory=set)
    hits_completed: int = 0
    abandoned: bool = False
    pay_cents: int = 0
    elapsed_s: float = 0.0
    submission_mious: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class AcceptedResponse:
    """A quota-bearing scene response: a direct submission or an assembled
    workflow result."""

    scene_id: str
    worker_id: str
    annotation: AnnotationSet
    report: ScoreReport
    elapsed: float
    is_gold: bool
    order_ordinal: int  # the closing worker's HIT ordinal


def _stable_hash(*parts: Any) -> int:
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class Engine:
    def __init__(self, config: EngineConfig, corpus: Corpus, log: EventLog | None = None):
        self.config = config
        self.corpus = corpus
        self.log = log if log is not None else EventLog()
        self.scenes = {s.scene_id: s for s in corpus.scenes}
        self.sessions: dict[str, _WorkerSession] = {}
        self.accepted: list[AcceptedResponse] = []
        self._needed = len(corpus.scenes) * config.responses_per_scene
        self._open_units: dict[str, list[_ResponseUnit]] = {
            s.scene_id: [_ResponseUnit(s.scene_id, i) for i in range(config.responses_per_scene)]
            for s in corpus.scenes
        }
        if config.workflow in (Workflow.DECOMPOSE_ORACLE, Workflow.DECOMPOSE_MANUAL):
            self._init_subtasks()

    # -- setup ------------------------------------------------------------

    def _init_subtasks(self) -> None:
        variant = (
            MarkerSource.ORACLE
            if self.config.workflow is Workflow.DECOMPOSE_ORACLE
            else MarkerSource.MANUAL
        )
        for scene in self.corpus.scenes:
            for unit in list(self._open_units[scene.scene_id]):
                rng = np.random.default_rng(
                    np.random.SeedSequence(
                        [self.config.seed, _stable_hash("markers", scene.scene_id, unit.index)]
                    )
                )
                subtasks = decompose(scene, variant, rng=rng)
                unit.total_subtasks = len(subtasks)
                unit.subtasks_pending = subtasks
                if not subtasks:
                    # every manual marker was missed upstream: the response
                    # degenerates to an empty annotation
                    self._finish_unit(unit, scene, ordinal=0)

    # -- registration and ordering -----------------------------------------

    def _scene_order(self, worker_id: str) -> list[str]:
        ids = [s.scene_id for s in self.corpus.scenes]
        rng = np.random.default_rng(
            np.random.SeedSequence([self.config.seed, _stable_hash("order", worker_id)])
        )
        rng.shuffle(ids)
        if isinstance(self.config.payment, VariablePay):
            # workers grab high-pay, high-effort items first
            ids.sort(key=lambda sid: -self.scenes[sid].count)
        return ids

    def session(self, worker_id: str) -> _WorkerSession:
        if worker_id not in self.sessions:
            if not self.config.open_enrollment:
                raise EngineError(f"unknown worker {worker_id!r}")
            self.sessions[worker_id] = _WorkerSession(
                worker_id=worker_id,
                schedule=ScheduleState(worker_id=worker_id),
                ledger=WorkerLedger(worker_id=worker_id),
                order=self._scene_order(worker_id),
            )
        return self.sessions[worker_id]

    # -- assignment ---------------------------------------------------------

    @property
    def done(self) -> bool:
        return len(self.accepted) >= self._needed

    def next_hit(self, worker_id: str) -> HitPayload | Terminal:
        """Assign (or re-serve) the worker's next HIT. Idempotent until the
        assigned HIT is submitted."""
        sess = self.session(worker_id)
        if sess.ledger.blocked:
            return Terminal("blocked", "quality below threshold")
        if sess.abandoned:
            return Terminal("exhausted", "worker left the task queue")
        if sess.assigned is not None:
            return self._payload_for(sess.assigned)
        assignment = self._pick_assignment(sess)
        if assignment is None:
            return Terminal("exhausted", "no open work available for this worker")
        sess.assigned = assignment
        self.log.append(
            EventKind.HIT_ASSIGNED,
            worker_id,
            assignment.hit_id,
            {
                "scene_id": assignment.scene_id,
                "is_gold": assignment.is_gold,
                "kind": assignment.kind,
                "ordinal": sess.schedule.hit_ordinal,
            },
        )
        return self._payload_for(assignment)

    def _hit_id(self, sess: _WorkerSession) -> str:
        return f"{sess.worker_id}-{sess.schedule.hit_ordinal:05d}"

    def _pick_assignment(self, sess: _WorkerSession) -> _Assignment | None:
        wf = self.config.workflow
        if wf is Workflow.SINGLE:
            for scene_id in sess.order:
                if self._open_units[scene_id] and scene_id not in sess.done_scenes:
                    unit = self._open_units[scene_id].pop(0)
                    kind = next_hit_kind(self.config.schedule, sess.schedule)
                    return _Assignment(
                        hit_id=self._hit_id(sess),
                        scene_id=scene_id,
                        is_gold=kind is HitKind.GOLD,
                        kind="scene",
                        unit=unit,
                    )
            return None
        if wf in (Workflow.DECOMPOSE_ORACLE, Workflow.DECOMPOSE_MANUAL):
            for scene_id in sess.order:
                for unit in self._open_units[scene_id]:
                    if unit.subtasks_pending:
                        sub = unit.subtasks_pending.pop(0)
                        return _Assignment(
                            hit_id=self._hit_id(sess),
                            scene_id=scene_id,
                            is_gold=False,
                            kind="subtask",
                            unit=unit,
                            subtask=sub,
                        )
            return None
        # iterative: first open, unlocked chain in the worker's order
        for scene_id in sess.order:
            for unit in self._open_units[scene_id]:
                if unit.chain_locked:
                    continue
                if unit.chain is None:
                    unit.chain = IterationState(scene_id=scene_id)
                if not unit.chain.completed:
                    unit.chain_locked = True
                    return _Assignment(
                        hit_id=self._hit_id(sess),
                        scene_id=scene_id,
                        is_gold=False,
                        kind="iteration",
                        unit=unit,
                    )
        return None

    def _payload_for(self, assignment: _Assignment) -> HitPayload:
        scene = self.scenes[assignment.scene_id]
        markers = None
        prior = None
        iteration = None
        if assignment.kind == "subtask" and assignment.subtask is not None:
            markers = [[x, y] for x, y in assignment.subtask.markers]
            advertised = price(self.config.payment, len(markers))
        elif assignment.kind == "iteration":
            chain = assignment.unit.chain
            prior = [b.as_list() for b, _ in (chain.boxes if chain else ())]
            iteration = assignment.unit.iterations
            advertised = price(self.config.payment, scene.count)
        else:
            advertised = price(self.config.payment, scene.count)
        return HitPayload(
            hit_id=assignment.hit_id,
            scene_id=scene.scene_id,
            width=scene.width,
            height=scene.height,
            advertised_cents=advertised,
            kind=assignment.kind,
            markers=markers,
            prior_boxes=prior,
            iteration=iteration,
        )

    # -- submission ----------------------------------------------------------

    def submit(
        self,
        worker_id: str,
        hit_id: str,
        boxes: Sequence[BoundingBox],
        elapsed: float,
        complete: bool = False,
    ) -> SubmitResult:
        sess = self.session(worker_id)
        if sess.ledger.blocked:
            raise EngineError(f"worker {worker_id!r} is blocked")
        if sess.assigned is None or sess.assigned.hit_id != hit_id:
            raise EngineError(f"hit {hit_id!r} is not assigned to worker {worker_id!r}")
        assignment = sess.assigned
        sess.assigned = None
        scene = self.scenes[assignment.scene_id]
        if assignment.kind == "scene":
            return self._submit_scene(sess, assignment, scene, boxes, elapsed)
        if assignment.kind == "subtask":
            return self._submit_subtask(sess, assignment, scene, boxes, elapsed)
        return self._submit_iteration(sess, assignment, scene, boxes, elapsed, complete)

    def _advance_common(
        self,
        sess: _WorkerSession,
        assignment: _Assignment,
        elapsed: float,
        miou: float | None,
        extra: dict[str, Any],
    ) -> None:
        advance(sess.schedule, HitKind.GOLD if assignment.is_gold else HitKind.STANDARD)
        sess.hits_completed += 1
        sess.elapsed_s += elapsed
        if miou is not None:
            sess.submission_mious.append(miou)
        payload = {
            "scene_id": assignment.scene_id,
            "is_gold": assignment.is_gold,
            "kind": assignment.kind,
            "elapsed": elapsed,
            **extra,
        }
        self.log.append(EventKind.SUBMITTED, sess.worker_id, assignment.hit_id, payload)

    def _finish_unit(
        self,
        unit: _ResponseUnit,
        scene: Scene,
        ordinal: int,
        is_gold: bool = False,
        direct: tuple[AnnotationSet, ScoreReport] | None = None,
    ) -> None:
        """Close a response unit: assemble, score and record the response."""
        self._open_units[scene.scene_id] = [
            u for u in self._open_units[scene.scene_id] if u is not unit
        ]
        if direct is not None:
            annotation, report = direct
        elif unit.chain is not None:
            annotation = reassemble(scene, [unit.chain])
            report = score(scene, annotation)
        else:
            annotation = reassemble(scene, list(unit.parts))
            report = score(scene, annotation)
        self.accepted.append(
            AcceptedResponse(
                scene_id=scene.scene_id,
                worker_id=annotation.worker_id,
                annotation=annotation,
                report=report,
                elapsed=unit.elapsed_total if direct is None else annotation.elapsed,
                is_gold=is_gold,
                order_ordinal=ordinal,
            )
        )

    def _submit_scene(
        self,
        sess: _WorkerSession,
        assignment: _Assignment,
        scene: Scene,
        boxes: Sequence[BoundingBox],
        elapsed: float,
    ) -> SubmitResult:
        ann = AnnotationSet(scene.scene_id, tuple(boxes), sess.worker_id, elapsed)
        report = score(scene, ann)
        self._advance_common(
            sess,
            assignment,
            elapsed,
            report.miou,
            {
                "boxes": [b.as_list() for b in boxes],
                "miou": report.miou,
                "fn": report.fn_count,
                "fp": report.fp_count,
            },
        )
        feedback: GoldFeedback | None = None
        bonus_cents = 0
        warned = False
        blocked = False
        if assignment.is_gold:
            prospective = sess.ledger.gold_scores + [report.miou]
            outcome = record_gold_outcome(
                self.config.schedule,
                sess.schedule,
                report.miou,
                running_avg=sum(prospective) / len(prospective),
                t_min=self.config.tiers.t_min,
            )
            action = update_ledger(
                sess.ledger,
                self.config.tiers,
                report.miou,
                image_count=scene.count,
                mode=self.config.consequence_mode,
                hit_id=assignment.hit_id,
                strike_out=outcome is GoldOutcome.BLOCK,
            )
            feedback = GoldFeedback(
                missed_count=report.fn_count,
                false_positive_count=report.fp_count,
                per_box_iou=[round(100.0 * p[2], 1) for p in report.match.pairs],
                average_accuracy=report.miou,
                gold_boxes=[b.as_list() for b in scene.gt_boxes],
            )
            self.log.append(
                EventKind.GOLD_FEEDBACK, sess.worker_id, assignment.hit_id, feedback.to_dict()
            )
            bonus_cents, warned, blocked = self._apply_action(sess, assignment.hit_id, action)
        payout = settle(
            self.config.payment, scene, report, assignment.hit_id, ledger_bonus_cents=bonus_cents
        )
        sess.pay_cents += payout.total_cents
        sess.done_scenes.add(scene.scene_id)
        direct = (ann, report)
        self._finish_unit(
            assignment.unit,
            scene,
            ordinal=sess.schedule.hit_ordinal - 1,
            is_gold=assignment.is_gold,
            direct=direct,
        )
        return SubmitResult(
            feedback=feedback,
            banner=banner(sess.ledger, self.config.tiers),
            payout_cents=payout.total_cents,
            bonus_cents=payout.bonus_cents,
            blocked=blocked,
            warned=warned,
            accepted_response=True,
        )

    def _apply_action(
        self, sess: _WorkerSession, hit_id: str, action: Action
    ) -> tuple[int, bool, bool]:
        bonus_cents, warned, blocked = 0, False, False
        if action.kind is ActionKind.WARN:
            warned = True
            self.log.append(
                EventKind.WARNING, sess.worker_id, hit_id, {"count": sess.ledger.warnings_issued}
            )
        elif action.kind is ActionKind.BONUS:
            bonus_cents = action.bonus_cents
            self.log.append(EventKind.BONUS, sess.worker_id, hit_id, {"cents": bonus_cents})
        elif action.kind is ActionKind.BLOCK:
            blocked = True
            self.log.append(
                EventKind.BLOCK, sess.worker_id, hit_id, {"running_avg": sess.ledger.running_avg}
            )
        return bonus_cents, warned, blocked

    @staticmethod
    def _nearest_gt_index(scene: Scene, mx: float, my: float) -> int:
        best, best_d = 0, float("inf")
        for i, b in enumerate(scene.gt_boxes):
            cx, cy = b.center
            d = (cx - mx) ** 2 + (cy - my) ** 2
            if d < best_d:
                best, best_d = i, d
        return best

    def _submit_subtask(
        self,
        sess: _WorkerSession,
        assignment: _Assignment,
        scene: Scene,
        boxes: Sequence[BoundingBox],
        elapsed: float,
    ) -> SubmitResult:
        assert assignment.subtask is not None
        unit = assignment.unit
        part = AnnotationSet(scene.scene_id, tuple(boxes), sess.worker_id, elapsed)
        unit.parts.append(part)
        unit.elapsed_total += elapsed
        # per-HIT quality for worker accounting: score against the marked targets
        target_idx = sorted(
            {self._nearest_gt_index(scene, mx, my) for mx, my in assignment.subtask.markers}
        )
        mini = Scene(
            scene.scene_id, scene.width, scene.height, tuple(scene.gt_boxes[i] for i in target_idx)
        )
        mini_report = score(mini, part)
        self._advance_common(
            sess,
            assignment,
            elapsed,
            mini_report.miou,
            {"boxes": [b.as_list() for b in boxes], "miou": mini_report.miou},
        )
        payout = settle(self.config.payment, mini, mini_report, assignment.hit_id)
        sess.pay_cents += payout.total_cents
        accepted = False
        if len(unit.parts) == unit.total_subtasks:
            self._finish_unit(unit, scene, ordinal=sess.schedule.hit_ordinal - 1)
            accepted = True
        return SubmitResult(
            feedback=None,
            banner=banner(sess.ledger, self.config.tiers),
            payout_cents=payout.total_cents,
            bonus_cents=0,
            blocked=False,
            warned=False,
            accepted_response=accepted,
        )

    def _submit_iteration(
        self,
        sess: _WorkerSession,
        assignment: _Assignment,
        scene: Scene,
        boxes: Sequence[BoundingBox],
        elapsed: float,
        complete: bool,
    ) -> SubmitResult:
        unit = assignment.unit
        assert unit.chain is not None
        unit.chain_locked = False
        unit.elapsed_total += elapsed
        unit.iterations += 1
        if complete or not boxes:
            unit.chain = iterate(unit.chain, Complete(sess.worker_id))
        else:
            unit.chain = iterate(unit.chain, AddBoxes(tuple(boxes), sess.worker_id))
            if unit.iterations >= self.config.max_chain_iterations:
                unit.chain = iterate(unit.chain, Complete(sess.worker_id))
        # per-HIT quality: how well the added boxes match any ground truth
        hit_miou = None
        hit_report = None
        if boxes:
            part = AnnotationSet(scene.scene_id, tuple(boxes), sess.worker_id, elapsed)
            hit_report = score(scene, part)
            hit_miou = 100.0 * sum(p[2] for p in hit_report.match.pairs) / len(boxes)
        self._advance_common(
            sess,
            assignment,
            elapsed,
            hit_miou,
            {"boxes": [b.as_list() for b in boxes], "complete": complete},
        )
        empty = AnnotationSet(scene.scene_id, tuple(boxes), sess.worker_id, elapsed)
        payout = settle(
            self.config.payment, scene, hit_report or score(scene, empty), assignment.hit_id
        )
        sess.pay_cents += payout.total_cents
        accepted = False
        if unit.chain.completed:
            self._finish_unit(unit, scene, ordinal=sess.schedule.hit_ordinal - 1)
            accepted = True
        return SubmitResult(
            feedback=None,
            banner=banner(sess.ledger, self.config.tiers),
            payout_cents=payout.total_cents,
            bonus_cents=0,
            blocked=False,
            warned=False,
            accepted_response=accepted,
        )

    # -- status and lifecycle -------------------------------------------------

    def mark_abandoned(self, worker_id: str) -> None:
        sess = self.session(worker_id)
        if sess.abandoned:
            return
        sess.abandoned = True
        if sess.assigned is not None:
            self._release(sess.assigned)
            sess.assigned = None
        self.log.append(EventKind.ABANDON, worker_id, "", {})

    def _release(self, assignment: _Assignment) -> None:
        """Return a reserved unit so another worker can pick it up."""
        if assignment.kind == "scene":
            self._open_units[assignment.scene_id].insert(0, assignment.unit)
        elif assignment.kind == "subtask" and assignment.subtask is not None:
            assignment.unit.subtasks_pending.insert(0, assignment.subtask)
        elif assignment.kind == "iteration":
            assignment.unit.chain_locked = False

    def status(self, worker_id: str) -> dict[str, Any]:
        if worker_id not in self.sessions:
            raise EngineError(f"unknown worker {worker_id!r}")
        sess = self.sessions[worker_id]
        b = banner(sess.ledger, self.config.tiers)
        return {
            "worker_id": worker_id,
            "running_avg": sess.ledger.running_avg,
            "gold_count": len(sess.ledger.gold_scores),
            "tier": b.tier.value if b.tier else None,
            "banner": {
                "has_rating": b.has_rating,
                "running_avg": b.running_avg,
                "tier": b.tier.value if b.tier else None,
                "message": b.message,
            },
            "blocked": sess.ledger.blocked,
            "warnings": sess.ledger.warnings_issued,
            "bonus_total_cents": sess.ledger.bonus_total_cents,
            "hits_completed": sess.hits_completed,
            "pay_cents": sess.pay_cents,
        }

    def snapshot(self) -> dict[str, Any]:
        """Deterministic state fingerprint for event-sourcing equality checks."""
        return {
            "accepted": len(self.accepted),
            "open_units": {
                sid: [
                    (
                        u.index,
                        len(u.parts),
                        len(u.subtasks_pending),
                        u.iterations,
                        len(u.chain.boxes) if u.chain else -1,
                    )
                    for u in units
                ]
                for sid, units in sorted(self._open_units.items())
                if units
            },
            "workers": {
                wid: {
                    "ordinal": s.schedule.hit_ordinal,
                    "override": s.schedule.override_active,
                    "failures": s.schedule.consecutive_gold_failures,
                    "golds_issued": s.schedule.golds_issued,
                    "gold_scores": [round(v, 9) for v in s.ledger.gold_scores],
                    "warnings": s.ledger.warnings_issued,
                    "bonuses": list(s.ledger.bonuses_awarded),
                    "blocked": s.ledger.blocked,
                    "hits": s.hits_completed,
                    "abandoned": s.abandoned,
                    "pay_cents": s.pay_cents,
                    "assigned": s.assigned.hit_id if s.assigned else None,
                }
                for wid, s in sorted(self.sessions.items())
            },
        }


def replay_engine(config: EngineConfig, corpus: Corpus, events: Sequence[SessionEvent]) -> Engine:
    """Rebuild an engine by re-driving the commands recorded in the log.

    Assignment and submission events carry every input the engine needs;
    derived events (feedback, warnings, bonuses, blocks) are regenerated by
    the same deterministic logic during replay.
    """
    engine = Engine(config, corpus, log=EventLog())
    for ev in events:
        if ev.kind is EventKind.HIT_ASSIGNED:
            result = engine.next_hit(ev.worker_id)
            if not isinstance(result, HitPayload) or result.hit_id != ev.hit_id:
                raise EngineError(f"replay diverged at seq {ev.seq}: expected {ev.hit_id}")
            recorded = engine.log.events[-1].payload
            if recorded != ev.payload:
                raise EngineError(
                    f"replay diverged at seq {ev.seq}: assignment {recorded} != {ev.payload}"
                )
        elif ev.kind is EventKind.SUBMITTED:
            boxes = [BoundingBox(*vals) for vals in ev.payload.get("boxes", [])]
            engine.submit(
                ev.worker_id,
                ev.hit_id,
                boxes,
                float(ev.payload["elapsed"]),
                complete=bool(ev.payload.get("complete", False)),
            )
        elif ev.kind is EventKind.ABANDON:
            engine.mark_abandoned(ev.worker_id)
        # remaining kinds are consequences; regenerated during replay
    return engine
