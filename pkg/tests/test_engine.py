from __future__ import annotations

import json

import numpy as np
import pytest

from visgold.dataset import generate_corpus
from visgold.engine import (
    Engine,
    EngineConfig,
    EngineError,
    HitPayload,
    Terminal,
    Workflow,
    replay_engine,
)
from visgold.geometry import BoundingBox
from visgold.ledger import ConsequenceMode, TierPolicy
from visgold.payments import BaselineBinned, FlatSubtask
from visgold.scheduling import Dynamic, FibRegular, NoGold, Regular, SchedulePolicy, Upfront

CORPUS = generate_corpus(seed=21, spec={1: 2, 2: 2, 3: 2, 8: 2})


def _config(**kw) -> EngineConfig:
    defaults = dict(
        condition="test",
        schedule=SchedulePolicy(NoGold(), rng_seed=5),
        tiers=TierPolicy(),
        consequence_mode=ConsequenceMode.NONE,
        payment=BaselineBinned(),
        workflow=Workflow.SINGLE,
        responses_per_scene=2,
        seed=5,
    )
    defaults.update(kw)
    return EngineConfig(**defaults)


def _gold_config(**kw) -> EngineConfig:
    return _config(
        schedule=SchedulePolicy(Dynamic(FibRegular(), t_min=50.0), rng_seed=5),
        consequence_mode=ConsequenceMode.TIERED,
        **kw,
    )


def _submit_perfect(engine: Engine, worker: str, payload: HitPayload):
    scene = engine.scenes[payload.scene_id]
    return engine.submit(worker, payload.hit_id, list(scene.gt_boxes), 30.0)


def test_next_hit_is_idempotent_until_submit():
    engine = Engine(_config(), CORPUS)
    first = engine.next_hit("w")
    second = engine.next_hit("w")
    assert isinstance(first, HitPayload)
    assert first == second
    _submit_perfect(engine, "w", first)
    third = engine.next_hit("w")
    assert isinstance(third, HitPayload)
    assert third.hit_id != first.hit_id


def test_at_most_one_assignment_per_worker():
    engine = Engine(_config(), CORPUS)
    payload = engine.next_hit("w")
    assert isinstance(payload, HitPayload)
    snapshot = engine.snapshot()
    assert snapshot["workers"]["w"]["assigned"] == payload.hit_id
    engine.next_hit("w")  # re-serve, no second slot
    assert engine.snapshot() == snapshot


def test_submit_requires_current_assignment():
    engine = Engine(_config(), CORPUS)
    with pytest.raises(EngineError, match="not assigned"):
        engine.submit("w", "bogus", [], 1.0)
    payload = engine.next_hit("w")
    assert isinstance(payload, HitPayload)
    with pytest.raises(EngineError, match="not assigned"):
        engine.submit("w", "stale-id", [], 1.0)


def test_closed_enrollment_rejects_unknown_workers():
    engine = Engine(_config(open_enrollment=False), CORPUS)
    with pytest.raises(EngineError, match="unknown"):
        engine.next_hit("stranger")


def test_upfront_first_hits_are_gold_internally_but_hidden():
    engine = Engine(
        _config(
            schedule=SchedulePolicy(Upfront(k=2), rng_seed=5),
            consequence_mode=ConsequenceMode.WARNING,
        ),
        CORPUS,
    )
    payload = engine.next_hit("w")
    assert isinstance(payload, HitPayload)
    assigned = engine.log.events[-1]
    assert assigned.payload["is_gold"] is True
    result = _submit_perfect(engine, "w", payload)
    assert result.feedback is not None  # visible gold reveals after submit


def test_client_payloads_never_leak_ground_truth():
    """Serialization audit: no pre-submission byte sequence contains gold
    status or ground-truth coordinates."""
    engine = Engine(_gold_config(), CORPUS)
    rng = np.random.default_rng(0)
    for worker in ("a", "b"):
        while True:
            hit = engine.next_hit(worker)
            if isinstance(hit, Terminal):
                break
            blob = json.dumps(hit.to_dict()).lower()
            assert "gold" not in blob
            assert "gt_" not in blob and "ground" not in blob
            scene = engine.scenes[hit.scene_id]
            for box in scene.gt_boxes:
                assert f"{box.x}" not in blob and f"{box.y}" not in blob
            boxes = [
                BoundingBox(b.x + rng.uniform(0, 4), b.y, b.w, b.h) for b in scene.gt_boxes
            ]
            result = engine.submit(worker, hit.hit_id, boxes, 20.0)
            if result.blocked or engine.done:
                break


def test_standard_submission_discloses_no_score():
    engine = Engine(_config(), CORPUS)
    payload = engine.next_hit("w")
    assert isinstance(payload, HitPayload)
    result = _submit_perfect(engine, "w", payload)
    assert result.feedback is None
    assert result.accepted_response


def test_gold_failure_under_dynamic_forces_gold_next():
    engine = Engine(_gold_config(), CORPUS)
    payload = engine.next_hit("w")  # ordinal 1 is Fibonacci, hence gold
    assert isinstance(payload, HitPayload)
    result = engine.submit("w", payload.hit_id, [], 10.0)  # empty: mIoU 0, fail
    assert result.feedback is not None
    assert result.warned
    nxt = engine.next_hit("w")
    assert isinstance(nxt, HitPayload)
    assert engine.log.events[-1].payload["is_gold"] is True


def test_three_strikes_blocks_and_terminal_status():
    engine = Engine(_gold_config(responses_per_scene=3), CORPUS)
    blocked = False
    for _ in range(6):
        hit = engine.next_hit("w")
        assert isinstance(hit, HitPayload)
        result = engine.submit("w", hit.hit_id, [], 10.0)
        if result.blocked:
            blocked = True
            break
    assert blocked
    terminal = engine.next_hit("w")
    assert isinstance(terminal, Terminal)
    assert terminal.status == "blocked"
    assert "quality" in terminal.reason
    with pytest.raises(EngineError, match="blocked"):
        engine.submit("w", "anything", [], 1.0)


def test_status_reports_ledger_snapshot():
    engine = Engine(_gold_config(), CORPUS)
    with pytest.raises(EngineError):
        engine.status("nobody")
    hit = engine.next_hit("w")
    scene = engine.scenes[hit.scene_id]
    engine.submit("w", hit.hit_id, list(scene.gt_boxes), 12.0)
    status = engine.status("w")
    assert status["gold_count"] == 1
    assert status["running_avg"] == pytest.approx(100.0)
    assert status["hits_completed"] == 1
    assert not status["blocked"]


def test_abandon_releases_reserved_unit():
    engine = Engine(_config(responses_per_scene=1), CORPUS)
    hit_a = engine.next_hit("a")
    assert isinstance(hit_a, HitPayload)
    engine.mark_abandoned("a")
    # the scene slot goes back to the pool for worker b
    seen = []
    while True:
        hit_b = engine.next_hit("b")
        if isinstance(hit_b, Terminal):
            break
        seen.append(hit_b.scene_id)
        _submit_perfect(engine, "b", hit_b)
    assert hit_a.scene_id in seen
    assert engine.done


def test_quota_exactly_filled():
    engine = Engine(_config(responses_per_scene=2), CORPUS)
    workers = iter(f"w{i}" for i in range(100))
    current = next(workers)
    while not engine.done:
        hit = engine.next_hit(current)
        if isinstance(hit, Terminal):
            current = next(workers)
            continue
        _submit_perfect(engine, current, hit)
    assert len(engine.accepted) == len(CORPUS.scenes) * 2
    per_scene = {}
    for r in engine.accepted:
        per_scene[r.scene_id] = per_scene.get(r.scene_id, 0) + 1
    assert set(per_scene.values()) == {2}


def _drive_random_session(config: EngineConfig, seed: int, snapshots_at: bool = True):
    """Drive a randomized multi-worker session, capturing (event_count,
    snapshot) pairs at every engine call boundary."""
    engine = Engine(config, CORPUS)
    rng = np.random.default_rng(seed)
    boundaries = []
    workers = [f"w{i}" for i in range(4)]
    active = list(workers)
    for _ in range(300):
        if engine.done or not active:
            break
        worker = active[int(rng.integers(len(active)))]
        hit = engine.next_hit(worker)
        boundaries.append((len(engine.log.events), engine.snapshot()))
        if isinstance(hit, Terminal):
            active.remove(worker)
            continue
        scene = engine.scenes[hit.scene_id]
        choice = rng.random()
        if hit.kind == "iteration":
            if choice < 0.3:
                engine.submit(worker, hit.hit_id, [], 5.0, complete=True)
            else:
                boxes = [
                    BoundingBox(b.x + rng.uniform(0, 10), b.y, b.w, b.h)
                    for b in scene.gt_boxes[: int(rng.integers(1, 4))]
                ]
                engine.submit(worker, hit.hit_id, boxes, 8.0)
        else:
            k = int(rng.integers(0, len(scene.gt_boxes) + 1))
            boxes = [
                BoundingBox(b.x + rng.uniform(0, 25), b.y + rng.uniform(0, 10), b.w, b.h)
                for b in scene.gt_boxes[:k]
            ]
            engine.submit(worker, hit.hit_id, boxes, 15.0)
        boundaries.append((len(engine.log.events), engine.snapshot()))
        if rng.random() < 0.05:
            engine.mark_abandoned(worker)
            active.remove(worker)
            boundaries.append((len(engine.log.events), engine.snapshot()))
    return engine, boundaries


@pytest.mark.parametrize(
    "config",
    [
        _config(),
        _gold_config(),
        _config(
            payment=FlatSubtask(),
            workflow=Workflow.DECOMPOSE_ORACLE,
        ),
        _config(
            payment=FlatSubtask(),
            workflow=Workflow.ITERATIVE,
        ),
    ],
    ids=["single", "dynamic-gold", "decompose", "iterative"],
)
def test_event_sourced_rebuild_matches_live_state(config):
    engine, boundaries = _drive_random_session(config, seed=31)
    events = engine.log.events
    # full replay
    rebuilt = replay_engine(config, CORPUS, events)
    assert rebuilt.snapshot() == engine.snapshot()
    # prefix replays at sampled call boundaries
    rng = np.random.default_rng(7)
    picks = rng.choice(len(boundaries), size=min(12, len(boundaries)), replace=False)
    for idx in picks:
        count, snapshot = boundaries[int(idx)]
        rebuilt = replay_engine(config, CORPUS, events[:count])
        assert rebuilt.snapshot() == snapshot, f"prefix of {count} events diverged"


def test_replay_detects_foreign_log():
    config = _config()
    engine, _ = _drive_random_session(config, seed=11)
    other = _config(seed=99)
    with pytest.raises(EngineError, match="diverged"):
        replay_engine(other, CORPUS, engine.log.events)


def test_gold_requires_single_workflow():
    with pytest.raises(ValueError, match="single-pass"):
        _config(
            schedule=SchedulePolicy(Regular(), rng_seed=1),
            workflow=Workflow.ITERATIVE,
        )


def test_variable_pay_serves_high_pay_first():
    from visgold.payments import VariablePay

    engine = Engine(_config(payment=VariablePay()), CORPUS)
    sess = engine.session("w")
    counts = [engine.scenes[sid].count for sid in sess.order]
    assert counts == sorted(counts, reverse=True)
    first = engine.next_hit("w")
    assert isinstance(first, HitPayload)
    assert engine.scenes[first.scene_id].count == max(s.count for s in CORPUS.scenes)
    assert first.advertised_cents == 4 * engine.scenes[first.scene_id].count
