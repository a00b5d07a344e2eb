from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from visgold.dataset import generate_corpus
from visgold.engine import Engine, EngineConfig, Workflow
from visgold.ledger import ConsequenceMode, TierPolicy
from visgold.payments import BaselineBinned
from visgold.scheduling import Dynamic, FibRegular, NoGold, SchedulePolicy
from visgold.service import create_app

CORPUS = generate_corpus(seed=33, spec={2: 2, 3: 2})


def _engine(gold: bool = True, responses: int = 2) -> Engine:
    if gold:
        schedule = SchedulePolicy(Dynamic(FibRegular(), t_min=50.0), rng_seed=3)
        mode = ConsequenceMode.TIERED
    else:
        schedule = SchedulePolicy(NoGold(), rng_seed=3)
        mode = ConsequenceMode.NONE
    config = EngineConfig(
        condition="svc",
        schedule=schedule,
        tiers=TierPolicy(),
        consequence_mode=mode,
        payment=BaselineBinned(),
        workflow=Workflow.SINGLE,
        responses_per_scene=responses,
        seed=3,
    )
    return Engine(config, CORPUS)


def _client(engine: Engine, cors: bool = False) -> TestClient:
    return TestClient(create_app(engine, cors=cors))


def _gt_boxes(engine: Engine, scene_id: str) -> list[list[float]]:
    return [b.as_list() for b in engine.scenes[scene_id].gt_boxes]


def test_full_gold_session_roundtrip():
    engine = _engine()
    client = _client(engine)
    hit = client.get("/next-hit", params={"worker": "w1"}).json()
    assert set(hit) >= {"hit_id", "scene_id", "width", "height", "advertised_cents", "kind"}

    # idempotent re-serve
    again = client.get("/next-hit", params={"worker": "w1"}).json()
    assert again == hit

    body = {
        "worker": "w1",
        "hit_id": hit["hit_id"],
        "boxes": _gt_boxes(engine, hit["scene_id"]),
        "elapsed": 21.5,
    }
    resp = client.post("/submit", json=body).json()
    feedback = resp["feedback"]  # ordinal 1 is gold under the fib base
    assert feedback["missed_count"] == 0
    assert feedback["false_positive_count"] == 0
    assert feedback["average_accuracy"] == pytest.approx(100.0)
    assert len(feedback["per_box_iou"]) == len(body["boxes"])
    assert feedback["gold_boxes"] == _gt_boxes(engine, hit["scene_id"])
    assert resp["banner"]["has_rating"] is True
    assert resp["banner"]["tier"] == "A"
    assert resp["payout_cents"] >= 16

    status = client.get("/status", params={"worker": "w1"}).json()
    assert status["gold_count"] == 1
    assert status["running_avg"] == pytest.approx(100.0)


def test_no_ground_truth_bytes_before_submission():
    engine = _engine()
    client = _client(engine)
    hit = client.get("/next-hit", params={"worker": "w2"})
    blob = hit.text.lower()
    assert "gold" not in blob
    scene = engine.scenes[hit.json()["scene_id"]]
    for box in scene.gt_boxes:
        assert json.dumps(box.as_list()) not in hit.text


def test_standard_submission_has_no_feedback():
    engine = _engine(gold=False)
    client = _client(engine)
    hit = client.get("/next-hit", params={"worker": "w"}).json()
    resp = client.post(
        "/submit",
        json={"worker": "w", "hit_id": hit["hit_id"], "boxes": [], "elapsed": 3.0},
    ).json()
    assert "feedback" not in resp
    assert resp["banner"]["has_rating"] is False


def test_banner_transitions_with_ledger():
    engine = _engine()
    client = _client(engine)
    tiers = []
    for _ in range(3):
        hit = client.get("/next-hit", params={"worker": "w"}).json()
        boxes = _gt_boxes(engine, hit["scene_id"])
        resp = client.post(
            "/submit",
            json={"worker": "w", "hit_id": hit["hit_id"], "boxes": boxes, "elapsed": 5.0},
        ).json()
        tiers.append(resp["banner"]["tier"])
    assert tiers == ["A", "A", "A"]


def test_blocked_worker_gets_403():
    engine = _engine()
    client = _client(engine)
    blocked = False
    for _ in range(6):
        hit_resp = client.get("/next-hit", params={"worker": "w"})
        if hit_resp.status_code == 403:
            blocked = True
            break
        hit = hit_resp.json()
        resp = client.post(
            "/submit",
            json={"worker": "w", "hit_id": hit["hit_id"], "boxes": [], "elapsed": 2.0},
        ).json()
        if resp["blocked"]:
            pass  # keep polling next-hit until the terminal status shows
    assert blocked
    status = client.get("/status", params={"worker": "w"}).json()
    assert status["blocked"] is True


def test_stale_hit_rejected_with_409():
    engine = _engine()
    client = _client(engine)
    client.get("/next-hit", params={"worker": "w"})
    resp = client.post(
        "/submit", json={"worker": "w", "hit_id": "nope", "boxes": [], "elapsed": 1.0}
    )
    assert resp.status_code == 409


def test_bad_box_rejected_with_422():
    engine = _engine()
    client = _client(engine)
    hit = client.get("/next-hit", params={"worker": "w"}).json()
    resp = client.post(
        "/submit",
        json={"worker": "w", "hit_id": hit["hit_id"], "boxes": [[0, 0, -5, 5]], "elapsed": 1.0},
    )
    assert resp.status_code == 422


def test_unknown_worker_status_404():
    client = _client(_engine())
    assert client.get("/status", params={"worker": "ghost"}).status_code == 404


def test_cors_flag_adds_headers():
    client = _client(_engine(), cors=True)
    resp = client.get("/next-hit", params={"worker": "w"}, headers={"Origin": "http://x"})
    assert resp.headers.get("access-control-allow-origin") == "*"


def test_exhausted_queue_returns_terminal_payload():
    engine = _engine(gold=False, responses=1)
    client = _client(engine)
    while True:
        resp = client.get("/next-hit", params={"worker": "solo"}).json()
        if "terminal" in resp:
            assert resp["terminal"] == "exhausted"
            break
        client.post(
            "/submit",
            json={
                "worker": "solo",
                "hit_id": resp["hit_id"],
                "boxes": _gt_boxes(engine, resp["scene_id"]),
                "elapsed": 2.0,
            },
        )
    assert engine.done
