"""Record a scripted session against the real task service so the UI tests
can replay it as a fixture transport. Run from the repo root:

    python3 frontend/scripts/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from visgold.dataset import generate_corpus
from visgold.engine import Engine, EngineConfig, Workflow
from visgold.ledger import ConsequenceMode, TierPolicy
from visgold.payments import BaselineBinned
from visgold.scheduling import Dynamic, FibRegular, SchedulePolicy
from visgold.service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "session.json"


def main() -> None:
    corpus = generate_corpus(seed=101, spec={3: 4, 6: 4})
    config = EngineConfig(
        condition="fixture",
        schedule=SchedulePolicy(Dynamic(FibRegular(), t_min=50.0), rng_seed=11),
        tiers=TierPolicy(t_min=50.0, t_bonus_b=75.0, t_bonus_a=85.0),
        consequence_mode=ConsequenceMode.TIERED,
        payment=BaselineBinned(),
        workflow=Workflow.SINGLE,
        responses_per_scene=3,
        seed=11,
    )
    engine = Engine(config, corpus)
    client = TestClient(create_app(engine))
    worker = "alice"
    exchanges = []

    def get(path: str, params: dict) -> dict:
        resp = client.get(path, params=params)
        body = resp.json()
        exchanges.append({"method": "GET", "path": path, "params": params, "status": resp.status_code, "body": body})
        return body

    def post(path: str, payload: dict) -> dict:
        resp = client.post(path, json=payload)
        body = resp.json()
        exchanges.append({"method": "POST", "path": path, "params": None, "request": payload, "status": resp.status_code, "body": body})
        return body

    # quality script per gold: perfect, half, empty (fail -> warning +
    # dynamic override), perfect, perfect; then one standard HIT
    qualities = ["perfect", "half", "empty", "perfect", "perfect", "perfect"]
    for quality in qualities:
        hit = get("/next-hit", {"worker": worker})
        scene = engine.scenes[hit["scene_id"]]
        gt = [b.as_list() for b in scene.gt_boxes]
        if quality == "perfect":
            boxes = gt
        elif quality == "half":
            boxes = gt[: max(1, len(gt) // 2)]
        else:
            boxes = []
        post("/submit", {"worker": worker, "hit_id": hit["hit_id"], "boxes": boxes, "elapsed": 17.5})
        get("/status", {"worker": worker})

    # ground truth for the audit test: every scene's boxes, so the UI test
    # can assert none of them appear in any pre-submission payload
    gt_by_scene = {s.scene_id: [b.as_list() for b in s.gt_boxes] for s in corpus.scenes}
    OUT.write_text(json.dumps({"exchanges": exchanges, "gt_by_scene": gt_by_scene}, indent=1))
    golds = sum(1 for e in exchanges if e["method"] == "POST" and "feedback" in e["body"])
    print(f"wrote {OUT} ({len(exchanges)} exchanges, {golds} gold submissions)")


if __name__ == "__main__":
    main()
