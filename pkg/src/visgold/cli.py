"""Command-line entry points: corpus generation, scoring, simulation,
analysis, calibration and the live task service."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .calibrate import CalibrationResult, calibrate, load_targets
from .dataset import generate_corpus, load_annotations, load_corpus, save_corpus
from .engine import Engine
from .harness import (
    CONDITIONS,
    ExperimentConfig,
    condition_preset,
    emit_outputs,
    run_condition,
)
from .scoring import recall_at, score


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    corpus = generate_corpus(args.seed)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus.scenes)} scenes to {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    corpus, report = load_corpus(args.gold)
    if report.rejected:
        print(f"warning: {len(report.rejected)} records rejected", file=sys.stderr)
    annotations = load_annotations(args.pred)
    rows = []
    for ann in annotations:
        scene = corpus.by_id(ann.scene_id)
        rep = score(scene, ann)
        rows.append(
            {
                "scene_id": ann.scene_id,
                "worker_id": ann.worker_id,
                "miou": f"{rep.miou:.3f}",
                "recall": f"{recall_at(scene, ann, args.tau):.4f}",
                "fn": rep.fn_count,
                "fp": rep.fp_count,
                "n_gt": scene.count,
                "n_pred": len(ann.boxes),
                "elapsed": f"{ann.elapsed:.1f}",
            }
        )
    with Path(args.out).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else ["scene_id"])
        writer.writeheader()
        writer.writerows(rows)
    overall = sum(float(r["miou"]) for r in rows) / len(rows) if rows else 0.0
    print(f"scored {len(rows)} submissions; mean mIoU {overall:.2f}; wrote {args.out}")
    return 0


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        cfg = condition_preset(args.condition)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "calibration", None):
        cal = CalibrationResult.from_json(Path(args.calibration).read_text())
        for key, value in cal.overrides().items():
            if key == "tuning":
                from .simulator import SimTuning

                cfg.tuning = SimTuning(**value)
            else:
                setattr(cfg, key, value)
    return cfg


def _cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    conditions = args.conditions.split(",") if args.conditions else [None]
    summaries = []
    for name in conditions:
        if name:
            args.condition = name
        cfg = _load_config(args)
        log_path = out_dir / f"events-{cfg.condition}.ndjson"
        if log_path.exists():
            log_path.unlink()
        summary, _, _ = run_condition(cfg, log_path=log_path)
        summaries.append(summary)
        (out_dir / f"summary-{cfg.condition}.json").write_text(
            json.dumps(
                {
                    "condition": summary.condition,
                    "mean_miou": summary.mean_miou,
                    "se_miou": summary.se_miou,
                    "mean_time_s": summary.mean_time_s,
                    "n_responses": summary.n_responses,
                    "miou_samples": list(summary.miou_samples),
                    "stat_unit": summary.stat_unit,
                },
                indent=2,
            )
        )
        print(
            f"{summary.condition}: mean mIoU {summary.mean_miou:.2f} "
            f"(SE {summary.se_miou:.2f}), {summary.n_responses} responses, "
            f"mean time {summary.mean_time_s:.1f}s"
        )
    emit_outputs(summaries, out_dir)
    print(f"outputs in {out_dir}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    in_dir = Path(args.in_dir)
    summaries: dict[str, object] = {}
    samples: dict[str, list[float]] = {}
    for path in sorted(in_dir.glob("summary-*.json")):
        rec = json.loads(path.read_text())
        samples[rec["condition"]] = rec["miou_samples"]
    if args.baseline not in samples:
        print(f"error: baseline {args.baseline!r} not found in {in_dir}", file=sys.stderr)
        return 2
    from .stats import bonferroni, mann_whitney, significance_marker

    raw = {
        name: mann_whitney(vals, samples[args.baseline])
        for name, vals in samples.items()
        if name != args.baseline
    }
    adjusted = bonferroni(raw)
    out_path = in_dir / "comparisons.csv"
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "baseline", "u", "p", "p_adjusted", "verdict", "method"])
        for name in sorted(adjusted):
            res = adjusted[name]
            verdict = significance_marker(res.p_adjusted if res.p_adjusted is not None else res.p)
            writer.writerow(
                [name, args.baseline, f"{res.u:.1f}", f"{res.p:.6g}", f"{res.p_adjusted:.6g}", verdict, res.method]
            )
            print(f"{name} vs {args.baseline}: U={res.u:.0f} p_adj={res.p_adjusted:.4g} {verdict}")
    print(f"wrote {out_path}")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    targets = load_targets(args.target) if args.target else None
    result = calibrate(seed=args.seed or 0, targets=targets)
    Path(args.out).write_text(result.to_json())
    print(
        f"baseline mean {result.baseline_mean:.2f} (target {result.target_baseline}); "
        f"improved mean {result.improved_mean:.2f} (gap {result.gap:.2f}); "
        f"thresholds t_min={result.t_min} t_bonus_b={result.t_bonus_b} t_bonus_a={result.t_bonus_a}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .events import EventLog
    from .service import serve

    cfg = _load_config(args)
    corpus = cfg.corpus()
    engine = Engine(cfg.engine_config(), corpus, EventLog(args.log))
    print(f"serving condition {cfg.condition!r} on port {args.port} (log: {args.log})")
    serve(engine, port=args.port, cors=not args.no_cors)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="visgold", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus file")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_corpus)

    p = sub.add_parser("score", help="score a predictions file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("simulate", help="run one or more simulated conditions")
    p.add_argument("--config", help="experiment config JSON (overrides --condition)")
    p.add_argument("--condition", default="baseline", choices=CONDITIONS)
    p.add_argument("--conditions", help="comma-separated condition presets to run")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--calibration", help="calibration JSON from the calibrate command")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="rank-sum comparisons vs a baseline condition")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--baseline", default="baseline")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("calibrate", help="fit simulator knobs against target means")
    p.add_argument("--target", help="CSV with condition,mean_miou columns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="calibration.json")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("serve", help="run the live task service")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--condition", default="gold_improved", choices=CONDITIONS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--calibration")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--log", default="events.ndjson")
    p.add_argument("--no-cors", action="store_true")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
