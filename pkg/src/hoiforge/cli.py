"""hoiforge command line: dataset pipeline, statistics, matching and review."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .autolabel import DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_PERSON_CLASS_ID, label_dataset
from .errors import SchemaError, ValidationError
from .evaluation import (
    MODE_DEFAULT,
    MODE_KNOWN_OBJECT,
    EvalSettings,
    ground_truth_from_manifest,
    load_known_object_index,
    map_report,
    read_predictions,
)
from .manifest import read_manifest, write_manifest
from .matching import CostWeights, cost_matrix, hungarian, load_ground_truth_set, load_prediction_set, total_loss
from .prompts import (
    DEFAULT_MAX_TRIPLETS_PER_PROMPT,
    DEFAULT_NEGATIVE_SAMPLE_SIZE,
    DEFAULT_RETENTION_RATE,
    build_generation_plan,
    generate_prompts,
)
from .review import DEFAULT_REVIEW_FRACTION, VerdictLog, export_verified
from .stats import (
    DEFAULT_SPLIT_SIZES,
    SPLIT_KINDS,
    UNIT_IMAGES,
    UNIT_INSTANCES,
    CategoryHistogram,
    clip_score,
    histogram,
    load_embeddings,
    make_zero_shot_split,
    rare_set_from_histogram,
    summarize_dataset,
    tail_report,
)
from .vocabulary import load_attributes, load_cooccurrence, load_vocabulary

DATA_ROOT_ENV = "HOIFORGE_DATA_ROOT"


def resolve_data_root(cli_value: str) -> str:
    """The data-root env var takes precedence over the --data flag."""
    return os.environ.get(DATA_ROOT_ENV) or cli_value


def _write_json(path: Path | str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _cmd_prompts(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    attrs = load_attributes(args.attrs)
    table = load_cooccurrence(args.cooc)
    if args.hist:
        hist = CategoryHistogram.load(args.hist)
        if len(hist) != vocab.num_categories:
            raise ValidationError(
                f"histogram length {len(hist)} does not match vocabulary size {vocab.num_categories}"
            )
        counts = hist.counts
    else:
        counts = [0] * vocab.num_categories
    plan = build_generation_plan(counts, args.plan_target, args.retention)
    options = None
    if args.model_configs:
        options = json.loads(Path(args.model_configs).read_text())
    run = generate_prompts(
        vocab,
        attrs,
        table,
        plan,
        seed=args.seed,
        max_triplets=args.max_triplets,
        negative_sample_size=args.negative_k,
        model_config_options=options,
    )
    out = Path(args.out)
    with out.open("w") as fh:
        for p in run.prompts:
            fh.write(json.dumps(p.to_dict()) + "\n")
    _write_json(out.with_name(out.name + ".meta.json"), run.meta)
    print(f"wrote {len(run.prompts)} prompts to {out}")
    return 0


def _cmd_label(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    images = list(read_manifest(args.manifest))
    labeled, summary = label_dataset(images, vocab, args.threshold, args.person_class)
    write_manifest(args.out, labeled)
    if args.summary:
        _write_json(args.summary, summary.to_dict())
    print(
        f"labeled {summary.total} images: kept {summary.kept}, discarded {summary.discarded}"
        f" (retention {summary.retention:.4f})"
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    images = list(read_manifest(args.manifest))
    hist = histogram(images, vocab, args.unit)
    hist.save(args.out)
    below, tail_ids = tail_report(hist, args.tail_threshold)
    payload = {
        "unit": hist.unit,
        "num_categories": len(hist),
        "tail": {"threshold": args.tail_threshold, "count_below": below, "categories": tail_ids},
    }
    payload.update(summarize_dataset(images).to_dict())
    if args.summary:
        _write_json(args.summary, payload)
    print(
        f"{payload['images_kept']}/{payload['images_total']} images kept, "
        f"{payload['triplet_instances']} triplet instances, "
        f"{below} categories below {args.tail_threshold}"
    )
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    hist = CategoryHistogram.load(args.hist) if args.hist else None
    n = args.n if args.n is not None else DEFAULT_SPLIT_SIZES[args.kind]
    split = make_zero_shot_split(hist, vocab, args.kind, n, args.seed)
    split.save(args.out)
    print(f"{args.kind} split: {len(split.unseen_hoi)} unseen / {len(split.seen_hoi)} seen categories")
    return 0


def _cmd_clipscore(args: argparse.Namespace) -> int:
    images = load_embeddings(args.images)
    texts = load_embeddings(args.texts)
    shared = [k for k in images if k in texts]
    scores = {k: clip_score(images[k], texts[k], args.w) for k in shared}
    payload = {
        "w": args.w,
        "count": len(scores),
        "skipped": len(images) - len(scores) + len(texts) - len(scores),
        "mean": (sum(scores.values()) / len(scores)) if scores else None,
        "scores": scores,
    }
    if args.out:
        _write_json(args.out, payload)
    mean = payload["mean"]
    print(f"clip-score over {len(scores)} pairs: mean {mean:.4f}" if scores else "no shared ids")
    return 0


def _cmd_match(args: argparse.Namespace) -> int:
    pred = load_prediction_set(args.pred)
    gt = load_ground_truth_set(args.gt)
    weights = CostWeights.from_string(args.weights)
    cost = cost_matrix(pred, gt, weights)
    assignment = hungarian(cost)
    loss = total_loss(pred, gt, assignment, weights)
    payload = {
        "weights": {
            "box": weights.box,
            "giou": weights.giou,
            "obj_cls": weights.obj_cls,
            "interaction": weights.interaction,
        },
        "assignment": [list(p) for p in assignment.pairs],
        "assignment_cost": assignment.total_cost(cost),
        "loss": loss.to_dict(),
    }
    _write_json(args.report, payload)
    print(f"matched {len(assignment.pairs)} pairs, total loss {loss.total:.6f}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    preds = read_predictions(args.pred)
    gts = ground_truth_from_manifest(read_manifest(args.gt))
    rare = set()
    if args.rare_hist:
        rare = rare_set_from_histogram(CategoryHistogram.load(args.rare_hist), args.rare_threshold)
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    index = load_known_object_index(args.known_index) if args.known_index else None
    settings = EvalSettings(
        iou_threshold=args.iou, mode=args.mode, rare_set=rare, known_object_index=index
    )
    report = map_report(preds, gts, settings, vocab=vocab)
    _write_json(args.out, report.to_dict())

    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    print(f"mAP full {fmt(report.full)}, rare {fmt(report.rare)}, non-rare {fmt(report.non_rare)}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    data_root = resolve_data_root(args.data)
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    serve(
        manifest_path=args.manifest,
        data_root=data_root,
        log_path=args.log,
        fraction=args.fraction,
        seed=args.seed,
        vocab=vocab,
        host=args.host,
        port=args.port,
    )
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    log = VerdictLog(args.log)
    state = log.replay()
    header, images = export_verified(state)
    write_manifest(args.out, images)
    out = Path(args.out)
    _write_json(out.with_name(out.name + ".meta.json"), header)
    print(f"exported {header['exported_annotations']} annotations across {header['exported_images']} images")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import write_eval_report, write_histogram_report

    vocab = load_vocabulary(args.vocab) if args.vocab else None
    wrote = []
    if args.hist:
        hist = CategoryHistogram.load(args.hist)
        compare = CategoryHistogram.load(args.merge_with) if args.merge_with else None
        wrote += write_histogram_report(
            hist, args.out_dir, threshold=args.tail_threshold, vocab=vocab, compare=compare
        )
    if args.eval:
        report = json.loads(Path(args.eval).read_text())
        wrote += write_eval_report(report, args.out_dir, vocab=vocab)
    if not wrote:
        print("nothing to render: pass --hist and/or --eval", file=sys.stderr)
        return 2
    for path in wrote:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hoiforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hoiforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prompts", help="compose generation prompts from a balance plan")
    p.add_argument("--vocab", required=True)
    p.add_argument("--attrs", required=True)
    p.add_argument("--cooc", required=True)
    p.add_argument("--plan-target", type=int, default=50, dest="plan_target")
    p.add_argument("--retention", type=float, default=DEFAULT_RETENTION_RATE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--hist", help="existing per-category image counts; defaults to an empty corpus")
    p.add_argument("--max-triplets", type=int, default=DEFAULT_MAX_TRIPLETS_PER_PROMPT, dest="max_triplets")
    p.add_argument("--negative-k", type=int, default=DEFAULT_NEGATIVE_SAMPLE_SIZE, dest="negative_k")
    p.add_argument("--model-configs", dest="model_configs", help="JSON of knob -> candidate values")
    p.set_defaults(func=_cmd_prompts)

    p = sub.add_parser("label", help="filter and annotate a detection manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_CONFIDENCE_THRESHOLD)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.add_argument("--person-class", type=int, default=DEFAULT_PERSON_CLASS_ID, dest="person_class")
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("stats", help="histogram and corpus totals for a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--unit", choices=[UNIT_INSTANCES, UNIT_IMAGES], default=UNIT_INSTANCES)
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.add_argument("--tail-threshold", type=int, default=50, dest="tail_threshold")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("split", help="build a zero-shot category split")
    p.add_argument("--kind", choices=list(SPLIT_KINDS), required=True)
    p.add_argument("--n", type=int, default=None, help="unseen count; defaults per kind")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", required=True)
    p.add_argument("--hist", help="category histogram (required for rf-uc / nf-uc)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("clipscore", help="clamped cosine similarity over precomputed embeddings")
    p.add_argument("--images", required=True)
    p.add_argument("--texts", required=True)
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_clipscore)

    p = sub.add_parser("match", help="assign predictions to ground truth and report the loss")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--weights", default="2.5,1,1,1")
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("eval", help="triplet detection mAP report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True, help="labeled manifest used as ground truth")
    p.add_argument("--mode", choices=[MODE_DEFAULT, MODE_KNOWN_OBJECT], default=MODE_DEFAULT)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--rare-hist", dest="rare_hist", help="training histogram defining the rare set")
    p.add_argument("--rare-threshold", type=int, default=10, dest="rare_threshold")
    p.add_argument("--known-index", dest="known_index", help="object class -> image ids (known mode)")
    p.add_argument("--vocab", help="needed in known mode")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--data", required=True, help=f"image root; ${DATA_ROOT_ENV} overrides")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fraction", type=float, default=DEFAULT_REVIEW_FRACTION)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--log", default="verdicts.jsonl")
    p.add_argument("--vocab", help="adds verb/object captions to batch items")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="export the verified subset from a verdict log")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("report", help="render figures and CSV tables from report JSON")
    p.add_argument("--hist")
    p.add_argument("--merge-with", dest="merge_with", help="second histogram to overlay")
    p.add_argument("--eval", help="map_report JSON")
    p.add_argument("--tail-threshold", type=int, default=50, dest="tail_threshold")
    p.add_argument("--vocab")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
