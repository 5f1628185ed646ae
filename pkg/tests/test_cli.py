import json

import pytest

from hoiforge.cli import main
from hoiforge.manifest import read_manifest, write_manifest
from hoiforge.review import ReviewState, Verdict, VerdictLog, sample_batch

from conftest import BICYCLE, PERSON, det, make_image
from test_review import corpus


@pytest.fixture
def cooc_file(tmp_path):
    path = tmp_path / "cooc.json"
    path.write_text(json.dumps([{"a": 0, "b": 3, "count": 5}]))
    return path


@pytest.fixture
def hist_file(tmp_path):
    path = tmp_path / "hist.json"
    path.write_text(json.dumps({"unit": "images", "counts": [49, 50, 48, 50, 50]}))
    return path


def labeled_manifest(tmp_path, name="labeled.jsonl"):
    images = []
    for i in range(4):
        images.append(
            make_image(
                f"img{i}",
                [0],
                [det(f"img{i}", PERSON, [30, 30, 70, 70], 0.9), det(f"img{i}", BICYCLE, [90, 90, 130, 130], 0.8)],
            )
        )
    path = tmp_path / name
    write_manifest(path, images)
    return path


def test_prompts_command(tmp_path, vocab_file, attrs_file, cooc_file, hist_file):
    out = tmp_path / "prompts.jsonl"
    rc = main(
        [
            "prompts",
            "--vocab", str(vocab_file),
            "--attrs", str(attrs_file),
            "--cooc", str(cooc_file),
            "--plan-target", "50",
            "--retention", "1.0",
            "--seed", "7",
            "--hist", str(hist_file),
            "--out", str(out),
        ]
    )
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3  # shortfalls: cat0 needs 1, cat2 needs 2
    rec = json.loads(lines[0])
    assert set(rec) == {"positive_text", "negative_text", "triplet_ids", "seed", "model_config"}
    meta = json.loads((tmp_path / "prompts.jsonl.meta.json").read_text())
    assert meta["max_triplets_per_prompt"] == 2
    assert meta["seed"] == 7


def test_label_and_stats_commands(tmp_path, vocab_file):
    raw = labeled_manifest(tmp_path, "raw.jsonl")
    out = tmp_path / "labeled.jsonl"
    summary = tmp_path / "summary.json"
    rc = main(["label", "--manifest", str(raw), "--vocab", str(vocab_file), "--threshold", "0.5",
               "--out", str(out), "--summary", str(summary)])
    assert rc == 0
    assert json.loads(summary.read_text())["kept"] == 4
    labeled = list(read_manifest(out))
    assert all(img.annotations for img in labeled)

    hist_out = tmp_path / "hist.json"
    stats_summary = tmp_path / "stats.json"
    rc = main(["stats", "--manifest", str(out), "--vocab", str(vocab_file), "--unit", "instances",
               "--out", str(hist_out), "--summary", str(stats_summary), "--tail-threshold", "2"])
    assert rc == 0
    hist = json.loads(hist_out.read_text())
    assert hist["counts"][0] == 4
    s = json.loads(stats_summary.read_text())
    assert s["triplet_instances"] == 4
    assert s["person_boxes"] == 4


def test_split_command(tmp_path, vocab_file, hist_file):
    out = tmp_path / "split.json"
    rc = main(["split", "--kind", "rf-uc", "--n", "2", "--seed", "3", "--vocab", str(vocab_file),
               "--hist", str(hist_file), "--out", str(out)])
    assert rc == 0
    split = json.loads(out.read_text())
    assert split["unseen_hoi"] == [0, 2]  # counts 49 and 48 are the two smallest
    assert sorted(split["unseen_hoi"] + split["seen_hoi"]) == list(range(5))


def test_clipscore_command(tmp_path):
    img_path = tmp_path / "img.jsonl"
    txt_path = tmp_path / "txt.jsonl"
    img_path.write_text('{"id": "a", "values": [1.0, 0.0]}\n{"id": "b", "values": [1.0, 1.0]}\n')
    txt_path.write_text('{"id": "a", "values": [1.0, 0.0]}\n{"id": "b", "values": [1.0, 0.0]}\n')
    out = tmp_path / "scores.json"
    rc = main(["clipscore", "--images", str(img_path), "--texts", str(txt_path), "--w", "1.0", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["scores"]["a"] == pytest.approx(1.0)
    assert payload["scores"]["b"] == pytest.approx(0.7071, abs=1e-4)


def test_match_command(tmp_path):
    (tmp_path / "p.json").write_text(
        json.dumps(
            {
                "human_boxes": [[0.5, 0.5, 0.2, 0.2], [0.2, 0.2, 0.1, 0.1]],
                "object_boxes": [[0.6, 0.6, 0.2, 0.2], [0.3, 0.3, 0.1, 0.1]],
                "object_dist": [[1.0, 0.0], [0.0, 1.0]],
                "interaction_dist": [[1.0, 0.0], [0.0, 1.0]],
            }
        )
    )
    (tmp_path / "g.json").write_text(
        json.dumps(
            {
                "entries": [
                    {"human_box": [0.2, 0.2, 0.1, 0.1], "object_box": [0.3, 0.3, 0.1, 0.1], "object_class": 1, "hoi_class": 1},
                    {"human_box": [0.5, 0.5, 0.2, 0.2], "object_box": [0.6, 0.6, 0.2, 0.2], "object_class": 0, "hoi_class": 0},
                ]
            }
        )
    )
    report = tmp_path / "loss.json"
    rc = main(["match", "--pred", str(tmp_path / "p.json"), "--gt", str(tmp_path / "g.json"),
               "--weights", "2.5,1,1,1", "--report", str(report)])
    assert rc == 0
    payload = json.loads(report.read_text())
    assert payload["assignment"] == [[0, 1], [1, 0]]
    assert payload["loss"]["total"] == pytest.approx(0.0, abs=1e-9)


def test_eval_command(tmp_path, vocab_file):
    gt_path = labeled_manifest(tmp_path)
    preds = []
    for img in read_manifest(gt_path):
        # echo GT boxes back as perfect predictions
        for ann in [
            {"human_box": [30, 30, 70, 70], "object_box": [90, 90, 130, 130], "hoi_id": 0}
        ]:
            preds.append({"image_id": img.image_id, "score": 1.0, **ann})
    # the raw manifest has no annotations yet; label it first
    labeled = tmp_path / "gt_labeled.jsonl"
    main(["label", "--manifest", str(gt_path), "--vocab", str(vocab_file), "--out", str(labeled)])
    pred_path = tmp_path / "preds.jsonl"
    pred_path.write_text("\n".join(json.dumps(p) for p in preds) + "\n")
    rare_hist = tmp_path / "train_hist.json"
    rare_hist.write_text(json.dumps({"unit": "instances", "counts": [5, 20, 20, 20, 20]}))
    out = tmp_path / "report.json"
    rc = main(["eval", "--pred", str(pred_path), "--gt", str(labeled), "--mode", "default",
               "--iou", "0.5", "--rare-hist", str(rare_hist), "--rare-threshold", "10", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["full"] == 1.0
    assert report["rare"] == 1.0  # category 0 is rare (5 < 10) and perfectly predicted
    assert report["matching"].startswith("min(")


def test_export_command(tmp_path):
    log = VerdictLog(tmp_path / "verdicts.jsonl")
    items = sample_batch(corpus(5), 1.0, seed=2)
    state = ReviewState.from_batch(items, 1.0, 2)
    log.append(state.batch_event())
    log.append(Verdict(items[0].annotations[0].annotation_id, "accept", timestamp=1).to_event())
    log.append(Verdict(items[1].annotations[0].annotation_id, "reject", timestamp=2).to_event())
    out = tmp_path / "synhoi_sub.jsonl"
    rc = main(["export", "--log", str(log.path), "--out", str(out)])
    assert rc == 0
    exported = list(read_manifest(out))
    assert len(exported) == 1
    assert exported[0].annotations[0].source == "verified"
    meta = json.loads((tmp_path / "synhoi_sub.jsonl.meta.json").read_text())
    assert meta["exported_annotations"] == 1


def test_report_command(tmp_path, vocab_file, hist_file):
    out_dir = tmp_path / "reports"
    rc = main(["report", "--hist", str(hist_file), "--tail-threshold", "50",
               "--vocab", str(vocab_file), "--out-dir", str(out_dir)])
    assert rc == 0
    assert (out_dir / "histogram.png").exists()
    assert (out_dir / "histogram.csv").exists()


def test_report_command_requires_input(tmp_path):
    assert main(["report", "--out-dir", str(tmp_path)]) == 2


def test_data_root_env_override(monkeypatch):
    from hoiforge.cli import DATA_ROOT_ENV, resolve_data_root

    monkeypatch.delenv(DATA_ROOT_ENV, raising=False)
    assert resolve_data_root("/from/flag") == "/from/flag"
    monkeypatch.setenv(DATA_ROOT_ENV, "/from/env")
    assert resolve_data_root("/from/flag") == "/from/env"


def test_cli_error_reporting(tmp_path, capsys):
    rc = main(["label", "--manifest", str(tmp_path / "missing.jsonl"), "--vocab", str(tmp_path / "v.json"),
               "--out", str(tmp_path / "o.jsonl")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err
