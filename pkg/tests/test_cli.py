import json

import numpy as np
import pytest

from floodvision import load_mask
from floodvision.cli import main


@pytest.fixture(scope="module")
def classify_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_cls") / "data"
    assert main(["synth-gen", "--task", "classify", "--out", str(root),
                 "--count", "16", "--seed", "3", "--width", "96", "--height", "72"]) == 0
    return root


@pytest.fixture(scope="module")
def segment_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_seg") / "data"
    assert main(["synth-gen", "--task", "segment", "--out", str(root),
                 "--count", "8", "--seed", "3", "--width", "72", "--height", "60"]) == 0
    return root


@pytest.fixture(scope="module")
def classify_run(classify_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_cls_run")
    config = {
        "folds": 3,
        "grid": {"reg_strength": [0.01]},
        "train_params": {"lr": 0.3, "epochs": 100},
        "resize_to": [64, 64],
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config))
    code = main([
        "classify-train", "--config", str(config_path),
        "--manifest", str(classify_dataset / "manifest.json"),
        "--feature", "lbp", "--classifier", "logistic",
        "--out", str(out / "run"), "--seed", "42",
    ])
    assert code == 0
    return out / "run"


@pytest.fixture(scope="module")
def segment_run(segment_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_seg_run")
    config = {
        "folds": 3,
        "grid": {"reg_strength": [0.01]},
        "train_params": {"lr": 0.3, "epochs": 100},
        "slic": {"n_segments": 80},
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config))
    code = main([
        "segment-train", "--config", str(config_path),
        "--manifest", str(segment_dataset / "manifest.json"),
        "--out", str(out / "run"), "--seed", "42",
    ])
    assert code == 0
    return out / "run"


class TestIngestCheck:
    def test_ok(self, classify_dataset, capsys):
        assert main(["ingest-check", "--manifest", str(classify_dataset / "manifest.json")]) == 0
        assert "16 entries" in capsys.readouterr().out

    def test_missing_manifest_is_validation_error(self, tmp_path, capsys):
        assert main(["ingest-check", "--manifest", str(tmp_path / "none.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_require_masks_fails_on_classify_data(self, classify_dataset):
        assert main(["ingest-check", "--manifest", str(classify_dataset / "manifest.json"),
                     "--require-masks"]) == 1


class TestClassifyCommands:
    def test_train_artifacts(self, classify_run):
        assert (classify_run / "report.json").exists()
        assert (classify_run / "model.json").exists()
        assert (classify_run / "run_config.json").exists()
        report = json.loads((classify_run / "report.json").read_text())
        assert report["pipeline"] == "classify"
        assert report["test"]["f1"] >= 0.8

    def test_eval_round_trip(self, classify_run, tmp_path):
        code = main(["classify-eval", "--run", str(classify_run), "--split", "test",
                     "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report-eval-test.json").read_text())
        trained = json.loads((classify_run / "report.json").read_text())
        assert report["test"]["confusion"] == trained["test"]["confusion"]

    def test_missing_manifest_flag(self, tmp_path):
        assert main(["classify-train", "--feature", "lbp", "--out", str(tmp_path)]) == 1

    def test_predict_outputs_labels(self, classify_run, classify_dataset, capsys):
        image = str(classify_dataset / "flood" / "flood_000.png")
        assert main(["predict", "--run", str(classify_run), image]) == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        record = json.loads(line)
        assert set(record) == {"image", "label", "p_flood"}
        assert record["label"] in (0, 1)


class TestSegmentCommands:
    def test_train_artifacts(self, segment_run):
        report = json.loads((segment_run / "report.json").read_text())
        assert report["pipeline"] == "segment"
        masks = list((segment_run / "masks").iterdir())
        assert len(masks) == report["dataset"]["n_test"]
        for path in masks:
            mask = load_mask(path)
            assert set(np.unique(mask.labels)) <= {0, 1}

    def test_eval_with_masks(self, segment_run, tmp_path):
        code = main(["segment-eval", "--run", str(segment_run), "--split", "test",
                     "--out", str(tmp_path), "--write-masks"])
        assert code == 0
        report = json.loads((tmp_path / "report-eval-test.json").read_text())
        trained = json.loads((segment_run / "report.json").read_text())
        assert report["pixel"] == trained["pixel"]

    def test_predict_writes_masks(self, segment_run, segment_dataset, tmp_path, capsys):
        image = str(segment_dataset / "flood" / "scene_000.png")
        assert main(["predict", "--run", str(segment_run), "--out", str(tmp_path), image]) == 0
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert (tmp_path / record["mask"]).exists()
        assert (tmp_path / record["overlay"]).exists()


class TestOverlayCommand:
    def test_overlay_file(self, segment_dataset, tmp_path):
        image = str(segment_dataset / "flood" / "scene_000.png")
        mask = str(segment_dataset / "masks" / "scene_000.png")
        out = tmp_path / "blend.png"
        assert main(["overlay", "--image", image, "--mask", mask, "--out", str(out)]) == 0
        assert out.exists()

    def test_mismatched_mask_is_validation_error(self, segment_dataset, classify_dataset, tmp_path):
        image = str(classify_dataset / "flood" / "flood_000.png")
        mask = str(segment_dataset / "masks" / "scene_000.png")
        assert main(["overlay", "--image", image, "--mask", mask,
                     "--out", str(tmp_path / "x.png")]) == 1
