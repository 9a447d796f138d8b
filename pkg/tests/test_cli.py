from __future__ import annotations

import json

import pytest

from headliner.cli import main
from headliner.corpus import save_labeled
from headliner.synthetic import marker_corpus
from headliner.training import parse_results_table


@pytest.fixture
def raw_dataset(tmp_path):
    path = tmp_path / "raw.jsonl"
    rows = [
        {"id": "a", "title": "first story here", "metric": 10, "group": "g"},
        {"id": "b", "title": "second story here", "metric": 20, "group": "g"},
        {"id": "c", "title": "third story here", "metric": 30, "group": "g"},
        {"id": "d", "title": "fourth story here", "metric": 40, "group": "g"},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return path


@pytest.fixture
def labeled_dataset(tmp_path):
    path = tmp_path / "labeled.jsonl"
    save_labeled(marker_corpus(40, seed=0), str(path))
    return path


def train_args(labeled_dataset, model_path, *extra):
    return ["train", "--data", str(labeled_dataset), "--model-out", str(model_path),
            "--model-kind", "bilstm", "--hidden-size", "4", "--embed-dim", "4",
            "--embedding-mode", "fine_tune", "--max-epochs", "2",
            "--max-seq-len", "15", "--validation-fraction", "0.2",
            "--seed", "0", *extra]


class TestLabel:
    def test_labels_match_hand_computed_medians(self, raw_dataset, tmp_path, capsys):
        out = tmp_path / "labeled.jsonl"
        code = main(["label", "--input", str(raw_dataset), "--output", str(out)])
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        # median 25: 10 and 20 below, 30 and 40 above
        assert [r["label"] for r in rows] == [0, 0, 1, 1]

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        code = main(["label", "--input", str(tmp_path / "nope.jsonl"),
                     "--output", str(tmp_path / "out.jsonl")])
        assert code == 5
        assert "error: io" in capsys.readouterr().err

    def test_bad_data_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "title": "t", "metric": -1, "group": "g"}\n')
        code = main(["label", "--input", str(bad), "--output", str(tmp_path / "o")])
        assert code == 3
        assert "error: data" in capsys.readouterr().err


class TestTrainEvalPredict:
    def test_train_then_eval_round_trip(self, labeled_dataset, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        assert main(train_args(labeled_dataset, model_path)) == 0
        capsys.readouterr()
        code = main(["eval", "--model", str(model_path), "--data", str(labeled_dataset)])
        assert code == 0
        report = json.loads(capsys.readouterr().out.strip())
        assert set(report) == {"accuracy", "tp", "fp", "tn", "fn", "n"}
        assert report["n"] == 40

    def test_predict_outputs_probability_and_label(self, labeled_dataset, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        main(train_args(labeled_dataset, model_path))
        capsys.readouterr()
        code = main(["predict", "--model", str(model_path), "--title", "viral word00"])
        assert code == 0
        out = json.loads(capsys.readouterr().out.strip())
        assert 0.0 <= out["probability"] <= 1.0
        assert out["label"] in ("popular", "unpopular")

    def test_predict_empty_title(self, labeled_dataset, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        main(train_args(labeled_dataset, model_path))
        capsys.readouterr()
        code = main(["predict", "--model", str(model_path), "--title", ""])
        assert code == 3
        assert "empty title" in capsys.readouterr().err

    def test_introspect_prints_table_and_json(self, labeled_dataset, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        main(train_args(labeled_dataset, model_path))
        capsys.readouterr()
        code = main(["introspect", "--model", str(model_path), "--title", "viral word00 word01"])
        assert code == 0
        out = capsys.readouterr().out
        payload = json.loads(out.strip().splitlines()[-1])
        assert [t["token"] for t in payload["tokens"]] == ["viral", "word00", "word01"]
        assert "viral" in out.splitlines()[0]

    def test_kfold_emits_parseable_table(self, labeled_dataset, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = main(["train", "--data", str(labeled_dataset), "--kfold", "4",
                     "--model-kind", "bow_svm", "--svm-epochs", "3",
                     "--report-out", str(report_path), "--seed", "1"])
        assert code == 0
        out_lines = capsys.readouterr().out.splitlines()
        table_text = "\n".join(out_lines[:2]) + "\n"
        rows = parse_results_table(table_text)
        assert rows[0].model == "BoW + SVM"
        report = json.loads(report_path.read_text())
        assert len(report["folds"]) == 4

    def test_config_file_with_flag_override(self, labeled_dataset, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"model_kind": "bilstm", "hidden_size": 4,
                                           "embed_dim": 4, "max_epochs": 1,
                                           "max_seq_len": 15,
                                           "validation_fraction": 0.2}))
        model_path = tmp_path / "model.json"
        report_path = tmp_path / "report.json"
        code = main(["train", "--data", str(labeled_dataset), "--model-out", str(model_path),
                     "--config", str(config_path), "--hidden-size", "2",
                     "--report-out", str(report_path)])
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["config"]["hidden_size"] == 2       # flag beats file
        assert report["config"]["max_epochs"] == 1        # file beats default

    def test_train_requires_model_out(self, labeled_dataset, capsys):
        code = main(["train", "--data", str(labeled_dataset)])
        assert code == 2

    def test_missing_model_file(self, tmp_path, capsys):
        code = main(["predict", "--model", str(tmp_path / "none.json"), "--title", "x"])
        assert code == 5


class TestUsage:
    def test_unknown_flag(self, capsys):
        assert main(["predict", "--nope"]) == 2

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_no_command(self, capsys):
        assert main([]) == 2
