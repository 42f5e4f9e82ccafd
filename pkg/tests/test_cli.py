"""End-to-end command-line checks: round trips in temp dirs and exit codes."""

import csv
import io
import json

import numpy as np
import pytest

from egoforge import cli, fileio
from egoforge.cli import parse_thresholds
from egoforge.model import FeatureMatrix, ScoreMatrix


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    assert cli.main(["synth", "--out", str(out), "--seed", "7", "--num-videos", "4"]) == 0
    return out


class TestParseThresholds:
    def test_comma_list(self):
        assert parse_thresholds("0.1,0.2,0.5") == (0.1, 0.2, 0.5)

    def test_single_value(self):
        assert parse_thresholds("0.5") == (0.5,)

    def test_inclusive_range(self):
        assert parse_thresholds("0.1:0.5:0.1") == (0.1, 0.2, 0.3, 0.4, 0.5)

    def test_coco_style_range(self):
        grid = parse_thresholds("0.5:0.95:0.05")
        assert len(grid) == 10
        assert grid[0] == 0.5
        assert grid[-1] == 0.95

    def test_bad_step(self):
        with pytest.raises(ValueError):
            parse_thresholds("0.1:0.5:0")

    def test_empty(self):
        with pytest.raises(ValueError):
            parse_thresholds(",")

    def test_malformed_range(self):
        with pytest.raises(ValueError):
            parse_thresholds("0.1:0.5")


class TestSchedule:
    def test_exact_fit(self, capsys):
        assert cli.main(["schedule", "--num-frames", "48"]) == 0
        out = capsys.readouterr().out
        assert "snippet 0: frames [0, 32)" in out
        assert "snippet 2: frames [16, 48)" in out
        assert "3 snippets" in out
        assert "(padded)" not in out

    def test_padded_tail_is_marked(self, capsys):
        assert cli.main(["schedule", "--num-frames", "50"]) == 0
        out = capsys.readouterr().out
        assert "(padded)" in out

    def test_stride_beyond_length_is_a_data_error(self, capsys):
        assert cli.main(["schedule", "--num-frames", "48", "--stride", "40"]) == 2
        assert "error" in capsys.readouterr().err


class TestSynth:
    def test_writes_all_files(self, dataset_dir):
        names = sorted(p.name for p in dataset_dir.iterdir())
        assert names == [
            "config.json",
            "gt_fhp.json",
            "gt_lta.json",
            "gt_mq.json",
            "gt_nlq.json",
            "gt_scod.json",
            "gt_sta.json",
            "pred_fhp.json",
            "pred_lta.json",
            "pred_mq.json",
            "pred_nlq.json",
            "pred_scod.json",
            "pred_sta.json",
        ]


class TestEval:
    def test_mq_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "mq", "--gt", str(dataset_dir / "gt_mq.json"), "--pred", str(dataset_dir / "pred_mq.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "Recall@1x tIoU=0.5: 100.00" in out
        assert "mAP: 100.00" in out

    def test_nlq_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "nlq", "--gt", str(dataset_dir / "gt_nlq.json"), "--pred", str(dataset_dir / "pred_nlq.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        for name in ("R5@0.3", "R5@0.5", "R1@0.3", "R1@0.5"):
            assert f"{name}: 100.00" in out

    def test_fhp_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "fhp", "--gt", str(dataset_dir / "gt_fhp.json"), "--pred", str(dataset_dir / "pred_fhp.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "L-M.Disp: 0.00" in out
        assert "R-C.Disp: 0.00" in out

    def test_lta_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "lta", "--gt", str(dataset_dir / "gt_lta.json"), "--pred", str(dataset_dir / "pred_lta.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        for name in ("Verb", "Noun", "Action"):
            assert f"{name}: 0.000" in out

    def test_sta_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "sta", "--gt", str(dataset_dir / "gt_sta.json"), "--pred", str(dataset_dir / "pred_sta.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        for name in ("Noun", "Noun+Verb", "Noun+TTC", "Overall"):
            assert f"{name}: 100.00" in out

    def test_scod_perfect(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "scod", "--gt", str(dataset_dir / "gt_scod.json"), "--pred", str(dataset_dir / "pred_scod.json")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "AP: 100.00" in out
        assert "AP50: 100.00" in out
        assert "AP75: 100.00" in out

    def test_report_file_round_trips(self, dataset_dir, tmp_path, capsys):
        out_file = tmp_path / "mq_report.json"
        rc = cli.main(
            [
                "eval",
                "mq",
                "--gt",
                str(dataset_dir / "gt_mq.json"),
                "--pred",
                str(dataset_dir / "pred_mq.json"),
                "--out",
                str(out_file),
            ]
        )
        assert rc == 0
        capsys.readouterr()
        reports = fileio.load_reports(out_file)
        names = [r.name for r in reports]
        assert "mAP" in names
        assert all(r.value == 1.0 for r in reports)

    def test_csv_format_parses(self, dataset_dir, capsys):
        rc = cli.main(
            [
                "eval",
                "sta",
                "--gt",
                str(dataset_dir / "gt_sta.json"),
                "--pred",
                str(dataset_dir / "pred_sta.json"),
                "--format",
                "csv",
            ]
        )
        assert rc == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["name", "metric", "value", "count"]
        row = [r for r in rows if r[0] == "Noun+Verb"][0]
        assert row[1:3] == ["overall", "100.00"]

    def test_json_format_parses(self, dataset_dir, capsys):
        rc = cli.main(
            [
                "eval",
                "lta",
                "--gt",
                str(dataset_dir / "gt_lta.json"),
                "--pred",
                str(dataset_dir / "pred_lta.json"),
                "--format",
                "json",
            ]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == "report/1"
        assert [r["name"] for r in payload["reports"]] == ["Verb", "Noun", "Action"]

    def test_custom_tiou_grid(self, dataset_dir, capsys):
        rc = cli.main(
            [
                "eval",
                "mq",
                "--gt",
                str(dataset_dir / "gt_mq.json"),
                "--pred",
                str(dataset_dir / "pred_mq.json"),
                "--tiou",
                "0.5,0.75",
                "--format",
                "json",
            ]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        map_report = [r for r in payload["reports"] if r["name"] == "mAP"][0]
        assert set(map_report["breakdown"]) == {"mAP@0.50", "mAP@0.75"}


class TestFuse:
    def test_pre_concatenates_channels(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        a = FeatureMatrix(dim=3, rows=rng.normal(size=(4, 3)).astype(np.float32), provenance="verb")
        b = FeatureMatrix(dim=5, rows=rng.normal(size=(4, 5)).astype(np.float32), provenance="noun")
        fileio.save_features(tmp_path / "a.bin", a)
        fileio.save_features(tmp_path / "b.bin", b)
        rc = cli.main(
            [
                "fuse",
                "pre",
                "--features",
                str(tmp_path / "a.bin"),
                str(tmp_path / "b.bin"),
                "--out",
                str(tmp_path / "ab.bin"),
            ]
        )
        assert rc == 0
        capsys.readouterr()
        fused = fileio.load_features(tmp_path / "ab.bin")
        assert fused.dim == 8
        assert fused.num_rows == 4
        np.testing.assert_array_equal(fused.rows[:, :3], a.rows)
        np.testing.assert_array_equal(fused.rows[:, 3:], b.rows)

    def test_pre_rejects_row_mismatch(self, tmp_path, capsys):
        rng = np.random.default_rng(1)
        a = FeatureMatrix(dim=3, rows=rng.normal(size=(4, 3)).astype(np.float32), provenance="verb")
        b = FeatureMatrix(dim=3, rows=rng.normal(size=(5, 3)).astype(np.float32), provenance="noun")
        fileio.save_features(tmp_path / "a.bin", a)
        fileio.save_features(tmp_path / "b.bin", b)
        rc = cli.main(
            [
                "fuse",
                "pre",
                "--features",
                str(tmp_path / "a.bin"),
                str(tmp_path / "b.bin"),
                "--out",
                str(tmp_path / "ab.bin"),
            ]
        )
        assert rc == 2
        assert "mismatch" in capsys.readouterr().err

    def test_post_merges_and_still_scores(self, dataset_dir, tmp_path, capsys):
        merged = tmp_path / "merged_nlq.json"
        pred = str(dataset_dir / "pred_nlq.json")
        assert cli.main(["fuse", "post", "--pred", pred, pred, "--out", str(merged)]) == 0
        rc = cli.main(["eval", "nlq", "--gt", str(dataset_dir / "gt_nlq.json"), "--pred", str(merged)])
        assert rc == 0
        assert "R1@0.5: 100.00" in capsys.readouterr().out

    def test_sta_splice_and_still_scores(self, dataset_dir, tmp_path, capsys):
        fused = tmp_path / "fused_sta.json"
        pred = str(dataset_dir / "pred_sta.json")
        assert cli.main(["fuse", "sta", "--pred", pred, pred, "--out", str(fused)]) == 0
        rc = cli.main(["eval", "sta", "--gt", str(dataset_dir / "gt_sta.json"), "--pred", str(fused)])
        assert rc == 0
        assert "Overall: 100.00" in capsys.readouterr().out


class TestVote:
    def test_vote_round_trip(self, tmp_path, capsys):
        rng = np.random.default_rng(5)

        def matrix():
            verb = rng.random((3, 4)) + 0.05
            noun = rng.random((3, 6)) + 0.05
            return ScoreMatrix(verb=verb / verb.sum(1, keepdims=True), noun=noun / noun.sum(1, keepdims=True))

        probs = {("va", 1): [matrix() for _ in range(3)], ("vb", 2): [matrix() for _ in range(4)]}
        clip_file = tmp_path / "clips.json"
        fileio.save_lta_clip_probs(clip_file, probs)
        out_file = tmp_path / "voted.json"
        rc = cli.main(["vote", "--pred", str(clip_file), "--out", str(out_file), "--k", "4"])
        assert rc == 0
        assert "fused 2 episodes" in capsys.readouterr().out
        voted = fileio.load_lta_pred(out_file)
        assert set(voted) == {("va", 1), ("vb", 2)}
        for forecast in voted.values():
            assert len(forecast.candidates) == 4
            assert all(len(seq) == 3 for seq in forecast.candidates)

    def test_majority_rule_accepted(self, tmp_path, capsys):
        rng = np.random.default_rng(6)
        verb = rng.random((2, 3)) + 0.05
        noun = rng.random((2, 3)) + 0.05
        m = ScoreMatrix(verb=verb / verb.sum(1, keepdims=True), noun=noun / noun.sum(1, keepdims=True))
        clip_file = tmp_path / "clips.json"
        fileio.save_lta_clip_probs(clip_file, {("v", 0): [m, m, m]})
        rc = cli.main(
            ["vote", "--pred", str(clip_file), "--out", str(tmp_path / "voted.json"), "--rule", "majority"]
        )
        assert rc == 0
        capsys.readouterr()


class TestTrain:
    def test_train_fhp_writes_head(self, dataset_dir, tmp_path, capsys):
        head_file = tmp_path / "fhp_head.bin"
        rc = cli.main(
            [
                "train",
                "fhp",
                "--config",
                str(dataset_dir / "config.json"),
                "--out",
                str(head_file),
                "--epochs",
                "3",
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "epoch 0: loss" in out
        assert "epoch 2: loss" in out
        assert f"wrote {head_file}" in out
        head = fileio.load_head(head_file)
        assert head.kind == "regression_20"

    def test_train_lta_writes_head(self, dataset_dir, tmp_path, capsys):
        head_file = tmp_path / "lta_head.bin"
        rc = cli.main(
            [
                "train",
                "lta",
                "--config",
                str(dataset_dir / "config.json"),
                "--out",
                str(head_file),
                "--epochs",
                "2",
            ]
        )
        assert rc == 0
        capsys.readouterr()
        head = fileio.load_head(head_file)
        assert head.kind == "classifier_C"


class TestReport:
    def test_listing(self, capsys):
        assert cli.main(["report"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == sorted(lines)
        assert "mq-two-stage" in lines
        assert len(lines) == 6

    def test_table_render(self, capsys):
        assert cli.main(["report", "--table", "mq-two-stage"]) == 0
        out = capsys.readouterr().out
        assert "40.36" in out
        assert "23.29" in out

    def test_csv_render(self, capsys):
        assert cli.main(["report", "--table", "short-term", "--format", "csv"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["split", "method", "Noun", "Noun+Verb", "Noun+TTC", "Overall"]

    def test_unknown_table_is_a_data_error(self, capsys):
        assert cli.main(["report", "--table", "nope"]) == 2
        assert "unknown fixture" in capsys.readouterr().err


class TestExitCodes:
    def test_no_subcommand_is_usage(self, capsys):
        assert cli.main([]) == 1
        capsys.readouterr()

    def test_unknown_subcommand_is_usage(self, capsys):
        assert cli.main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_missing_required_flag_is_usage(self, capsys):
        assert cli.main(["schedule"]) == 1
        capsys.readouterr()

    def test_bad_choice_is_usage(self, dataset_dir, capsys):
        rc = cli.main(
            [
                "eval",
                "mq",
                "--gt",
                str(dataset_dir / "gt_mq.json"),
                "--pred",
                str(dataset_dir / "pred_mq.json"),
                "--format",
                "yaml",
            ]
        )
        assert rc == 1
        capsys.readouterr()

    def test_missing_file_is_data(self, tmp_path, capsys):
        rc = cli.main(["eval", "mq", "--gt", str(tmp_path / "a.json"), "--pred", str(tmp_path / "b.json")])
        assert rc == 2
        capsys.readouterr()

    def test_wrong_schema_is_data(self, dataset_dir, capsys):
        rc = cli.main(
            ["eval", "mq", "--gt", str(dataset_dir / "gt_nlq.json"), "--pred", str(dataset_dir / "pred_mq.json")]
        )
        assert rc == 2
        assert "schema" in capsys.readouterr().err

    def test_invalid_json_is_data(self, tmp_path, dataset_dir, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json", encoding="utf-8")
        rc = cli.main(["eval", "mq", "--gt", str(bad), "--pred", str(dataset_dir / "pred_mq.json")])
        assert rc == 2
        capsys.readouterr()


class TestThreadEnv:
    def test_eval_output_is_thread_independent(self, dataset_dir, capsys, monkeypatch):
        args = ["eval", "mq", "--gt", str(dataset_dir / "gt_mq.json"), "--pred", str(dataset_dir / "pred_mq.json")]
        monkeypatch.setenv("EGOFORGE_THREADS", "1")
        assert cli.main(args) == 0
        single = capsys.readouterr().out
        monkeypatch.setenv("EGOFORGE_THREADS", "8")
        assert cli.main(args) == 0
        threaded = capsys.readouterr().out
        assert single == threaded
