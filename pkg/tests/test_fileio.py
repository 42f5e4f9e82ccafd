import json
import warnings

import numpy as np
import pytest

from egoforge import fileio
from egoforge.errors import DataError, SchemaError
from egoforge.heads import new_head
from egoforge.metrics import MetricReport
from egoforge.model import FeatureMatrix, ScoreMatrix
from egoforge.synth import SynthConfig, generate_synthetic, perfect_predictions


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    """A synthetic dataset saved once and reloaded by several tests."""
    from egoforge.cli import main

    out = tmp_path_factory.mktemp("ds")
    assert main(["synth", "--out", str(out), "--seed", "3", "--num-videos", "4"]) == 0
    return out


class TestJsonRoundTrips:
    def test_mq(self, dataset_dir):
        gt = fileio.load_mq_gt(dataset_dir / "gt_mq.json")
        again = dataset_dir / "again_mq.json"
        fileio.save_mq_gt(again, gt)
        assert (dataset_dir / "gt_mq.json").read_bytes() == again.read_bytes()

    def test_nlq(self, dataset_dir):
        gt = fileio.load_nlq_gt(dataset_dir / "gt_nlq.json")
        again = dataset_dir / "again_nlq.json"
        fileio.save_nlq_gt(again, gt)
        assert (dataset_dir / "gt_nlq.json").read_bytes() == again.read_bytes()

    def test_fhp(self, dataset_dir):
        gt = fileio.load_fhp_gt(dataset_dir / "gt_fhp.json")
        again = dataset_dir / "again_fhp.json"
        fileio.save_fhp_gt(again, gt)
        assert (dataset_dir / "gt_fhp.json").read_bytes() == again.read_bytes()

    def test_lta(self, dataset_dir):
        gt = fileio.load_lta_gt(dataset_dir / "gt_lta.json")
        again = dataset_dir / "again_lta.json"
        fileio.save_lta_gt(again, gt)
        assert (dataset_dir / "gt_lta.json").read_bytes() == again.read_bytes()

    def test_sta(self, dataset_dir):
        gt = fileio.load_sta_gt(dataset_dir / "gt_sta.json")
        again = dataset_dir / "again_sta.json"
        fileio.save_sta_gt(again, gt)
        assert (dataset_dir / "gt_sta.json").read_bytes() == again.read_bytes()

    def test_scod_pred(self, dataset_dir):
        pred = fileio.load_scod_pred(dataset_dir / "pred_scod.json")
        again = dataset_dir / "again_scod.json"
        fileio.save_scod_pred(again, pred)
        assert (dataset_dir / "pred_scod.json").read_bytes() == again.read_bytes()

    def test_config(self, dataset_dir, tmp_path):
        config = fileio.load_config(dataset_dir / "config.json")
        assert config == SynthConfig(seed=3, num_videos=4)
        again = tmp_path / "config.json"
        fileio.save_config(again, config)
        assert (dataset_dir / "config.json").read_bytes() == again.read_bytes()


class TestStrictness:
    def test_wrong_schema_tag(self, dataset_dir):
        with pytest.raises(DataError):
            fileio.load_nlq_gt(dataset_dir / "gt_mq.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            fileio.load_mq_gt(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(DataError):
            fileio.load_mq_gt(path)

    def test_schema_violations_collected(self, tmp_path):
        raw = {
            "schema": "mq/1",
            "num_classes": 2,
            "videos": [{"video_id": "v", "num_frames": 10, "fps": 15.0}],
            "instances": [
                {"video_id": "v", "start_s": 5.0, "end_s": 1.0, "class_id": 9},
            ],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(SchemaError) as err:
            fileio.load_mq_gt(path)
        assert len(err.value.violations) == 2

    def test_unknown_key_warns(self, tmp_path):
        raw = {
            "schema": "mq/1",
            "num_classes": 2,
            "videos": [{"video_id": "v", "num_frames": 10, "fps": 15.0}],
            "instances": [],
            "comment": "scratch",
        }
        path = tmp_path / "extra.json"
        path.write_text(json.dumps(raw))
        with pytest.warns(UserWarning, match="comment"):
            fileio.load_mq_gt(path)

    def test_prediction_for_unknown_video(self, dataset_dir, tmp_path):
        raw = {
            "schema": "mq-pred/1",
            "instances": [
                {"video_id": "ghost", "start_s": 0.0, "end_s": 1.0, "class_id": 0, "score": 0.5}
            ],
        }
        path = tmp_path / "pred.json"
        path.write_text(json.dumps(raw))
        gt = fileio.load_mq_gt(dataset_dir / "gt_mq.json")
        with pytest.raises(DataError, match="ghost"):
            fileio.load_mq_pred(path, known_videos=gt.videos)


class TestLtaPredFiles:
    def _clip_file(self, tmp_path):
        rng = np.random.default_rng(0)
        v = rng.random((2, 3))
        n = rng.random((2, 4))
        m = ScoreMatrix(verb=v / v.sum(1, keepdims=True), noun=n / n.sum(1, keepdims=True))
        path = tmp_path / "clips.json"
        fileio.save_lta_clip_probs(path, {("v", 5): [m, m]})
        return path, m

    def test_clip_probs_round_trip(self, tmp_path):
        path, m = self._clip_file(tmp_path)
        loaded = fileio.load_lta_clip_probs(path)
        assert set(loaded) == {("v", 5)}
        assert len(loaded[("v", 5)]) == 2
        assert loaded[("v", 5)][0] == m

    def test_eval_loader_rejects_multiple_rows_per_episode(self, tmp_path):
        path, _ = self._clip_file(tmp_path)
        with pytest.raises(DataError, match="vote"):
            fileio.load_lta_pred(path)

    def test_vote_loader_requires_matrices(self, dataset_dir):
        with pytest.raises(DataError, match="score_matrix"):
            fileio.load_lta_clip_probs(dataset_dir / "pred_lta.json")

    def test_forecast_round_trip(self, dataset_dir, tmp_path):
        forecasts = fileio.load_lta_pred(dataset_dir / "pred_lta.json")
        again = tmp_path / "again.json"
        fileio.save_lta_pred(again, forecasts)
        assert fileio.load_lta_pred(again) == forecasts


class TestFeatureFiles:
    def _matrix(self):
        rng = np.random.default_rng(7)
        rows = rng.standard_normal((5, 3)).astype(np.float32)
        return FeatureMatrix(dim=3, rows=rows, provenance="verb")

    def test_round_trip_bit_exact(self, tmp_path):
        path = tmp_path / "f.egft"
        original = self._matrix()
        fileio.save_features(path, original)
        loaded = fileio.load_features(path, provenance="verb")
        assert loaded == original

    def test_header_layout(self, tmp_path):
        path = tmp_path / "f.egft"
        fileio.save_features(path, self._matrix())
        blob = path.read_bytes()
        assert blob[:4] == b"EGFT"
        assert int.from_bytes(blob[4:8], "little") == 1
        assert int.from_bytes(blob[8:12], "little") == 3
        assert int.from_bytes(blob[12:20], "little") == 5
        assert len(blob) == 20 + 5 * 3 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "f.egft"
        fileio.save_features(path, self._matrix())
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(DataError, match="magic"):
            fileio.load_features(path)

    def test_truncated_body(self, tmp_path):
        path = tmp_path / "f.egft"
        fileio.save_features(path, self._matrix())
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(DataError, match="bytes"):
            fileio.load_features(path)

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "f.egft"
        fileio.save_features(path, self._matrix())
        blob = bytearray(path.read_bytes())
        blob[4:8] = (2).to_bytes(4, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(DataError, match="version"):
            fileio.load_features(path)

    def test_non_finite_payload_rejected(self, tmp_path):
        path = tmp_path / "f.egft"
        fileio.save_features(path, self._matrix())
        blob = bytearray(path.read_bytes())
        blob[20:24] = np.float32(np.nan).tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(DataError):
            fileio.load_features(path)


class TestHeadFiles:
    def test_regression_round_trip(self, tmp_path):
        head = new_head("regression_20", in_dim=6, seed=1)
        path = tmp_path / "h.eghd"
        fileio.save_head(path, head)
        assert fileio.load_head(path) == head

    def test_classifier_round_trip(self, tmp_path):
        head = new_head("classifier_C", in_dim=6, seed=1, z=2, c_v=3, c_n=4)
        path = tmp_path / "h.eghd"
        fileio.save_head(path, head)
        loaded = fileio.load_head(path)
        assert loaded == head
        assert (loaded.z, loaded.c_v, loaded.c_n) == (2, 3, 4)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "h.eghd"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(DataError, match="magic"):
            fileio.load_head(path)

    def test_truncated(self, tmp_path):
        head = new_head("regression_20", in_dim=6, seed=1)
        path = tmp_path / "h.eghd"
        fileio.save_head(path, head)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataError, match="bytes"):
            fileio.load_head(path)


class TestReportFiles:
    def test_round_trip(self, tmp_path):
        reports = [
            MetricReport(name="mAP", value=0.5, breakdown={"mAP@0.50": 0.5}, count=3, family="percent"),
            MetricReport(name="Action", value=0.84, count=10, family="edit"),
        ]
        path = tmp_path / "r.json"
        fileio.save_reports(path, reports)
        assert fileio.load_reports(path) == reports

    def test_wrong_schema(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"schema": "mq/1"}))
        with pytest.raises(DataError):
            fileio.load_reports(path)


def test_loads_do_not_warn_on_clean_files(dataset_dir):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fileio.load_mq_gt(dataset_dir / "gt_mq.json")
        fileio.load_nlq_gt(dataset_dir / "gt_nlq.json")
        fileio.load_fhp_gt(dataset_dir / "gt_fhp.json")
        fileio.load_lta_gt(dataset_dir / "gt_lta.json")
        fileio.load_sta_gt(dataset_dir / "gt_sta.json")
        fileio.load_scod_gt(dataset_dir / "gt_scod.json")
        pp = perfect_predictions(generate_synthetic(fileio.load_config(dataset_dir / "config.json")))
        assert set(pp["mq"]) == set(fileio.load_mq_pred(dataset_dir / "pred_mq.json"))
