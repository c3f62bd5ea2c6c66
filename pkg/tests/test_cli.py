import json

import numpy as np
import pytest

from hcoh import pack_bits, save_code_set, save_dense, save_labels
from hcoh.cli import main
from hcoh.codec import BinaryCodeSet, hamming, load_code_set
from tests.conftest import blob_dataset


@pytest.fixture(scope="module")
def dense_blobs(tmp_path_factory):
    root = tmp_path_factory.mktemp("blobs")
    ds = blob_dataset(n_classes=4, dim=8, per_class=150, seed=21)
    save_dense(root / "blobs.feat", ds.features)
    save_labels(root / "blobs.lab", ds.labels)
    return root


def train_args(root, out_dir, **overrides):
    args = {
        "--dataset": "dense",
        "--features": str(root / "blobs.feat"),
        "--labels": str(root / "blobs.lab"),
        "--bits": "16",
        "--eta": "0.2",
        "--seed": "5",
        "--max-labels": "4",
        "--test-per-class": "25",
        "--train-size": "400",
        "--k-prec": "50",
        "--milestones": "100,200,400",
        "--checkpoint": str(out_dir / "model.hcoh"),
        "--metrics": str(out_dir / "metrics.jsonl"),
    }
    args.update({k: str(v) for k, v in overrides.items()})
    flat = ["train"]
    for key, value in args.items():
        if value is not None:
            flat.extend([key, value])
    return flat


class TestTrain:
    def test_writes_checkpoint_and_milestone_records(self, dense_blobs, tmp_path):
        assert main(train_args(dense_blobs, tmp_path)) == 0
        lines = (tmp_path / "metrics.jsonl").read_text().splitlines()
        records = [json.loads(line) for line in lines]
        checkpoints = [r for r in records if r["record"] == "checkpoint"]
        assert [r["instances_seen"] for r in checkpoints] == [100, 200, 400]
        summary = records[-1]
        assert summary["record"] == "summary"
        assert 0.0 <= summary["auc"] <= 1.0
        assert (tmp_path / "model.hcoh").exists()

    def test_rerun_is_byte_identical(self, dense_blobs, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        assert main(train_args(dense_blobs, a)) == 0
        assert main(train_args(dense_blobs, b)) == 0
        assert (a / "metrics.jsonl").read_bytes() == (b / "metrics.jsonl").read_bytes()
        assert (a / "model.hcoh").read_bytes() == (b / "model.hcoh").read_bytes()

    def test_non_increasing_milestones_exit_config(self, dense_blobs, tmp_path):
        code = main(train_args(dense_blobs, tmp_path, **{"--milestones": "200,100"}))
        assert code == 2

    def test_bad_eta_exit_config(self, dense_blobs, tmp_path):
        assert main(train_args(dense_blobs, tmp_path, **{"--eta": "-0.1"})) == 2

    def test_infinite_eta_exit_numeric(self, dense_blobs, tmp_path):
        assert main(train_args(dense_blobs, tmp_path, **{"--eta": "1e309"})) == 4

    def test_codebook_exhaustion_exit_config(self, dense_blobs, tmp_path):
        code = main(train_args(dense_blobs, tmp_path,
                               **{"--bits": "2", "--max-labels": "2"}))
        assert code == 2

    def test_missing_feature_file_exit_data(self, dense_blobs, tmp_path):
        code = main(train_args(dense_blobs, tmp_path,
                               **{"--features": str(tmp_path / "nope.feat")}))
        assert code == 3


class TestEncode:
    @pytest.fixture()
    def checkpoint(self, dense_blobs, tmp_path):
        main(train_args(dense_blobs, tmp_path))
        return tmp_path / "model.hcoh"

    def test_encode_round_trip_and_self_distance(self, dense_blobs, tmp_path, checkpoint):
        out = tmp_path / "codes.hcode"
        assert main(["encode", "--checkpoint", str(checkpoint),
                     "--features", str(dense_blobs / "blobs.feat"),
                     "--labels", str(dense_blobs / "blobs.lab"),
                     "--out", str(out)]) == 0
        codes = load_code_set(out)
        assert len(codes) == 600
        for i in (0, 17, 599):
            assert hamming(codes.code(i), codes.code(i)) == 0

    def test_reencode_is_byte_identical(self, dense_blobs, tmp_path, checkpoint):
        a, b = tmp_path / "a.hcode", tmp_path / "b.hcode"
        for out in (a, b):
            main(["encode", "--checkpoint", str(checkpoint),
                  "--features", str(dense_blobs / "blobs.feat"),
                  "--labels", str(dense_blobs / "blobs.lab"),
                  "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_corrupt_checkpoint_exit_data(self, dense_blobs, tmp_path, checkpoint):
        bad = tmp_path / "bad.hcoh"
        bad.write_bytes(b"ZZZZ" + checkpoint.read_bytes()[4:])
        code = main(["encode", "--checkpoint", str(bad),
                     "--features", str(dense_blobs / "blobs.feat"),
                     "--labels", str(dense_blobs / "blobs.lab"),
                     "--out", str(tmp_path / "x.hcode")])
        assert code == 3

    def test_dimension_mismatch_names_both_dims(self, tmp_path, checkpoint, capsys):
        save_dense(tmp_path / "wide.feat", np.ones((4, 11), dtype=np.float32))
        save_labels(tmp_path / "wide.lab", [0, 1, 2, 3])
        code = main(["encode", "--checkpoint", str(checkpoint),
                     "--features", str(tmp_path / "wide.feat"),
                     "--labels", str(tmp_path / "wide.lab"),
                     "--out", str(tmp_path / "x.hcode")])
        assert code == 3
        err = capsys.readouterr().err
        assert "11" in err and "8" in err


class TestEvaluate:
    @pytest.fixture()
    def toy_codes(self, tmp_path):
        db_bits = [[0, 0, 0, 0], [1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 1, 0]]
        database = BinaryCodeSet(pack_bits(db_bits), [0, 1, 0, 1], 4)
        queries = BinaryCodeSet(pack_bits([[0, 0, 0, 0]]), [0], 4)
        q, db = tmp_path / "q.hcode", tmp_path / "db.hcode"
        save_code_set(q, queries)
        save_code_set(db, database)
        return q, db

    def test_reproduces_alternating_ap_case(self, toy_codes, capsys):
        q, db = toy_codes
        assert main(["evaluate", "--queries", str(q), "--database", str(db),
                     "--k-prec", "4"]) == 0
        record = json.loads(capsys.readouterr().out.splitlines()[0])
        assert record["map"] == pytest.approx(5 / 6, abs=1e-12)
        assert record["precision_at_k"] == pytest.approx(0.5)

    def test_optional_map_cutoff_reported(self, toy_codes, capsys):
        q, db = toy_codes
        assert main(["evaluate", "--queries", str(q), "--database", str(db),
                     "--k-prec", "2", "--k-map", "2"]) == 0
        record = json.loads(capsys.readouterr().out.splitlines()[0])
        assert record["k_map"] == 2
        # relevant at ranks 1 and 3, two relevant total: AP@2 = (1/1) / 2
        assert record["map_at_k"] == pytest.approx(0.5)

    def test_oversized_k_prec_exit_data(self, toy_codes):
        q, db = toy_codes
        assert main(["evaluate", "--queries", str(q), "--database", str(db),
                     "--k-prec", "500"]) == 3

    def test_mismatched_lengths_exit_data(self, toy_codes, tmp_path):
        q, db = toy_codes
        other = BinaryCodeSet(pack_bits([[0, 0]]), [0], 2)
        save_code_set(tmp_path / "o.hcode", other)
        assert main(["evaluate", "--queries", str(tmp_path / "o.hcode"),
                     "--database", str(db), "--k-prec", "2"]) == 3


class TestBenchmarkAndCurve:
    def test_benchmark_table_and_aggregate_records(self, dense_blobs, tmp_path, capsys):
        metrics = tmp_path / "bench.jsonl"
        code = main(["benchmark", "--dataset", "dense",
                     "--features", str(dense_blobs / "blobs.feat"),
                     "--labels", str(dense_blobs / "blobs.lab"),
                     "--bits-list", "8,16", "--repeats", "2",
                     "--max-labels", "4", "--test-per-class", "10",
                     "--train-size", "200", "--k-prec", "20",
                     "--seed", "3", "--metrics", str(metrics)])
        assert code == 0
        table = capsys.readouterr().out
        assert "8-bit" in table and "16-bit" in table and "mAP" in table
        records = [json.loads(line) for line in metrics.read_text().splitlines()]
        aggregates = [r for r in records if r["record"] == "aggregate"]
        assert [a["bits"] for a in aggregates] == [8, 16]
        assert all(len(a["map_per_repeat"]) == 2 for a in aggregates)

    def test_curve_csv_extraction(self, dense_blobs, tmp_path):
        main(train_args(dense_blobs, tmp_path))
        out = tmp_path / "curve.csv"
        assert main(["curve", "--metrics", str(tmp_path / "metrics.jsonl"),
                     "--out", str(out)]) == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "instances_seen,map"
        assert len(rows) == 4
        assert [int(r.split(",")[0]) for r in rows[1:]] == [100, 200, 400]
