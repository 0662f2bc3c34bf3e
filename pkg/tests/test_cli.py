"""CLI end-to-end tests through dispatch(): exit codes, files, formats.

A small training profile (8-dim blobs, 4 classes, 2 epochs) keeps each
command fast while leaving fc2 large enough for the 15-neuron header.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import make_layer_model
from nnstego import container
from nnstego.cli import dispatch

SMALL_DATA = [
    "--train-size", "200", "--test-size", "80", "--dim", "8", "--classes", "4",
]
SMALL_TRAIN = SMALL_DATA + ["--epochs", "2", "--arch", "8,20,16,4"]


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "model.st"
    assert dispatch(["train", "--out", str(path)] + SMALL_TRAIN) == 0
    return path


@pytest.fixture()
def payload_file(tmp_path):
    path = tmp_path / "payload.bin"
    path.write_bytes(np.random.default_rng(0).bytes(120))
    return path


class TestRoundTrips:
    def test_embed_extract(self, tmp_path, trained, payload_file, capsys):
        stego = tmp_path / "stego.st"
        recovered = tmp_path / "recovered.bin"
        before = trained.read_bytes()
        assert dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                         "--payload", str(payload_file), "--out", str(stego)]) == 0
        assert trained.read_bytes() == before  # input untouched
        assert dispatch(["extract", "--model", str(stego), "--layer", "fc2",
                         "--out", str(recovered)]) == 0
        assert recovered.read_bytes() == payload_file.read_bytes()
        out = capsys.readouterr().out
        assert "embedded 120 bytes" in out and "extracted 120 bytes" in out

    def test_lsb_embed_extract(self, tmp_path, trained, payload_file):
        stego = tmp_path / "stego.st"
        recovered = tmp_path / "recovered.bin"
        assert dispatch(["lsb-embed", "--model", str(trained), "--layer", "fc2",
                         "--payload", str(payload_file), "--bits", "8",
                         "--out", str(stego)]) == 0
        assert dispatch(["lsb-extract", "--model", str(stego), "--layer", "fc2",
                         "--bits", "8", "--out", str(recovered)]) == 0
        assert recovered.read_bytes() == payload_file.read_bytes()

    def test_band_and_sign_flags(self, tmp_path, trained, payload_file):
        stego = tmp_path / "stego.st"
        assert dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                         "--payload", str(payload_file), "--out", str(stego),
                         "--band", "small", "--sign", "positive"]) == 0
        model = container.load(stego)
        written = model.tensor("fc2.weight").reshape(-1)[:40]
        assert (written > 0).all()
        assert (written < 2.0**-13).all()

    def test_train_seed_reproducible(self, tmp_path):
        a, b = tmp_path / "a.st", tmp_path / "b.st"
        args = SMALL_TRAIN + ["--seed", "3"]
        assert dispatch(["train", "--out", str(a)] + args) == 0
        assert dispatch(["train", "--out", str(b)] + args) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_usage_error_is_2(self):
        assert dispatch([]) == 2
        assert dispatch(["no-such-command"]) == 2
        assert dispatch(["train"]) == 2  # missing --out

    def test_clean_extract_is_5_with_message(self, tmp_path, trained, capsys):
        out = tmp_path / "x.bin"
        code = dispatch(["extract", "--model", str(trained), "--layer", "fc2",
                         "--out", str(out)])
        assert code == 5
        assert "no stego header" in capsys.readouterr().err
        assert not out.exists()

    def test_malformed_container_is_3(self, tmp_path):
        bad = tmp_path / "bad.st"
        bad.write_bytes(b"\x99" * 64)
        assert dispatch(["info", "--model", str(bad)]) == 3

    def test_missing_file_is_1(self, tmp_path):
        assert dispatch(["info", "--model", str(tmp_path / "absent.st")]) == 1

    def test_capacity_error_is_4(self, tmp_path, trained):
        huge = tmp_path / "huge.bin"
        huge.write_bytes(bytes(3 * 16 * 20 + 1))  # one byte over fc2 capacity
        assert dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                         "--payload", str(huge), "--out", str(tmp_path / "o.st")]) == 4

    def test_sanitized_extract_is_5(self, tmp_path, trained, payload_file):
        stego = tmp_path / "stego.st"
        scrubbed = tmp_path / "scrubbed.st"
        dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                  "--payload", str(payload_file), "--out", str(stego)])
        assert dispatch(["sanitize", "--model", str(stego), "--bits", "8",
                         "--out", str(scrubbed)]) == 0
        assert dispatch(["extract", "--model", str(scrubbed), "--layer", "fc2",
                         "--out", str(tmp_path / "x.bin")]) == 5

    def test_invalid_value_is_2(self, tmp_path, trained):
        assert dispatch(["detect", "--model", str(trained), "--threshold", "7"]) == 2


class TestReports:
    def test_info_text_and_records(self, trained, capsys):
        assert dispatch(["info", "--model", str(trained)]) == 0
        text = capsys.readouterr().out
        assert "fc2.weight" in text and "meta arch = mlp" in text

        assert dispatch(["info", "--model", str(trained), "--format", "records"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        records = [json.loads(line) for line in lines]
        names = {r["name"] for r in records if "name" in r}
        assert {"fc1.weight", "fc2.bias", "fc3.weight"} <= names

    def test_capacity_wide_fan_in(self, tmp_path, capsys):
        # fan-in 4096 layer reports 12 KiB per neuron
        path = tmp_path / "wide.st"
        container.save(make_layer_model(16, 4096, seed=0), path)
        assert dispatch(["capacity", "--model", str(path), "--layer", "fc1",
                         "--payload-size", "24576"]) == 0
        text = capsys.readouterr().out
        assert "per_neuron_bytes = 12288" in text
        assert "neurons_required = 2" in text

    def test_capacity_records(self, tmp_path, capsys):
        path = tmp_path / "wide.st"
        container.save(make_layer_model(16, 4096, seed=0), path)
        assert dispatch(["capacity", "--model", str(path), "--layer", "fc1",
                         "--format", "records"]) == 0
        rec = json.loads(capsys.readouterr().out.strip())
        assert rec["per_neuron_bytes"] == 12288
        assert rec["payload_capacity_bytes"] == 3 * 16 * 4096
        assert rec["header_neurons"] == 15

    def test_stats_selected_tensor(self, trained, capsys):
        assert dispatch(["stats", "--model", str(trained), "--tensor", "fc2.weight",
                         "--format", "records"]) == 0
        rec = json.loads(capsys.readouterr().out.strip())
        assert rec["tensor"] == "fc2.weight"
        assert rec["count"] == 16 * 20
        assert rec["negatives"] + rec["positives"] + rec["zeros"] == rec["count"]
        assert len(rec["leading_byte_histogram"]) == 256

    def test_detect_verdict_changes_after_embedding(self, tmp_path, trained, capsys):
        # 600 bytes pin 200 of the 320 fc2 weight words, far past the threshold
        big = tmp_path / "big.bin"
        big.write_bytes(np.random.default_rng(1).bytes(600))
        stego = tmp_path / "stego.st"
        dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                  "--payload", str(big), "--out", str(stego)])
        capsys.readouterr()

        assert dispatch(["detect", "--model", str(trained), "--window", "64"]) == 0
        assert "no fast-substitution signature" in capsys.readouterr().out
        assert dispatch(["detect", "--model", str(stego), "--window", "64"]) == 0
        assert "EMBEDDED PAYLOAD LIKELY" in capsys.readouterr().out

    def test_detect_records_verdict(self, tmp_path, trained, capsys):
        big = tmp_path / "big.bin"
        big.write_bytes(np.random.default_rng(1).bytes(600))
        stego = tmp_path / "stego.st"
        dispatch(["embed", "--model", str(trained), "--layer", "fc2",
                  "--payload", str(big), "--out", str(stego)])
        capsys.readouterr()
        assert dispatch(["detect", "--model", str(stego), "--window", "64",
                         "--format", "records"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        verdict = json.loads(lines[-1])
        assert verdict["flagged"] is True
        assert "fc2.weight" in verdict["flagged_tensors"]

    def test_eval_prints_accuracy(self, trained, capsys):
        assert dispatch(["eval", "--model", str(trained)] + SMALL_DATA) == 0
        out = capsys.readouterr().out
        assert out.startswith("accuracy = ")
        assert 0.0 <= float(out.split("=")[1]) <= 1.0

    def test_sweep_csv_output(self, tmp_path, trained, capsys):
        out = tmp_path / "curve.csv"
        assert dispatch(["sweep", "--model", str(trained), "--layer", "fc2",
                         "--fractions", "0,0.5", "--out", str(out)] + SMALL_DATA) == 0
        lines = out.read_bytes().decode().splitlines()
        assert lines[0] == "fraction,acc_before,acc_after,digest_ok"
        assert len(lines) == 3
        assert lines[2].endswith(",true")

    def test_sweep_stdout_records(self, trained, capsys):
        assert dispatch(["sweep", "--model", str(trained), "--layer", "fc2",
                         "--fractions", "0.5", "--retrain", "--epochs", "1"]
                        + SMALL_DATA) == 0
        out = capsys.readouterr().out
        assert out.startswith("fraction,acc_before,acc_after,digest_ok")
        row = out.strip().splitlines()[1].split(",")
        assert row[0] == "0.5"
        assert row[2] != ""  # retrained accuracy present
