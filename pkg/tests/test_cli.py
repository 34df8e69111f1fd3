"""End-to-end command-line flows: synth, train, translate, evaluate."""

import json

import numpy as np
import pytest

from vibecycle.cli import (
    DEVICE_ENV_VAR,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    main,
)
from vibecycle.signal_data import (
    DomainLabel,
    Provenance,
    load_record_with_meta,
    read_meta,
)

REDUCED_SPECS = {
    "generator_spec": {
        "input_length": 1024, "channel_plan": [2, 3], "kernel_size": 3, "stride": 1,
    },
    "critic_spec": {
        "input_length": 1024, "channel_plan": [2, 3], "kernel_size": 3, "stride": 2,
    },
}


@pytest.fixture(scope="module")
def tones_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("tones")
    code = main([
        "synth", "--kind", "tones", "--duration-s", "4", "--seed", "5",
        "--out", str(out),
    ])
    assert code == EXIT_OK
    return out


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory, tones_dir):
    out = tmp_path_factory.mktemp("trained")
    config = tmp_path_factory.mktemp("config") / "train.json"
    config.write_text(json.dumps(REDUCED_SPECS))
    code = main([
        "train",
        "--config", str(config),
        "--data-u", str(tones_dir / "undamaged.f64"),
        "--data-d", str(tones_dir / "damaged.f64"),
        "--epochs", "1", "--batch-size", "2", "--critic-iterations", "1",
        "--allow-reduced", "--seed", "3",
        "--out", str(out),
    ])
    assert code == EXIT_OK
    return out


@pytest.fixture(scope="module")
def translated_dir(tmp_path_factory, tones_dir, trained_dir):
    out = tmp_path_factory.mktemp("translated")
    code = main([
        "translate",
        "--checkpoint", str(trained_dir / "checkpoint.ckpt"),
        "--input", str(tones_dir / "undamaged.f64"),
        "--direction", "u2d",
        "--out", str(out),
    ])
    assert code == EXIT_OK
    return out


class TestSynth:
    def test_tones_outputs(self, tones_dir):
        record_u = load_record_with_meta(tones_dir / "undamaged.f64")
        record_d = load_record_with_meta(tones_dir / "damaged.f64")
        assert record_u.domain is DomainLabel.UNDAMAGED
        assert record_d.domain is DomainLabel.DAMAGED
        assert record_u.n_samples == 4096
        manifest = json.loads((tones_dir / "manifest.json").read_text())
        assert manifest["kind"] == "tones"
        assert manifest["n_samples"] == 4096
        assert (tones_dir / "effective_config.json").exists()

    def test_same_seed_reproduces_bytes(self, tones_dir, tmp_path):
        code = main([
            "synth", "--kind", "tones", "--duration-s", "4", "--seed", "5",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert (tmp_path / "undamaged.f64").read_bytes() == (
            tones_dir / "undamaged.f64"
        ).read_bytes()

    def test_modal_outputs_natural_frequencies(self, tmp_path):
        code = main([
            "synth", "--kind", "modal", "--duration-s", "2", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        meta_u = read_meta(tmp_path / "undamaged.f64")
        meta_d = read_meta(tmp_path / "damaged.f64")
        freqs_u = meta_u["extras"]["natural_freqs_hz"]
        freqs_d = meta_d["extras"]["natural_freqs_hz"]
        assert len(freqs_u) == 3
        assert all(d < u for d, u in zip(freqs_d, freqs_u))

    def test_missing_out_is_config_error(self):
        assert main(["synth", "--kind", "tones"]) == EXIT_CONFIG

    def test_invalid_damage_factor_is_config_error(self, tmp_path):
        code = main([
            "synth", "--kind", "modal", "--damage-factor", "1.5",
            "--duration-s", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_CONFIG


class TestTrain:
    def test_artifacts(self, trained_dir):
        assert (trained_dir / "checkpoint.ckpt").exists()
        log_lines = (trained_dir / "monitor.log").read_text().splitlines()
        assert len(log_lines) == 1
        assert log_lines[0].startswith("epoch=1 ")
        assert (trained_dir / "monitor_timings.log").exists()
        for plot in ("critic_loss.png", "generator_loss.png", "fid.png", "xcross.png"):
            assert (trained_dir / plot).exists()
        effective = json.loads((trained_dir / "effective_config.json").read_text())
        assert effective["epochs"] == 1
        assert effective["allow_reduced"] is True

    def test_epoch_lines_reach_stdout(self, trained_dir, capsys, tones_dir, tmp_path):
        code = main([
            "train",
            "--data-u", str(tones_dir / "undamaged.f64"),
            "--data-d", str(tones_dir / "damaged.f64"),
            "--epochs", "1", "--batch-size", "4", "--critic-iterations", "1",
            "--allow-reduced", "--seed", "3", "--out", str(tmp_path),
            "--config", str(_write_config(tmp_path, REDUCED_SPECS)),
        ])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "epoch=1 " in out
        assert "total_critic_loss=" in out

    def test_full_depth_enforced_without_allow_reduced(self, tones_dir, tmp_path):
        code = main([
            "train",
            "--data-u", str(tones_dir / "undamaged.f64"),
            "--data-d", str(tones_dir / "damaged.f64"),
            "--epochs", "1", "--out", str(tmp_path),
            "--config", str(_write_config(tmp_path, REDUCED_SPECS)),
        ])
        assert code == EXIT_CONFIG

    def test_missing_dataset_is_data_error(self, tmp_path):
        code = main([
            "train",
            "--data-u", str(tmp_path / "absent.f64"),
            "--data-d", str(tmp_path / "absent2.f64"),
            "--epochs", "1", "--allow-reduced", "--out", str(tmp_path),
        ])
        assert code == EXIT_DATA

    def test_max_epochs_caps_epochs(self, tones_dir, tmp_path, capsys):
        code = main([
            "train",
            "--data-u", str(tones_dir / "undamaged.f64"),
            "--data-d", str(tones_dir / "damaged.f64"),
            "--epochs", "5", "--max-epochs", "1",
            "--batch-size", "4", "--critic-iterations", "1",
            "--allow-reduced", "--seed", "3", "--out", str(tmp_path),
            "--config", str(_write_config(tmp_path, REDUCED_SPECS)),
        ])
        assert code == EXIT_OK
        effective = json.loads((tmp_path / "effective_config.json").read_text())
        assert effective["max_epochs"] == 1
        lines = (tmp_path / "monitor.log").read_text().splitlines()
        assert len(lines) == 1


class TestTranslate:
    def test_translated_record(self, translated_dir, tones_dir):
        fake = load_record_with_meta(translated_dir / "translated.f64")
        source = load_record_with_meta(tones_dir / "undamaged.f64")
        assert fake.domain is DomainLabel.DAMAGED
        assert fake.provenance is Provenance.FAKE
        assert fake.n_samples == source.n_samples
        extras = read_meta(translated_dir / "translated.f64")["extras"]
        assert extras["direction"] == "u2d"
        assert extras["cycle_l1"] >= 0.0

    def test_sidecar_domain_conflict_is_data_error(self, trained_dir, tones_dir, tmp_path):
        code = main([
            "translate",
            "--checkpoint", str(trained_dir / "checkpoint.ckpt"),
            "--input", str(tones_dir / "damaged.f64"),
            "--direction", "u2d",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_DATA

    def test_garbage_checkpoint_is_data_error(self, tones_dir, tmp_path):
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"not a checkpoint at all")
        code = main([
            "translate", "--checkpoint", str(bad),
            "--input", str(tones_dir / "undamaged.f64"),
            "--direction", "u2d", "--out", str(tmp_path),
        ])
        assert code == EXIT_DATA


class TestEvaluate:
    def test_reports_and_spectra(self, tones_dir, translated_dir, tmp_path, capsys):
        code = main([
            "evaluate",
            "--real", str(tones_dir / "damaged.f64"),
            "--fake", str(translated_dir / "translated.f64"),
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        text = (tmp_path / "metrics.txt").read_text()
        for indicator in ("fid", "ls", "xcross_peak_raw", "xcross_peak_normalized"):
            assert indicator in text
        assert "fid" in capsys.readouterr().out
        real_spec = np.loadtxt(tmp_path / "spectrum_real.txt")
        fake_spec = np.loadtxt(tmp_path / "spectrum_fake.txt")
        assert real_spec.shape == fake_spec.shape
        assert (tmp_path / "spectra_overlay.png").exists()

    def test_multivariate_mode(self, tones_dir, translated_dir, tmp_path):
        code = main([
            "evaluate",
            "--real", str(tones_dir / "damaged.f64"),
            "--fake", str(translated_dir / "translated.f64"),
            "--fid-mode", "multivariate",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK


class TestConfigHandling:
    def test_flags_override_config_file(self, tmp_path):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"duration_s": 2.0, "kind": "tones"}))
        out = tmp_path / "out"
        code = main([
            "synth", "--config", str(config), "--duration-s", "1",
            "--out", str(out),
        ])
        assert code == EXIT_OK
        effective = json.loads((out / "effective_config.json").read_text())
        assert effective["duration_s"] == 1.0
        assert effective["kind"] == "tones"

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"banana": 1}))
        code = main(["synth", "--config", str(config), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_invalid_json_rejected(self, tmp_path):
        config = tmp_path / "c.json"
        config.write_text("{nope")
        code = main(["synth", "--config", str(config), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_missing_config_file_rejected(self, tmp_path):
        code = main([
            "synth", "--config", str(tmp_path / "ghost.json"), "--out", str(tmp_path),
        ])
        assert code == EXIT_CONFIG

    def test_unavailable_cuda_device_rejected(self, tmp_path, monkeypatch):
        import torch

        if torch.cuda.is_available():
            pytest.skip("CUDA present; the guard cannot trip")
        monkeypatch.setenv(DEVICE_ENV_VAR, "cuda")
        code = main([
            "synth", "--kind", "tones", "--duration-s", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_CONFIG


def _write_config(directory, payload):
    path = directory / "specs.json"
    path.write_text(json.dumps(payload))
    return path
