"""Command-line surface: dataset synthesis, training, translation, evaluation.

Each command reads an optional JSON config file whose keys mirror the flag
names; flags override the file, and the merged effective config is echoed
into the output directory so any run can be reproduced from its artifacts
alone. Exit codes: 0 success, 2 configuration error, 3 data error, 4
numerical abort during training.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np
import torch

from .errors import ConfigError, DataError, TrainingDiverged
from .losses import GP_MODES, LossWeights
from .metrics import evaluate_pair, export_spectrum
from .networks import CriticSpec, GeneratorSpec
from .reporting import (
    plot_spectrum_overlay,
    plot_training_curves,
    write_metric_report,
)
from .signal_data import (
    DomainLabel,
    Provenance,
    load_record,
    load_record_with_meta,
    meta_path_for,
    write_record,
)
from .synthetic_structure import (
    ToyDomainSpec,
    build_modal_model,
    generate_toy_record,
    simulate_response,
)
from .training import (
    Hyperparams,
    checkpoint_load,
    format_epoch_record,
    model_from_checkpoint,
    train,
    translate,
    write_monitor_log,
    write_timings,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEVICE_ENV_VAR = "VIBECYCLE_DEVICE"


def resolve_device() -> torch.device:
    """Compute device from the environment, defaulting to the CPU."""
    name = os.environ.get(DEVICE_ENV_VAR, "cpu")
    try:
        device = torch.device(name)
    except RuntimeError as exc:
        raise ConfigError(f"{DEVICE_ENV_VAR}={name!r} is not a valid device: {exc}")
    if device.type == "cuda" and not torch.cuda.is_available():
        raise ConfigError(f"{DEVICE_ENV_VAR}={name!r} requests CUDA, which is unavailable")
    return device


def _load_config_file(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"config file not found: {file}")
    try:
        loaded = json.loads(file.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {file} is not valid JSON: {exc}")
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {file} must hold a JSON object")
    return loaded


def _effective(args: argparse.Namespace, keys: dict[str, Any]) -> dict[str, Any]:
    """Merge CLI flags over the config file over defaults, for the given keys."""
    config = _load_config_file(args.config)
    unknown = set(config) - set(keys)
    if unknown:
        raise ConfigError(
            f"unknown config keys: {', '.join(sorted(unknown))}"
        )
    merged = {}
    for key, default in keys.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = default
    return merged


def _require(cfg: dict[str, Any], *keys: str) -> None:
    for key in keys:
        if cfg[key] is None:
            raise ConfigError(f"missing required setting: {key}")


def _out_dir(cfg: dict[str, Any]) -> Path:
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}")
    return out


def _echo_config(out: Path, cfg: dict[str, Any]) -> None:
    (out / "effective_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True) + "\n"
    )


def _load_labelled_record(
    path: str, expected_domain: DomainLabel | None, provenance: Provenance
) -> Any:
    """Load a record, trusting its sidecar when present.

    Without a sidecar the expected domain is assumed; with one, a domain
    that contradicts the expectation is an error rather than silently
    relabelled.
    """
    record_path = Path(path)
    if meta_path_for(record_path).exists():
        record = load_record_with_meta(record_path)
        if expected_domain is not None and record.domain != expected_domain:
            raise DataError(
                f"direction/domain mismatch: {record_path} is labelled "
                f"{record.domain.name.lower()}, expected {expected_domain.name.lower()}"
            )
        return record
    return load_record(
        record_path,
        joint_id=1,
        domain=expected_domain if expected_domain is not None else DomainLabel.UNDAMAGED,
        provenance=provenance,
    )


# ---------------------------------------------------------------- synth ----

_SYNTH_KEYS: dict[str, Any] = {
    "out": None,
    "seed": 0,
    "kind": "modal",
    "duration_s": 256.0,
    "sample_rate_hz": 1024.0,
    "joint_id": 1,
    "n_dof": 3,
    "base_freq_hz": 20.0,
    "damping_ratio": 0.02,
    "damage_dof": 2,
    "damage_factor": 0.6,
    "measured_dof": None,
    "force_dof": 1,
    "freq_u": 5.0,
    "freq_d": 12.0,
    "amplitude": 1.0,
    "noise_std": 0.1,
}


def cmd_synth(args: argparse.Namespace, device: torch.device) -> int:
    cfg = _effective(args, _SYNTH_KEYS)
    _require(cfg, "out")
    out = _out_dir(cfg)
    seed_u, seed_d = (
        int(c.generate_state(1)[0]) for c in np.random.SeedSequence(cfg["seed"]).spawn(2)
    )
    if cfg["kind"] == "modal":
        n_dof = cfg["n_dof"]
        k = (2.0 * np.pi * cfg["base_freq_hz"]) ** 2
        measured = cfg["measured_dof"] if cfg["measured_dof"] is not None else n_dof
        undamaged_model = build_modal_model(
            n_dof, (1.0,) * n_dof, (k,) * n_dof, cfg["damping_ratio"]
        )
        damaged_model = build_modal_model(
            n_dof, (1.0,) * n_dof, (k,) * n_dof, cfg["damping_ratio"],
            damage_dof=cfg["damage_dof"], damage_factor=cfg["damage_factor"],
        )
        record_u = simulate_response(
            undamaged_model, measured, cfg["duration_s"], cfg["sample_rate_hz"],
            excitation_seed=seed_u, force_dof=cfg["force_dof"],
            joint_id=cfg["joint_id"],
        )
        record_d = simulate_response(
            damaged_model, measured, cfg["duration_s"], cfg["sample_rate_hz"],
            excitation_seed=seed_d, force_dof=cfg["force_dof"],
            joint_id=cfg["joint_id"],
        )
        extras_u = {"natural_freqs_hz": [float(f) for f in undamaged_model.natural_freqs_hz]}
        extras_d = {"natural_freqs_hz": [float(f) for f in damaged_model.natural_freqs_hz]}
    elif cfg["kind"] == "tones":
        spec_u = ToyDomainSpec(
            cfg["freq_u"], cfg["amplitude"], cfg["noise_std"],
            cfg["sample_rate_hz"], seed=seed_u,
        )
        spec_d = ToyDomainSpec(
            cfg["freq_d"], cfg["amplitude"], cfg["noise_std"],
            cfg["sample_rate_hz"], seed=seed_d,
        )
        record_u = generate_toy_record(
            spec_u, cfg["duration_s"], cfg["joint_id"], DomainLabel.UNDAMAGED
        )
        record_d = generate_toy_record(
            spec_d, cfg["duration_s"], cfg["joint_id"], DomainLabel.DAMAGED
        )
        extras_u = {"carrier_freq_hz": cfg["freq_u"]}
        extras_d = {"carrier_freq_hz": cfg["freq_d"]}
    else:
        raise ConfigError(f"kind must be 'modal' or 'tones', got {cfg['kind']!r}")

    path_u = write_record(record_u, out / "undamaged.f64", extras=extras_u)
    path_d = write_record(record_d, out / "damaged.f64", extras=extras_d)
    manifest = {
        "kind": cfg["kind"],
        "undamaged": path_u.name,
        "damaged": path_d.name,
        "n_samples": record_u.n_samples,
        "sample_rate_hz": record_u.sample_rate_hz,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    _echo_config(out, cfg)
    print(f"wrote {path_u} and {path_d} ({record_u.n_samples} samples each)")
    return EXIT_OK


# ---------------------------------------------------------------- train ----

_TRAIN_KEYS: dict[str, Any] = {
    "data_u": None,
    "data_d": None,
    "out": None,
    "seed": 0,
    "epochs": 1000,
    "max_epochs": None,
    "batch_size": 1,
    "critic_iterations": 20,
    "lr_generators": 1e-4,
    "lr_critics": 2e-4,
    "weight_decay": 1e-2,
    "monitor_interval": 1,
    "checkpoint_interval": 0,
    "gp_at": "interpolate",
    "lambda_gp": 10.0,
    "lambda_cyc": 10.0,
    "lambda_id": 10.0,
    "allow_reduced": False,
    "generator_spec": None,
    "critic_spec": None,
    "checkpoint": None,
}


def _spec_from_dict(cls, raw: dict | None):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"{cls.__name__} config must be an object, got {type(raw).__name__}")
    normalized = dict(raw)
    if "channel_plan" in normalized:
        normalized["channel_plan"] = tuple(normalized["channel_plan"])
    try:
        return cls(**normalized)
    except TypeError as exc:
        raise ConfigError(f"invalid {cls.__name__} config: {exc}")


def cmd_train(args: argparse.Namespace, device: torch.device) -> int:
    cfg = _effective(args, _TRAIN_KEYS)
    _require(cfg, "data_u", "data_d", "out")
    out = _out_dir(cfg)
    epochs = cfg["epochs"]
    if cfg["max_epochs"] is not None:
        epochs = min(epochs, cfg["max_epochs"])
    weights = LossWeights(
        lambda_gp=cfg["lambda_gp"], lambda_cyc=cfg["lambda_cyc"],
        lambda_id=cfg["lambda_id"], gp_at=cfg["gp_at"],
    )
    hp = Hyperparams(
        batch_size=cfg["batch_size"], epochs=epochs,
        lr_generators=cfg["lr_generators"], lr_critics=cfg["lr_critics"],
        critic_iterations=cfg["critic_iterations"], weights=weights,
        weight_decay=cfg["weight_decay"], seed=cfg["seed"],
        monitor_interval=cfg["monitor_interval"],
    )
    dataset_u = _load_labelled_record(cfg["data_u"], DomainLabel.UNDAMAGED, Provenance.REAL)
    dataset_d = _load_labelled_record(cfg["data_d"], DomainLabel.DAMAGED, Provenance.REAL)
    resume = checkpoint_load(cfg["checkpoint"]) if cfg["checkpoint"] else None

    result = train(
        dataset_u,
        dataset_d,
        generator_spec=_spec_from_dict(GeneratorSpec, cfg["generator_spec"]),
        critic_spec=_spec_from_dict(CriticSpec, cfg["critic_spec"]),
        hp=hp,
        callbacks=[lambda record: print(format_epoch_record(record), flush=True)],
        enforce_layer_count=not cfg["allow_reduced"],
        resume_from=resume,
        checkpoint_dir=out,
        checkpoint_interval=cfg["checkpoint_interval"],
        device=device,
    )
    write_monitor_log(out / "monitor.log", result.history)
    write_timings(out / "monitor_timings.log", result.history)
    plot_training_curves(result.history, out)
    _echo_config(out, cfg)
    print(f"trained {len(result.history)} epochs; checkpoint at {out / 'checkpoint.ckpt'}")
    return EXIT_OK


# ------------------------------------------------------------ translate ----

_TRANSLATE_KEYS: dict[str, Any] = {
    "checkpoint": None,
    "input": None,
    "direction": None,
    "out": None,
}

_SOURCE_DOMAIN = {"u2d": DomainLabel.UNDAMAGED, "d2u": DomainLabel.DAMAGED}


def cmd_translate(args: argparse.Namespace, device: torch.device) -> int:
    cfg = _effective(args, _TRANSLATE_KEYS)
    _require(cfg, "checkpoint", "input", "direction", "out")
    direction = cfg["direction"]
    if direction not in _SOURCE_DOMAIN:
        raise ConfigError(f"direction must be 'u2d' or 'd2u', got {direction!r}")
    out = _out_dir(cfg)
    model = model_from_checkpoint(checkpoint_load(cfg["checkpoint"]))
    for module in model.modules():
        module.to(device)
    record = _load_labelled_record(
        cfg["input"], _SOURCE_DOMAIN[direction], Provenance.REAL
    )
    fake = translate(model, record, direction)
    reverse = "d2u" if direction == "u2d" else "u2d"
    round_trip = translate(model, fake, reverse)
    cycle_l1 = float(np.mean(np.abs(round_trip.samples - record.samples)))
    path = write_record(
        fake,
        out / "translated.f64",
        extras={"direction": direction, "cycle_l1": cycle_l1, "source": str(cfg["input"])},
    )
    _echo_config(out, cfg)
    print(f"wrote {path} (cycle_l1={cycle_l1!r})")
    return EXIT_OK


# ------------------------------------------------------------- evaluate ----

_EVALUATE_KEYS: dict[str, Any] = {
    "real": None,
    "fake": None,
    "out": None,
    "fid_mode": "univariate",
}


def cmd_evaluate(args: argparse.Namespace, device: torch.device) -> int:
    cfg = _effective(args, _EVALUATE_KEYS)
    _require(cfg, "real", "fake", "out")
    out = _out_dir(cfg)
    real = _load_labelled_record(cfg["real"], None, Provenance.REAL)
    fake = _load_labelled_record(cfg["fake"], None, Provenance.FAKE)
    report = evaluate_pair(real, fake, fid_mode=cfg["fid_mode"])
    pair = f"{Path(cfg['real']).stem}_vs_{Path(cfg['fake']).stem}"
    write_metric_report(out / "metrics.txt", report, pair)
    export_spectrum(out / "spectrum_real.txt", *report.spectrum_real)
    export_spectrum(out / "spectrum_fake.txt", *report.spectrum_fake)
    plot_spectrum_overlay(
        report.spectrum_real, report.spectrum_fake,
        out / "spectra_overlay.png", title=pair,
    )
    _echo_config(out, cfg)
    for line in (out / "metrics.txt").read_text().splitlines():
        print(line)
    return EXIT_OK


# ----------------------------------------------------------------- main ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibecycle",
        description="Unpaired translation between undamaged and damaged "
        "vibration-signal domains, with evaluation metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="root random seed")

    p_synth = sub.add_parser("synth", help="generate synthetic two-domain datasets")
    common(p_synth)
    p_synth.add_argument("--kind", choices=["modal", "tones"])
    p_synth.add_argument("--duration-s", dest="duration_s", type=float)
    p_synth.add_argument("--sample-rate-hz", dest="sample_rate_hz", type=float)
    p_synth.add_argument("--joint-id", dest="joint_id", type=int)
    p_synth.add_argument("--n-dof", dest="n_dof", type=int)
    p_synth.add_argument("--base-freq-hz", dest="base_freq_hz", type=float)
    p_synth.add_argument("--damping-ratio", dest="damping_ratio", type=float)
    p_synth.add_argument("--damage-dof", dest="damage_dof", type=int)
    p_synth.add_argument("--damage-factor", dest="damage_factor", type=float)
    p_synth.add_argument("--measured-dof", dest="measured_dof", type=int)
    p_synth.add_argument("--force-dof", dest="force_dof", type=int)
    p_synth.add_argument("--freq-u", dest="freq_u", type=float)
    p_synth.add_argument("--freq-d", dest="freq_d", type=float)
    p_synth.add_argument("--amplitude", type=float)
    p_synth.add_argument("--noise-std", dest="noise_std", type=float)
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="train the translation model")
    common(p_train)
    p_train.add_argument("--data-u", dest="data_u", help="undamaged-domain record file")
    p_train.add_argument("--data-d", dest="data_d", help="damaged-domain record file")
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--max-epochs", dest="max_epochs", type=int,
                         help="hard budget cap applied after --epochs")
    p_train.add_argument("--batch-size", dest="batch_size", type=int)
    p_train.add_argument("--critic-iterations", dest="critic_iterations", type=int)
    p_train.add_argument("--lr-generators", dest="lr_generators", type=float)
    p_train.add_argument("--lr-critics", dest="lr_critics", type=float)
    p_train.add_argument("--weight-decay", dest="weight_decay", type=float)
    p_train.add_argument("--monitor-interval", dest="monitor_interval", type=int)
    p_train.add_argument("--checkpoint-interval", dest="checkpoint_interval", type=int)
    p_train.add_argument("--gp-at", dest="gp_at", choices=list(GP_MODES))
    p_train.add_argument("--lambda-gp", dest="lambda_gp", type=float)
    p_train.add_argument("--lambda-cyc", dest="lambda_cyc", type=float)
    p_train.add_argument("--lambda-id", dest="lambda_id", type=float)
    p_train.add_argument("--allow-reduced", dest="allow_reduced", action="store_const",
                         const=True, help="permit generator specs below full depth")
    p_train.add_argument("--checkpoint", help="resume training from this checkpoint")
    p_train.set_defaults(func=cmd_train)

    p_translate = sub.add_parser("translate", help="translate a record across domains")
    common(p_translate)
    p_translate.add_argument("--checkpoint", help="trained model checkpoint")
    p_translate.add_argument("--input", help="record file to translate")
    p_translate.add_argument("--direction", choices=["u2d", "d2u"])
    p_translate.set_defaults(func=cmd_translate)

    p_eval = sub.add_parser("evaluate", help="score a real/fake record pair")
    common(p_eval)
    p_eval.add_argument("--real", help="real record file")
    p_eval.add_argument("--fake", help="generated record file")
    p_eval.add_argument("--fid-mode", dest="fid_mode",
                        choices=["univariate", "multivariate"])
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        device = resolve_device()
        return args.func(args, device)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
