"""Adversarial training loop, checkpointing, and per-epoch monitoring.

One epoch iterates a seeded shuffle of segment indices; each step runs
``critic_iterations`` critic updates on independently drawn unpaired
segments (both critics from one summed objective), then one joint update
of both generators. Everything downstream of the seed is deterministic on
a fixed device: shuffles and critic draws come from one numpy generator,
gradient-penalty epsilons from one torch generator, and both are captured
in checkpoints so a resumed run reproduces an uninterrupted one exactly.

Epoch records log losses averaged over the epoch's updates plus monitoring
indicators computed by translating the full records. The monitoring log
line holds every deterministic field; wall time is kept on the record and
in a separate timings file so logs stay byte-identical across reruns.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import pickle
import struct
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, NamedTuple, Sequence

import numpy as np
import torch

from .errors import CheckpointError, ConfigError, DataError, TrainingDiverged
from .losses import (
    LossWeights,
    critic_loss,
    cycle_loss,
    generator_adversarial_loss,
    gradient_penalty,
    identity_loss,
)
from .metrics import fid, xcross
from .networks import (
    CriticSpec,
    GeneratorSpec,
    ModelQuad,
    build_model_quad,
)
from .signal_data import DomainLabel, Provenance, VibrationRecord, segment_matrix

CHECKPOINT_MAGIC = b"VCGP"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs; the defaults reproduce the published configuration."""

    batch_size: int = 1
    epochs: int = 1000
    lr_generators: float = 1e-4
    lr_critics: float = 2e-4
    critic_iterations: int = 20
    weights: LossWeights = field(default_factory=LossWeights)
    betas: tuple[float, float] = (0.5, 0.9)
    weight_decay: float = 1e-2
    seed: int = 0
    monitor_interval: int = 1

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be nonnegative, got {self.epochs}")
        if self.lr_generators <= 0 or self.lr_critics <= 0:
            raise ConfigError("learning rates must be positive")
        if self.critic_iterations < 1:
            raise ConfigError(
                f"critic_iterations must be positive, got {self.critic_iterations}"
            )
        if len(self.betas) != 2 or not all(0.0 <= b < 1.0 for b in self.betas):
            raise ConfigError(f"betas must be two values in [0, 1), got {self.betas}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be nonnegative, got {self.weight_decay}")
        if self.monitor_interval < 1:
            raise ConfigError(
                f"monitor_interval must be positive, got {self.monitor_interval}"
            )


@dataclass(frozen=True)
class EpochRecord:
    """One epoch's aggregate losses, monitoring indicators, and counters.

    Loss totals are means over the epoch's updates. Monitoring fields are
    None on epochs where the interval skipped them. Update counters are
    cumulative over the whole run, surviving checkpoint resume.
    """

    epoch: int
    total_critic_loss: float
    total_generator_loss: float
    fid_u: float | None
    fid_d: float | None
    xcross_u: float | None
    xcross_d: float | None
    xcross_raw_u: float | None
    xcross_raw_d: float | None
    generator_updates: int
    critic_updates: int
    wall_time_s: float


_LOG_FIELDS = (
    "epoch",
    "total_critic_loss",
    "total_generator_loss",
    "fid_u",
    "fid_d",
    "xcross_u",
    "xcross_d",
    "xcross_raw_u",
    "xcross_raw_d",
    "generator_updates",
    "critic_updates",
)


def format_epoch_record(record: EpochRecord) -> str:
    """The monitoring-log line: every field except wall time, which would
    break byte-identical logs across reruns."""
    parts = []
    for name in _LOG_FIELDS:
        value = getattr(record, name)
        if value is None:
            text = "na"
        elif isinstance(value, int):
            text = str(value)
        else:
            text = repr(float(value))
        parts.append(f"{name}={text}")
    return " ".join(parts)


@dataclass(frozen=True)
class MonitorValues:
    fid_u: float
    fid_d: float
    xcross_u: float
    xcross_d: float
    xcross_raw_u: float
    xcross_raw_d: float


def monitor(
    model: ModelQuad, real_u: VibrationRecord, real_d: VibrationRecord
) -> MonitorValues:
    """Translate both full records and score each domain's real/fake pair."""
    fake_d = translate(model, real_u, "u2d")
    fake_u = translate(model, real_d, "d2u")
    xc_u = xcross(real_u, fake_u)
    xc_d = xcross(real_d, fake_d)
    return MonitorValues(
        fid_u=fid(real_u, fake_u),
        fid_d=fid(real_d, fake_d),
        xcross_u=xc_u.peak_normalized,
        xcross_d=xc_d.peak_normalized,
        xcross_raw_u=xc_u.peak_raw,
        xcross_raw_d=xc_d.peak_raw,
    )


_DIRECTIONS = {
    "u2d": (DomainLabel.UNDAMAGED, DomainLabel.DAMAGED, "g_u2d"),
    "d2u": (DomainLabel.DAMAGED, DomainLabel.UNDAMAGED, "g_d2u"),
}
_TRANSLATE_CHUNK = 32


def translate(
    model: ModelQuad, record: VibrationRecord, direction: str
) -> VibrationRecord:
    """Run one generator over every segment and reassemble a fake record.

    The output keeps the joint id, length, and sample rate, flips the domain
    to the direction's target, and is marked as generated.
    """
    if direction not in _DIRECTIONS:
        raise ConfigError(
            f"direction must be one of {sorted(_DIRECTIONS)}, got {direction!r}"
        )
    source, target, attr = _DIRECTIONS[direction]
    if record.domain != source:
        raise DataError(
            f"direction/domain mismatch: {direction} translates "
            f"{source.name.lower()} records, got {record.domain.name.lower()}"
        )
    generator = getattr(model, attr)
    params = list(generator.parameters())
    device = params[0].device if params else torch.device("cpu")
    matrix = segment_matrix(record)
    batch = torch.from_numpy(matrix.copy()).unsqueeze(1).to(device)
    was_training = generator.training
    generator.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, batch.shape[0], _TRANSLATE_CHUNK):
            chunk = generator(batch[start:start + _TRANSLATE_CHUNK])
            outputs.append(chunk.squeeze(1).reshape(-1).cpu().numpy())
    if was_training:
        generator.train()
    samples = np.concatenate(outputs)
    return VibrationRecord(
        joint_id=record.joint_id,
        domain=target,
        provenance=Provenance.FAKE,
        sample_rate_hz=record.sample_rate_hz,
        samples=samples,
    )


@dataclass(frozen=True)
class Checkpoint:
    """Everything needed to continue a run exactly where it stopped."""

    format_version: int
    hyperparams: Hyperparams
    generator_spec: GeneratorSpec
    critic_spec: CriticSpec
    epoch: int
    model_states: dict[str, dict[str, np.ndarray]]
    optimizer_states: dict[str, Any]
    rng_state: dict[str, Any]
    history: tuple[EpochRecord, ...]
    enforce_layer_count: bool


def _intern_tree(obj: Any) -> Any:
    """Map equal strings in a state tree onto one shared object each.

    Pickle emits a back-reference for an object it has already written, so
    the byte stream depends on string identity, not just value. Interning
    before every save makes identical states serialize identically whether
    their strings came from source literals or from an earlier load.
    """
    if type(obj) is str:
        return sys.intern(obj)
    if isinstance(obj, dict):
        return {_intern_tree(k): _intern_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return type(obj)(_intern_tree(v) for v in obj)
    return obj


def checkpoint_save(path: str | Path, state: Checkpoint) -> None:
    state = dataclasses.replace(
        state,
        model_states=_intern_tree(state.model_states),
        optimizer_states=_intern_tree(state.optimizer_states),
        rng_state=_intern_tree(state.rng_state),
    )
    payload = pickle.dumps(state, protocol=4)
    digest = hashlib.sha256(payload).digest()
    header = CHECKPOINT_MAGIC + struct.pack("<I", state.format_version) + digest
    Path(path).write_bytes(header + payload)


def checkpoint_load(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    blob = path.read_bytes()
    if len(blob) < 40 or blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"not a checkpoint: {path}")
    (version,) = struct.unpack("<I", blob[4:8])
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version}, expected {CHECKPOINT_VERSION}"
        )
    digest, payload = blob[8:40], blob[40:]
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError(f"checkpoint corrupted: checksum mismatch in {path}")
    try:
        state = pickle.loads(payload)
    except Exception as exc:
        raise CheckpointError(f"checkpoint corrupted: {exc}") from exc
    if not isinstance(state, Checkpoint):
        raise CheckpointError(f"not a checkpoint payload: {type(state).__name__}")
    return state


def _to_numpy_tree(obj: Any) -> Any:
    if isinstance(obj, torch.Tensor):
        return obj.detach().cpu().numpy()
    if isinstance(obj, dict):
        return {k: _to_numpy_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return type(obj)(_to_numpy_tree(v) for v in obj)
    return obj


def _to_torch_tree(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return torch.from_numpy(obj.copy())
    if isinstance(obj, dict):
        return {k: _to_torch_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return type(obj)(_to_torch_tree(v) for v in obj)
    return obj


class TrainResult(NamedTuple):
    model: ModelQuad
    history: list[EpochRecord]


_QUAD_PARTS = ("g_u2d", "g_d2u", "critic_u", "critic_d")


def train(
    dataset_u: VibrationRecord,
    dataset_d: VibrationRecord,
    generator_spec: GeneratorSpec | None = None,
    critic_spec: CriticSpec | None = None,
    hp: Hyperparams | None = None,
    callbacks: Sequence[Callable[[EpochRecord], None]] = (),
    enforce_layer_count: bool = True,
    resume_from: Checkpoint | None = None,
    checkpoint_dir: str | Path | None = None,
    checkpoint_interval: int = 0,
    device: str | torch.device = "cpu",
) -> TrainResult:
    """Run the adversarial loop and return the model with its epoch history.

    When resuming, the checkpoint supplies the specs, hyperparameters, and
    all state; only the epoch target may differ, taken from ``hp.epochs``
    if an ``hp`` is passed. With ``checkpoint_dir`` set, a final checkpoint
    is always written there, plus one every ``checkpoint_interval`` epochs
    if that is nonzero. Callbacks see each epoch's record and must not
    mutate training state.
    """
    if dataset_u.domain != DomainLabel.UNDAMAGED or dataset_d.domain != DomainLabel.DAMAGED:
        raise DataError(
            "training needs an undamaged-domain record and a damaged-domain record, "
            f"got {dataset_u.domain.name.lower()} and {dataset_d.domain.name.lower()}"
        )
    if resume_from is not None:
        for name, passed, stored in (
            ("generator", generator_spec, resume_from.generator_spec),
            ("critic", critic_spec, resume_from.critic_spec),
        ):
            if passed is not None and passed != stored:
                raise ConfigError(
                    f"checkpoint/spec mismatch: passed {name} spec differs "
                    "from the checkpointed one"
                )
        generator_spec = resume_from.generator_spec
        critic_spec = resume_from.critic_spec
        enforce_layer_count = resume_from.enforce_layer_count
        hp = dataclasses.replace(
            resume_from.hyperparams,
            epochs=hp.epochs if hp is not None else resume_from.hyperparams.epochs,
        )
        if resume_from.epoch > hp.epochs:
            raise ConfigError(
                f"checkpoint is already at epoch {resume_from.epoch}, "
                f"beyond the requested {hp.epochs}"
            )
    else:
        generator_spec = generator_spec or GeneratorSpec()
        critic_spec = critic_spec or CriticSpec()
        hp = hp or Hyperparams()

    device = torch.device(device)
    seg_u = torch.from_numpy(segment_matrix(dataset_u).copy()).unsqueeze(1).to(device)
    seg_d = torch.from_numpy(segment_matrix(dataset_d).copy()).unsqueeze(1).to(device)
    n_u, n_d = seg_u.shape[0], seg_d.shape[0]
    steps_per_epoch = min(n_u, n_d) // hp.batch_size
    if steps_per_epoch < 1:
        raise ConfigError(
            f"batch_size {hp.batch_size} exceeds the smaller domain's "
            f"{min(n_u, n_d)} segments"
        )

    root = np.random.SeedSequence(hp.seed)
    init_child, sample_child, eps_child = root.spawn(3)
    eps_gen = torch.Generator()
    if resume_from is None:
        quad = build_model_quad(
            generator_spec,
            critic_spec,
            seed=int(init_child.generate_state(1)[0]),
            enforce_layer_count=enforce_layer_count,
        )
        np_rng = np.random.default_rng(sample_child)
        eps_gen.manual_seed(int(eps_child.generate_state(1)[0]))
        start_epoch = 0
        history: list[EpochRecord] = []
        generator_updates = 0
        critic_updates = 0
    else:
        quad = build_model_quad(
            generator_spec, critic_spec, seed=0, enforce_layer_count=enforce_layer_count
        )
        for name in _QUAD_PARTS:
            getattr(quad, name).load_state_dict(
                _to_torch_tree(resume_from.model_states[name])
            )
        np_rng = np.random.default_rng()
        np_rng.bit_generator.state = resume_from.rng_state["numpy"]
        eps_gen.set_state(torch.from_numpy(resume_from.rng_state["torch_eps"].copy()))
        start_epoch = resume_from.epoch
        history = list(resume_from.history)
        generator_updates = history[-1].generator_updates if history else 0
        critic_updates = history[-1].critic_updates if history else 0

    for module in quad.modules():
        module.to(device)
    opt_g = torch.optim.AdamW(
        list(quad.g_u2d.parameters()) + list(quad.g_d2u.parameters()),
        lr=hp.lr_generators, betas=hp.betas, weight_decay=hp.weight_decay,
    )
    opt_c = torch.optim.AdamW(
        list(quad.critic_u.parameters()) + list(quad.critic_d.parameters()),
        lr=hp.lr_critics, betas=hp.betas, weight_decay=hp.weight_decay,
    )
    if resume_from is not None:
        opt_g.load_state_dict(_to_torch_tree(resume_from.optimizer_states["generators"]))
        opt_c.load_state_dict(_to_torch_tree(resume_from.optimizer_states["critics"]))

    def snapshot(epoch: int) -> Checkpoint:
        return Checkpoint(
            format_version=CHECKPOINT_VERSION,
            hyperparams=hp,
            generator_spec=generator_spec,
            critic_spec=critic_spec,
            epoch=epoch,
            model_states={
                name: _to_numpy_tree(getattr(quad, name).state_dict())
                for name in _QUAD_PARTS
            },
            optimizer_states={
                "generators": _to_numpy_tree(opt_g.state_dict()),
                "critics": _to_numpy_tree(opt_c.state_dict()),
            },
            rng_state={
                "numpy": np_rng.bit_generator.state,
                "torch_eps": eps_gen.get_state().numpy(),
            },
            history=tuple(history),
            enforce_layer_count=enforce_layer_count,
        )

    weights = hp.weights
    for module in quad.modules():
        module.train()

    for epoch in range(start_epoch + 1, hp.epochs + 1):
        started = time.perf_counter()
        perm_u = np_rng.permutation(n_u)
        perm_d = np_rng.permutation(n_d)
        critic_total_sum = 0.0
        generator_total_sum = 0.0
        for step in range(steps_per_epoch):
            for _ in range(hp.critic_iterations):
                iu = np_rng.integers(0, n_u, size=hp.batch_size)
                idx = np_rng.integers(0, n_d, size=hp.batch_size)
                real_u = seg_u[iu]
                real_d = seg_d[idx]
                with torch.no_grad():
                    fake_d = quad.g_u2d(real_u)
                    fake_u = quad.g_d2u(real_d)
                gp_d = gradient_penalty(
                    quad.critic_d, real_d, fake_d,
                    lambda_gp=weights.lambda_gp,
                    gp_at=weights.gp_at, eps_generator=eps_gen,
                )
                gp_u = gradient_penalty(
                    quad.critic_u, real_u, fake_u,
                    lambda_gp=weights.lambda_gp,
                    gp_at=weights.gp_at, eps_generator=eps_gen,
                )
                loss_cd = critic_loss(quad.critic_d, real_d, fake_d, gp_d)
                loss_cu = critic_loss(quad.critic_u, real_u, fake_u, gp_u)
                total_c = loss_cd + loss_cu
                value = float(total_c.detach())
                if not math.isfinite(value):
                    raise TrainingDiverged(
                        f"non-finite critic loss {value} at epoch {epoch} "
                        f"after {critic_updates} critic updates"
                    )
                opt_c.zero_grad()
                total_c.backward()
                opt_c.step()
                critic_updates += 1
                critic_total_sum += value

            lo = step * hp.batch_size
            hi = lo + hp.batch_size
            real_u = seg_u[perm_u[lo:hi]]
            real_d = seg_d[perm_d[lo:hi]]
            fake_d = quad.g_u2d(real_u)
            fake_u = quad.g_d2u(real_d)
            adv_d = generator_adversarial_loss(quad.critic_d, fake_d)
            adv_u = generator_adversarial_loss(quad.critic_u, fake_u)
            cyc = cycle_loss(
                quad.g_u2d, quad.g_d2u, real_u, real_d, weights.lambda_cyc,
                translated_d=fake_d, translated_u=fake_u,
            )
            idt = identity_loss(quad.g_u2d, quad.g_d2u, real_u, real_d, weights.lambda_id)
            total_g = adv_d + adv_u + cyc + idt
            value = float(total_g.detach())
            if not math.isfinite(value):
                raise TrainingDiverged(
                    f"non-finite generator loss {value} at epoch {epoch} "
                    f"after {generator_updates} generator updates"
                )
            opt_g.zero_grad()
            total_g.backward()
            opt_g.step()
            generator_updates += 1
            generator_total_sum += value

        if epoch % hp.monitor_interval == 0 or epoch == hp.epochs:
            values = monitor(quad, dataset_u, dataset_d)
        else:
            values = None
        record = EpochRecord(
            epoch=epoch,
            total_critic_loss=critic_total_sum / (steps_per_epoch * hp.critic_iterations),
            total_generator_loss=generator_total_sum / steps_per_epoch,
            fid_u=values.fid_u if values else None,
            fid_d=values.fid_d if values else None,
            xcross_u=values.xcross_u if values else None,
            xcross_d=values.xcross_d if values else None,
            xcross_raw_u=values.xcross_raw_u if values else None,
            xcross_raw_d=values.xcross_raw_d if values else None,
            generator_updates=generator_updates,
            critic_updates=critic_updates,
            wall_time_s=time.perf_counter() - started,
        )
        history.append(record)
        for callback in callbacks:
            callback(record)
        if (
            checkpoint_dir is not None
            and checkpoint_interval > 0
            and epoch % checkpoint_interval == 0
        ):
            checkpoint_save(
                Path(checkpoint_dir) / f"checkpoint_epoch{epoch:06d}.ckpt",
                snapshot(epoch),
            )

    if checkpoint_dir is not None:
        checkpoint_save(Path(checkpoint_dir) / "checkpoint.ckpt", snapshot(hp.epochs))
    return TrainResult(model=quad, history=history)


def model_from_checkpoint(state: Checkpoint) -> ModelQuad:
    """Rebuild the four networks from a checkpoint, ready for inference."""
    quad = build_model_quad(
        state.generator_spec,
        state.critic_spec,
        seed=0,
        enforce_layer_count=state.enforce_layer_count,
    )
    for name in _QUAD_PARTS:
        getattr(quad, name).load_state_dict(_to_torch_tree(state.model_states[name]))
    for module in quad.modules():
        module.eval()
    return quad


def write_monitor_log(path: str | Path, records: Iterable[EpochRecord]) -> None:
    """One deterministic line per epoch; newline-terminated."""
    lines = [format_epoch_record(r) for r in records]
    Path(path).write_text("".join(line + "\n" for line in lines))


def write_timings(path: str | Path, records: Iterable[EpochRecord]) -> None:
    """Wall time per epoch, kept apart from the deterministic monitor log."""
    lines = [f"epoch={r.epoch} wall_time_s={r.wall_time_s:.6f}" for r in records]
    Path(path).write_text("".join(line + "\n" for line in lines))
