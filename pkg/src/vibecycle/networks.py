"""1-D generator and critic architectures plus audit helpers.

The generator is an encoder-decoder over single-channel segments: a stem
convolution, a chain of strided downsampling convolutions, the mirror chain
of transposed-convolution upsampling stages, and a bare linear output
projection. The stem and every resampling convolution are followed by
exactly 2 residual layers of the form ``x + BatchNorm(Conv(ReLU(x)))``,
which reduce to the identity when their weights are zero. The critic is a
strided convolution stack with LeakyReLU and instance normalization that
ends in a single unbounded scalar; it must never contain batch
normalization, because the gradient penalty needs per-sample input
gradients that do not mix across the batch.

Layer counting is part of the contract: a counted layer is any Conv1d,
ConvTranspose1d, or Linear module, normalization and activations are free,
and the default generator counts exactly 28. The arithmetic forces one
convolution to sit outside the residual pattern, and that is the output
projection: 28 = 3 stages x 9 + 1, so the stem plus four downsampling plus
four upsampling stages each carry (conv + 2 residual layers) and the
projection stands bare.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import torch
from torch import nn

from .errors import ConfigError, DataError

_COUNTED_TYPES = (nn.Conv1d, nn.ConvTranspose1d, nn.Linear)
REQUIRED_GENERATOR_LAYERS = 28
_NORM_CHOICES = ("instance", "none")


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape of one generator.

    ``channel_plan`` gives the channel width of the stem stage followed by
    each downsampling stage; the upsampling half mirrors it. ``stride=1``
    keeps the temporal length fixed through every stage, which small test
    configurations use so that short inputs never collapse to length 1.
    """

    input_length: int = 1024
    channel_plan: tuple[int, ...] = (16, 32, 64, 128, 256)
    kernel_size: int = 15
    stride: int = 2
    residual_layers_per_stage: int = 2

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.channel_plan):
            raise ConfigError(f"channel_plan must be positive ints, got {self.channel_plan}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"kernel_size must be odd and positive, got {self.kernel_size}")
        if self.stride < 1:
            raise ConfigError(f"stride must be positive, got {self.stride}")
        if self.residual_layers_per_stage < 0:
            raise ConfigError(
                f"residual_layers_per_stage must be nonnegative, "
                f"got {self.residual_layers_per_stage}"
            )
        if self.input_length < 1:
            raise ConfigError(f"input_length must be positive, got {self.input_length}")
        if self.input_length % self.length_divisor != 0:
            raise ConfigError(
                f"input_length {self.input_length} is not divisible by "
                f"{self.length_divisor}, so the decoder cannot restore it"
            )

    @property
    def n_resample_stages(self) -> int:
        return max(len(self.channel_plan) - 1, 0)

    @property
    def length_divisor(self) -> int:
        return self.stride**self.n_resample_stages


@dataclass(frozen=True)
class CriticSpec:
    """Shape of one critic: one strided conv per channel entry, then a linear head."""

    input_length: int = 1024
    channel_plan: tuple[int, ...] = (16, 32, 64, 128, 256)
    kernel_size: int = 15
    stride: int = 2
    leaky_slope: float = 0.2
    normalization: str = "instance"

    def __post_init__(self) -> None:
        if len(self.channel_plan) < 1 or any(c < 1 for c in self.channel_plan):
            raise ConfigError(f"channel_plan must be positive ints, got {self.channel_plan}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"kernel_size must be odd and positive, got {self.kernel_size}")
        if self.stride < 1:
            raise ConfigError(f"stride must be positive, got {self.stride}")
        if self.input_length < 1:
            raise ConfigError(f"input_length must be positive, got {self.input_length}")
        if self.final_length < 1:
            raise ConfigError(
                f"input_length {self.input_length} collapses below 1 sample "
                f"after {len(self.channel_plan)} stride-{self.stride} convolutions"
            )
        if not 0.0 < self.leaky_slope < 1.0:
            raise ConfigError(f"leaky_slope must be in (0, 1), got {self.leaky_slope}")
        if self.normalization == "batch":
            raise ConfigError("critic must not contain batch normalization")
        if self.normalization not in _NORM_CHOICES:
            raise ConfigError(
                f"normalization must be one of {_NORM_CHOICES}, got {self.normalization!r}"
            )

    @property
    def final_length(self) -> int:
        length = self.input_length
        for _ in self.channel_plan:
            length = (length + self.stride - 1) // self.stride
        return length


class ResidualLayer(nn.Module):
    """``x + BatchNorm(Conv(ReLU(x)))`` with matching channels and length."""

    def __init__(self, channels: int, kernel_size: int) -> None:
        super().__init__()
        self.conv = nn.Conv1d(channels, channels, kernel_size, padding=kernel_size // 2)
        self.norm = nn.BatchNorm1d(channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.norm(self.conv(torch.relu(x)))


class Generator(nn.Module):
    def __init__(self, spec: GeneratorSpec) -> None:
        super().__init__()
        if not spec.channel_plan:
            raise ConfigError("no layers: channel_plan is empty")
        self.spec = spec
        plan = spec.channel_plan
        k = spec.kernel_size
        pad = k // 2
        n_res = spec.residual_layers_per_stage
        body: list[nn.Module] = [
            nn.Conv1d(1, plan[0], k, padding=pad),
            nn.InstanceNorm1d(plan[0], affine=True),
            nn.ReLU(),
        ]
        body += [ResidualLayer(plan[0], k) for _ in range(n_res)]
        for c_in, c_out in zip(plan[:-1], plan[1:]):
            body += [
                nn.Conv1d(c_in, c_out, k, stride=spec.stride, padding=pad),
                nn.InstanceNorm1d(c_out, affine=True),
                nn.ReLU(),
            ]
            body += [ResidualLayer(c_out, k) for _ in range(n_res)]
        for c_in, c_out in zip(plan[:0:-1], plan[-2::-1]):
            body += [
                nn.ConvTranspose1d(
                    c_in, c_out, k,
                    stride=spec.stride, padding=pad, output_padding=spec.stride - 1,
                ),
                nn.InstanceNorm1d(c_out, affine=True),
                nn.ReLU(),
            ]
            body += [ResidualLayer(c_out, k) for _ in range(n_res)]
        body.append(nn.Conv1d(plan[0], 1, k, padding=pad))
        self.body = nn.Sequential(*body)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_signal_batch(x)
        divisor = self.spec.length_divisor
        if x.shape[-1] % divisor != 0:
            raise DataError(
                f"input length {x.shape[-1]} is not divisible by {divisor}, "
                "so the decoder cannot restore it"
            )
        return self.body(x)


class Critic(nn.Module):
    def __init__(self, spec: CriticSpec) -> None:
        super().__init__()
        self.spec = spec
        k = spec.kernel_size
        pad = k // 2
        body: list[nn.Module] = []
        prev = 1
        for i, ch in enumerate(spec.channel_plan):
            body.append(nn.Conv1d(prev, ch, k, stride=spec.stride, padding=pad))
            if i > 0 and spec.normalization == "instance":
                body.append(nn.InstanceNorm1d(ch, affine=True))
            body.append(nn.LeakyReLU(spec.leaky_slope))
            prev = ch
        self.body = nn.Sequential(*body)
        self.head = nn.Linear(spec.channel_plan[-1] * spec.final_length, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_signal_batch(x)
        if x.shape[-1] != self.spec.input_length:
            raise DataError(
                f"critic expects length {self.spec.input_length}, got {x.shape[-1]}"
            )
        features = self.body(x)
        return self.head(features.flatten(start_dim=1)).reshape(-1)


def _check_signal_batch(x: torch.Tensor) -> None:
    if x.ndim != 3 or x.shape[1] != 1:
        raise DataError(
            f"expected a (batch, 1, length) tensor, got shape {tuple(x.shape)}"
        )


def count_layers(obj: GeneratorSpec | nn.Module) -> int:
    """Counted layers of a generator spec, or of any built network.

    For a spec the count is closed-form: every stage contributes its conv
    plus the residual layers, stages number ``2 * len(channel_plan) - 1``,
    and the output projection adds 1.
    """
    if isinstance(obj, GeneratorSpec):
        if not obj.channel_plan:
            raise ConfigError("no layers: channel_plan is empty")
        per_stage = 1 + obj.residual_layers_per_stage
        return per_stage * (2 * len(obj.channel_plan) - 1) + 1
    return sum(1 for m in obj.modules() if isinstance(m, _COUNTED_TYPES))


def build_generator(
    spec: GeneratorSpec, init_seed: int = 0, enforce_layer_count: bool = True
) -> Generator:
    """Construct and initialize one generator.

    By default a spec that does not count exactly 28 layers is rejected, so
    a full-scale run cannot silently train at the wrong depth; reduced test
    configurations opt out with ``enforce_layer_count=False``.
    """
    n = count_layers(spec)
    if enforce_layer_count and n != REQUIRED_GENERATOR_LAYERS:
        raise ConfigError(
            f"spec counts {n} layers, expected {REQUIRED_GENERATOR_LAYERS}"
        )
    net = Generator(spec).to(torch.float64)
    init_weights(net, init_seed)
    return net


def build_critic(spec: CriticSpec, init_seed: int = 0) -> Critic:
    net = Critic(spec).to(torch.float64)
    init_weights(net, init_seed)
    if has_batchnorm(net):
        raise ConfigError("critic must not contain batch normalization")
    return net


def init_weights(module: nn.Module, seed: int) -> None:
    """Deterministic init: N(0, 0.02) weights for counted layers, zero biases,
    unit scale and zero shift for affine normalization."""
    gen = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, _COUNTED_TYPES):
                m.weight.normal_(0.0, 0.02, generator=gen)
                if m.bias is not None:
                    m.bias.zero_()
            elif isinstance(m, (nn.InstanceNorm1d, nn.BatchNorm1d)):
                if m.weight is not None:
                    m.weight.fill_(1.0)
                if m.bias is not None:
                    m.bias.zero_()


@dataclass(frozen=True)
class LayerInfo:
    name: str
    kind: str
    channels_in: int
    channels_out: int
    stride: int
    kernel_size: int


def layer_plan(module: nn.Module) -> list[LayerInfo]:
    """Counted layers in forward order, for auditing depth and shape."""
    rows = []
    for name, m in module.named_modules():
        if isinstance(m, nn.ConvTranspose1d):
            rows.append(LayerInfo(name, "tconv", m.in_channels, m.out_channels,
                                  m.stride[0], m.kernel_size[0]))
        elif isinstance(m, nn.Conv1d):
            rows.append(LayerInfo(name, "conv", m.in_channels, m.out_channels,
                                  m.stride[0], m.kernel_size[0]))
        elif isinstance(m, nn.Linear):
            rows.append(LayerInfo(name, "linear", m.in_features, m.out_features, 1, 1))
    return rows


def residual_audit(generator: Generator) -> list[tuple[str, int]]:
    """How many residual layers immediately follow each top-level conv/tconv.

    Returns (kind, count) pairs in forward order. The last entry is the
    output projection, the only convolution allowed a count of 0.
    """
    rows: list[tuple[str, int]] = []
    for child in generator.body:
        if isinstance(child, nn.ConvTranspose1d):
            rows.append(("tconv", 0))
        elif isinstance(child, nn.Conv1d):
            rows.append(("conv", 0))
        elif isinstance(child, ResidualLayer):
            kind, n = rows[-1]
            rows[-1] = (kind, n + 1)
    return rows


def has_batchnorm(module: nn.Module) -> bool:
    return any(
        isinstance(m, (nn.BatchNorm1d, nn.BatchNorm2d, nn.BatchNorm3d))
        for m in module.modules()
    )


@dataclass
class ModelQuad:
    """Both generators and both critics of one cycle model.

    ``g_u2d`` maps undamaged to damaged, ``g_d2u`` the reverse; ``critic_d``
    scores damaged-domain realism, ``critic_u`` undamaged-domain realism.
    Both generators share one spec and both critics share one spec, but all
    parameters are independent.
    """

    g_u2d: nn.Module
    g_d2u: nn.Module
    critic_u: nn.Module
    critic_d: nn.Module
    generator_spec: GeneratorSpec = field(default_factory=GeneratorSpec)
    critic_spec: CriticSpec = field(default_factory=CriticSpec)

    def generators(self) -> Iterator[nn.Module]:
        yield self.g_u2d
        yield self.g_d2u

    def critics(self) -> Iterator[nn.Module]:
        yield self.critic_u
        yield self.critic_d

    def modules(self) -> Iterator[nn.Module]:
        yield from self.generators()
        yield from self.critics()


def build_model_quad(
    generator_spec: GeneratorSpec | None = None,
    critic_spec: CriticSpec | None = None,
    seed: int = 0,
    enforce_layer_count: bool = True,
) -> ModelQuad:
    """Build all four networks with per-network seeds derived from one root seed."""
    generator_spec = generator_spec or GeneratorSpec()
    critic_spec = critic_spec or CriticSpec()
    children = np.random.SeedSequence(seed).spawn(4)
    seeds = [int(c.generate_state(1)[0]) for c in children]
    return ModelQuad(
        g_u2d=build_generator(generator_spec, seeds[0], enforce_layer_count),
        g_d2u=build_generator(generator_spec, seeds[1], enforce_layer_count),
        critic_u=build_critic(critic_spec, seeds[2]),
        critic_d=build_critic(critic_spec, seeds[3]),
        generator_spec=generator_spec,
        critic_spec=critic_spec,
    )
