"""Adversarial, cycle, and identity objectives with gradient penalty.

Critics are trained to widen the score gap between real and translated
batches under a gradient penalty that pulls the critic's input-gradient
norm toward 1. Generators minimize the negated critic score of their
translations plus cycle-consistency and identity terms, both per-element
L1 means so the lambdas stay batch-size and length invariant. All three
lambdas default to 10.

The critic objective is ``E[C(fake)] - E[C(real)] + penalty`` and is
minimized, which drives real scores up and fake scores down; the opposite
ordering would collapse the adversarial game once both sides minimize.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ConfigError, DataError

GP_MODES = ("interpolate", "fake")


@dataclass(frozen=True)
class LossWeights:
    lambda_gp: float = 10.0
    lambda_cyc: float = 10.0
    lambda_id: float = 10.0
    # Where the penalty is evaluated: "interpolate" mixes real and fake
    # batches at a per-sample uniform random point, "fake" evaluates at the
    # translations themselves.
    gp_at: str = "interpolate"

    def __post_init__(self) -> None:
        for name in ("lambda_gp", "lambda_cyc", "lambda_id"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.gp_at not in GP_MODES:
            raise ConfigError(f"gp_at must be one of {GP_MODES}, got {self.gp_at!r}")


def gradient_penalty(
    critic: nn.Module,
    real_batch: torch.Tensor,
    fake_batch: torch.Tensor,
    lambda_gp: float = 10.0,
    eps_seed: int | None = None,
    gp_at: str = "interpolate",
    eps_generator: torch.Generator | None = None,
) -> torch.Tensor:
    """``lambda_gp * mean((||grad_x C(x)||_2 - 1)^2)`` over the batch.

    With ``gp_at="interpolate"`` the gradient is taken at per-sample random
    convex combinations ``eps * real + (1 - eps) * fake``; with ``"fake"``
    at the translations themselves. ``eps_seed`` fixes the epsilon draw; a
    long-lived ``eps_generator`` may be passed instead by a training loop
    that threads one generator through all updates.
    """
    if gp_at not in GP_MODES:
        raise ConfigError(f"gp_at must be one of {GP_MODES}, got {gp_at!r}")
    if lambda_gp < 0:
        raise ConfigError(f"lambda_gp must be nonnegative, got {lambda_gp}")
    _check_pair(real_batch, fake_batch)
    if gp_at == "interpolate":
        if eps_generator is None:
            eps_generator = torch.Generator()
            if eps_seed is not None:
                eps_generator.manual_seed(int(eps_seed))
        eps = torch.rand(
            (real_batch.shape[0], 1, 1), generator=eps_generator, dtype=real_batch.dtype
        ).to(real_batch.device)
        point = eps * real_batch + (1.0 - eps) * fake_batch.detach()
    else:
        point = fake_batch.detach().clone()
    point.requires_grad_(True)
    scores = critic(point)
    (grads,) = torch.autograd.grad(
        outputs=scores.sum(), inputs=point, create_graph=True
    )
    norms = grads.flatten(start_dim=1).norm(2, dim=1)
    return lambda_gp * ((norms - 1.0) ** 2).mean()


def critic_loss(
    critic: nn.Module,
    real_batch: torch.Tensor,
    translated_batch: torch.Tensor,
    gp: torch.Tensor | float,
) -> torch.Tensor:
    """``E[C(fake)] - E[C(real)] + gp`` with the penalty already weighted."""
    _check_pair(real_batch, translated_batch)
    return critic(translated_batch.detach()).mean() - critic(real_batch).mean() + gp


def generator_adversarial_loss(
    critic: nn.Module, translated_batch: torch.Tensor
) -> torch.Tensor:
    """``-E[C(translated)]``: the generator pushes its output's score up."""
    return -critic(translated_batch).mean()


def cycle_loss(
    g_u2d: nn.Module,
    g_d2u: nn.Module,
    batch_u: torch.Tensor,
    batch_d: torch.Tensor,
    lambda_cyc: float = 10.0,
    translated_d: torch.Tensor | None = None,
    translated_u: torch.Tensor | None = None,
) -> torch.Tensor:
    """Weighted per-element L1 of both round trips against their originals.

    A training step that already holds ``g_u2d(batch_u)`` or
    ``g_d2u(batch_d)`` can pass them in to reuse their graphs instead of
    running the first half of each round trip again.
    """
    _check_pair(batch_u, batch_d)
    if translated_d is None:
        translated_d = g_u2d(batch_u)
    if translated_u is None:
        translated_u = g_d2u(batch_d)
    forward_trip = (g_d2u(translated_d) - batch_u).abs().mean()
    reverse_trip = (g_u2d(translated_u) - batch_d).abs().mean()
    return lambda_cyc * (forward_trip + reverse_trip)


def identity_loss(
    g_u2d: nn.Module,
    g_d2u: nn.Module,
    batch_u: torch.Tensor,
    batch_d: torch.Tensor,
    lambda_id: float = 10.0,
) -> torch.Tensor:
    """Weighted per-element L1 of each generator's pass over its own target domain."""
    _check_pair(batch_u, batch_d)
    keep_u = (g_d2u(batch_u) - batch_u).abs().mean()
    keep_d = (g_u2d(batch_d) - batch_d).abs().mean()
    return lambda_id * (keep_u + keep_d)


@dataclass(frozen=True)
class LossBreakdown:
    """One step's loss components and the two totals trained against."""

    critic_d: float
    critic_u: float
    gen_adv_d: float
    gen_adv_u: float
    cycle: float
    identity: float
    total_critic: float
    total_generator: float


def total_losses(
    critic_d: float,
    critic_u: float,
    gen_adv_d: float,
    gen_adv_u: float,
    cycle: float,
    identity: float,
) -> LossBreakdown:
    """Assemble a breakdown whose totals are exact sums of the parts."""
    parts = [critic_d, critic_u, gen_adv_d, gen_adv_u, cycle, identity]
    values = [float(v) for v in parts]
    critic_d, critic_u, gen_adv_d, gen_adv_u, cycle, identity = values
    return LossBreakdown(
        critic_d=critic_d,
        critic_u=critic_u,
        gen_adv_d=gen_adv_d,
        gen_adv_u=gen_adv_u,
        cycle=cycle,
        identity=identity,
        total_critic=critic_d + critic_u,
        total_generator=gen_adv_d + gen_adv_u + cycle + identity,
    )


def _check_pair(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.ndim != 3 or b.ndim != 3:
        raise DataError(
            f"expected (batch, 1, length) tensors, got {tuple(a.shape)} and {tuple(b.shape)}"
        )
    if a.shape[-1] != b.shape[-1]:
        raise DataError(f"length mismatch: {a.shape[-1]} vs {b.shape[-1]}")
