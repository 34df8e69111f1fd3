"""Generator and critic construction, depth accounting, and differentiability."""

import numpy as np
import pytest
import torch

from vibecycle.errors import ConfigError, DataError
from vibecycle.networks import (
    REQUIRED_GENERATOR_LAYERS,
    CriticSpec,
    GeneratorSpec,
    ModelQuad,
    ResidualLayer,
    build_critic,
    build_generator,
    build_model_quad,
    count_layers,
    has_batchnorm,
    layer_plan,
    residual_audit,
)

REDUCED_GEN = GeneratorSpec(
    input_length=16, channel_plan=(4, 6), kernel_size=3, stride=1
)
REDUCED_CRITIC = CriticSpec(
    input_length=16, channel_plan=(4, 6), kernel_size=3, stride=2
)


def flat_parameters(net):
    return torch.cat([p.detach().reshape(-1) for p in net.parameters()])


class TestSpecs:
    def test_default_generator_spec_counts_28(self):
        assert count_layers(GeneratorSpec()) == 28
        assert REQUIRED_GENERATOR_LAYERS == 28

    def test_count_matches_built_module(self):
        spec = GeneratorSpec()
        assert count_layers(build_generator(spec)) == 28

    def test_single_stage_count_by_hand(self):
        # One stage: stem conv, its 2 residual layers, output projection.
        spec = GeneratorSpec(input_length=16, channel_plan=(4,), kernel_size=3)
        assert count_layers(spec) == 4

    def test_two_stage_count_by_hand(self):
        # Stem + 1 down + 1 up, each with 2 residual layers, plus projection:
        # 3 convs + 6 residuals + 1 = 10.
        spec = GeneratorSpec(
            input_length=16, channel_plan=(4, 6), kernel_size=3, stride=2
        )
        assert count_layers(spec) == 10

    def test_empty_channel_plan_is_no_layers(self):
        with pytest.raises(ConfigError, match="no layers"):
            count_layers(GeneratorSpec(channel_plan=()))

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigError, match="odd"):
            GeneratorSpec(kernel_size=14)

    def test_indivisible_length_rejected(self):
        with pytest.raises(ConfigError, match="divisible"):
            GeneratorSpec(input_length=1000)

    def test_nonpositive_stride_rejected(self):
        with pytest.raises(ConfigError, match="stride"):
            GeneratorSpec(stride=0)

    def test_critic_spec_rejects_batch_normalization(self):
        with pytest.raises(ConfigError, match="batch normalization"):
            CriticSpec(normalization="batch")

    def test_critic_final_length(self):
        spec = CriticSpec(input_length=1024, channel_plan=(16, 32, 64, 128, 256))
        assert spec.final_length == 32


class TestBuildGenerator:
    def test_wrong_depth_rejected_with_count(self):
        spec = GeneratorSpec(channel_plan=(16, 32, 64))
        with pytest.raises(ConfigError, match="counts 16 layers, expected 28"):
            build_generator(spec)

    def test_enforcement_opt_out(self):
        net = build_generator(REDUCED_GEN, enforce_layer_count=False)
        assert count_layers(net) == count_layers(REDUCED_GEN)

    def test_same_seed_identical_parameters(self):
        a = build_generator(REDUCED_GEN, init_seed=3, enforce_layer_count=False)
        b = build_generator(REDUCED_GEN, init_seed=3, enforce_layer_count=False)
        assert torch.equal(flat_parameters(a), flat_parameters(b))

    def test_different_seeds_differ(self):
        a = build_generator(REDUCED_GEN, init_seed=3, enforce_layer_count=False)
        b = build_generator(REDUCED_GEN, init_seed=4, enforce_layer_count=False)
        assert not torch.equal(flat_parameters(a), flat_parameters(b))

    def test_zero_input_finite_full_scale_output(self):
        net = build_generator(GeneratorSpec())
        out = net(torch.zeros(1, 1, 1024, dtype=torch.float64))
        assert out.shape == (1, 1, 1024)
        assert torch.all(torch.isfinite(out))

    @pytest.mark.parametrize(
        "spec",
        [
            GeneratorSpec(input_length=64, channel_plan=(4, 6, 8), kernel_size=5, stride=2),
            GeneratorSpec(input_length=32, channel_plan=(3,), kernel_size=7),
            REDUCED_GEN,
        ],
    )
    def test_shape_preserving(self, spec):
        net = build_generator(spec, enforce_layer_count=False)
        x = torch.randn(2, 1, spec.input_length, dtype=torch.float64)
        assert net(x).shape == x.shape

    def test_forward_rejects_bad_rank(self):
        net = build_generator(REDUCED_GEN, enforce_layer_count=False)
        with pytest.raises(DataError, match="shape"):
            net(torch.zeros(16, dtype=torch.float64))

    def test_forward_rejects_indivisible_length(self):
        spec = GeneratorSpec(input_length=64, channel_plan=(4, 6), kernel_size=3, stride=2)
        net = build_generator(spec, enforce_layer_count=False)
        with pytest.raises(DataError, match="divisible"):
            net(torch.zeros(1, 1, 31, dtype=torch.float64))

    def test_input_gradient_matches_finite_differences(self):
        torch.manual_seed(0)
        net = build_generator(REDUCED_GEN, init_seed=1, enforce_layer_count=False)
        net.eval()
        x = torch.randn(1, 1, 16, dtype=torch.float64, requires_grad=True)
        net(x).sum().backward()
        grad = x.grad.detach().clone().reshape(-1)
        h = 1e-6
        for idx in (0, 7, 15):
            probe = x.detach().clone()
            probe[0, 0, idx] += h
            up = net(probe).sum().item()
            probe[0, 0, idx] -= 2 * h
            down = net(probe).sum().item()
            fd = (up - down) / (2 * h)
            assert grad[idx].item() == pytest.approx(fd, rel=1e-4, abs=1e-6)


class TestBuildCritic:
    def test_zero_input_finite_scalar(self):
        critic = build_critic(CriticSpec())
        out = critic(torch.zeros(3, 1, 1024, dtype=torch.float64))
        assert out.shape == (3,)
        assert torch.all(torch.isfinite(out))

    def test_no_batchnorm_anywhere(self):
        assert not has_batchnorm(build_critic(CriticSpec()))

    def test_different_seeds_differ(self):
        a = build_critic(REDUCED_CRITIC, init_seed=0)
        b = build_critic(REDUCED_CRITIC, init_seed=1)
        assert not torch.equal(flat_parameters(a), flat_parameters(b))

    def test_output_head_has_no_squashing(self):
        critic = build_critic(CriticSpec())
        squashers = (torch.nn.Sigmoid, torch.nn.Tanh, torch.nn.Softmax)
        assert not any(isinstance(m, squashers) for m in critic.modules())
        heads = [m for m in critic.modules() if isinstance(m, torch.nn.Linear)]
        assert heads[-1].out_features == 1

    def test_input_gradient_matches_finite_differences(self):
        critic = build_critic(REDUCED_CRITIC, init_seed=5)
        torch.manual_seed(1)
        x = torch.randn(1, 1, 16, dtype=torch.float64, requires_grad=True)
        critic(x).sum().backward()
        grad = x.grad.detach().reshape(-1)
        h = 1e-6
        for idx in (2, 9):
            probe = x.detach().clone()
            probe[0, 0, idx] += h
            up = critic(probe).sum().item()
            probe[0, 0, idx] -= 2 * h
            down = critic(probe).sum().item()
            fd = (up - down) / (2 * h)
            assert grad[idx].item() == pytest.approx(fd, rel=1e-4, abs=1e-6)


class TestResidualStructure:
    def test_zeroed_residual_layer_is_identity(self):
        layer = ResidualLayer(channels=4, kernel_size=3).to(torch.float64)
        with torch.no_grad():
            layer.conv.weight.zero_()
            layer.conv.bias.zero_()
        x = torch.randn(2, 4, 16, dtype=torch.float64)
        assert torch.equal(layer(x), x)

    def test_audit_of_default_generator(self):
        audit = residual_audit(build_generator(GeneratorSpec()))
        assert audit[-1] == ("conv", 0)
        assert all(count == 2 for _, count in audit[:-1])
        kinds = [kind for kind, _ in audit]
        assert kinds == ["conv"] * 5 + ["tconv"] * 4 + ["conv"]

    def test_residuals_use_batchnorm_generator_only(self):
        net = build_generator(GeneratorSpec())
        assert has_batchnorm(net)

    def test_layer_plan_depth_matches_count(self):
        net = build_generator(GeneratorSpec())
        assert len(layer_plan(net)) == 28


class TestModelQuad:
    def test_build_quad_shares_specs_and_splits_seeds(self):
        quad = build_model_quad(
            REDUCED_GEN, REDUCED_CRITIC, seed=9, enforce_layer_count=False
        )
        assert isinstance(quad, ModelQuad)
        assert quad.generator_spec == REDUCED_GEN
        assert quad.critic_spec == REDUCED_CRITIC
        assert not torch.equal(
            flat_parameters(quad.g_u2d), flat_parameters(quad.g_d2u)
        )
        assert not torch.equal(
            flat_parameters(quad.critic_u), flat_parameters(quad.critic_d)
        )

    def test_quad_is_deterministic_in_seed(self):
        a = build_model_quad(REDUCED_GEN, REDUCED_CRITIC, seed=9, enforce_layer_count=False)
        b = build_model_quad(REDUCED_GEN, REDUCED_CRITIC, seed=9, enforce_layer_count=False)
        for m_a, m_b in zip(a.modules(), b.modules()):
            assert torch.equal(flat_parameters(m_a), flat_parameters(m_b))

    def test_iterators_cover_four_networks(self):
        quad = build_model_quad(REDUCED_GEN, REDUCED_CRITIC, seed=0, enforce_layer_count=False)
        assert len(list(quad.generators())) == 2
        assert len(list(quad.critics())) == 2
        assert len(list(quad.modules())) == 4

    def test_full_scale_quad_uses_default_depth(self):
        quad = build_model_quad(GeneratorSpec(), CriticSpec(), seed=0)
        assert count_layers(quad.g_u2d) == 28
        assert count_layers(quad.g_d2u) == 28
