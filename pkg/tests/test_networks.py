import numpy as np
import pytest
import torch

from clothswap import (
    DiscriminatorSpec,
    GeneratorSpec,
    ValidationError,
    build_discriminator,
    build_generator,
    inject_input_copies,
    receptive_field,
)
from clothswap.networks import SpatialInstanceNorm

RES = (16, 16)


def _rand_images(batch, res, seed=0, dtype=torch.float32):
    g = torch.Generator().manual_seed(seed)
    return [
        torch.rand((batch, 3) + tuple(res), generator=g, dtype=dtype) * 2 - 1
        for _ in range(3)
    ]


class TestReceptiveField:
    def test_five_stride2_k3_layers_give_63(self):
        assert receptive_field([(3, 2)] * 5) == 63

    def test_recurrence_examples(self):
        assert receptive_field([(3, 1)]) == 3
        assert receptive_field([(4, 2)] * 4) == 46
        assert receptive_field([(3, 2)]) == 3
        assert receptive_field([(3, 2), (3, 2)]) == 7

    def test_empty_stack_rejected(self):
        with pytest.raises(ValidationError):
            receptive_field([])


class TestSpecs:
    def test_generator_spec_divisibility(self):
        with pytest.raises(ValidationError):
            GeneratorSpec(input_resolution=(20, 16), depth=3)

    def test_generator_spec_channel_floor(self):
        # must keep more channels than the injected copies occupy
        with pytest.raises(ValidationError):
            GeneratorSpec(input_resolution=RES, base_channels=6, depth=1)

    def test_generator_bottleneck_resolution(self):
        spec = GeneratorSpec(input_resolution=(128, 96), base_channels=8, depth=5)
        assert spec.bottleneck_resolution() == (4, 3)

    def test_discriminator_spec_enforces_rf_63(self):
        with pytest.raises(ValidationError, match="63"):
            DiscriminatorSpec(input_resolution=RES, conv_layers=((4, 2, 8),) * 3 + ((4, 2, 1),))

    def test_discriminator_default_stack(self):
        spec = DiscriminatorSpec(input_resolution=RES, base_channels=8)
        assert [c for _, _, c in spec.conv_layers] == [8, 16, 32, 64, 1]
        assert receptive_field([(k, s) for k, s, _ in spec.conv_layers]) == 63

    def test_discriminator_final_channel_must_be_1(self):
        with pytest.raises(ValidationError):
            DiscriminatorSpec(
                input_resolution=RES,
                conv_layers=((3, 2, 8), (3, 2, 8), (3, 2, 8), (3, 2, 8), (3, 2, 2)),
            )

    def test_discriminator_field_shape(self):
        spec = DiscriminatorSpec(input_resolution=(128, 96))
        assert spec.field_shape() == (4, 3)


class TestInjection:
    def test_replaces_last_six_channels(self):
        act = torch.zeros(2, 10, 4, 4)
        x = torch.full((2, 3, 4, 4), 0.25)
        y = torch.full((2, 3, 4, 4), -0.5)
        out = inject_input_copies(act, x, y)
        assert out.shape == act.shape
        assert (out[:, :4] == 0).all()
        assert (out[:, 4:7] == 0.25).all()
        assert (out[:, 7:] == -0.5).all()

    def test_needs_headroom(self):
        act = torch.zeros(1, 6, 4, 4)
        img = torch.zeros(1, 3, 4, 4)
        with pytest.raises(ValidationError):
            inject_input_copies(act, img, img)

    def test_spatial_mismatch_rejected(self):
        act = torch.zeros(1, 10, 4, 4)
        img = torch.zeros(1, 3, 8, 8)
        with pytest.raises(ValidationError):
            inject_input_copies(act, img, img)

    def test_gradient_flows_through_kept_channels(self):
        act = torch.zeros(1, 10, 4, 4, requires_grad=True)
        img = torch.zeros(1, 3, 4, 4)
        out = inject_input_copies(act, img, img)
        out.sum().backward()
        assert (act.grad[:, :4] == 1).all()
        assert (act.grad[:, 4:] == 0).all()  # replaced channels get no grad


class TestGeneratorForward:
    def test_output_shapes_and_ranges(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        net = build_generator(spec, seed=0)
        x, y_old, y_new = _rand_images(2, RES, seed=1)
        out = net(x, y_old, y_new)
        assert out.alpha.shape == (2, 1) + RES
        assert out.raw_color.shape == (2, 3) + RES
        assert out.composite.shape == (2, 3) + RES
        assert out.alpha.min() > 0 and out.alpha.max() < 1
        assert out.raw_color.min() > -1 and out.raw_color.max() < 1
        assert out.composite.min() >= -1 and out.composite.max() <= 1

    def test_composite_is_the_blend(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        net = build_generator(spec, seed=3)
        x, y_old, y_new = _rand_images(1, RES, seed=2)
        out = net(x, y_old, y_new)
        manual = out.alpha * out.raw_color + (1 - out.alpha) * x
        assert torch.equal(out.composite, manual)

    def test_resolution_mismatch_rejected(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        net = build_generator(spec)
        x, y_old, y_new = _rand_images(1, (32, 32))
        with pytest.raises(ValidationError):
            net(x, y_old, y_new)

    def test_encoder_halves_spatial_and_doubles_channels(self):
        spec = GeneratorSpec(input_resolution=(64, 32), base_channels=8, depth=3)
        net = build_generator(spec, seed=0)
        shapes = []
        hooks = [
            conv.register_forward_hook(lambda m, i, o: shapes.append(tuple(o.shape)))
            for conv in net.enc_convs
        ]
        x, y_old, y_new = _rand_images(1, (64, 32))
        net(x, y_old, y_new)
        for h in hooks:
            h.remove()
        assert shapes == [
            (1, 8, 32, 16),
            (1, 16, 16, 8),
            (1, 32, 8, 4),
        ]

    def test_decoder_mirrors_encoder(self):
        spec = GeneratorSpec(input_resolution=(64, 32), base_channels=8, depth=3)
        net = build_generator(spec, seed=0)
        shapes = []
        hooks = [
            conv.register_forward_hook(lambda m, i, o: shapes.append(tuple(o.shape)))
            for conv in net.dec_convs
        ] + [net.head.register_forward_hook(lambda m, i, o: shapes.append(tuple(o.shape)))]
        x, y_old, y_new = _rand_images(1, (64, 32))
        net(x, y_old, y_new)
        for h in hooks:
            h.remove()
        assert shapes == [
            (1, 16, 16, 8),   # up from the 8x4 bottleneck
            (1, 8, 32, 16),
            (1, 4, 64, 32),   # alpha + color head at full resolution
        ]

    def test_injected_copies_visible_in_activations(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        net = build_generator(spec, seed=0)
        x, y_old, y_new = _rand_images(1, RES, seed=4)
        grabbed = {}

        def hook(module, inputs, output):
            grabbed["first_stage_out"] = inputs[0].detach()

        # input to the second encoder conv is the first stage's activation
        h = net.enc_convs[1].register_forward_hook(hook)
        net(x, y_old, y_new)
        h.remove()
        act = grabbed["first_stage_out"]
        x_small = torch.nn.functional.interpolate(
            x, size=act.shape[-2:], mode="bilinear", align_corners=False
        )
        y_small = torch.nn.functional.interpolate(
            y_new, size=act.shape[-2:], mode="bilinear", align_corners=False
        )
        assert torch.equal(act[:, -6:-3], x_small)
        assert torch.equal(act[:, -3:], y_small)


class TestDiscriminatorForward:
    def test_field_shape_matches_spec(self):
        spec = DiscriminatorSpec(input_resolution=(128, 96), base_channels=8)
        net = build_discriminator(spec, seed=0)
        x, y, _ = _rand_images(2, (128, 96))
        scores = net(x, y)
        assert tuple(scores.shape) == (2, 1) + spec.field_shape()
        assert scores.shape[-2:] == (4, 3)  # 128/32, 96/32

    def test_scores_in_unit_interval(self):
        spec = DiscriminatorSpec(input_resolution=RES, base_channels=8)
        net = build_discriminator(spec, seed=1)
        x, y, _ = _rand_images(3, RES)
        scores = net(x, y)
        assert scores.min() > 0 and scores.max() < 1

    def test_zero_parameters_give_exactly_half(self):
        spec = DiscriminatorSpec(input_resolution=RES, base_channels=8)
        net = build_discriminator(spec, seed=0)
        with torch.no_grad():
            for p in net.parameters():
                p.zero_()
        x, y, _ = _rand_images(2, RES, seed=9)
        scores = net(x, y)
        assert (scores == 0.5).all()

    def test_resolution_mismatch_rejected(self):
        spec = DiscriminatorSpec(input_resolution=RES)
        net = build_discriminator(spec)
        x, y, _ = _rand_images(1, (32, 32))
        with pytest.raises(ValidationError):
            net(x, y)


class TestInitialization:
    def test_same_seed_same_params(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        a = build_generator(spec, seed=5)
        b = build_generator(spec, seed=5)
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)

    def test_different_seed_different_params(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        a = build_generator(spec, seed=5)
        b = build_generator(spec, seed=6)
        assert any(
            not torch.equal(pa, pb) for pa, pb in zip(a.parameters(), b.parameters())
        )

    def test_weight_statistics(self):
        spec = GeneratorSpec(input_resolution=(64, 64), base_channels=32, depth=3)
        net = build_generator(spec, seed=0)
        conv_w = torch.cat([
            m.weight.flatten()
            for m in net.modules()
            if isinstance(m, (torch.nn.Conv2d, torch.nn.ConvTranspose2d))
        ])
        assert abs(conv_w.mean().item()) < 1e-3
        assert abs(conv_w.std().item() - 0.02) < 2e-3
        for m in net.modules():
            if isinstance(m, (torch.nn.Conv2d, torch.nn.ConvTranspose2d)):
                assert (m.bias == 0).all()
            if isinstance(m, SpatialInstanceNorm):
                assert abs(m.weight.mean().item() - 1.0) < 1e-2
                assert (m.bias == 0).all()

    def test_float64_build(self):
        spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
        net = build_generator(spec, seed=0, dtype=torch.float64)
        x, y_old, y_new = _rand_images(1, RES, dtype=torch.float64)
        out = net(x, y_old, y_new)
        assert out.composite.dtype == torch.float64
