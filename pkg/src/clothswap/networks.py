"""Generator and patch discriminator networks.

The generator is an encoder-decoder with skip connections: stride-2
convolutions going down (channels doubling as resolution halves), stride-1/2
transposed convolutions coming back up, instance normalization everywhere but
the first and last layers, ReLU activations, and a 4-channel head split into a
sigmoid alpha matte and a tanh color image. The output composite is the convex
blend ``alpha * color + (1 - alpha) * x``.

The discriminator is a stack of stride-2 convolutions ending in a 1-channel
sigmoid map: a spatial field of per-patch real/fake scores rather than a
single scalar.

Both networks overwrite the last 6 channels of every intermediate activation
with bilinearly downsampled copies of two conditioning images, which keeps the
conditioning visible at depth.
"""

from dataclasses import dataclass

import torch
from torch import nn
from torch.nn import functional as F

from .errors import ValidationError
from .validation import check_resolution

INPUT_COPY_CHANNELS = 6
WEIGHT_STD = 0.02


def receptive_field(conv_layers) -> int:
    """Receptive field of a stack of (kernel, stride) conv layers.

    r_0 = 1, r_n = r_{n-1} + (kernel_n - 1) * prod of strides before layer n.
    """
    if not conv_layers:
        raise ValidationError("conv_layers must be non-empty")
    r = 1
    jump = 1
    for kernel, stride in conv_layers:
        r += (kernel - 1) * jump
        jump *= stride
    return r


def inject_input_copies(activation, x_small, y_small):
    """Replace the last 6 channels of an activation with two image copies."""
    if activation.shape[1] <= INPUT_COPY_CHANNELS:
        raise ValidationError(
            f"activation has {activation.shape[1]} channels; need > "
            f"{INPUT_COPY_CHANNELS} to hold input copies"
        )
    if x_small.shape[-2:] != activation.shape[-2:] or y_small.shape[-2:] != activation.shape[-2:]:
        raise ValidationError("input copies must match the activation's spatial size")
    return torch.cat([activation[:, :-INPUT_COPY_CHANNELS], x_small, y_small], dim=1)


@dataclass(frozen=True)
class GeneratorSpec:
    input_resolution: tuple = (48, 64)   # (height, width)
    base_channels: int = 16
    depth: int = 3                       # number of stride-2 stages
    input_copy_channels: int = INPUT_COPY_CHANNELS
    skip_connections: bool = True

    def __post_init__(self):
        if self.depth < 1:
            raise ValidationError(f"depth must be >= 1, got {self.depth}")
        check_resolution(self.input_resolution, divisible_by=2 ** self.depth)
        if self.base_channels <= self.input_copy_channels:
            raise ValidationError(
                f"base_channels must exceed input_copy_channels "
                f"({self.input_copy_channels}), got {self.base_channels}"
            )
        if self.input_copy_channels != INPUT_COPY_CHANNELS:
            raise ValidationError("input_copy_channels is fixed at 6")

    def bottleneck_resolution(self):
        h, w = self.input_resolution
        return h // 2 ** self.depth, w // 2 ** self.depth


def _default_disc_layers(base_channels):
    # five (3, 2) convolutions: receptive field 3, 7, 15, 31, 63
    return (
        (3, 2, base_channels),
        (3, 2, base_channels * 2),
        (3, 2, base_channels * 4),
        (3, 2, base_channels * 8),
        (3, 2, 1),
    )


@dataclass(frozen=True)
class DiscriminatorSpec:
    input_resolution: tuple = (48, 64)
    base_channels: int = 16
    conv_layers: tuple = None            # (kernel, stride, out_channels) triples
    input_copy_channels: int = INPUT_COPY_CHANNELS

    def __post_init__(self):
        check_resolution(self.input_resolution)
        if self.conv_layers is None:
            object.__setattr__(
                self, "conv_layers", _default_disc_layers(self.base_channels)
            )
        layers = tuple(tuple(l) for l in self.conv_layers)
        object.__setattr__(self, "conv_layers", layers)
        if layers[-1][2] != 1:
            raise ValidationError("final discriminator layer must output 1 channel")
        for kernel, stride, out_ch in layers[:-1]:
            if out_ch <= self.input_copy_channels:
                raise ValidationError(
                    f"hidden discriminator layers need > {self.input_copy_channels} "
                    f"channels to hold input copies, got {out_ch}"
                )
        rf = receptive_field([(k, s) for k, s, _ in layers])
        if rf != 63:
            raise ValidationError(
                f"discriminator stack has receptive field {rf}, contract requires 63"
            )

    def field_shape(self):
        """Spatial shape of the score field for this spec's input resolution."""
        h, w = self.input_resolution
        for kernel, stride, _ in self.conv_layers:
            pad = kernel // 2
            h = (h + 2 * pad - kernel) // stride + 1
            w = (w + 2 * pad - kernel) // stride + 1
        return h, w


def blend_composite(alpha, raw_color, x):
    """Convex per-pixel blend: alpha picks generated color over the original.

    At alpha == 0 this returns x bit-for-bit; at alpha == 1 it returns
    raw_color. The matte broadcasts over the color channels.
    """
    return alpha * raw_color + (1.0 - alpha) * x


@dataclass
class GeneratorOutput:
    """4-channel generator prediction plus the blended result.

    composite = blend_composite(alpha, raw_color, x), elementwise with alpha
    broadcast over the color channels.
    """

    alpha: torch.Tensor      # [B,1,H,W] in (0,1)
    raw_color: torch.Tensor  # [B,3,H,W] in (-1,1)
    composite: torch.Tensor  # [B,3,H,W] in (-1,1)


class SpatialInstanceNorm(nn.Module):
    """Per-instance, per-channel normalization over the spatial axes.

    Same math as affine instance normalization without running statistics
    (biased variance, eps inside the square root), but well-defined on 1x1
    activations, where the normalized value is 0 and the output collapses to
    the bias.
    """

    def __init__(self, channels, eps=1e-5):
        super().__init__()
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(channels))
        self.bias = nn.Parameter(torch.zeros(channels))

    def forward(self, x):
        mean = x.mean(dim=(2, 3), keepdim=True)
        var = x.var(dim=(2, 3), keepdim=True, unbiased=False)
        normed = (x - mean) / torch.sqrt(var + self.eps)
        return normed * self.weight.view(1, -1, 1, 1) + self.bias.view(1, -1, 1, 1)


def _init_params(module, seed):
    gen = torch.Generator().manual_seed(int(seed) & 0x7FFFFFFFFFFFFFFF)
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
                m.weight.normal_(0.0, WEIGHT_STD, generator=gen)
                if m.bias is not None:
                    m.bias.zero_()
            elif isinstance(m, SpatialInstanceNorm):
                m.weight.normal_(1.0, WEIGHT_STD, generator=gen)
                m.bias.zero_()


def _norm(channels):
    return SpatialInstanceNorm(channels)


class SwapGenerator(nn.Module):
    """Encoder-decoder that predicts an alpha matte and repaint for a swap."""

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        c = spec.base_channels
        d = spec.depth

        enc_channels = [c * 2 ** i for i in range(d)]
        self.enc_convs = nn.ModuleList()
        self.enc_norms = nn.ModuleList()
        in_ch = 9  # [x, y_old, y_new]
        for i, out_ch in enumerate(enc_channels):
            self.enc_convs.append(nn.Conv2d(in_ch, out_ch, 4, stride=2, padding=1))
            self.enc_norms.append(nn.Identity() if i == 0 else _norm(out_ch))
            in_ch = out_ch

        # decoder stage s upsamples to the resolution of encoder stage s-1 and
        # then concatenates that stage's activation as the skip connection
        self.dec_convs = nn.ModuleList()
        self.dec_norms = nn.ModuleList()
        for s in range(d - 1, 0, -1):
            in_ch = enc_channels[s] if s == d - 1 else enc_channels[s] * 2
            out_ch = enc_channels[s - 1]
            self.dec_convs.append(nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1))
            self.dec_norms.append(_norm(out_ch))

        head_in = enc_channels[0] if d == 1 else enc_channels[0] * 2
        self.head = nn.ConvTranspose2d(head_in, 4, 4, stride=2, padding=1)

    def _inject(self, h, x, y_new):
        size = h.shape[-2:]
        x_small = F.interpolate(x, size=size, mode="bilinear", align_corners=False)
        y_small = F.interpolate(y_new, size=size, mode="bilinear", align_corners=False)
        return inject_input_copies(h, x_small, y_small)

    def forward(self, x, y_old, y_new) -> GeneratorOutput:
        expect = tuple(self.spec.input_resolution)
        for name, img in (("x", x), ("y_old", y_old), ("y_new", y_new)):
            if img.dim() != 4 or img.shape[1] != 3:
                raise ValidationError(f"{name}: expected [B,3,H,W], got {tuple(img.shape)}")
            if tuple(img.shape[-2:]) != expect:
                raise ValidationError(
                    f"{name}: resolution {tuple(img.shape[-2:])} != configured {expect}"
                )

        h = torch.cat([x, y_old, y_new], dim=1)
        skips = []
        for conv, norm in zip(self.enc_convs, self.enc_norms):
            h = F.relu(norm(conv(h)))
            h = self._inject(h, x, y_new)
            skips.append(h)

        h = skips[-1]
        for i, (conv, norm) in enumerate(zip(self.dec_convs, self.dec_norms)):
            h = F.relu(norm(conv(h)))
            h = self._inject(h, x, y_new)
            skip = skips[self.spec.depth - 2 - i]
            h = torch.cat([h, skip], dim=1)

        out = self.head(h)
        alpha = torch.sigmoid(out[:, :1])
        raw_color = torch.tanh(out[:, 1:])
        composite = blend_composite(alpha, raw_color, x)
        return GeneratorOutput(alpha=alpha, raw_color=raw_color, composite=composite)


class PatchDiscriminator(nn.Module):
    """Stride-2 conv stack scoring each receptive-field patch of an (x, y) pair."""

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        self.convs = nn.ModuleList()
        self.norms = nn.ModuleList()
        n = len(spec.conv_layers)
        in_ch = 6  # [x, y]
        for i, (kernel, stride, out_ch) in enumerate(spec.conv_layers):
            self.convs.append(
                nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=kernel // 2)
            )
            first_or_last = i == 0 or i == n - 1
            self.norms.append(nn.Identity() if first_or_last else _norm(out_ch))
            in_ch = out_ch

    def forward(self, x, y):
        expect = tuple(self.spec.input_resolution)
        for name, img in (("x", x), ("y", y)):
            if img.dim() != 4 or img.shape[1] != 3:
                raise ValidationError(f"{name}: expected [B,3,H,W], got {tuple(img.shape)}")
            if tuple(img.shape[-2:]) != expect:
                raise ValidationError(
                    f"{name}: resolution {tuple(img.shape[-2:])} != configured {expect}"
                )

        h = torch.cat([x, y], dim=1)
        last = len(self.convs) - 1
        for i, (conv, norm) in enumerate(zip(self.convs, self.norms)):
            h = conv(h)
            if i < last:
                h = F.relu(norm(h))
                size = h.shape[-2:]
                x_small = F.interpolate(x, size=size, mode="bilinear", align_corners=False)
                y_small = F.interpolate(y, size=size, mode="bilinear", align_corners=False)
                h = inject_input_copies(h, x_small, y_small)
        return torch.sigmoid(h)


def build_generator(spec: GeneratorSpec, seed=0, dtype=torch.float32) -> SwapGenerator:
    """Construct a generator with deterministic N(0, 0.02) initialization."""
    net = SwapGenerator(spec).to(dtype)
    _init_params(net, seed)
    return net


def build_discriminator(spec: DiscriminatorSpec, seed=0, dtype=torch.float32) -> PatchDiscriminator:
    """Construct a discriminator with deterministic N(0, 0.02) initialization."""
    net = PatchDiscriminator(spec).to(dtype)
    _init_params(net, seed)
    return net
