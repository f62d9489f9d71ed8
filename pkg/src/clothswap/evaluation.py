"""Swap inference, toy-corpus metrics, and qualitative image grids.

Metrics lean on the toy corpus's exact ground-truth masks: how well the
predicted alpha matte matches the worn region (IoU), whether the masked area
took on the target article's dominant color, how much the rest of the person
image changed (identity leakage), and how well a second swap restores the
original (cycle error). An analytic oracle swapper — ground-truth mask plus
flat dominant-color paint — pins down what each metric reports for a perfect
swap, independent of any trained network.
"""

import math
from dataclasses import dataclass, asdict

import numpy as np
import torch
from PIL import Image

from .data import TripletSampler, draw_triplet_indices
from .errors import ValidationError
from .images import UNIT, UNIT_SIGNED, ImageTensor, normalize
from .networks import build_generator
from .toydata import product_region_slice
from .training import TrainConfig, load_checkpoint
from .validation import check_positive

GRID_BORDER = 2  # white pixels between tiles


@dataclass(frozen=True)
class SwapResult:
    """One swap's outputs: blended image plus the matte that produced it."""

    composite: ImageTensor  # 3-channel, unit_signed
    alpha: ImageTensor      # 1-channel, unit


@dataclass(frozen=True)
class EvalReport:
    """Mean metrics over a seeded sample of swap triplets."""

    alpha_iou: float
    color_swap_error: float
    identity_leakage: float
    cycle_error: float
    n_samples: int
    seed: int

    def to_dict(self):
        return asdict(self)


def _as_chw(image, name="image"):
    """Coerce an ImageTensor or array to a [3,H,W] unit_signed float32 array."""
    if isinstance(image, ImageTensor):
        image = normalize(image, UNIT_SIGNED).data
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValidationError(f"{name}: expected [3,H,W], got {image.shape}")
    if not image.flags.writeable:  # torch.from_numpy rejects read-only arrays
        image = image.copy()
    return image


def _as_mask(mask, name="mask"):
    if isinstance(mask, ImageTensor):
        mask = mask.data[0]
    mask = np.asarray(mask, dtype=np.float32)
    if mask.ndim != 2:
        raise ValidationError(f"{name}: expected [H,W], got {mask.shape}")
    return mask


def dominant_color(article) -> np.ndarray:
    """Mean color over the product photo's article rectangle, unit_signed."""
    arr = _as_chw(article, "article")
    rows, cols = product_region_slice(arr.shape[1:])
    return arr[:, rows, cols].mean(axis=(1, 2))


class ModelSwapper:
    """Runs a trained generator over numpy images, no gradients."""

    def __init__(self, generator, resolution):
        self.generator = generator
        self.resolution = (int(resolution[0]), int(resolution[1]))

    def swap_indexed(self, x, y_old, y_new, i=None, j=None):
        """Swap one image triple; provenance indices are accepted but unused."""
        batch = [
            torch.from_numpy(_as_chw(img, name)).unsqueeze(0)
            for img, name in ((x, "x"), (y_old, "y_old"), (y_new, "y_new"))
        ]
        with torch.no_grad():
            out = self.generator(*batch)
        alpha = out.alpha[0].numpy()
        composite = np.clip(out.composite[0].numpy(), -1.0, 1.0)
        return alpha, composite


class OracleSwapper:
    """Perfect analytic swapper for the toy corpus.

    Uses the ground-truth mask of person ``i`` as the alpha matte and paints
    the masked region with the dominant color of the given target article.
    Exists to validate the metrics themselves: IoU must come out exactly 1,
    identity leakage exactly 0.
    """

    def __init__(self, masks):
        if not masks:
            raise ValidationError("OracleSwapper needs at least one mask")
        self.masks = [_as_mask(m, f"masks[{k}]") for k, m in enumerate(masks)]
        self.resolution = self.masks[0].shape

    def swap_indexed(self, x, y_old, y_new, i=None, j=None):
        if i is None:
            raise ValidationError("OracleSwapper needs the person index i")
        x = _as_chw(x, "x")
        mask = self.masks[i]
        paint = dominant_color(y_new)[:, None, None]
        composite = mask * paint + (1.0 - mask) * x
        return mask[None].astype(np.float32), composite.astype(np.float32)


def load_swapper(checkpoint_path) -> ModelSwapper:
    """Build a ModelSwapper from a training checkpoint's generator weights."""
    state = load_checkpoint(checkpoint_path)
    config = TrainConfig.from_dict(state["config"])
    generator = build_generator(config.generator_spec())
    generator.load_state_dict(state["generator"])
    return ModelSwapper(generator, config.resolution)


def swap(swapper, x, y_old, y_new) -> SwapResult:
    """Swap the worn article on ``x`` for ``y_new``; returns matte + blend."""
    arrays = [_as_chw(img, name) for img, name in
              ((x, "x"), (y_old, "y_old"), (y_new, "y_new"))]
    expect = tuple(swapper.resolution)
    for name, arr in zip(("x", "y_old", "y_new"), arrays):
        if arr.shape[1:] != expect:
            raise ValidationError(
                f"{name}: resolution {arr.shape[1:]} != swapper's {expect}"
            )
    alpha, composite = swapper.swap_indexed(*arrays)
    return SwapResult(
        composite=ImageTensor(composite, UNIT_SIGNED),
        alpha=ImageTensor(np.clip(alpha, 0.0, 1.0), UNIT),
    )


def evaluate_toy(swapper, manifest, masks, n_samples=64, seed=0) -> EvalReport:
    """Score a swapper on seeded triplets drawn from a toy dataset.

    ``masks`` must align with the manifest entries (one ground-truth worn
    mask per pair). Each sample swaps article j onto person i, then swaps
    article i back onto the result for the cycle metric.
    """
    check_positive(n_samples, "n_samples")
    masks = [_as_mask(m, f"masks[{k}]") for k, m in enumerate(masks)]
    if len(masks) != manifest.size:
        raise ValidationError(
            f"{len(masks)} masks for {manifest.size} manifest entries"
        )
    resolution = tuple(swapper.resolution)
    for k, mask in enumerate(masks):
        if mask.shape != resolution:
            raise ValidationError(
                f"masks[{k}]: shape {mask.shape} != swapper resolution {resolution}"
            )

    sampler = TripletSampler(manifest, resolution)
    rng = np.random.default_rng(seed)
    draws = draw_triplet_indices(manifest.size, n_samples, rng)

    iou_sum = color_sum = leak_sum = cycle_sum = 0.0
    for i, j in draws:
        i, j = int(i), int(j)
        x = sampler.human(i)
        y_old = sampler.article(i)
        y_new = sampler.article(j)
        alpha, composite = swapper.swap_indexed(x, y_old, y_new, i, j)

        gt = masks[i] > 0.5
        pred = alpha[0] > 0.5
        union = float(np.logical_or(pred, gt).sum())
        inter = float(np.logical_and(pred, gt).sum())
        iou_sum += inter / union if union else 1.0

        comp_mean = composite[:, gt].mean(axis=1)
        color_sum += float(np.abs(comp_mean - dominant_color(y_new)).mean())

        outside = ~gt
        leak_sum += float(np.abs(composite[:, outside] - x[:, outside]).mean())

        _, restored = swapper.swap_indexed(composite, y_new, y_old, i, i)
        cycle_sum += float(np.abs(restored - x).mean())

    n = float(n_samples)
    return EvalReport(
        alpha_iou=iou_sum / n,
        color_swap_error=color_sum / n,
        identity_leakage=leak_sum / n,
        cycle_error=cycle_sum / n,
        n_samples=int(n_samples),
        seed=int(seed),
    )


# --- qualitative grids --------------------------------------------------------

def _unit_tile(signed_chw):
    return np.clip((np.asarray(signed_chw, dtype=np.float32) + 1.0) / 2.0, 0.0, 1.0)


def _alpha_tile(alpha):
    return np.repeat(np.clip(np.asarray(alpha, dtype=np.float32), 0.0, 1.0), 3, axis=0)


def _assemble(tiles, rows, cols):
    h, w = tiles[0].shape[1:]
    for k, tile in enumerate(tiles):
        if tile.shape != (3, h, w):
            raise ValidationError(f"tile {k}: shape {tile.shape} != (3, {h}, {w})")
    canvas = np.ones(
        (rows * h + (rows - 1) * GRID_BORDER,
         cols * w + (cols - 1) * GRID_BORDER, 3),
        dtype=np.float32,
    )
    for k, tile in enumerate(tiles):
        r, c = divmod(k, cols)
        r0 = r * (h + GRID_BORDER)
        c0 = c * (w + GRID_BORDER)
        canvas[r0:r0 + h, c0:c0 + w] = np.transpose(tile, (1, 2, 0))
    return np.rint(canvas * 255.0).astype(np.uint8)


def _near_square(n):
    cols = int(math.ceil(math.sqrt(n)))
    rows = int(math.ceil(n / cols))
    return rows, cols


def grid_fixed_human(swapper, human, worn, articles, out_path=None):
    """One person swapped into every article of a list; near-square layout."""
    if not articles:
        raise ValidationError("articles list is empty")
    tiles = []
    for article in articles:
        result = swap(swapper, human, worn, article)
        tiles.append(_unit_tile(result.composite.data))
    rows, cols = _near_square(len(tiles))
    return _finish_grid(tiles, rows, cols, out_path)


def grid_fixed_article(swapper, pairs, article, out_path=None):
    """One article swapped onto every (person, worn article) pair of a list."""
    if not pairs:
        raise ValidationError("pairs list is empty")
    tiles = []
    for human, worn in pairs:
        result = swap(swapper, human, worn, article)
        tiles.append(_unit_tile(result.composite.data))
    rows, cols = _near_square(len(tiles))
    return _finish_grid(tiles, rows, cols, out_path)


def grid_triplets(swapper, triplets, out_path=None, include_alpha=False):
    """One row per (person, worn, target): inputs, composite, optional matte."""
    if not triplets:
        raise ValidationError("triplets list is empty")
    tiles = []
    for human, worn, target in triplets:
        result = swap(swapper, human, worn, target)
        tiles.append(_unit_tile(_as_chw(human)))
        tiles.append(_unit_tile(_as_chw(worn)))
        tiles.append(_unit_tile(_as_chw(target)))
        tiles.append(_unit_tile(result.composite.data))
        if include_alpha:
            tiles.append(_alpha_tile(result.alpha.data))
    cols = 5 if include_alpha else 4
    return _finish_grid(tiles, len(triplets), cols, out_path)


def _finish_grid(tiles, rows, cols, out_path):
    canvas = _assemble(tiles, rows, cols)
    if out_path is not None:
        Image.fromarray(canvas, mode="RGB").save(out_path, format="PNG")
    return canvas


GRID_MODES = ("fixed-human", "fixed-article", "triplet-rows")


def grid_render(swapper, mode, out_path=None, *, human=None, worn=None,
                articles=None, pairs=None, article=None, triplets=None,
                include_alpha=False):
    """Dispatch to one of the three grid layouts by mode name."""
    if mode == "fixed-human":
        return grid_fixed_human(swapper, human, worn, articles, out_path)
    if mode == "fixed-article":
        return grid_fixed_article(swapper, pairs, article, out_path)
    if mode == "triplet-rows":
        return grid_triplets(swapper, triplets, out_path, include_alpha)
    raise ValidationError(f"unknown grid mode {mode!r}; expected one of {GRID_MODES}")
