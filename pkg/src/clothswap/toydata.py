"""Procedural toy dataset: silhouettes wearing colored articles, with exact masks.

Stands in for a real human/article photo corpus at desk scale. Every pair k
gets an article product image (patterned rectangle on a plain background) and
a human image (a fixed body silhouette wearing that article on the torso,
under a small per-pair affine jitter and brightness shift). The exact binary
torso-region mask is emitted alongside, which real fashion data lacks, so
alpha-matte quality can be scored quantitatively.

All per-pair randomness derives from independent child seeds of the dataset
seed, so any pair's parameters can be recomputed in isolation.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .data import MANIFEST_NAME, load_manifest
from .errors import ValidationError
from .images import UNIT, ImageTensor, load_mask, save_image, save_mask
from .validation import check_resolution

BACKGROUND = (0.92, 0.92, 0.92)
BODY_COLOR = (0.76, 0.60, 0.46)

# body layout in (row, col) fractions of the canvas
HEAD_CENTER = (0.14, 0.50)
HEAD_RADII = (0.09, 0.10)
TORSO_ROWS = (0.24, 0.62)
TORSO_COLS = (0.30, 0.70)
ARM_ROWS = (0.26, 0.55)
ARM_COLS = ((0.21, 0.29), (0.71, 0.79))
LEG_ROWS = (0.62, 0.92)
LEG_COLS = ((0.34, 0.48), (0.52, 0.66))

# article target area on the torso, and the rectangle on the product photo
WORN_ROWS = (0.26, 0.60)
WORN_COLS = (0.32, 0.68)
PRODUCT_ROWS = (0.30, 0.70)
PRODUCT_COLS = (0.25, 0.75)

STRIPE_BANDS = 4


@dataclass(frozen=True)
class ArticleStyle:
    """Color/pattern descriptor for one palette entry."""

    name: str
    rgb: tuple
    pattern: str = "solid"          # "solid" or "stripes"
    rgb2: tuple = (1.0, 1.0, 1.0)   # second stripe color

    def color_at(self, u, v):
        """Pattern color at relative coords (u across, v down), vectorized."""
        base = np.broadcast_to(np.asarray(self.rgb, dtype=np.float32), u.shape + (3,))
        if self.pattern == "solid":
            return base.copy()
        if self.pattern == "stripes":
            band = np.floor(np.clip(v, 0.0, 0.999999) * STRIPE_BANDS).astype(int)
            other = np.asarray(self.rgb2, dtype=np.float32)
            out = base.copy()
            out[band % 2 == 1] = other
            return out
        raise ValidationError(f"unknown pattern {self.pattern!r}")

    def mean_color(self):
        """Analytic mean color over the article rectangle."""
        if self.pattern == "solid":
            return np.asarray(self.rgb, dtype=np.float32)
        rgb = np.asarray(self.rgb, dtype=np.float32)
        rgb2 = np.asarray(self.rgb2, dtype=np.float32)
        return (rgb + rgb2) / 2.0


DEFAULT_PALETTE = (
    ArticleStyle("crimson", (0.78, 0.12, 0.16)),
    ArticleStyle("cobalt", (0.12, 0.28, 0.78)),
    ArticleStyle("forest", (0.10, 0.55, 0.22)),
    ArticleStyle("gold", (0.88, 0.72, 0.10)),
    ArticleStyle("violet", (0.52, 0.16, 0.68)),
    ArticleStyle("teal", (0.08, 0.62, 0.60)),
    ArticleStyle("tangerine", (0.92, 0.45, 0.08)),
    ArticleStyle("rose", (0.88, 0.36, 0.58)),
    ArticleStyle("navy-stripe", (0.14, 0.18, 0.50), "stripes", (0.86, 0.86, 0.90)),
    ArticleStyle("wine-stripe", (0.55, 0.10, 0.22), "stripes", (0.90, 0.84, 0.70)),
)


@dataclass(frozen=True)
class ToyDatasetSpec:
    count: int = 200
    resolution: tuple = (48, 64)          # (height, width)
    seed: int = 0
    article_palette: tuple = DEFAULT_PALETTE
    deformation: float = 0.05             # affine-jitter magnitude
    brightness_range: tuple = (0.90, 1.0)
    divisible_by: int = 8                 # 2^depth of the planned networks

    def __post_init__(self):
        if self.count < 2:
            raise ValidationError(f"count must be >= 2, got {self.count}")
        check_resolution(self.resolution, divisible_by=self.divisible_by)
        if not self.article_palette:
            raise ValidationError("article_palette must not be empty")
        if not 0.0 <= self.deformation <= 0.2:
            raise ValidationError(
                f"deformation must be in [0, 0.2], got {self.deformation}"
            )


@dataclass(frozen=True)
class PairParams:
    """Everything pair k was rendered from; recomputable from a ToyDatasetSpec."""

    index: int
    style: ArticleStyle
    brightness: float
    angle: float        # radians
    scale: float
    shift: tuple        # (rows, cols) in pixels


def pair_params(spec: ToyDatasetSpec, index: int) -> PairParams:
    h, w = spec.resolution
    child = np.random.SeedSequence(spec.seed).spawn(spec.count)[index]
    rng = np.random.default_rng(child)
    d = spec.deformation
    lo, hi = spec.brightness_range
    return PairParams(
        index=index,
        style=spec.article_palette[index % len(spec.article_palette)],
        brightness=float(rng.uniform(lo, hi)),
        angle=float(rng.uniform(-0.6 * d, 0.6 * d)),
        scale=float(rng.uniform(1.0 - 0.5 * d, 1.0 + 0.5 * d)),
        shift=(
            float(rng.uniform(-0.5 * d, 0.5 * d) * h),
            float(rng.uniform(-0.5 * d, 0.5 * d) * w),
        ),
    )


def _pixel_grid(resolution):
    h, w = resolution
    rows = np.arange(h, dtype=np.float32) + 0.5
    cols = np.arange(w, dtype=np.float32) + 0.5
    return np.meshgrid(rows, cols, indexing="ij")


def _rect_px(rows, cols, resolution):
    h, w = resolution
    return rows[0] * h, rows[1] * h, cols[0] * w, cols[1] * w


def worn_region_coords(params: PairParams, resolution):
    """Map pixel centers into the jittered worn-rectangle frame.

    Returns (u, v) arrays: u across the article, v down it; a pixel belongs to
    the worn region iff both lie in [0, 1).
    """
    r0, r1, c0, c1 = _rect_px(WORN_ROWS, WORN_COLS, resolution)
    cr, cc = (r0 + r1) / 2.0, (c0 + c1) / 2.0
    rr, cc_grid = _pixel_grid(resolution)
    # undo shift, rotation, and scale about the rectangle center
    dr = rr - cr - params.shift[0]
    dc = cc_grid - cc - params.shift[1]
    cos, sin = math.cos(-params.angle), math.sin(-params.angle)
    lr = (cos * dr - sin * dc) / params.scale + cr
    lc = (sin * dr + cos * dc) / params.scale + cc
    u = (lc - c0) / (c1 - c0)
    v = (lr - r0) / (r1 - r0)
    return u, v


def worn_mask(params: PairParams, resolution) -> np.ndarray:
    """Exact binary mask of the jittered worn region, [H,W] in {0.0, 1.0}."""
    u, v = worn_region_coords(params, resolution)
    mask = (u >= 0.0) & (u < 1.0) & (v >= 0.0) & (v < 1.0)
    return mask.astype(np.float32)


def render_article(style: ArticleStyle, resolution) -> ImageTensor:
    """Product photo: the article rectangle centered on a plain background."""
    h, w = resolution
    img = np.empty((h, w, 3), dtype=np.float32)
    img[:] = BACKGROUND
    r0, r1, c0, c1 = _rect_px(PRODUCT_ROWS, PRODUCT_COLS, resolution)
    rr, cc = _pixel_grid(resolution)
    inside = (rr >= r0) & (rr < r1) & (cc >= c0) & (cc < c1)
    u = (cc - c0) / (c1 - c0)
    v = (rr - r0) / (r1 - r0)
    img[inside] = style.color_at(u, v)[inside]
    return ImageTensor(np.transpose(img, (2, 0, 1)), UNIT)


def product_region_slice(resolution):
    """Pixel slice of the article rectangle on the product photo."""
    r0, r1, c0, c1 = _rect_px(PRODUCT_ROWS, PRODUCT_COLS, resolution)
    return (
        slice(int(math.ceil(r0 - 0.5)), int(math.ceil(r1 - 0.5))),
        slice(int(math.ceil(c0 - 0.5)), int(math.ceil(c1 - 0.5))),
    )


def _body_canvas(resolution):
    h, w = resolution
    img = np.empty((h, w, 3), dtype=np.float32)
    img[:] = BACKGROUND
    rr, cc = _pixel_grid(resolution)
    body = np.zeros((h, w), dtype=bool)

    hr, hc = HEAD_CENTER[0] * h, HEAD_CENTER[1] * w
    ra, rb = HEAD_RADII[0] * h, HEAD_RADII[1] * w
    body |= ((rr - hr) / ra) ** 2 + ((cc - hc) / rb) ** 2 <= 1.0

    for rows, cols in (
        (TORSO_ROWS, TORSO_COLS),
        (ARM_ROWS, ARM_COLS[0]),
        (ARM_ROWS, ARM_COLS[1]),
        (LEG_ROWS, LEG_COLS[0]),
        (LEG_ROWS, LEG_COLS[1]),
    ):
        r0, r1, c0, c1 = _rect_px(rows, cols, resolution)
        body |= (rr >= r0) & (rr < r1) & (cc >= c0) & (cc < c1)

    img[body] = BODY_COLOR
    return img


def render_human(params: PairParams, resolution):
    """Human image wearing the pair's article; returns (image, mask)."""
    img = _body_canvas(resolution)
    u, v = worn_region_coords(params, resolution)
    mask = (u >= 0.0) & (u < 1.0) & (v >= 0.0) & (v < 1.0)
    content = params.style.color_at(np.clip(u, 0, 1), np.clip(v, 0, 1))
    img[mask] = content[mask] * params.brightness
    _check_mask_inside(mask)
    return ImageTensor(np.transpose(img, (2, 0, 1)), UNIT), mask.astype(np.float32)


def _check_mask_inside(mask):
    if not mask.any():
        raise ValidationError("worn-region mask is empty")
    if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
        raise ValidationError("worn-region mask touches the image border")


def synthesize_toy_dataset(spec: ToyDatasetSpec, out_dir):
    """Write a full toy dataset under ``out_dir``.

    Produces humans/, articles/, masks/ PNGs plus the manifest file, and
    returns (manifest, ground_truth_masks) with masks ordered like the
    manifest entries. Fully deterministic given spec.seed.
    """
    out_dir = os.path.abspath(out_dir)
    for sub in ("humans", "articles", "masks"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    masks = []
    lines = []
    for k in range(spec.count):
        params = pair_params(spec, k)
        pair_id = f"p{k:04d}"
        article = render_article(params.style, spec.resolution)
        human, mask = render_human(params, spec.resolution)

        human_rel = os.path.join("humans", f"{pair_id}.png")
        article_rel = os.path.join("articles", f"{pair_id}.png")
        save_image(human, os.path.join(out_dir, human_rel))
        save_image(article, os.path.join(out_dir, article_rel))
        save_mask(mask, mask_path(out_dir, pair_id))
        masks.append(ImageTensor(mask[None, :, :], UNIT))
        lines.append(f"{pair_id}\t{human_rel}\t{article_rel}\n")

    with open(os.path.join(out_dir, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        fh.writelines(lines)

    return load_manifest(out_dir), masks


def mask_path(root, pair_id):
    return os.path.join(root, "masks", f"{pair_id}.png")


def load_toy_masks(manifest):
    """Ground-truth masks for a synthesized dataset, in manifest order."""
    return [load_mask(mask_path(manifest.root, e.pair_id)) for e in manifest.entries]
