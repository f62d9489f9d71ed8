"""Image value objects, range mapping, and PNG round-trips.

All pipeline images are [channels, height, width] float32 arrays carrying an
explicit value-range tag: "unit" for [0, 1] storage range, "unit_signed" for
the [-1, 1] range the networks consume. Alpha mattes are 1-channel "unit"
images.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError
from .validation import check_image_array, check_in_range, check_range_tag

UNIT = "unit"
UNIT_SIGNED = "unit_signed"


@dataclass(frozen=True)
class ImageTensor:
    """A [C,H,W] float32 image with a declared value range."""

    data: np.ndarray
    range_tag: str = UNIT_SIGNED

    def __post_init__(self):
        arr = check_image_array(self.data)
        check_in_range(arr, self.range_tag)
        object.__setattr__(self, "data", arr)

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def resolution(self):
        return self.data.shape[1], self.data.shape[2]


def normalize(image: ImageTensor, target: str = UNIT_SIGNED) -> ImageTensor:
    """Affine-map an image into the target range."""
    return _convert(image, target)


def denormalize(image: ImageTensor, target: str = UNIT) -> ImageTensor:
    """Inverse of normalize: map back to a storage range."""
    return _convert(image, target)


def _convert(image, target):
    check_range_tag(target)
    if image.range_tag == target:
        return ImageTensor(image.data.copy(), target)
    if image.range_tag == UNIT and target == UNIT_SIGNED:
        data = image.data * 2.0 - 1.0
    elif image.range_tag == UNIT_SIGNED and target == UNIT:
        data = (image.data + 1.0) / 2.0
    else:  # unreachable with the two known tags, kept for future ranges
        raise ValidationError(
            f"no range map from {image.range_tag!r} to {target!r}"
        )
    # rounding can nudge endpoints a hair past the bound
    np.clip(data, *_bounds(target), out=data)
    return ImageTensor(data, target)


def _bounds(tag):
    return (-1.0, 1.0) if tag == UNIT_SIGNED else (0.0, 1.0)


def load_image(path, resolution=None, range_tag=UNIT_SIGNED) -> ImageTensor:
    """Decode an 8-bit RGB PNG, optionally resize (bilinear), and retag."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        if resolution is not None:
            h, w = resolution
            if img.size != (w, h):
                img = img.resize((w, h), Image.BILINEAR)
        arr = np.asarray(img, dtype=np.float32) / 255.0
    unit = ImageTensor(np.transpose(arr, (2, 0, 1)), UNIT)
    return normalize(unit, range_tag)


def save_image(image: ImageTensor, path):
    """Write an image as 8-bit PNG (RGB for 3 channels, grayscale for 1)."""
    unit = denormalize(image, UNIT)
    arr = np.rint(unit.data * 255.0).astype(np.uint8)
    if arr.shape[0] == 1:
        Image.fromarray(arr[0], mode="L").save(path)
    else:
        Image.fromarray(np.transpose(arr, (1, 2, 0)), mode="RGB").save(path)


def load_mask(path) -> np.ndarray:
    """Read a {0, 255} grayscale PNG as a binary {0.0, 1.0} [H,W] array."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return (arr > 127).astype(np.float32)


def save_mask(mask: np.ndarray, path):
    """Write a binary [H,W] mask as a {0, 255} grayscale PNG."""
    arr = (np.asarray(mask) > 0.5).astype(np.uint8) * 255
    Image.fromarray(arr, mode="L").save(path)
