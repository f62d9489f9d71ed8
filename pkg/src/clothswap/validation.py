"""Small input-validation helpers used at public API boundaries."""

import numpy as np

from .errors import ValidationError

RANGE_BOUNDS = {
    "unit": (0.0, 1.0),
    "unit_signed": (-1.0, 1.0),
}


def check_range_tag(tag):
    if tag not in RANGE_BOUNDS:
        raise ValidationError(
            f"unknown range_tag {tag!r}; expected one of {sorted(RANGE_BOUNDS)}"
        )
    return tag


def check_image_array(data, name="image"):
    """Validate a [channels, height, width] float array; returns it as float32."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 3:
        raise ValidationError(f"{name}: expected 3 dims [C,H,W], got shape {arr.shape}")
    c, h, w = arr.shape
    if c not in (1, 3):
        raise ValidationError(f"{name}: channels must be 1 or 3, got {c}")
    if h < 1 or w < 1:
        raise ValidationError(f"{name}: height and width must be >= 1, got {h}x{w}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: contains non-finite values")
    return arr


def check_in_range(arr, tag, name="image"):
    lo, hi = RANGE_BOUNDS[check_range_tag(tag)]
    amin, amax = float(arr.min()), float(arr.max())
    if amin < lo or amax > hi:
        raise ValidationError(
            f"{name}: values [{amin:.6g}, {amax:.6g}] outside declared range "
            f"{tag!r} [{lo}, {hi}]"
        )


def check_resolution(resolution, divisible_by=1, name="resolution"):
    """Validate an (height, width) pair, optionally requiring divisibility."""
    try:
        h, w = (int(resolution[0]), int(resolution[1]))
    except (TypeError, ValueError, IndexError):
        raise ValidationError(f"{name}: expected (height, width), got {resolution!r}")
    if h < 1 or w < 1:
        raise ValidationError(f"{name}: dims must be positive, got {h}x{w}")
    if divisible_by > 1 and (h % divisible_by or w % divisible_by):
        raise ValidationError(
            f"{name}: {h}x{w} not divisible by {divisible_by}"
        )
    return h, w


def check_positive(value, name, kind=float):
    value = kind(value)
    if not value > 0:
        raise ValidationError(f"{name} must be > 0, got {value}")
    return value


def check_non_negative(value, name, kind=float):
    value = kind(value)
    if not np.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be finite and >= 0, got {value}")
    return value
