"""Dataset manifests and seeded triplet sampling.

A dataset is a flat directory with a manifest file listing one
``pair_id<TAB>human_relpath<TAB>article_relpath`` record per line. Training
consumes triplets (x_i, y_i, y_j): a human image, the article worn on it, and
a different article to paint, with j != i always.
"""

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DatasetTooSmallError, IngestionError, ValidationError
from .images import UNIT_SIGNED, load_image

MANIFEST_NAME = "manifest.tsv"


@dataclass(frozen=True)
class ManifestEntry:
    pair_id: str
    human_path: str
    article_path: str


@dataclass(frozen=True)
class DatasetManifest:
    root: str
    entries: tuple

    @property
    def size(self):
        return len(self.entries)

    def __len__(self):
        return len(self.entries)


def load_manifest(root, manifest_name=MANIFEST_NAME) -> DatasetManifest:
    """Read and validate a dataset manifest under ``root``.

    Every listed file must exist and decode as an RGB image; pair_ids must be
    unique and there must be at least two pairs.
    """
    root = os.path.abspath(root)
    if not os.path.isdir(root):
        raise ValidationError(f"dataset root {root!r} is not a directory")
    manifest_path = os.path.join(root, manifest_name)
    if not os.path.isfile(manifest_path):
        raise ValidationError(f"manifest file {manifest_path!r} not found")

    entries = []
    seen = set()
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValidationError(
                    f"{manifest_path}:{lineno}: expected 3 tab-separated fields, "
                    f"got {len(parts)}"
                )
            pair_id, human_rel, article_rel = parts
            if pair_id in seen:
                raise ValidationError(
                    f"{manifest_path}:{lineno}: duplicate pair_id {pair_id!r}"
                )
            seen.add(pair_id)
            human = os.path.join(root, human_rel)
            article = os.path.join(root, article_rel)
            for role, path in (("human", human), ("article", article)):
                _check_decodable(pair_id, role, path)
            entries.append(ManifestEntry(pair_id, human, article))

    if len(entries) < 2:
        raise DatasetTooSmallError(
            f"dataset has {len(entries)} pair(s); triplet sampling needs >= 2"
        )
    return DatasetManifest(root=root, entries=tuple(entries))


def _check_decodable(pair_id, role, path):
    if not os.path.isfile(path):
        raise IngestionError(pair_id, f"{role} image missing: {path}")
    try:
        with Image.open(path) as img:
            img.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        raise IngestionError(pair_id, f"{role} image not decodable: {exc}") from exc


def draw_triplet_indices(n, batch_size, rng):
    """Draw ``batch_size`` (i, j) index pairs, i uniform, j uniform over != i."""
    if n < 2:
        raise DatasetTooSmallError(f"need >= 2 pairs to sample triplets, have {n}")
    if batch_size < 1:
        raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
    i = rng.integers(0, n, size=batch_size)
    j = rng.integers(0, n - 1, size=batch_size)
    j = j + (j >= i)  # skip over i, keeping j uniform on the other n-1 indices
    return np.stack([i, j], axis=1)


@dataclass(frozen=True)
class TripletBatch:
    """A batch of (x, y_old, y_new) images with the j != i guarantee."""

    x: np.ndarray       # [B,3,H,W], unit_signed
    y_old: np.ndarray   # [B,3,H,W], unit_signed
    y_new: np.ndarray   # [B,3,H,W], unit_signed
    indices: tuple = field(default=())

    def __post_init__(self):
        for name in ("x", "y_old", "y_new"):
            arr = getattr(self, name)
            if arr.ndim != 4 or arr.shape[1] != 3:
                raise ValidationError(f"{name}: expected [B,3,H,W], got {arr.shape}")
        if not (self.x.shape[0] == self.y_old.shape[0] == self.y_new.shape[0]):
            raise ValidationError("batch dims of x, y_old, y_new differ")
        if self.y_old.shape != self.y_new.shape:
            raise ValidationError("y_old and y_new resolutions differ")
        for i, j in self.indices:
            if i == j:
                raise ValidationError(f"triplet with i == j == {i}")

    def __len__(self):
        return self.x.shape[0]


class TripletSampler:
    """Loads, resizes, and caches pair images; draws seeded triplet batches.

    Decoding is a pure function of the path, so the (i, j) sequence drawn from
    the caller's rng fully determines every batch.
    """

    def __init__(self, manifest: DatasetManifest, resolution):
        if manifest.size < 2:
            raise DatasetTooSmallError(
                f"dataset has {manifest.size} pair(s); need >= 2"
            )
        self.manifest = manifest
        self.resolution = (int(resolution[0]), int(resolution[1]))
        self._cache = {}

    def human(self, idx) -> np.ndarray:
        return self._load(self.manifest.entries[idx].human_path)

    def article(self, idx) -> np.ndarray:
        return self._load(self.manifest.entries[idx].article_path)

    def _load(self, path):
        arr = self._cache.get(path)
        if arr is None:
            img = load_image(path, resolution=self.resolution, range_tag=UNIT_SIGNED)
            arr = img.data
            arr.setflags(write=False)
            self._cache[path] = arr
        return arr

    def sample(self, batch_size, rng) -> TripletBatch:
        indices = draw_triplet_indices(self.manifest.size, batch_size, rng)
        x = np.stack([self.human(i) for i, _ in indices])
        y_old = np.stack([self.article(i) for i, _ in indices])
        y_new = np.stack([self.article(j) for _, j in indices])
        return TripletBatch(x, y_old, y_new, tuple(map(tuple, indices.tolist())))


def sample_triplets(manifest, batch_size, rng, resolution) -> TripletBatch:
    """One-shot triplet sampling; long-running callers should hold a TripletSampler."""
    return TripletSampler(manifest, resolution).sample(batch_size, rng)
