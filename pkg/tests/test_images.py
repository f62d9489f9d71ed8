import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clothswap import (
    UNIT,
    UNIT_SIGNED,
    ImageTensor,
    ValidationError,
    denormalize,
    load_image,
    load_mask,
    normalize,
    save_image,
    save_mask,
)


def _unit_image(shape=(3, 5, 7), seed=0):
    rng = np.random.default_rng(seed)
    return ImageTensor(rng.random(shape, dtype=np.float32), UNIT)


class TestImageTensor:
    def test_accepts_valid_unit_image(self):
        img = _unit_image()
        assert img.channels == 3
        assert img.resolution == (5, 7)

    def test_rejects_out_of_range(self):
        data = np.full((3, 4, 4), 1.5, dtype=np.float32)
        with pytest.raises(ValidationError):
            ImageTensor(data, UNIT)

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValidationError):
            ImageTensor(np.zeros((4, 4), dtype=np.float32), UNIT)

    def test_rejects_bad_channel_count(self):
        with pytest.raises(ValidationError):
            ImageTensor(np.zeros((2, 4, 4), dtype=np.float32), UNIT)

    def test_rejects_non_finite(self):
        data = np.zeros((3, 4, 4), dtype=np.float32)
        data[0, 0, 0] = np.nan
        with pytest.raises(ValidationError):
            ImageTensor(data, UNIT_SIGNED)

    def test_rejects_unknown_range_tag(self):
        with pytest.raises(ValidationError):
            ImageTensor(np.zeros((3, 4, 4), dtype=np.float32), "percent")


class TestRangeMapping:
    def test_normalize_maps_unit_to_signed(self):
        img = ImageTensor(np.array([[[0.0, 0.5, 1.0]]], dtype=np.float32), UNIT)
        signed = normalize(img)
        assert signed.range_tag == UNIT_SIGNED
        np.testing.assert_allclose(signed.data, [[[-1.0, 0.0, 1.0]]])

    def test_denormalize_inverts(self):
        signed = ImageTensor(
            np.array([[[-1.0, -0.25, 1.0]]], dtype=np.float32), UNIT_SIGNED
        )
        np.testing.assert_allclose(
            denormalize(signed).data, [[[0.0, 0.375, 1.0]]]
        )

    def test_same_tag_is_a_copy(self):
        img = _unit_image()
        again = normalize(img, UNIT)
        assert again.data is not img.data
        np.testing.assert_array_equal(again.data, img.data)

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_is_tight(self, seed):
        img = _unit_image(seed=seed)
        back = denormalize(normalize(img))
        assert back.range_tag == UNIT
        np.testing.assert_allclose(back.data, img.data, atol=1e-6)


class TestPngRoundTrip:
    def test_save_load_is_exact_at_8bit(self, tmp_path):
        # values on the uint8 lattice survive a full round trip untouched
        rng = np.random.default_rng(3)
        lattice = rng.integers(0, 256, size=(3, 6, 9)).astype(np.float32) / 255.0
        img = ImageTensor(lattice, UNIT)
        path = tmp_path / "img.png"
        save_image(img, path)
        loaded = load_image(path, range_tag=UNIT)
        np.testing.assert_array_equal(loaded.data, img.data)

    def test_save_signed_load_signed(self, tmp_path):
        img = normalize(_unit_image(seed=5))
        path = tmp_path / "img.png"
        save_image(img, path)
        loaded = load_image(path)  # unit_signed by default
        assert loaded.range_tag == UNIT_SIGNED
        np.testing.assert_allclose(loaded.data, img.data, atol=1.01 / 255.0)

    def test_load_resizes_when_asked(self, tmp_path):
        img = _unit_image(shape=(3, 8, 8))
        path = tmp_path / "img.png"
        save_image(img, path)
        loaded = load_image(path, resolution=(4, 6), range_tag=UNIT)
        assert loaded.resolution == (4, 6)

    def test_mask_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        mask = (rng.random((10, 12)) > 0.5).astype(np.float32)
        path = tmp_path / "mask.png"
        save_mask(mask, path)
        loaded = load_mask(path)
        assert loaded.dtype == np.float32
        np.testing.assert_array_equal(loaded, mask)
        assert set(np.unique(loaded)) <= {0.0, 1.0}
