import numpy as np
import pytest

from clothswap import (
    EvalReport,
    GeneratorSpec,
    ModelSwapper,
    OracleSwapper,
    TrainConfig,
    ValidationError,
    build_generator,
    dominant_color,
    evaluate_toy,
    grid_render,
    load_swapper,
    swap,
    train_loop,
)
from clothswap.evaluation import GRID_BORDER, _near_square
from clothswap.toydata import DEFAULT_PALETTE, render_article

RES = (16, 16)


def _model_swapper(seed=0):
    spec = GeneratorSpec(input_resolution=RES, base_channels=8, depth=2)
    return ModelSwapper(build_generator(spec, seed=seed), RES)


class TestDominantColor:
    def test_matches_solid_style_mean(self):
        style = DEFAULT_PALETTE[0]
        article = render_article(style, RES)
        got = dominant_color(article)
        want = style.mean_color() * 2.0 - 1.0  # unit -> unit_signed
        assert got.shape == (3,)
        np.testing.assert_allclose(got, want, atol=1e-5)

    def test_striped_style_averages_both_colors(self):
        style = DEFAULT_PALETTE[8]
        got = dominant_color(render_article(style, (64, 64)))
        want = style.mean_color() * 2.0 - 1.0
        np.testing.assert_allclose(got, want, atol=0.1)


class TestOracleSwapper:
    def test_metrics_of_a_perfect_swap(self, tiny_manifest, tiny_masks):
        oracle = OracleSwapper(tiny_masks)
        report = evaluate_toy(oracle, tiny_manifest, tiny_masks,
                              n_samples=16, seed=3)
        assert report.alpha_iou == 1.0
        assert report.identity_leakage == 0.0
        assert report.color_swap_error <= 1e-6
        assert 0.0 <= report.cycle_error < 0.2
        assert report.n_samples == 16
        assert report.seed == 3

    def test_report_round_trips_to_dict(self, tiny_manifest, tiny_masks):
        oracle = OracleSwapper(tiny_masks)
        report = evaluate_toy(oracle, tiny_manifest, tiny_masks, n_samples=4)
        as_dict = report.to_dict()
        assert EvalReport(**as_dict) == report

    def test_needs_person_index(self, tiny_masks):
        oracle = OracleSwapper(tiny_masks)
        x = np.zeros((3, *RES), dtype=np.float32)
        with pytest.raises(ValidationError):
            oracle.swap_indexed(x, x, x)

    def test_rejects_empty_mask_list(self):
        with pytest.raises(ValidationError):
            OracleSwapper([])


class TestModelSwapper:
    def test_untrained_network_yields_finite_report(self, tiny_manifest, tiny_masks):
        report = evaluate_toy(_model_swapper(), tiny_manifest, tiny_masks,
                              n_samples=6, seed=0)
        for value in (report.alpha_iou, report.color_swap_error,
                      report.identity_leakage, report.cycle_error):
            assert np.isfinite(value)
        assert 0.0 <= report.alpha_iou <= 1.0
        assert report.identity_leakage >= 0.0

    def test_evaluation_is_seed_deterministic(self, tiny_manifest, tiny_masks):
        a = evaluate_toy(_model_swapper(), tiny_manifest, tiny_masks,
                         n_samples=6, seed=7)
        b = evaluate_toy(_model_swapper(), tiny_manifest, tiny_masks,
                         n_samples=6, seed=7)
        assert a == b

    def test_swap_returns_validated_images(self, tiny_manifest):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        result = swap(_model_swapper(), sampler.human(0),
                      sampler.article(0), sampler.article(1))
        assert result.composite.data.shape == (3, *RES)
        assert result.composite.range_tag == "unit_signed"
        assert result.alpha.data.shape == (1, *RES)
        assert result.alpha.range_tag == "unit"

    def test_swap_rejects_wrong_resolution(self):
        x = np.zeros((3, 8, 8), dtype=np.float32)
        with pytest.raises(ValidationError, match="resolution"):
            swap(_model_swapper(), x, x, x)


class TestEvaluateToyValidation:
    def test_mask_count_mismatch(self, tiny_manifest, tiny_masks):
        with pytest.raises(ValidationError, match="masks"):
            evaluate_toy(_model_swapper(), tiny_manifest, tiny_masks[:-1])

    def test_mask_shape_mismatch(self, tiny_manifest, tiny_masks):
        bad = list(tiny_masks)
        bad[0] = np.zeros((8, 8), dtype=np.float32)
        with pytest.raises(ValidationError, match="shape"):
            evaluate_toy(_model_swapper(), tiny_manifest, bad)

    def test_zero_samples_rejected(self, tiny_manifest, tiny_masks):
        with pytest.raises(ValidationError):
            evaluate_toy(_model_swapper(), tiny_manifest, tiny_masks, n_samples=0)


class TestLoadSwapper:
    def test_rebuilds_generator_from_checkpoint(self, tiny_manifest, tmp_path):
        cfg = TrainConfig(
            data_root=str(tiny_manifest.root), steps=2, batch_size=2,
            resolution=RES, generator_channels=8, generator_depth=2,
            discriminator_channels=8, seed=1,
        )
        final = train_loop(cfg, tmp_path / "run")
        swapper = load_swapper(final)
        assert tuple(swapper.resolution) == RES
        x = np.zeros((3, *RES), dtype=np.float32)
        alpha, composite = swapper.swap_indexed(x, x, x)
        assert alpha.shape == (1, *RES)
        assert composite.shape == (3, *RES)
        assert np.isfinite(composite).all()


def _tile_geometry(n_tiles, rows, cols):
    h, w = RES
    return (rows * h + (rows - 1) * GRID_BORDER,
            cols * w + (cols - 1) * GRID_BORDER, 3)


class TestGrids:
    def test_near_square_layouts(self):
        assert _near_square(1) == (1, 1)
        assert _near_square(4) == (2, 2)
        assert _near_square(5) == (2, 3)
        assert _near_square(10) == (3, 4)

    def test_fixed_human_canvas_geometry(self, tiny_manifest):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        articles = [sampler.article(j) for j in range(5)]
        canvas = grid_render(_model_swapper(), "fixed-human",
                             human=sampler.human(0), worn=sampler.article(0),
                             articles=articles)
        assert canvas.dtype == np.uint8
        assert canvas.shape == _tile_geometry(5, 2, 3)
        # the gutter between tile columns stays white
        w = RES[1]
        assert (canvas[:, w:w + GRID_BORDER] == 255).all()

    def test_triplet_rows_column_count(self, tiny_manifest):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        triplets = [(sampler.human(i), sampler.article(i), sampler.article(i + 1))
                    for i in range(2)]
        plain = grid_render(_model_swapper(), "triplet-rows", triplets=triplets)
        with_alpha = grid_render(_model_swapper(), "triplet-rows",
                                 triplets=triplets, include_alpha=True)
        assert plain.shape == _tile_geometry(8, 2, 4)
        assert with_alpha.shape == _tile_geometry(10, 2, 5)

    def test_fixed_article_mode(self, tiny_manifest):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        pairs = [(sampler.human(i), sampler.article(i)) for i in range(3)]
        canvas = grid_render(_model_swapper(), "fixed-article",
                             pairs=pairs, article=sampler.article(3))
        assert canvas.shape == _tile_geometry(3, 2, 2)

    def test_png_output_is_deterministic(self, tiny_manifest, tmp_path):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        articles = [sampler.article(j) for j in range(4)]
        paths = [tmp_path / "a.png", tmp_path / "b.png"]
        for path in paths:
            grid_render(_model_swapper(), "fixed-human", out_path=path,
                        human=sampler.human(0), worn=sampler.article(0),
                        articles=articles)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError, match="grid mode"):
            grid_render(_model_swapper(), "mosaic")

    def test_empty_inputs_rejected(self, tiny_manifest):
        from clothswap import TripletSampler

        sampler = TripletSampler(tiny_manifest, RES)
        with pytest.raises(ValidationError, match="empty"):
            grid_render(_model_swapper(), "fixed-human",
                        human=sampler.human(0), worn=sampler.article(0),
                        articles=[])
        with pytest.raises(ValidationError, match="empty"):
            grid_render(_model_swapper(), "triplet-rows", triplets=[])
