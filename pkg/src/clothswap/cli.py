"""Command-line interface.

Subcommands: ``synth-data`` (write a toy dataset), ``train``, ``swap`` (one
triple through a checkpoint), ``grid`` (qualitative result sheets), ``eval``
(toy-corpus metrics). Exit codes: 0 success, 1 validation/usage error, 2
runtime error. The ``CAGAN_LOG`` environment variable picks the log level:
quiet, info (default), or debug. No command writes any output file before its
inputs have validated.
"""

import argparse
import json
import logging
import os
import re
import sys

import numpy as np

from .data import TripletSampler, draw_triplet_indices, load_manifest
from .errors import ClothSwapError, IngestionError, ValidationError
from .evaluation import GRID_MODES, evaluate_toy, grid_render, load_swapper, swap
from .images import UNIT_SIGNED, load_image, save_image
from .losses import LossWeights
from .toydata import ToyDatasetSpec, load_toy_masks, mask_path, synthesize_toy_dataset
from .training import TrainConfig, train_loop

logger = logging.getLogger(__name__)

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit on bad flags."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def parse_resolution(text):
    """WIDTHxHEIGHT flag value to the internal (height, width) pair."""
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise ValidationError(
            f"resolution must look like 64x48 (WIDTHxHEIGHT), got {text!r}"
        )
    width, height = int(m.group(1)), int(m.group(2))
    return height, width


def _configure_logging():
    name = os.environ.get("CAGAN_LOG", "info").strip().lower()
    if name not in LOG_LEVELS:
        raise ValidationError(
            f"CAGAN_LOG must be one of {sorted(LOG_LEVELS)}, got {name!r}"
        )
    logging.basicConfig(
        stream=sys.stderr,
        level=LOG_LEVELS[name],
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="clothswap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="write a procedural toy dataset")
    p.add_argument("--out", required=True, help="dataset root directory to create")
    p.add_argument("--count", type=int, default=200, help="number of pairs")
    p.add_argument("--resolution", type=parse_resolution, default="64x48",
                   help="image size as WIDTHxHEIGHT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deformation", type=float, default=0.05,
                   help="worn-region jitter strength in [0, 0.2]")
    p.set_defaults(handler=_cmd_synth_data)

    p = sub.add_parser("train", help="train a swap model")
    p.add_argument("--data", required=True, help="dataset root with a manifest")
    p.add_argument("--out", required=True, help="run directory for checkpoints/metrics")
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.0002)
    p.add_argument("--beta1", type=float, default=0.5)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--gamma-i", type=float, default=0.1,
                   help="identity (alpha sparsity) weight")
    p.add_argument("--gamma-c", type=float, default=1.0, help="cycle weight")
    p.add_argument("--resolution", type=parse_resolution, default="64x48",
                   help="training size as WIDTHxHEIGHT")
    p.add_argument("--gen-channels", type=int, default=16)
    p.add_argument("--gen-depth", type=int, default=3)
    p.add_argument("--disc-channels", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=1000)
    p.add_argument("--resume", default=None, metavar="CKPT",
                   help="checkpoint to resume from (config must match)")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("swap", help="swap one article onto one person image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--human", required=True, help="person image (PNG)")
    p.add_argument("--worn", required=True, help="currently worn article image")
    p.add_argument("--target", required=True, help="article to swap in")
    p.add_argument("--out", required=True, help="composite PNG to write")
    p.add_argument("--alpha-out", default=None, help="optional matte PNG to write")
    p.set_defaults(handler=_cmd_swap)

    p = sub.add_parser("grid", help="render a qualitative grid PNG")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--mode", required=True, choices=GRID_MODES)
    p.add_argument("--out", required=True)
    p.add_argument("--index", type=int, default=0,
                   help="anchor pair index (person or article, by mode)")
    p.add_argument("--count", type=int, default=8, help="tiles or rows to render")
    p.add_argument("--seed", type=int, default=0, help="triplet-rows draw seed")
    p.add_argument("--include-alpha", action="store_true",
                   help="add a matte column in triplet-rows mode")
    p.set_defaults(handler=_cmd_grid)

    p = sub.add_parser("eval", help="toy-corpus metrics for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="toy dataset root (needs masks/)")
    p.add_argument("--n-samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(handler=_cmd_eval)

    return parser


def _cmd_synth_data(args):
    spec = ToyDatasetSpec(
        count=args.count,
        resolution=args.resolution,
        seed=args.seed,
        deformation=args.deformation,
    )
    manifest, _ = synthesize_toy_dataset(spec, args.out)
    logger.info("wrote %d pairs under %s", manifest.size, args.out)


def _cmd_train(args):
    config = TrainConfig(
        data_root=args.data,
        steps=args.steps,
        batch_size=args.batch,
        learning_rate=args.lr,
        adam_beta1=args.beta1,
        adam_beta2=args.beta2,
        weights=LossWeights(args.gamma_i, args.gamma_c),
        resolution=args.resolution,
        generator_channels=args.gen_channels,
        generator_depth=args.gen_depth,
        discriminator_channels=args.disc_channels,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
    )
    final_path = train_loop(config, args.out, resume_from=args.resume)
    logger.info("final checkpoint: %s", final_path)


def _cmd_swap(args):
    swapper = load_swapper(args.checkpoint)
    resolution = swapper.resolution
    human = load_image(args.human, resolution=resolution, range_tag=UNIT_SIGNED)
    worn = load_image(args.worn, resolution=resolution, range_tag=UNIT_SIGNED)
    target = load_image(args.target, resolution=resolution, range_tag=UNIT_SIGNED)
    result = swap(swapper, human, worn, target)
    save_image(result.composite, args.out)
    if args.alpha_out:
        save_image(result.alpha, args.alpha_out)
    logger.info("wrote %s", args.out)


def _cmd_grid(args):
    swapper = load_swapper(args.checkpoint)
    manifest = load_manifest(args.data)
    if not 0 <= args.index < manifest.size:
        raise ValidationError(
            f"--index {args.index} out of range for {manifest.size} pairs"
        )
    if args.count < 1:
        raise ValidationError(f"--count must be >= 1, got {args.count}")
    sampler = TripletSampler(manifest, swapper.resolution)
    count = min(args.count, manifest.size)

    if args.mode == "fixed-human":
        grid_render(
            swapper, args.mode, args.out,
            human=sampler.human(args.index),
            worn=sampler.article(args.index),
            articles=[sampler.article(k) for k in range(count)],
        )
    elif args.mode == "fixed-article":
        grid_render(
            swapper, args.mode, args.out,
            pairs=[(sampler.human(k), sampler.article(k)) for k in range(count)],
            article=sampler.article(args.index),
        )
    else:
        rng = np.random.default_rng(args.seed)
        draws = draw_triplet_indices(manifest.size, count, rng)
        grid_render(
            swapper, args.mode, args.out,
            triplets=[
                (sampler.human(int(i)), sampler.article(int(i)), sampler.article(int(j)))
                for i, j in draws
            ],
            include_alpha=args.include_alpha,
        )
    logger.info("wrote %s", args.out)


def _cmd_eval(args):
    swapper = load_swapper(args.checkpoint)
    manifest = load_manifest(args.data)
    for entry in manifest.entries:
        if not os.path.exists(mask_path(manifest.root, entry.pair_id)):
            raise ValidationError(
                f"no ground-truth mask for pair {entry.pair_id!r} under "
                f"{os.path.join(manifest.root, 'masks')}"
            )
    masks = load_toy_masks(manifest)
    report = evaluate_toy(swapper, manifest, masks,
                          n_samples=args.n_samples, seed=args.seed)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        logger.info("wrote %s", args.out)
    else:
        print(text)


def run(argv=None) -> int:
    """Parse and execute; returns the process exit code instead of exiting."""
    try:
        _configure_logging()
        parser = build_parser()
        args = parser.parse_args(argv)
        args.handler(args)
        return 0
    except _UsageError as err:
        print(str(err), file=sys.stderr)
        return 1
    except SystemExit as err:  # argparse --help
        return int(err.code or 0)
    except (ValidationError, IngestionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ClothSwapError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
