"""Adversarial training loop, configuration, and checkpointing.

Every step draws a fresh batch of (person, worn article, target article)
triplets, updates the discriminator on real / generated / mismatched pairs,
then updates the generator through the freshly updated discriminator plus the
identity and cycle terms. Strict 1:1 alternation, Adam for both players.

Checkpoints are a small binary container: magic, format version, SHA-256 of
the payload, then a pickled payload holding both networks' weights, both
optimizer states, the training config, the data RNG state, and the step
counter — everything converted to numpy so that save -> load -> save is
byte-identical.
"""

import hashlib
import json
import logging
import os
import pickle
import struct
from dataclasses import dataclass, field, asdict

import numpy as np
import torch

from .data import TripletBatch, TripletSampler, load_manifest
from .errors import (
    CheckpointIntegrityError,
    CheckpointVersionError,
    ValidationError,
)
from .losses import (
    LossReport,
    LossWeights,
    adversarial_loss_d,
    adversarial_loss_g,
    cycle_loss,
    identity_loss,
    total_losses,
)
from .networks import (
    DiscriminatorSpec,
    GeneratorSpec,
    build_discriminator,
    build_generator,
)
from .validation import check_positive, check_resolution

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"CAGANCKPT"
CHECKPOINT_FORMAT_VERSION = 1
_HEADER = struct.Struct("<I")


@dataclass(frozen=True)
class TrainConfig:
    data_root: str = ""
    steps: int = 10000
    batch_size: int = 16
    learning_rate: float = 2e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    weights: LossWeights = field(default_factory=LossWeights)
    resolution: tuple = (48, 64)
    generator_channels: int = 16
    generator_depth: int = 3
    discriminator_channels: int = 16
    seed: int = 0
    checkpoint_every: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))
        check_positive(self.steps, "steps")
        check_positive(self.batch_size, "batch_size")
        check_positive(self.learning_rate, "learning_rate")
        check_positive(self.checkpoint_every, "checkpoint_every")
        check_resolution(self.resolution, divisible_by=2 ** self.generator_depth)

    def to_dict(self):
        record = asdict(self)
        record["resolution"] = list(self.resolution)
        return record

    @classmethod
    def from_dict(cls, record):
        record = dict(record)
        record["weights"] = LossWeights(**record["weights"])
        record["resolution"] = tuple(record["resolution"])
        return cls(**record)

    def generator_spec(self):
        return GeneratorSpec(
            input_resolution=self.resolution,
            base_channels=self.generator_channels,
            depth=self.generator_depth,
        )

    def discriminator_spec(self):
        return DiscriminatorSpec(
            input_resolution=self.resolution,
            base_channels=self.discriminator_channels,
        )


# --- checkpoint container ---------------------------------------------------

def _pack(obj):
    if isinstance(obj, torch.Tensor):
        return {"__kind__": "tensor",
                "data": np.ascontiguousarray(obj.detach().cpu().numpy())}
    if isinstance(obj, dict):
        return {k: _pack(v) for k, v in obj.items()}
    if isinstance(obj, tuple):
        return {"__kind__": "tuple", "items": [_pack(v) for v in obj]}
    if isinstance(obj, list):
        return [_pack(v) for v in obj]
    return obj


def _unpack(obj):
    if isinstance(obj, dict):
        kind = obj.get("__kind__")
        if kind == "tensor":
            return torch.from_numpy(obj["data"].copy())
        if kind == "tuple":
            return tuple(_unpack(v) for v in obj["items"])
        return {k: _unpack(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unpack(v) for v in obj]
    return obj


def save_checkpoint(state, path):
    """Serialize a training state dict to ``path``; returns the path."""
    payload = pickle.dumps(_pack(state), protocol=4)
    digest = hashlib.sha256(payload).digest()
    blob = CHECKPOINT_MAGIC + _HEADER.pack(CHECKPOINT_FORMAT_VERSION) + digest + payload
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return path


def load_checkpoint(path):
    """Read, verify, and deserialize a checkpoint written by save_checkpoint."""
    with open(path, "rb") as fh:
        blob = fh.read()
    prefix_len = len(CHECKPOINT_MAGIC) + _HEADER.size + 32
    if len(blob) < prefix_len or not blob.startswith(CHECKPOINT_MAGIC):
        raise CheckpointIntegrityError(f"{path}: not a recognized checkpoint file")
    offset = len(CHECKPOINT_MAGIC)
    (version,) = _HEADER.unpack_from(blob, offset)
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version} is not supported "
            f"(this build reads version {CHECKPOINT_FORMAT_VERSION})"
        )
    offset += _HEADER.size
    digest = blob[offset:offset + 32]
    payload = blob[offset + 32:]
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointIntegrityError(f"{path}: payload checksum mismatch")
    return _unpack(pickle.loads(payload))


# --- trainer -----------------------------------------------------------------

class Trainer:
    """Owns both networks, both optimizers, and the data-sampling RNG."""

    def __init__(self, config: TrainConfig):
        self.config = config
        seq = np.random.SeedSequence(config.seed)
        data_seq, g_seq, d_seq = seq.spawn(3)
        self.data_rng = np.random.default_rng(data_seq)
        g_seed = int(g_seq.generate_state(1, np.uint64)[0])
        d_seed = int(d_seq.generate_state(1, np.uint64)[0])
        self.generator = build_generator(config.generator_spec(), seed=g_seed)
        self.discriminator = build_discriminator(config.discriminator_spec(), seed=d_seed)
        betas = (config.adam_beta1, config.adam_beta2)
        self.opt_g = torch.optim.Adam(
            self.generator.parameters(), lr=config.learning_rate, betas=betas
        )
        self.opt_d = torch.optim.Adam(
            self.discriminator.parameters(), lr=config.learning_rate, betas=betas
        )
        self.step = 0

    def train_step(self, batch: TripletBatch) -> LossReport:
        """One discriminator update followed by one generator update."""
        weights = self.config.weights
        x = torch.from_numpy(batch.x)
        y_old = torch.from_numpy(batch.y_old)
        y_new = torch.from_numpy(batch.y_new)

        g_out = self.generator(x, y_old, y_new)
        fake = g_out.composite

        self.opt_d.zero_grad()
        d_real = self.discriminator(x, y_old)
        d_fake = self.discriminator(fake.detach(), y_new)
        d_mismatch = self.discriminator(x, y_new)
        d_total, d_components = adversarial_loss_d(d_real, d_fake, d_mismatch)
        d_total.backward()
        self.opt_d.step()

        self.opt_g.zero_grad()
        g_adv = adversarial_loss_g(self.discriminator(fake, y_new))
        identity = identity_loss(g_out.alpha)
        cycled = self.generator(fake, y_new, y_old)
        cycle = cycle_loss(x, cycled.composite)
        g_total = (g_adv
                   + weights.gamma_identity * identity
                   + weights.gamma_cycle * cycle)
        g_total.backward()
        self.opt_g.step()

        self.step += 1
        return total_losses(d_components, g_adv, identity, cycle, weights,
                            step=self.step)

    def state_dict(self):
        return {
            "step": self.step,
            "config": self.config.to_dict(),
            "generator": dict(self.generator.state_dict()),
            "discriminator": dict(self.discriminator.state_dict()),
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
            "data_rng": self.data_rng.bit_generator.state,
        }

    def load_state_dict(self, state):
        stored = TrainConfig.from_dict(state["config"])
        if stored != self.config:
            raise ValidationError(
                "checkpoint was written with a different training config; "
                "resuming requires an identical one"
            )
        self.generator.load_state_dict(state["generator"])
        self.discriminator.load_state_dict(state["discriminator"])
        self.opt_g.load_state_dict(state["opt_g"])
        self.opt_d.load_state_dict(state["opt_d"])
        self.data_rng.bit_generator.state = state["data_rng"]
        self.step = int(state["step"])

    def save(self, path):
        return save_checkpoint(self.state_dict(), path)

    @classmethod
    def resume(cls, path, config: TrainConfig = None):
        """Rebuild a trainer from a checkpoint.

        If ``config`` is given it must equal the stored one; otherwise the
        stored config is used as-is.
        """
        state = load_checkpoint(path)
        stored = TrainConfig.from_dict(state["config"])
        if config is not None and config != stored:
            raise ValidationError(
                "checkpoint was written with a different training config; "
                "resuming requires an identical one"
            )
        trainer = cls(stored)
        trainer.load_state_dict(state)
        return trainer


def train_loop(config: TrainConfig, out_dir, resume_from=None) -> str:
    """Run training to ``config.steps``; returns the final checkpoint path.

    Writes ``metrics.jsonl`` (one JSON line per step), a periodic checkpoint
    every ``checkpoint_every`` steps, and ``ckpt_final.ckpt`` at completion.
    Nothing is written until the dataset and config have validated.
    """
    manifest = load_manifest(config.data_root)
    if resume_from is not None:
        trainer = Trainer.resume(resume_from, config)
    else:
        trainer = Trainer(config)
    sampler = TripletSampler(manifest, config.resolution)

    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, "metrics.jsonl")
    final_path = os.path.join(out_dir, "ckpt_final.ckpt")
    logger.info(
        "training on %d pairs for %d steps (resuming at %d)",
        manifest.size, config.steps, trainer.step,
    )
    with open(metrics_path, "a", encoding="utf-8") as metrics:
        while trainer.step < config.steps:
            batch = sampler.sample(config.batch_size, trainer.data_rng)
            report = trainer.train_step(batch)
            record = {"step": trainer.step}
            record.update(report.to_dict())
            metrics.write(json.dumps(record) + "\n")
            metrics.flush()
            if trainer.step % 50 == 0 or trainer.step == config.steps:
                logger.info(
                    "step %d: d_total=%.4f g_total=%.4f",
                    trainer.step, report.d_total, report.g_total,
                )
            if trainer.step % config.checkpoint_every == 0 and trainer.step < config.steps:
                trainer.save(os.path.join(out_dir, f"ckpt_{trainer.step:06d}.ckpt"))
    trainer.save(final_path)
    return final_path
