"""Scikit-learn style estimator wrapping the adversarial trainer.

``fit`` takes a dataset root (or an already loaded manifest) and trains the
swap model; ``transform``/``predict`` map (person, worn, target) triples to
composites. Hyperparameters follow sklearn conventions: stored verbatim in
``__init__``, learned state on trailing-underscore attributes, so
``get_params``/``set_params``/``clone`` behave as usual.
"""

import os
import tempfile

import numpy as np
from sklearn.base import BaseEstimator

from .data import DatasetManifest
from .errors import ValidationError
from .evaluation import ModelSwapper, SwapResult, evaluate_toy, swap
from .losses import LossWeights
from .training import TrainConfig, Trainer, load_checkpoint, train_loop


class ClothSwapGAN(BaseEstimator):
    """Adversarially trained article swapper with a learned alpha matte."""

    def __init__(self, steps=10000, batch_size=16, learning_rate=2e-4,
                 adam_beta1=0.5, adam_beta2=0.999, gamma_identity=0.1,
                 gamma_cycle=1.0, resolution=(48, 64), generator_channels=16,
                 generator_depth=3, discriminator_channels=16, seed=0,
                 checkpoint_every=1000, out_dir=None):
        self.steps = steps
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.gamma_identity = gamma_identity
        self.gamma_cycle = gamma_cycle
        self.resolution = resolution
        self.generator_channels = generator_channels
        self.generator_depth = generator_depth
        self.discriminator_channels = discriminator_channels
        self.seed = seed
        self.checkpoint_every = checkpoint_every
        self.out_dir = out_dir

    def _make_config(self, data_root) -> TrainConfig:
        return TrainConfig(
            data_root=os.fspath(data_root),
            steps=self.steps,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            weights=LossWeights(self.gamma_identity, self.gamma_cycle),
            resolution=tuple(self.resolution),
            generator_channels=self.generator_channels,
            generator_depth=self.generator_depth,
            discriminator_channels=self.discriminator_channels,
            seed=self.seed,
            checkpoint_every=self.checkpoint_every,
        )

    def fit(self, X, y=None):
        """Train on the dataset at ``X`` (a root directory or manifest)."""
        if isinstance(X, DatasetManifest):
            data_root = X.root
        elif isinstance(X, (str, os.PathLike)):
            data_root = X
        else:
            raise ValidationError(
                "fit expects a dataset root path or a DatasetManifest, "
                f"got {type(X).__name__}"
            )
        config = self._make_config(data_root)
        out_dir = self.out_dir or tempfile.mkdtemp(prefix="clothswap-fit-")
        final_path = train_loop(config, out_dir)
        state = load_checkpoint(final_path)
        trainer = Trainer(config)
        trainer.load_state_dict(state)
        self.config_ = config
        self.generator_ = trainer.generator
        self.discriminator_ = trainer.discriminator
        self.checkpoint_path_ = final_path
        self.metrics_path_ = os.path.join(out_dir, "metrics.jsonl")
        self.swapper_ = ModelSwapper(self.generator_, config.resolution)
        return self

    @classmethod
    def from_checkpoint(cls, path):
        """Rehydrate a fitted estimator from a training checkpoint."""
        state = load_checkpoint(path)
        config = TrainConfig.from_dict(state["config"])
        est = cls(
            steps=config.steps,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            adam_beta1=config.adam_beta1,
            adam_beta2=config.adam_beta2,
            gamma_identity=config.weights.gamma_identity,
            gamma_cycle=config.weights.gamma_cycle,
            resolution=config.resolution,
            generator_channels=config.generator_channels,
            generator_depth=config.generator_depth,
            discriminator_channels=config.discriminator_channels,
            seed=config.seed,
            checkpoint_every=config.checkpoint_every,
        )
        trainer = Trainer(config)
        trainer.load_state_dict(state)
        est.config_ = config
        est.generator_ = trainer.generator
        est.discriminator_ = trainer.discriminator
        est.checkpoint_path_ = os.fspath(path)
        est.swapper_ = ModelSwapper(est.generator_, config.resolution)
        return est

    def _check_fitted(self):
        if not hasattr(self, "swapper_"):
            raise ValidationError("this ClothSwapGAN instance is not fitted yet")

    def transform(self, X):
        """Composite for each (person, worn, target) triple in ``X``.

        ``X`` is an iterable of triples of [3,H,W] unit_signed arrays (or
        ImageTensors); returns a [n,3,H,W] float32 array of composites.
        """
        self._check_fitted()
        results = [self.swap(*triple).composite.data for triple in X]
        if not results:
            raise ValidationError("transform got an empty sequence of triples")
        return np.stack(results)

    def predict(self, X):
        return self.transform(X)

    def swap(self, x, y_old, y_new) -> SwapResult:
        """Swap a single triple; returns the composite and its alpha matte."""
        self._check_fitted()
        return swap(self.swapper_, x, y_old, y_new)

    def score_toy(self, manifest, masks, n_samples=64, seed=0):
        """Toy-corpus metrics for the fitted model (see evaluate_toy)."""
        self._check_fitted()
        return evaluate_toy(self.swapper_, manifest, masks, n_samples, seed)
