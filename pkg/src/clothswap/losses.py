"""Adversarial, identity, and cycle losses.

The discriminator minimizes three binary cross-entropy style terms over its
score field: real worn pairs pushed toward 1, generated composites and
mismatched (person, wrong article) pairs pushed toward 0. The generator
maximizes the discriminator's score on its composites (non-saturating form),
keeps the alpha matte sparse (identity term), and must be able to undo its own
swap (cycle term). All terms are means — over the score field, over pixels,
and over the batch.
"""

import math
from dataclasses import dataclass, asdict

import torch

from .errors import TrainingAbortError, ValidationError
from .validation import check_non_negative

SCORE_EPS = 1e-7


def _safe_log(scores):
    # scores live in [0, 1]; clamp so exact 0/1 cannot produce inf
    return torch.log(scores.clamp(SCORE_EPS, 1.0 - SCORE_EPS))


@dataclass(frozen=True)
class LossWeights:
    gamma_identity: float = 0.1
    gamma_cycle: float = 1.0

    def __post_init__(self):
        check_non_negative(self.gamma_identity, "gamma_identity")
        check_non_negative(self.gamma_cycle, "gamma_cycle")

    def to_dict(self):
        return asdict(self)


def adversarial_loss_d(d_real, d_fake, d_mismatch):
    """Discriminator loss and its three components.

    Returns (total, (real_term, fake_term, mismatch_term)) where
    real_term = -mean log D(real pair), the other two = -mean log(1 - D(.)).
    All-0.5 scores give ln 2 per term.
    """
    if d_real.shape != d_fake.shape or d_real.shape != d_mismatch.shape:
        raise ValidationError(
            f"score fields must share a shape, got {tuple(d_real.shape)}, "
            f"{tuple(d_fake.shape)}, {tuple(d_mismatch.shape)}"
        )
    real_term = -_safe_log(d_real).mean()
    fake_term = -_safe_log(1.0 - d_fake).mean()
    mismatch_term = -_safe_log(1.0 - d_mismatch).mean()
    total = real_term + fake_term + mismatch_term
    return total, (real_term, fake_term, mismatch_term)


def adversarial_loss_g(d_fake):
    """Non-saturating generator objective: -mean log D(composite pair)."""
    return -_safe_log(d_fake).mean()


def identity_loss(alpha):
    """Mean absolute alpha — pressure to leave the person image untouched."""
    return alpha.abs().mean()


def cycle_loss(original, reconstructed):
    """Mean absolute error between an image and its round-trip swap."""
    if original.shape != reconstructed.shape:
        raise ValidationError(
            f"cycle pair must share a shape, got {tuple(original.shape)} "
            f"and {tuple(reconstructed.shape)}"
        )
    return (original - reconstructed).abs().mean()


@dataclass(frozen=True)
class LossReport:
    """One step's scalar loss values, as plain floats for logging."""

    d_real: float
    d_fake: float
    d_mismatch: float
    d_total: float
    g_adv: float
    identity: float
    cycle: float
    g_total: float

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, record):
        return cls(**{k: float(record[k]) for k in cls.__dataclass_fields__})


def total_losses(d_components, g_adv, identity, cycle, weights: LossWeights,
                 step=None) -> LossReport:
    """Assemble a LossReport, checking every term is finite.

    ``g_total = g_adv + gamma_identity * identity + gamma_cycle * cycle`` and
    ``d_total`` is the sum of the three discriminator components, recomputed
    in float so the report is internally consistent.
    """
    def _scalar(value):
        if isinstance(value, torch.Tensor):
            return float(value.detach())
        return float(value)

    real_term, fake_term, mismatch_term = (_scalar(t) for t in d_components)
    g_adv = _scalar(g_adv)
    identity = _scalar(identity)
    cycle = _scalar(cycle)
    values = {
        "d_real": real_term,
        "d_fake": fake_term,
        "d_mismatch": mismatch_term,
        "g_adv": g_adv,
        "identity": identity,
        "cycle": cycle,
    }
    values["d_total"] = real_term + fake_term + mismatch_term
    values["g_total"] = (
        g_adv + weights.gamma_identity * identity + weights.gamma_cycle * cycle
    )
    for term, value in values.items():
        if not math.isfinite(value):
            raise TrainingAbortError(term, step, value)
    return LossReport(**values)
