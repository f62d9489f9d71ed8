"""Learned clothing swaps on person images, with implicit alpha mattes."""

from .data import (
    DatasetManifest,
    ManifestEntry,
    TripletBatch,
    TripletSampler,
    draw_triplet_indices,
    load_manifest,
    sample_triplets,
)
from .errors import (
    CheckpointIntegrityError,
    CheckpointVersionError,
    ClothSwapError,
    DatasetTooSmallError,
    IngestionError,
    TrainingAbortError,
    ValidationError,
)
from .estimator import ClothSwapGAN
from .evaluation import (
    EvalReport,
    ModelSwapper,
    OracleSwapper,
    SwapResult,
    dominant_color,
    evaluate_toy,
    grid_render,
    load_swapper,
    swap,
)
from .images import (
    UNIT,
    UNIT_SIGNED,
    ImageTensor,
    denormalize,
    load_image,
    load_mask,
    normalize,
    save_image,
    save_mask,
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
    GeneratorOutput,
    GeneratorSpec,
    PatchDiscriminator,
    SwapGenerator,
    blend_composite,
    build_discriminator,
    build_generator,
    inject_input_copies,
    receptive_field,
)
from .toydata import (
    DEFAULT_PALETTE,
    ArticleStyle,
    PairParams,
    ToyDatasetSpec,
    load_toy_masks,
    pair_params,
    render_article,
    render_human,
    synthesize_toy_dataset,
    worn_mask,
)
from .training import (
    TrainConfig,
    Trainer,
    load_checkpoint,
    save_checkpoint,
    train_loop,
)

__version__ = "0.1.0"

__all__ = [
    "ArticleStyle",
    "CheckpointIntegrityError",
    "CheckpointVersionError",
    "ClothSwapError",
    "ClothSwapGAN",
    "DatasetManifest",
    "DatasetTooSmallError",
    "DEFAULT_PALETTE",
    "DiscriminatorSpec",
    "EvalReport",
    "GeneratorOutput",
    "GeneratorSpec",
    "ImageTensor",
    "IngestionError",
    "LossReport",
    "LossWeights",
    "ManifestEntry",
    "ModelSwapper",
    "OracleSwapper",
    "PairParams",
    "PatchDiscriminator",
    "SwapGenerator",
    "SwapResult",
    "ToyDatasetSpec",
    "TrainConfig",
    "Trainer",
    "TrainingAbortError",
    "TripletBatch",
    "TripletSampler",
    "UNIT",
    "UNIT_SIGNED",
    "ValidationError",
    "adversarial_loss_d",
    "adversarial_loss_g",
    "blend_composite",
    "build_discriminator",
    "build_generator",
    "cycle_loss",
    "denormalize",
    "dominant_color",
    "draw_triplet_indices",
    "evaluate_toy",
    "grid_render",
    "identity_loss",
    "inject_input_copies",
    "load_checkpoint",
    "load_image",
    "load_manifest",
    "load_mask",
    "load_swapper",
    "load_toy_masks",
    "normalize",
    "pair_params",
    "receptive_field",
    "render_article",
    "render_human",
    "sample_triplets",
    "save_checkpoint",
    "save_image",
    "save_mask",
    "swap",
    "synthesize_toy_dataset",
    "total_losses",
    "train_loop",
    "worn_mask",
]
