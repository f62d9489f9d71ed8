"""Exception types shared across the package."""


class ClothSwapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ClothSwapError, ValueError):
    """An input violated a documented precondition or invariant."""


class IngestionError(ClothSwapError):
    """A dataset entry could not be read or decoded."""

    def __init__(self, pair_id, message):
        self.pair_id = pair_id
        super().__init__(f"pair {pair_id!r}: {message}")


class DatasetTooSmallError(ValidationError):
    """Fewer than two pairs: triplet sampling needs at least one j != i."""


class CheckpointVersionError(ClothSwapError):
    """Checkpoint file carries a format version this build cannot read."""


class CheckpointIntegrityError(ClothSwapError):
    """Checkpoint file is corrupt (bad magic, truncation, or checksum)."""


class TrainingAbortError(ClothSwapError):
    """A loss term became non-finite; names the term and the step."""

    def __init__(self, term, step, value):
        self.term = term
        self.step = step
        self.value = value
        super().__init__(f"non-finite loss term {term!r} ({value}) at step {step}")
