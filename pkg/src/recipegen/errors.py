"""Exception taxonomy shared across the engine."""


class RecipegenError(Exception):
    """Base class for all engine errors."""


class EmptyCorpusError(RecipegenError):
    """An operation that needs at least one record/document got none."""


class ValidationError(RecipegenError):
    """Input violates a documented invariant."""


class UnparseableError(RecipegenError):
    """Text carries no recognizable recipe structure."""


class ShapeError(RecipegenError):
    """Tensor operands have incompatible shapes."""


class InsufficientDataError(RecipegenError):
    """The encoded stream is too short for the requested context length."""


class ContextOverflowError(RecipegenError):
    """Input sequence is longer than the model's context window."""


class TrainingDivergedError(RecipegenError):
    """Loss or gradients became non-finite; carries the last good checkpoint."""

    def __init__(self, message: str, last_checkpoint=None):
        super().__init__(message)
        self.last_checkpoint = last_checkpoint


class CompatibilityError(RecipegenError):
    """Checkpoint and vocabulary (or request and model) do not match."""
