"""Neural building blocks: autodiff tensors, models, gradient checks, checkpoints."""

from .tensor import Tensor, param
from .gradcheck import check_gradients, numeric_gradient, rel_error
from .lstm import LSTMConfig, LSTMState, init_lstm_params, lstm_forward, lstm_param_manifest
from .transformer import (
    TransformerConfig,
    init_transformer_params,
    transformer_forward,
    transformer_param_manifest,
)
from .checkpoint import (
    ModelCheckpoint,
    dumps_checkpoint,
    load_checkpoint,
    loads_checkpoint,
    manifest_for,
    save_checkpoint,
)

__all__ = [
    "Tensor",
    "param",
    "check_gradients",
    "numeric_gradient",
    "rel_error",
    "LSTMConfig",
    "LSTMState",
    "init_lstm_params",
    "lstm_forward",
    "lstm_param_manifest",
    "TransformerConfig",
    "init_transformer_params",
    "transformer_forward",
    "transformer_param_manifest",
    "ModelCheckpoint",
    "dumps_checkpoint",
    "load_checkpoint",
    "loads_checkpoint",
    "manifest_for",
    "save_checkpoint",
]
