"""Stacked LSTM language model: embed, scan, project to vocabulary logits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError, ValidationError
from . import tensor as T
from .tensor import Tensor


@dataclass
class LSTMConfig:
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    num_layers: int = 1
    context_len: int = 256

    def __post_init__(self):
        for name in ("vocab_size", "embed_dim", "hidden_dim", "num_layers", "context_len"):
            if getattr(self, name) < 1:
                raise ValidationError(f"LSTMConfig.{name} must be >= 1")


@dataclass
class LSTMState:
    """Recurrent state: one (hidden, cell) pair per layer, each [batch, hidden_dim]."""

    layers: list[tuple[Tensor, Tensor]]

    @staticmethod
    def zeros(config: LSTMConfig, batch: int) -> "LSTMState":
        return LSTMState(
            layers=[
                (Tensor(np.zeros((batch, config.hidden_dim))), Tensor(np.zeros((batch, config.hidden_dim))))
                for _ in range(config.num_layers)
            ]
        )


def lstm_param_manifest(config: LSTMConfig) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes, in canonical order."""
    manifest: dict[str, tuple[int, ...]] = {"embed": (config.vocab_size, config.embed_dim)}
    for layer in range(config.num_layers):
        in_dim = config.embed_dim if layer == 0 else config.hidden_dim
        manifest[f"cell{layer}.W"] = (in_dim + config.hidden_dim, 4 * config.hidden_dim)
        manifest[f"cell{layer}.b"] = (4 * config.hidden_dim,)
    manifest["out.W"] = (config.hidden_dim, config.vocab_size)
    manifest["out.b"] = (config.vocab_size,)
    return manifest


def init_lstm_params(config: LSTMConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    """Normal(0, 0.02) weights, zero biases, forget-gate bias 1.0."""
    params: dict[str, Tensor] = {}
    h = config.hidden_dim
    for name, shape in lstm_param_manifest(config).items():
        if name.endswith(".b"):
            data = np.zeros(shape)
            if name.startswith("cell"):
                data[h : 2 * h] = 1.0  # forget gate stays open early in training
        else:
            data = rng.normal(0.0, 0.02, size=shape)
        params[name] = T.param(data)
    return params


def lstm_cell(x: Tensor, state: tuple[Tensor, Tensor], W: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """One step: gates i,f,o,g from [x;h], then c' = f*c + i*g, h' = o*tanh(c')."""
    squeeze = x.ndim == 1
    if squeeze:
        x = T.reshape(x, (1, x.shape[0]))
        state = (T.reshape(state[0], (1, -1)), T.reshape(state[1], (1, -1)))
    h_prev, c_prev = state
    hidden = h_prev.shape[-1]
    if x.shape[0] != h_prev.shape[0] or W.shape != (x.shape[1] + hidden, 4 * hidden):
        raise ShapeError(f"lstm_cell shapes disagree: x{x.shape}, h{h_prev.shape}, W{W.shape}")

    z = T.add(T.matmul(T.concat([x, h_prev], axis=-1), W), b)
    i = T.sigmoid(T.slice_axis(z, -1, 0, hidden))
    f = T.sigmoid(T.slice_axis(z, -1, hidden, 2 * hidden))
    o = T.sigmoid(T.slice_axis(z, -1, 2 * hidden, 3 * hidden))
    g = T.tanh(T.slice_axis(z, -1, 3 * hidden, 4 * hidden))
    c = T.add(T.mul(f, c_prev), T.mul(i, g))
    h = T.mul(o, T.tanh(c))
    if squeeze:
        return T.reshape(h, (hidden,)), T.reshape(c, (hidden,))
    return h, c


def lstm_forward(
    config: LSTMConfig,
    params: dict[str, Tensor],
    ids,
    state: LSTMState | None = None,
) -> tuple[Tensor, LSTMState]:
    """Next-token logits for each position, plus the final recurrent state.

    ``ids`` is an int array of shape [T] or [B,T]; logits come back with the
    matching leading shape and a trailing vocab axis.
    """
    ids = np.asarray(ids, dtype=np.int64)
    single = ids.ndim == 1
    if single:
        ids = ids[None, :]
    batch, steps = ids.shape
    if steps > config.context_len:
        raise ShapeError(f"sequence length {steps} exceeds context_len {config.context_len}")
    if state is None:
        state = LSTMState.zeros(config, batch)

    emb = T.embedding(params["embed"], ids)  # [B,T,E]
    layer_states = list(state.layers)
    outputs = []
    for t in range(steps):
        x = T.reshape(T.slice_axis(emb, 1, t, t + 1), (batch, config.embed_dim))
        for layer in range(config.num_layers):
            h, c = lstm_cell(x, layer_states[layer], params[f"cell{layer}.W"], params[f"cell{layer}.b"])
            layer_states[layer] = (h, c)
            x = h
        outputs.append(x)

    hidden_seq = T.stack(outputs, axis=1)  # [B,T,H]
    flat = T.reshape(hidden_seq, (batch * steps, config.hidden_dim))
    logits = T.add(T.matmul(flat, params["out.W"]), params["out.b"])
    logits = T.reshape(logits, (batch, steps, config.vocab_size))
    if single:
        logits = T.reshape(logits, (steps, config.vocab_size))
    return logits, LSTMState(layers=layer_states)
