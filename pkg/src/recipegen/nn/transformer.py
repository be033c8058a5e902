"""Decoder-only transformer: pre-norm blocks, causal attention, GELU feed-forward."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContextOverflowError, ShapeError, ValidationError
from . import tensor as T
from .tensor import Tensor


@dataclass
class TransformerConfig:
    vocab_size: int
    d_model: int
    n_heads: int
    n_layers: int
    ff_dim: int
    context_len: int = 256
    dropout_rate: float = 0.1
    tie_output: bool = False

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValidationError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.context_len < 1:
            raise ValidationError("context_len must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must be in [0, 1)")


def transformer_param_manifest(config: TransformerConfig) -> dict[str, tuple[int, ...]]:
    d, f = config.d_model, config.ff_dim
    manifest: dict[str, tuple[int, ...]] = {
        "tok_emb": (config.vocab_size, d),
        "pos_emb": (config.context_len, d),
    }
    for i in range(config.n_layers):
        manifest[f"layer{i}.ln1.g"] = (d,)
        manifest[f"layer{i}.ln1.b"] = (d,)
        manifest[f"layer{i}.attn.Wqkv"] = (d, 3 * d)
        manifest[f"layer{i}.attn.bqkv"] = (3 * d,)
        manifest[f"layer{i}.attn.Wo"] = (d, d)
        manifest[f"layer{i}.attn.bo"] = (d,)
        manifest[f"layer{i}.ln2.g"] = (d,)
        manifest[f"layer{i}.ln2.b"] = (d,)
        manifest[f"layer{i}.ff.W1"] = (d, f)
        manifest[f"layer{i}.ff.b1"] = (f,)
        manifest[f"layer{i}.ff.W2"] = (f, d)
        manifest[f"layer{i}.ff.b2"] = (d,)
    manifest["ln_f.g"] = (d,)
    manifest["ln_f.b"] = (d,)
    if not config.tie_output:
        manifest["out.W"] = (d, config.vocab_size)
    manifest["out.b"] = (config.vocab_size,)
    return manifest


def init_transformer_params(config: TransformerConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    """Normal(0, 0.02) weights, zero biases, unit layer-norm gains."""
    params: dict[str, Tensor] = {}
    for name, shape in transformer_param_manifest(config).items():
        if name.endswith(".g"):
            data = np.ones(shape)
        elif name.endswith(".b") or name.endswith(".bo") or name.endswith(".bqkv") or name.endswith(".b1") or name.endswith(".b2"):
            data = np.zeros(shape)
        else:
            data = rng.normal(0.0, 0.02, size=shape)
        params[name] = T.param(data)
    return params


def causal_mask(steps: int) -> np.ndarray:
    """Additive mask: 0 at or below the diagonal, -1e9 strictly above."""
    mask = np.triu(np.full((steps, steps), -1e9), k=1)
    return mask


def causal_attention(
    x: Tensor,
    Wqkv: Tensor,
    bqkv: Tensor,
    Wo: Tensor,
    bo: Tensor,
    n_heads: int,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> Tensor:
    """Masked multi-head self-attention over [T,d] or [B,T,d] input.

    Position t attends to positions <= t; scores are scaled by 1/sqrt(d_head).
    """
    single = x.ndim == 2
    if single:
        x = T.reshape(x, (1,) + x.shape)
    batch, steps, d_model = x.shape
    if d_model % n_heads != 0:
        raise ShapeError(f"d_model {d_model} not divisible by n_heads {n_heads}")
    d_head = d_model // n_heads

    qkv = T.add(T.matmul(T.reshape(x, (batch * steps, d_model)), Wqkv), bqkv)
    qkv = T.reshape(qkv, (batch, steps, 3 * d_model))

    def heads(part: Tensor) -> Tensor:
        part = T.reshape(part, (batch, steps, n_heads, d_head))
        return T.transpose(part, (0, 2, 1, 3))  # [B,H,T,dh]

    q = heads(T.slice_axis(qkv, -1, 0, d_model))
    k = heads(T.slice_axis(qkv, -1, d_model, 2 * d_model))
    v = heads(T.slice_axis(qkv, -1, 2 * d_model, 3 * d_model))

    scores = T.scale(T.matmul(q, T.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(d_head))
    scores = T.add(scores, Tensor(causal_mask(steps)))
    probs = T.softmax(scores, axis=-1)
    if training and dropout_rate > 0.0:
        probs = T.dropout(probs, dropout_rate, rng, training)
    ctx = T.matmul(probs, v)  # [B,H,T,dh]
    ctx = T.reshape(T.transpose(ctx, (0, 2, 1, 3)), (batch * steps, d_model))
    out = T.add(T.matmul(ctx, Wo), bo)
    out = T.reshape(out, (batch, steps, d_model))
    if single:
        out = T.reshape(out, (steps, d_model))
    return out


def transformer_forward(
    config: TransformerConfig,
    params: dict[str, Tensor],
    ids,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Next-token logits for each position of a [T] or [B,T] id array."""
    ids = np.asarray(ids, dtype=np.int64)
    single = ids.ndim == 1
    if single:
        ids = ids[None, :]
    batch, steps = ids.shape
    if steps > config.context_len:
        raise ContextOverflowError(f"sequence length {steps} exceeds context_len {config.context_len}")
    if training and config.dropout_rate > 0.0 and rng is None:
        raise ValueError("training-mode dropout needs an rng")

    d = config.d_model
    tok = T.embedding(params["tok_emb"], ids)
    pos = T.slice_axis(params["pos_emb"], 0, 0, steps)
    x = T.add(tok, pos)  # pos broadcasts over the batch axis
    x = T.dropout(x, config.dropout_rate, rng, training)

    for i in range(config.n_layers):
        attn_out = causal_attention(
            T.layer_norm(x, params[f"layer{i}.ln1.g"], params[f"layer{i}.ln1.b"]),
            params[f"layer{i}.attn.Wqkv"],
            params[f"layer{i}.attn.bqkv"],
            params[f"layer{i}.attn.Wo"],
            params[f"layer{i}.attn.bo"],
            config.n_heads,
            dropout_rate=config.dropout_rate,
            rng=rng,
            training=training,
        )
        x = T.add(x, T.dropout(attn_out, config.dropout_rate, rng, training))

        normed = T.layer_norm(x, params[f"layer{i}.ln2.g"], params[f"layer{i}.ln2.b"])
        flat = T.reshape(normed, (batch * steps, d))
        ff = T.add(T.matmul(flat, params[f"layer{i}.ff.W1"]), params[f"layer{i}.ff.b1"])
        ff = T.gelu(ff)
        ff = T.add(T.matmul(ff, params[f"layer{i}.ff.W2"]), params[f"layer{i}.ff.b2"])
        ff = T.reshape(ff, (batch, steps, d))
        x = T.add(x, T.dropout(ff, config.dropout_rate, rng, training))

    x = T.layer_norm(x, params["ln_f.g"], params["ln_f.b"])
    flat = T.reshape(x, (batch * steps, d))
    out_w = T.transpose(params["tok_emb"], (1, 0)) if config.tie_output else params["out.W"]
    logits = T.add(T.matmul(flat, out_w), params["out.b"])
    logits = T.reshape(logits, (batch, steps, config.vocab_size))
    if single:
        logits = T.reshape(logits, (steps, config.vocab_size))
    return logits
