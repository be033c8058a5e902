"""Training loop: stream batching, Adam with clipping, checkpoints, perplexity."""

from __future__ import annotations

import dataclasses
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyCorpusError,
    InsufficientDataError,
    TrainingDivergedError,
    ValidationError,
)
from .nn import tensor as T
from .nn.checkpoint import ModelCheckpoint, config_class_for, save_checkpoint
from .nn.lstm import LSTMConfig, LSTMState, init_lstm_params, lstm_forward
from .nn.tensor import Tensor
from .nn.transformer import TransformerConfig, init_transformer_params, transformer_forward
from .tokenizer import Vocabulary, encode


@dataclass
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_steps: int = 1000
    checkpoint_every: int = 0  # 0 means only the final write
    seed: int = 0
    grad_clip_norm: float = 1.0  # 0 disables clipping
    log_every: int = 100
    early_stop_loss: float = 0.0  # stop once recent mean loss falls below; 0 disables

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValidationError("learning_rate must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValidationError("betas must lie in [0, 1)")
        if self.max_steps < 0:
            raise ValidationError("max_steps must be >= 0")
        if self.log_every < 1:
            raise ValidationError("log_every must be >= 1")


@dataclass
class TrainReport:
    kind: str
    total_steps: int
    seed: int
    final_loss: float
    losses: list[float] = field(repr=False)
    log_rows: list[tuple[int, float, float]] = field(repr=False)  # step, mean loss, tokens/s
    elapsed_s: float = 0.0
    ckpt_path: str | None = None
    stream_len: int = 0
    vocab_size: int = 0


_CONFIG_TYPES = {
    "vocab_size": int, "embed_dim": int, "hidden_dim": int, "num_layers": int,
    "context_len": int, "d_model": int, "n_heads": int, "n_layers": int,
    "ff_dim": int, "dropout_rate": float, "tie_output": bool,
    "batch_size": int, "learning_rate": float, "beta1": float, "beta2": float,
    "eps": float, "max_steps": int, "checkpoint_every": int, "seed": int,
    "grad_clip_norm": float, "log_every": int, "early_stop_loss": float,
}


def parse_kv_file(path: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and # comments are skipped."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError(f"line {lineno}: expected key=value, got {line!r}")
            out[key.strip()] = value.strip()
    return out


def _convert(key: str, text: str):
    typ = _CONFIG_TYPES.get(key)
    if typ is None:
        raise ValidationError(f"unknown config key {key!r}")
    if typ is bool:
        if text not in ("true", "false"):
            raise ValidationError(f"{key}: expected true/false, got {text!r}")
        return text == "true"
    try:
        return typ(text)
    except ValueError:
        raise ValidationError(f"{key}: cannot parse {text!r} as {typ.__name__}") from None


def build_configs(kind: str, kv: dict[str, str], vocab_size: int):
    """Split one flat key=value mapping into a model config and a TrainConfig.

    vocab_size always comes from the built vocabulary, never from the file.
    """
    if "vocab_size" in kv:
        raise ValidationError("vocab_size is derived from the corpus, not configurable")
    model_cls = config_class_for(kind)
    model_fields = {f.name for f in dataclasses.fields(model_cls)}
    train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
    model_kwargs = {"vocab_size": vocab_size}
    train_kwargs = {}
    for key, value in kv.items():
        if key in model_fields:
            model_kwargs[key] = _convert(key, value)
        elif key in train_fields:
            train_kwargs[key] = _convert(key, value)
        else:
            raise ValidationError(f"unknown config key {key!r}")
    return model_cls(**model_kwargs), TrainConfig(**train_kwargs)


def encode_stream(docs: list[str], vocab: Vocabulary) -> np.ndarray:
    """Encode each document and concatenate the id arrays back to back,
    mirroring how merged documents butt one recipe against the next."""
    pieces = [encode(vocab, doc) for doc in docs if doc]
    pieces = [p for p in pieces if p]
    if not pieces:
        raise EmptyCorpusError("no documents to build a stream from")
    return np.concatenate([np.asarray(p, dtype=np.int64) for p in pieces])


def make_stream(docs: list[str], vocab: Vocabulary, context_len: int, batch_size: int, seed):
    """Endless deterministic batch iterator over the concatenated stream.

    Yields (inputs[B,T], targets[B,T]) with targets shifted one position
    ahead; windows start uniformly at random under the given seed.
    """
    stream = encode_stream(docs, vocab)
    if len(stream) < context_len + 1:
        raise InsufficientDataError(
            f"stream has {len(stream)} tokens, need at least {context_len + 1}"
        )
    rng = np.random.default_rng(seed)
    while True:
        yield sample_batch(stream, batch_size, context_len, rng)


def sample_batch(
    stream: np.ndarray, batch_size: int, context_len: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One uniformly sampled window batch; targets are inputs shifted by one."""
    if len(stream) < context_len + 1:
        raise InsufficientDataError(
            f"stream has {len(stream)} tokens, need at least {context_len + 1}"
        )
    starts = rng.integers(0, len(stream) - context_len, size=batch_size)
    x = np.stack([stream[s:s + context_len] for s in starts])
    y = np.stack([stream[s + 1:s + context_len + 1] for s in starts])
    return x, y


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0


def init_adam(params: dict[str, Tensor]) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(p.data) for k, p in params.items()},
        v={k: np.zeros_like(p.data) for k, p in params.items()},
    )


def global_grad_norm(params: dict[str, Tensor]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def adam_step(params: dict[str, Tensor], state: AdamState, cfg: TrainConfig) -> float:
    """Clip gradients by global norm, then apply one bias-corrected Adam update.

    Returns the pre-clip gradient norm. Non-finite gradients halt training.
    """
    for name, p in params.items():
        if p.grad is not None and not np.all(np.isfinite(p.grad)):
            raise TrainingDivergedError(f"non-finite gradient in {name}")
    norm = global_grad_norm(params)
    scale = 1.0
    if cfg.grad_clip_norm > 0 and norm > cfg.grad_clip_norm:
        scale = cfg.grad_clip_norm / norm
    state.t += 1
    correct1 = 1.0 - cfg.beta1 ** state.t
    correct2 = 1.0 - cfg.beta2 ** state.t
    for name, p in params.items():
        if p.grad is None:
            continue
        g = p.grad * scale
        state.m[name] = cfg.beta1 * state.m[name] + (1.0 - cfg.beta1) * g
        state.v[name] = cfg.beta2 * state.v[name] + (1.0 - cfg.beta2) * (g * g)
        m_hat = state.m[name] / correct1
        v_hat = state.v[name] / correct2
        p.data -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
    return norm


def _forward_loss(kind: str, model_config, params, x, y, training, drop_rng) -> Tensor:
    batch, steps = x.shape
    if kind == "transformer":
        logits = transformer_forward(model_config, params, x, training=training, rng=drop_rng)
    else:
        logits, _ = lstm_forward(model_config, params, x)
    flat = T.reshape(logits, (batch * steps, model_config.vocab_size))
    return T.cross_entropy(flat, y.reshape(-1))


def train(
    kind: str,
    model_config,
    docs: list[str],
    vocab: Vocabulary,
    train_cfg: TrainConfig,
    out_path: str | None = None,
    log=None,
) -> tuple[ModelCheckpoint, TrainReport]:
    """Train from scratch over the concatenated document stream.

    Deterministic for a fixed seed: init, window sampling, and dropout each
    draw from a separate stream spawned from the one seed. A non-finite loss
    or gradient raises TrainingDivergedError carrying the last good
    parameters as a checkpoint. When out_path is given, the checkpoint is
    written there at completion and every checkpoint_every steps.
    """
    if not isinstance(model_config, config_class_for(kind)):
        raise ValidationError(f"model config type does not match kind {kind!r}")
    if model_config.vocab_size != vocab.size:
        raise ValidationError(
            f"model vocab_size {model_config.vocab_size} != vocabulary size {vocab.size}"
        )

    init_ss, stream_ss, drop_ss = np.random.SeedSequence(train_cfg.seed).spawn(3)
    init_rng = np.random.default_rng(init_ss)
    drop_rng = np.random.default_rng(drop_ss)

    if kind == "transformer":
        params = init_transformer_params(model_config, init_rng)
    else:
        params = init_lstm_params(model_config, init_rng)

    stream = encode_stream(docs, vocab)
    if len(stream) < model_config.context_len + 1:
        raise InsufficientDataError(
            f"stream has {len(stream)} tokens, need at least {model_config.context_len + 1}"
        )
    stream_rng = np.random.default_rng(stream_ss)

    def snapshot(step: int, loss_value: float) -> ModelCheckpoint:
        return ModelCheckpoint(
            kind=kind,
            config=model_config,
            params=params,
            vocab=vocab,
            meta={"steps": step, "final_loss": loss_value, "seed": train_cfg.seed},
        )

    adam = init_adam(params)
    losses: list[float] = []
    log_rows: list[tuple[int, float, float]] = []
    tokens_per_batch = train_cfg.batch_size * model_config.context_len
    started = time.monotonic()
    window_started = started
    total_steps = 0

    for step in range(1, train_cfg.max_steps + 1):
        x, y = sample_batch(stream, train_cfg.batch_size, model_config.context_len, stream_rng)
        for p in params.values():
            p.zero_grad()
        loss = _forward_loss(kind, model_config, params, x, y, True, drop_rng)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingDivergedError(
                f"loss became non-finite at step {step}",
                last_checkpoint=snapshot(step - 1, losses[-1] if losses else float("nan")),
            )
        loss.backward()
        try:
            adam_step(params, adam, train_cfg)
        except TrainingDivergedError as exc:
            raise TrainingDivergedError(
                f"{exc} at step {step}",
                last_checkpoint=snapshot(step - 1, losses[-1] if losses else float("nan")),
            ) from None
        losses.append(value)
        total_steps = step

        if step % train_cfg.log_every == 0 or step == train_cfg.max_steps:
            window = losses[-train_cfg.log_every:]
            now = time.monotonic()
            spent = max(now - window_started, 1e-9)
            rate = len(window) * tokens_per_batch / spent
            window_started = now
            log_rows.append((step, sum(window) / len(window), rate))
            if log is not None:
                log(step, sum(window) / len(window), rate)

        if train_cfg.checkpoint_every > 0 and out_path and step % train_cfg.checkpoint_every == 0:
            save_checkpoint(out_path, snapshot(step, value))

        if train_cfg.early_stop_loss > 0 and len(losses) >= train_cfg.log_every:
            recent = losses[-train_cfg.log_every:]
            if sum(recent) / len(recent) < train_cfg.early_stop_loss:
                break

    final_loss = losses[-1] if losses else float("nan")
    ckpt = snapshot(total_steps, final_loss)
    if out_path:
        save_checkpoint(out_path, ckpt)
    report = TrainReport(
        kind=kind,
        total_steps=total_steps,
        seed=train_cfg.seed,
        final_loss=final_loss,
        losses=losses,
        log_rows=log_rows,
        elapsed_s=time.monotonic() - started,
        ckpt_path=out_path,
        stream_len=int(len(stream)),
        vocab_size=vocab.size,
    )
    return ckpt, report


def _nll_rows(logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    return -logp[np.arange(len(targets)), targets]


def _detached(params: dict[str, Tensor]) -> dict[str, Tensor]:
    return {k: Tensor(p.data) for k, p in params.items()}


def _lstm_stream_nll(config: LSTMConfig, params, stream: np.ndarray) -> tuple[float, int]:
    """Sequential scan over the full stream, carrying state across chunks."""
    frozen = _detached(params)
    state: LSTMState | None = None
    total, count = 0.0, 0
    pos = 0
    while pos + 1 < len(stream):
        end = min(pos + config.context_len, len(stream) - 1)
        x = stream[pos:end]
        y = stream[pos + 1:end + 1]
        logits, state = lstm_forward(config, frozen, x, state)
        state = LSTMState(layers=[(Tensor(h.data), Tensor(c.data)) for h, c in state.layers])
        total += float(_nll_rows(logits.data, y).sum())
        count += len(y)
        pos = end
    return total, count


def _transformer_stream_nll(config: TransformerConfig, params, stream: np.ndarray) -> tuple[float, int]:
    """Strided windows; every scored position keeps at least half a context."""
    frozen = _detached(params)
    n = len(stream)
    window = config.context_len
    stride = max(1, window // 2)
    total, count = 0.0, 0
    begin = 0
    scored = 1  # absolute index of the next unscored target
    while scored < n:
        end = min(begin + window, n - 1)
        x = stream[begin:end]
        logits = transformer_forward(config, frozen, x)
        lo = scored - (begin + 1)
        y = stream[scored:end + 1]
        total += float(_nll_rows(logits.data[lo:], y).sum())
        count += len(y)
        scored = end + 1
        begin += stride
    return total, count


def stream_cross_entropy(kind: str, config, params, stream: np.ndarray) -> float:
    """Mean per-token negative log-likelihood over one id stream."""
    if len(stream) < 2:
        raise InsufficientDataError("stream needs at least two tokens")
    if kind == "transformer":
        total, count = _transformer_stream_nll(config, params, stream)
    else:
        total, count = _lstm_stream_nll(config, params, stream)
    return total / count


def perplexity(ckpt: ModelCheckpoint, docs: list[str]) -> float:
    """exp(mean next-token cross-entropy) of a checkpoint over documents."""
    if not docs:
        raise EmptyCorpusError("perplexity over empty document list")
    stream = encode_stream(docs, ckpt.vocab)
    return float(math.exp(stream_cross_entropy(ckpt.kind, ckpt.config, ckpt.params, stream)))


def split_by_id_hash(records, held_fraction: float = 0.1):
    """Deterministic train/held-out split keyed on each record's id hash."""
    if not 0.0 < held_fraction < 1.0:
        raise ValidationError("held_fraction must be in (0, 1)")
    threshold = int(held_fraction * 10000)
    train_part, held_part = [], []
    for rec in records:
        digest = hashlib.sha256(rec.id.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:8], "big") % 10000
        (held_part if bucket < threshold else train_part).append(rec)
    return train_part, held_part
