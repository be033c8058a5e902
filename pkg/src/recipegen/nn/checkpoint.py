"""Versioned checkpoint files: a text header followed by raw float64 blocks.

The header carries the model kind, its config, run metadata, the full
vocabulary, and a parameter table (name, shape, byte offset, byte length).
Parameter data is little-endian float64, concatenated in table order.
Identical runs produce identical bytes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ValidationError
from ..tokenizer import Vocabulary, dumps_vocab, loads_vocab
from .lstm import LSTMConfig, lstm_param_manifest
from .tensor import Tensor, param
from .transformer import TransformerConfig, transformer_param_manifest

MAGIC = "recipegen-ckpt v1"
KINDS = ("char-lstm", "word-lstm", "transformer")

_FIELD_TYPES = {
    "vocab_size": int, "embed_dim": int, "hidden_dim": int, "num_layers": int,
    "context_len": int, "d_model": int, "n_heads": int, "n_layers": int,
    "ff_dim": int, "dropout_rate": float, "tie_output": bool,
}


@dataclass
class ModelCheckpoint:
    kind: str
    config: Any
    params: dict[str, Tensor]
    vocab: Vocabulary
    meta: dict[str, Any]


def manifest_for(kind: str, config) -> dict[str, tuple[int, ...]]:
    if kind in ("char-lstm", "word-lstm"):
        return lstm_param_manifest(config)
    if kind == "transformer":
        return transformer_param_manifest(config)
    raise ValidationError(f"unknown model kind {kind!r}")


def config_class_for(kind: str):
    if kind in ("char-lstm", "word-lstm"):
        return LSTMConfig
    if kind == "transformer":
        return TransformerConfig
    raise ValidationError(f"unknown model kind {kind!r}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_typed(text: str, typ):
    if typ is bool:
        if text not in ("true", "false"):
            raise ValidationError(f"expected true/false, got {text!r}")
        return text == "true"
    if typ is int:
        return int(text)
    if typ is float:
        return float(text)
    return text


def _parse_meta_value(text: str):
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            continue
    return text


def dumps_checkpoint(ckpt: ModelCheckpoint) -> bytes:
    if ckpt.kind not in KINDS:
        raise ValidationError(f"unknown model kind {ckpt.kind!r}")
    manifest = manifest_for(ckpt.kind, ckpt.config)
    missing = [n for n in manifest if n not in ckpt.params]
    if missing:
        raise ValidationError(f"checkpoint missing parameters: {missing}")

    lines = [MAGIC, f"kind={ckpt.kind}"]
    for key in sorted(ckpt.meta):
        lines.append(f"meta.{key}={_format_value(ckpt.meta[key])}")
    for field in dataclasses.fields(ckpt.config):
        lines.append(f"config.{field.name}={_format_value(getattr(ckpt.config, field.name))}")

    vocab_lines = dumps_vocab(ckpt.vocab).splitlines()
    lines.append(f"vocab_lines={len(vocab_lines)}")
    lines.extend(vocab_lines)

    offset = 0
    blocks = []
    for name, shape in manifest.items():
        data = np.asarray(ckpt.params[name].data, dtype=np.float64)
        if data.shape != shape:
            raise ValidationError(f"parameter {name} has shape {data.shape}, expected {shape}")
        block = np.ascontiguousarray(data).astype("<f8").tobytes()
        shape_csv = ",".join(str(d) for d in shape)
        lines.append(f"param {name} {shape_csv} {offset} {len(block)}")
        blocks.append(block)
        offset += len(block)
    lines.append("end-header")
    header = ("\n".join(lines) + "\n").encode("utf-8")
    return header + b"".join(blocks)


def save_checkpoint(path: str, ckpt: ModelCheckpoint) -> None:
    payload = dumps_checkpoint(ckpt)
    with open(path, "wb") as fh:
        fh.write(payload)


def loads_checkpoint(raw: bytes) -> ModelCheckpoint:
    marker = b"\nend-header\n"
    cut = raw.find(marker)
    if cut < 0:
        raise ValidationError("not a checkpoint: end-header marker missing")
    header = raw[:cut].decode("utf-8").split("\n")
    body = raw[cut + len(marker):]

    if not header or header[0] != MAGIC:
        raise ValidationError("not a checkpoint: bad magic line")

    idx = 1
    kind = None
    meta: dict[str, Any] = {}
    config_kv: dict[str, str] = {}
    while idx < len(header) and not header[idx].startswith("vocab_lines="):
        key, sep, value = header[idx].partition("=")
        if not sep:
            raise ValidationError(f"unexpected header line {header[idx]!r}")
        if key == "kind":
            kind = value
        elif key.startswith("meta."):
            meta[key[len("meta."):]] = _parse_meta_value(value)
        elif key.startswith("config."):
            config_kv[key[len("config."):]] = value
        else:
            raise ValidationError(f"unexpected header line {header[idx]!r}")
        idx += 1
    if kind is None:
        raise ValidationError("checkpoint header has no kind line")
    if idx >= len(header):
        raise ValidationError("checkpoint header has no vocab block")

    n_vocab_lines = int(header[idx].partition("=")[2])
    idx += 1
    if idx + n_vocab_lines > len(header):
        raise ValidationError("vocab block truncated")
    vocab = loads_vocab("\n".join(header[idx:idx + n_vocab_lines]) + "\n")
    idx += n_vocab_lines

    config_cls = config_class_for(kind)
    kwargs = {}
    for field in dataclasses.fields(config_cls):
        if field.name in config_kv:
            kwargs[field.name] = _parse_typed(config_kv[field.name], _FIELD_TYPES.get(field.name, str))
    config = config_cls(**kwargs)

    manifest = manifest_for(kind, config)
    params: dict[str, Tensor] = {}
    for line in header[idx:]:
        parts = line.split(" ")
        if len(parts) != 5 or parts[0] != "param":
            raise ValidationError(f"bad param line {line!r}")
        name = parts[1]
        shape = tuple(int(d) for d in parts[2].split(",")) if parts[2] else ()
        offset, nbytes = int(parts[3]), int(parts[4])
        if name not in manifest:
            raise ValidationError(f"checkpoint has unknown parameter {name!r}")
        if shape != manifest[name]:
            raise ValidationError(f"parameter {name} has shape {shape}, expected {manifest[name]}")
        if offset + nbytes > len(body):
            raise ValidationError(f"parameter {name} data truncated")
        floats = np.frombuffer(body[offset:offset + nbytes], dtype="<f8")
        params[name] = param(floats.reshape(shape).copy())

    missing = [n for n in manifest if n not in params]
    if missing:
        raise ValidationError(f"checkpoint missing parameters: {missing}")
    return ModelCheckpoint(kind=kind, config=config, params=params, vocab=vocab, meta=meta)


def load_checkpoint(path: str) -> ModelCheckpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    return loads_checkpoint(raw)
