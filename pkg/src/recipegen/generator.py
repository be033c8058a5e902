"""Ingredient-conditioned sampling from a trained checkpoint."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import (
    INGR_END,
    INGR_START,
    RECIPE_END,
    RECIPE_START,
    TITLE_START,
    RecipeRecord,
    normalize_text,
    parse,
)
from .errors import CompatibilityError, UnparseableError, ValidationError
from .nn.checkpoint import ModelCheckpoint
from .nn.lstm import LSTMState, lstm_forward
from .nn.tensor import Tensor
from .nn.transformer import transformer_forward
from .tokenizer import decode, encode, normalize_numbers


@dataclass
class SamplingParams:
    temperature: float = 0.8
    top_k: int = 40  # 0 disables the cut and samples the full distribution
    max_new_tokens: int = 1024
    seed: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if self.top_k < 0:
            raise ValidationError("top_k must be >= 0")
        if self.max_new_tokens < 1:
            raise ValidationError("max_new_tokens must be >= 1")


@dataclass
class GeneratedRecipe:
    raw_text: str
    prompt: str
    ids: list[int] = field(repr=False)
    record: RecipeRecord | None
    malformed: bool
    finish_reason: str  # "end-tag" or "length-limit"
    tokens_generated: int
    params: SamplingParams
    model_id: str = ""


def build_prompt(ingredients: list[str]) -> str:
    """Document prefix that conditions generation on an ingredient list.

    The closing title tag is left for the model to produce, so the prompt
    ends exactly where the next generated token should begin.
    """
    cleaned = [normalize_numbers(normalize_text(item)) for item in ingredients]
    cleaned = [c for c in cleaned if c]
    if not cleaned:
        raise ValidationError("at least one non-empty ingredient is required")
    body = " <NEXT_INGR> ".join(cleaned)
    return f"{RECIPE_START} {INGR_START} {body} {INGR_END} {TITLE_START}"


def sample_next(logits: np.ndarray, sp: SamplingParams, rng: np.random.Generator) -> int:
    """One token from a logit row.

    Temperature zero is exact argmax with ties to the lowest id. Otherwise
    the row is rescaled, cut to the top_k highest logits (boundary ties also
    resolve to the lowest id via a stable sort), renormalized, and sampled.
    """
    if sp.temperature == 0:
        return int(np.argmax(logits))
    z = logits / sp.temperature
    k = len(z) if sp.top_k == 0 else min(sp.top_k, len(z))
    keep = np.argsort(-z, kind="stable")[:k]
    zk = z[keep]
    zk = zk - zk.max()
    probs = np.exp(zk)
    probs /= probs.sum()
    return int(rng.choice(keep, p=probs))


def _detach_state(state: LSTMState) -> LSTMState:
    return LSTMState(layers=[(Tensor(h.data), Tensor(c.data)) for h, c in state.layers])


def _lstm_generate(config, params, prompt_ids, sp, rng, stop_id):
    ids = list(prompt_ids)
    state = None
    chunk = np.asarray(prompt_ids, dtype=np.int64)
    # Feed the prompt through in context-sized slices, keeping only the state.
    for start in range(0, len(chunk), config.context_len):
        piece = chunk[start:start + config.context_len]
        logits, state = lstm_forward(config, params, piece, state)
        state = _detach_state(state)
    generated = 0
    finish = "length-limit"
    while generated < sp.max_new_tokens:
        next_id = sample_next(logits.data[-1], sp, rng)
        ids.append(next_id)
        generated += 1
        if next_id == stop_id:
            finish = "end-tag"
            break
        logits, state = lstm_forward(config, params, np.asarray([next_id]), state)
        state = _detach_state(state)
    return ids, generated, finish


def _transformer_generate(config, params, prompt_ids, sp, rng, stop_id):
    ids = list(prompt_ids)
    generated = 0
    finish = "length-limit"
    # Once past the context budget, condition on the most recent
    # context_len - 1 tokens so the appended token always fits too.
    keep = max(1, config.context_len - 1)
    while generated < sp.max_new_tokens:
        window = np.asarray(ids[-keep:], dtype=np.int64)
        logits = transformer_forward(config, params, window)
        next_id = sample_next(logits.data[-1], sp, rng)
        ids.append(next_id)
        generated += 1
        if next_id == stop_id:
            finish = "end-tag"
            break
    return ids, generated, finish


def generate(
    ckpt: ModelCheckpoint, ingredients: list[str], sp: SamplingParams | None = None
) -> GeneratedRecipe:
    """Sample one recipe continuation for the given ingredient list.

    Generation stops at the recipe-close tag or at max_new_tokens, whichever
    comes first. The tagged output is parsed back into a structured record;
    outputs that do not parse are returned with record=None and malformed
    set rather than raising.
    """
    sp = sp or SamplingParams()
    if ckpt.config.vocab_size != ckpt.vocab.size:
        raise CompatibilityError(
            f"checkpoint config expects vocab of {ckpt.config.vocab_size}, "
            f"embedded vocabulary has {ckpt.vocab.size}"
        )
    prompt = build_prompt(ingredients)
    prompt_ids = encode(ckpt.vocab, prompt)
    frozen = {k: Tensor(p.data) for k, p in ckpt.params.items()}
    rng = np.random.default_rng(sp.seed)
    stop_id = ckpt.vocab.id_of(RECIPE_END)

    if ckpt.kind == "transformer":
        ids, n_new, finish = _transformer_generate(
            ckpt.config, frozen, prompt_ids, sp, rng, stop_id
        )
    else:
        ids, n_new, finish = _lstm_generate(ckpt.config, frozen, prompt_ids, sp, rng, stop_id)

    text = decode(ckpt.vocab, ids)
    record = None
    malformed = True
    try:
        parsed = parse(text)
        record, malformed = parsed.record, parsed.malformed
    except UnparseableError:
        pass
    model_id = f"{ckpt.kind}"
    return GeneratedRecipe(
        raw_text=text,
        prompt=prompt,
        ids=ids,
        record=record,
        malformed=malformed,
        finish_reason=finish,
        tokens_generated=n_new,
        params=sp,
        model_id=model_id,
    )
