"""Shared fixtures: tiny corpora, vocabularies, and quick checkpoints."""

from __future__ import annotations

import contextlib

import numpy as np
import pytest

from recipegen import corpus, synth, tokenizer, trainer
from recipegen.nn.lstm import LSTMConfig
from recipegen.nn.tensor import Tensor
from recipegen.nn.transformer import TransformerConfig

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    @contextlib.contextmanager
    def run(name: str):
        try:
            yield
        except BaseException:
            ACCEPTANCE_RESULTS.append(f"{name}: FAIL")
            print(f"{name}: FAIL")
            raise
        ACCEPTANCE_RESULTS.append(f"{name}: PASS")
        print(f"{name}: PASS")

    return run


@pytest.fixture(scope="session")
def toy_records():
    return synth.toy_records(n=10, seed=0)


@pytest.fixture(scope="session")
def toy_docs(toy_records):
    return [corpus.serialize(r).text for r in toy_records]


@pytest.fixture(scope="session")
def char_vocab(toy_docs):
    tagged = [corpus.TaggedDocument(text=d) for d in toy_docs]
    return tokenizer.build_vocab(tagged, mode="char")


@pytest.fixture(scope="session")
def word_vocab(toy_docs):
    tagged = [corpus.TaggedDocument(text=d) for d in toy_docs]
    return tokenizer.build_vocab(tagged, mode="word")


@pytest.fixture(scope="session")
def quick_lstm_ckpt(toy_docs, char_vocab):
    """A briefly trained char model: cheap, deterministic, far from memorized."""
    cfg = LSTMConfig(
        vocab_size=char_vocab.size, embed_dim=16, hidden_dim=48, num_layers=1, context_len=96
    )
    tcfg = trainer.TrainConfig(
        batch_size=8, learning_rate=3e-3, max_steps=120, seed=0, log_every=40
    )
    ckpt, _ = trainer.train("char-lstm", cfg, toy_docs, char_vocab, tcfg)
    return ckpt


@pytest.fixture(scope="session")
def init_transformer_ckpt(toy_docs, word_vocab):
    """An untrained word-level transformer checkpoint (zero steps)."""
    cfg = TransformerConfig(
        vocab_size=word_vocab.size, d_model=32, n_heads=2, n_layers=2,
        ff_dim=64, context_len=48, dropout_rate=0.0,
    )
    tcfg = trainer.TrainConfig(batch_size=4, learning_rate=1e-3, max_steps=0, seed=0)
    ckpt, _ = trainer.train("transformer", cfg, toy_docs, word_vocab, tcfg)
    return ckpt


@pytest.fixture(scope="session")
def end_tag_ckpt(toy_docs, char_vocab):
    """A rigged checkpoint whose argmax is always the recipe-close tag.

    All parameters are zero except a large output bias on the closing tag's
    id, so greedy sampling stops immediately and deterministically.
    """
    cfg = LSTMConfig(
        vocab_size=char_vocab.size, embed_dim=8, hidden_dim=8, num_layers=1, context_len=64
    )
    tcfg = trainer.TrainConfig(batch_size=2, learning_rate=1e-3, max_steps=0, seed=0)
    ckpt, _ = trainer.train("char-lstm", cfg, toy_docs, char_vocab, tcfg)
    for p in ckpt.params.values():
        p.data[...] = 0.0
    stop_id = char_vocab.id_of(corpus.RECIPE_END)
    ckpt.params["out.b"].data[stop_id] = 100.0
    return ckpt


def weighted_sum(t: Tensor, weights: np.ndarray) -> Tensor:
    """Reduce any tensor to a scalar-shaped value with fixed weights.

    Used by gradient checks so every output element influences the loss with
    a distinct coefficient.
    """
    from recipegen.nn import tensor as T

    flat = T.reshape(t, (1, int(np.prod(t.shape))))
    return T.matmul(flat, Tensor(weights.reshape(-1, 1)))
