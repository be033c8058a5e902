"""Char- and word-level vocabularies over tagged documents.

Control tags and fraction tokens are atomic: the encoder greedy-matches them
before falling back to per-character (char mode) or whitespace tokens (word
mode).  Special tokens always occupy the lowest contiguous id range so that
checkpoints stay stable across corpus rebuilds.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CONTROL_TAGS, FRACTION_TOKENS, TaggedDocument
from .errors import EmptyCorpusError, ValidationError

PAD = "<PAD>"
UNK = "<UNK>"
EOS = "<EOS>"

# Canonical special-token order: markers, control tags, fraction tokens.
SPECIAL_TOKENS: tuple[str, ...] = (PAD, UNK, EOS) + CONTROL_TAGS + tuple(FRACTION_TOKENS.values())

# Unicode vulgar fractions covered by the fraction-token inventory.
VULGAR_FRACTIONS = {
    "½": (1, 2),
    "⅓": (1, 3),
    "⅔": (2, 3),
    "¼": (1, 4),
    "¾": (3, 4),
    "⅛": (1, 8),
    "⅜": (3, 8),
    "⅝": (5, 8),
    "⅞": (7, 8),
}

_ASCII_FRACTION_RE = re.compile(r"(?<![\d/.])(\d+)/(\d+)(?![\d/.])")
_VULGAR_RE = re.compile("|".join(VULGAR_FRACTIONS))


def normalize_numbers(text: str) -> str:
    """Replace standalone ASCII and unicode vulgar fractions with fraction tokens.

    Fractions without a reserved token (e.g. 2/7) and all other numerals are
    left untouched.  Idempotent.
    """

    def ascii_sub(m: re.Match) -> str:
        key = (int(m.group(1)), int(m.group(2)))
        return FRACTION_TOKENS.get(key, m.group(0))

    def vulgar_sub(m: re.Match) -> str:
        return FRACTION_TOKENS[VULGAR_FRACTIONS[m.group(0)]]

    text = _VULGAR_RE.sub(vulgar_sub, text)
    return _ASCII_FRACTION_RE.sub(ascii_sub, text)


@dataclass(frozen=True)
class SpecialTokenSet:
    """The reserved vocabulary: control tags, fraction tokens, pad/unk/eos."""

    control: tuple[str, ...] = CONTROL_TAGS
    fractions: tuple[str, ...] = tuple(FRACTION_TOKENS.values())
    pad: str = PAD
    unk: str = UNK
    eos: str = EOS

    def all(self) -> tuple[str, ...]:
        return SPECIAL_TOKENS


@dataclass
class Vocabulary:
    """Token<->id bijection for char or word mode."""

    mode: str  # "char" | "word"
    token_to_id: dict[str, int]
    id_to_token: list[str]
    min_freq: int = 1
    specials: SpecialTokenSet = field(default_factory=SpecialTokenSet)

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK]

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    def id_of(self, token: str) -> int:
        return self.token_to_id[token]


# Sorted longest-first so greedy matching prefers the longest special literal.
_SPECIALS_BY_LENGTH = sorted(SPECIAL_TOKENS, key=len, reverse=True)


def _split_on_specials(text: str) -> list[str]:
    """Split text into special tokens and plain-text runs between them."""
    parts: list[str] = []
    plain_start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] == "<":
            for tok in _SPECIALS_BY_LENGTH:
                if text.startswith(tok, i):
                    if i > plain_start:
                        parts.append(text[plain_start:i])
                    parts.append(tok)
                    i += len(tok)
                    plain_start = i
                    break
            else:
                i += 1
        else:
            i += 1
    if plain_start < n:
        parts.append(text[plain_start:])
    return parts


def build_vocab(docs: list[TaggedDocument], mode: str, min_freq: int = 1) -> Vocabulary:
    """Build a vocabulary over tagged documents.

    Char mode retains every observed character; word mode retains whitespace
    tokens with frequency >= min_freq.  Ids are assigned specials-first, then
    by descending frequency with lexicographic tie-break, so the result is a
    pure function of its inputs.
    """
    if not docs:
        raise EmptyCorpusError("build_vocab over empty document list")
    if mode not in ("char", "word"):
        raise ValueError(f"unknown vocabulary mode {mode!r}")

    counts: Counter[str] = Counter()
    for doc in docs:
        for part in _split_on_specials(doc.text):
            if part in SPECIAL_TOKENS:
                continue
            if mode == "char":
                counts.update(part)
            else:
                counts.update(part.split())

    retained = [t for t, c in counts.items() if mode == "char" or c >= min_freq]
    retained.sort(key=lambda t: (-counts[t], t))

    id_to_token = list(SPECIAL_TOKENS) + retained
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    return Vocabulary(mode=mode, token_to_id=token_to_id, id_to_token=id_to_token, min_freq=min_freq)


def encode(v: Vocabulary, text: str) -> list[int]:
    """Encode text to ids: greedy longest-match on specials, then chars or words."""
    unk = v.unk_id
    ids: list[int] = []
    for part in _split_on_specials(text):
        if part in SPECIAL_TOKENS:
            ids.append(v.token_to_id[part])
        elif v.mode == "char":
            ids.extend(v.token_to_id.get(ch, unk) for ch in part)
        else:
            ids.extend(v.token_to_id.get(w, unk) for w in part.split())
    return ids


def decode(v: Vocabulary, ids) -> str:
    """Concatenate tokens for the given ids; word mode joins with single spaces."""
    tokens = []
    for i in ids:
        i = int(i)
        if i < 0 or i >= v.size:
            raise IndexError(f"token id {i} out of range for vocabulary of size {v.size}")
        tokens.append(v.id_to_token[i])
    if v.mode == "word":
        return " ".join(tokens)
    return "".join(tokens)


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n"}


def _escape(token: str) -> str:
    return token.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            pair = text[i : i + 2]
            if pair in _UNESCAPES:
                out.append(_UNESCAPES[pair])
                i += 2
                continue
        out.append(text[i])
        i += 1
    return "".join(out)


VOCAB_MAGIC = "recipegen-vocab"
VOCAB_VERSION = 1


def save_vocab(v: Vocabulary, path: str | Path) -> None:
    """Write the versioned vocabulary file: header, then one id<TAB>token line per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_vocab(v))


def dumps_vocab(v: Vocabulary) -> str:
    lines = [f"{VOCAB_MAGIC} v{VOCAB_VERSION}\tmode={v.mode}\tsize={v.size}\tmin_freq={v.min_freq}"]
    for i, tok in enumerate(v.id_to_token):
        lines.append(f"{i}\t{_escape(tok)}")
    return "\n".join(lines) + "\n"


def load_vocab(path: str | Path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        return loads_vocab(fh.read())


def loads_vocab(text: str) -> Vocabulary:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"{VOCAB_MAGIC} v"):
        raise ValidationError("not a vocabulary file")
    header = dict(kv.split("=", 1) for kv in lines[0].split("\t")[1:])
    mode = header["mode"]
    size = int(header["size"])
    min_freq = int(header["min_freq"])

    id_to_token: list[str] = [""] * size
    for line in lines[1:]:
        if not line:
            continue
        idx, tok = line.split("\t", 1)
        id_to_token[int(idx)] = _unescape(tok)
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    if len(token_to_id) != size:
        raise ValidationError("vocabulary file has duplicate or missing tokens")
    return Vocabulary(mode=mode, token_to_id=token_to_id, id_to_token=id_to_token, min_freq=min_freq)
