"""Corpus-level BLEU with exact rational precisions, plus the eval harness.

Scores are computed over whitespace tokens after structural tags are removed
and fraction tokens are written back as plain ``n/d`` numerals. Per-order
precisions stay exact ``Fraction`` values until the final geometric mean.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .corpus import (
    CONTROL_TAGS,
    TOKEN_TO_FRACTION,
    RecipeRecord,
    normalize_text,
    render_ingredient,
    serialize,
)
from .errors import RecipegenError, ValidationError
from .generator import SamplingParams, generate
from .nn.checkpoint import ModelCheckpoint
from .tokenizer import EOS, PAD

SMOOTHINGS = ("add-one", "none")

_REPLACEMENTS = {tag: " " for tag in CONTROL_TAGS}
_REPLACEMENTS[PAD] = " "
_REPLACEMENTS[EOS] = " "
for _tok, _frac in TOKEN_TO_FRACTION.items():
    _REPLACEMENTS[_tok] = f" {_frac.numerator}/{_frac.denominator} "


def strip_tags(text: str) -> str:
    """Remove structural tags and spell fraction tokens as numerals."""
    for token, repl in _REPLACEMENTS.items():
        text = text.replace(token, repl)
    return normalize_text(text)


def tokenize_for_bleu(text: str) -> list[str]:
    return strip_tags(text).split()


@dataclass
class EvalPair:
    """One candidate text scored against one or more reference texts."""

    candidate: str
    references: list[str]

    def __post_init__(self):
        if not self.references:
            raise ValidationError("an EvalPair needs at least one reference")


def ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(candidate: list[str], references: list[list[str]], n: int) -> tuple[int, int]:
    """Clipped n-gram matches and total candidate n-grams, as plain counts."""
    cand = ngram_counts(candidate, n)
    total = sum(cand.values())
    if total == 0:
        return 0, 0
    ceiling: Counter = Counter()
    for ref in references:
        for gram, count in ngram_counts(ref, n).items():
            if count > ceiling[gram]:
                ceiling[gram] = count
    clipped = sum(min(count, ceiling.get(gram, 0)) for gram, count in cand.items())
    return clipped, total


def effective_ref_len(candidate_len: int, ref_lens: list[int]) -> int:
    """The reference length closest to the candidate's; ties go to the shorter."""
    return min(ref_lens, key=lambda r: (abs(r - candidate_len), r))


@dataclass
class BleuResult:
    score: float
    precisions: list[Fraction]
    brevity_penalty: float
    candidate_len: int
    reference_len: int
    degenerate: bool = False  # empty candidate side


def _score_from_counts(
    matches: list[int], totals: list[int], c: int, r: int, smoothing: str
) -> BleuResult:
    if smoothing not in SMOOTHINGS:
        raise ValidationError(f"unknown smoothing {smoothing!r}")
    max_n = len(matches)
    if c == 0:
        return BleuResult(0.0, [Fraction(0)] * max_n, 0.0, 0, r, degenerate=True)
    precisions: list[Fraction] = []
    for m, t in zip(matches, totals):
        if m == 0 and smoothing == "add-one":
            precisions.append(Fraction(m + 1, t + 1))
        elif t == 0 or m == 0:
            precisions.append(Fraction(0))
        else:
            precisions.append(Fraction(m, t))
    if any(p == 0 for p in precisions):
        geo = 0.0
    else:
        geo = math.exp(sum(math.log(p) for p in precisions) / max_n)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return BleuResult(bp * geo, precisions, bp, c, r)


def _pair_counts(pair: EvalPair, max_n: int):
    cand = tokenize_for_bleu(pair.candidate)
    refs = [tokenize_for_bleu(r) for r in pair.references]
    matches, totals = [], []
    for n in range(1, max_n + 1):
        m, t = modified_precision(cand, refs, n)
        matches.append(m)
        totals.append(t)
    c = len(cand)
    r = effective_ref_len(c, [len(ref) for ref in refs])
    return matches, totals, c, r


def bleu(pair: EvalPair, max_n: int = 4, smoothing: str = "add-one") -> BleuResult:
    """Sentence-level BLEU of one candidate against its references."""
    matches, totals, c, r = _pair_counts(pair, max_n)
    return _score_from_counts(matches, totals, c, r, smoothing)


def corpus_bleu(pairs: list[EvalPair], max_n: int = 4, smoothing: str = "add-one") -> BleuResult:
    """Micro-averaged BLEU: counts and lengths pool across all pairs,
    then the brevity penalty and geometric mean apply once."""
    if not pairs:
        raise ValidationError("at least one pair is required")
    matches = [0] * max_n
    totals = [0] * max_n
    c_sum, r_sum = 0, 0
    for pair in pairs:
        m, t, c, r = _pair_counts(pair, max_n)
        for i in range(max_n):
            matches[i] += m[i]
            totals[i] += t[i]
        c_sum += c
        r_sum += r
    return _score_from_counts(matches, totals, c_sum, r_sum, smoothing)


@dataclass
class BleuRow:
    """One model's pooled score over the held-out set."""

    model: str
    result: BleuResult
    samples: int
    notes: list[str] = field(default_factory=list)


@dataclass
class BleuReport:
    rows: list[BleuRow]
    max_n: int = 4
    smoothing: str = "add-one"
    sampling: SamplingParams | None = None

    def render(self) -> str:
        """Plain-text table plus a machine-readable component block."""
        lines = ["model | BLEU", "----- | ----"]
        for row in self.rows:
            lines.append(f"{row.model} | {row.result.score:.3f}")
        lines.append("")
        if self.sampling is not None:
            sp = self.sampling
            lines.append(
                f"sampling: temperature={sp.temperature} top_k={sp.top_k} "
                f"max_new_tokens={sp.max_new_tokens} seed={sp.seed}"
            )
        lines.append(f"smoothing: {self.smoothing}  max_n: {self.max_n}")
        lines.append("")
        lines.append("# components")
        for row in self.rows:
            res = row.result
            parts = " ".join(
                f"p{i + 1}={float(p):.6f}" for i, p in enumerate(res.precisions)
            )
            lines.append(
                f"{row.model}: bleu={res.score!r} {parts} "
                f"bp={res.brevity_penalty:.6f} c={res.candidate_len} "
                f"r={res.reference_len} samples={row.samples}"
            )
            for note in row.notes:
                lines.append(f"  note: {note}")
        return "\n".join(lines) + "\n"


def reference_text(record: RecipeRecord) -> str:
    """A record's ground-truth text: ingredients, title, and steps flattened.

    Records too incomplete to serialize still yield whatever text they do
    have, in the same section order, so the harness can note them as
    score-zero samples instead of giving up.
    """
    try:
        return strip_tags(serialize(record).text)
    except ValidationError:
        parts = [render_ingredient(line) for line in record.ingredients]
        parts.append(record.title)
        parts.extend(record.instructions)
        return strip_tags(" ".join(p for p in parts if p))


def eval_harness(
    checkpoints: list[ModelCheckpoint],
    heldout: list[RecipeRecord],
    params: SamplingParams | None = None,
    smoothing: str = "add-one",
    max_n: int = 4,
    labels: list[str] | None = None,
) -> BleuReport:
    """Prompt every model with each held-out record's ingredients and score
    the generations against that record's own text.

    Seeds advance per record so a run is reproducible end to end. A failed
    generation becomes a score-zero sample with a note; the harness keeps
    going. Records without ingredients cannot form a prompt and are skipped
    with a note.
    """
    if not heldout:
        raise ValidationError("no held-out records to evaluate on")
    if not checkpoints:
        raise ValidationError("at least one checkpoint is required")
    if labels is not None and len(labels) != len(checkpoints):
        raise ValidationError("labels must pair up with checkpoints")
    params = params or SamplingParams()
    names = labels or _default_labels([c.kind for c in checkpoints])

    rows: list[BleuRow] = []
    for ckpt, name in zip(checkpoints, names):
        pairs: list[EvalPair] = []
        notes: list[str] = []
        for i, record in enumerate(heldout):
            ref = reference_text(record)
            if not record.ingredients:
                pairs.append(EvalPair("", [ref]))
                notes.append(f"record {record.id}: no ingredients to prompt with")
                continue
            items = [render_ingredient(line) for line in record.ingredients]
            per_record = SamplingParams(
                temperature=params.temperature,
                top_k=params.top_k,
                max_new_tokens=params.max_new_tokens,
                seed=params.seed + i,
            )
            try:
                out = generate(ckpt, items, per_record)
                pairs.append(EvalPair(out.raw_text, [ref]))
            except RecipegenError as exc:
                pairs.append(EvalPair("", [ref]))
                notes.append(f"record {record.id}: generation failed ({exc})")
        result = corpus_bleu(pairs, max_n=max_n, smoothing=smoothing)
        rows.append(BleuRow(model=name, result=result, samples=len(pairs), notes=notes))
    return BleuReport(rows=rows, max_n=max_n, smoothing=smoothing, sampling=params)


def _default_labels(kinds: list[str]) -> list[str]:
    seen: Counter = Counter()
    out = []
    for kind in kinds:
        seen[kind] += 1
        out.append(kind if seen[kind] == 1 else f"{kind}-{seen[kind]}")
    return out


def eval_report_rows(report: BleuReport) -> list[dict]:
    """Delimited-output rows: one dict per model with a stable column set."""
    rows = []
    for row in report.rows:
        res = row.result
        out = {
            "model": row.model,
            "bleu": f"{res.score!r}",
            "bp": f"{res.brevity_penalty!r}",
            "c": str(res.candidate_len),
            "r": str(res.reference_len),
            "samples": str(row.samples),
        }
        for i, p in enumerate(res.precisions):
            out[f"p{i + 1}"] = f"{float(p)!r}"
        rows.append(out)
    return rows
