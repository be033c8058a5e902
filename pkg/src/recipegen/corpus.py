"""Recipe corpus handling: ingest, cleaning, length windowing, and the tagged text format.

A recipe travels through the pipeline as a :class:`RecipeRecord` and is
serialized into a :class:`TaggedDocument` — a single string in which control
tags delimit the ingredient, title, and instruction sections.  The canonical
section order is ingredients, then title, then instructions, so that an
ingredient list is a valid document prefix and conditioned generation is pure
prefix completion.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import EmptyCorpusError, UnparseableError, ValidationError

# Control tags, in canonical document order.
RECIPE_START = "<RECIPE_START>"
INGR_START = "<INGR_START>"
NEXT_INGR = "<NEXT_INGR>"
INGR_END = "<INGR_END>"
TITLE_START = "<TITLE_START>"
TITLE_END = "<TITLE_END>"
INSTR_START = "<INSTR_START>"
NEXT_INSTR = "<NEXT_INSTR>"
INSTR_END = "<INSTR_END>"
RECIPE_END = "<RECIPE_END>"

CONTROL_TAGS = (
    RECIPE_START,
    INGR_START,
    NEXT_INGR,
    INGR_END,
    TITLE_START,
    TITLE_END,
    INSTR_START,
    NEXT_INSTR,
    INSTR_END,
    RECIPE_END,
)

# Fraction tokens for the common culinary fractions; (numerator, denominator)
# keys. Fractions outside this table are rendered as plain "n/d" digits.
FRACTION_TOKENS = {
    (1, 2): "<F_1_2>",
    (1, 3): "<F_1_3>",
    (2, 3): "<F_2_3>",
    (1, 4): "<F_1_4>",
    (3, 4): "<F_3_4>",
    (1, 8): "<F_1_8>",
    (3, 8): "<F_3_8>",
    (5, 8): "<F_5_8>",
    (7, 8): "<F_7_8>",
}
TOKEN_TO_FRACTION = {tok: Fraction(n, d) for (n, d), tok in FRACTION_TOKENS.items()}

# Measurement words parse() recognizes as units.  The flat ingredient-line
# grammar ("{quantity} {unit} {name}", absent fields omitted) carries no field
# markers, so the unit/name boundary is decided by this lexicon.
UNIT_LEXICON = frozenset(
    """
    cup cups tsp tbsp teaspoon teaspoons tablespoon tablespoons
    g kg gram grams kilogram kilograms mg ml l liter liters litre litres
    oz ounce ounces lb lbs pound pounds
    pinch pinches dash dashes clove cloves slice slices can cans jar jars
    stick sticks bunch bunches sprig sprigs head heads ear ears
    piece pieces packet packets package packages bag bags box boxes
    quart quarts pint pints gallon gallons stalk stalks drop drops
    handful handfuls knob knobs fillet fillets loaf loaves sheet sheets
    """.split()
)

_WS_RE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces."""
    return _WS_RE.sub(" ", text).strip()


@dataclass
class IngredientLine:
    """One quantified ingredient: optional rational quantity, optional unit, name."""

    name: str
    quantity: Fraction | None = None
    unit: str = ""

    def problems(self) -> list[str]:
        out = []
        if not self.name.strip():
            out.append("ingredient name empty")
        if self.quantity is not None:
            if self.quantity < 0:
                out.append("ingredient quantity negative")
        return out


@dataclass
class RecipeRecord:
    """A structured recipe: the corpus unit."""

    id: str
    title: str
    ingredients: list[IngredientLine] = field(default_factory=list)
    instructions: list[str] = field(default_factory=list)

    def problems(self) -> list[str]:
        """Invariant violations, empty when the record is complete."""
        out = []
        if not self.title.strip():
            out.append("title empty")
        if not self.ingredients:
            out.append("no ingredients")
        if not self.instructions:
            out.append("no instructions")
        for line in self.ingredients:
            out.extend(line.problems())
        for i, step in enumerate(self.instructions):
            if not step.strip():
                out.append(f"instruction {i} empty")
        return out

    def content_equals(self, other: "RecipeRecord") -> bool:
        """Field equality ignoring id (the tagged grammar carries no id slot)."""
        return (
            self.title == other.title
            and self.ingredients == other.ingredients
            and self.instructions == other.instructions
        )


@dataclass
class TaggedDocument:
    """A recipe (or a merged run of recipes) rendered as one tagged string."""

    text: str
    n_recipes: int = 1

    @property
    def char_len(self) -> int:
        return len(self.text)


@dataclass
class CorpusStats:
    """Length distribution of a document set: mean, population sigma, histogram."""

    n: int
    mean_len: float
    std_len: float
    min_len: int
    max_len: int
    bin_width: int
    bin_counts: list[int]

    def bin_edges(self) -> list[int]:
        """Left edges of the histogram bins; bins cover [min_len, max_len]."""
        return [self.min_len + i * self.bin_width for i in range(len(self.bin_counts))]


@dataclass
class IngestResult:
    records: list[RecipeRecord]
    rejects: list[tuple[int, str]]  # (1-based line number, reason)


def _parse_quantity_str(raw) -> Fraction | None:
    if raw is None:
        return None
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise ValueError(f"quantity must be a string or null, got {type(raw).__name__}")
    raw = raw.strip()
    if "/" in raw:
        num, den = raw.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(raw))


def _record_from_obj(obj) -> RecipeRecord:
    if not isinstance(obj, dict):
        raise ValueError("row is not an object")
    for key in ("id", "title", "ingredients", "instructions"):
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
    ingredients = []
    for item in obj["ingredients"]:
        if not isinstance(item, dict) or "name" not in item:
            raise ValueError("ingredient entry missing name")
        ingredients.append(
            IngredientLine(
                name=normalize_text(str(item["name"])),
                quantity=_parse_quantity_str(item.get("quantity")),
                unit=normalize_text(str(item.get("unit") or "")),
            )
        )
    instructions = [normalize_text(str(s)) for s in obj["instructions"]]
    return RecipeRecord(
        id=str(obj["id"]),
        title=normalize_text(str(obj["title"])),
        ingredients=ingredients,
        instructions=instructions,
    )


def ingest(path: str | Path, format: str = "record-lines") -> IngestResult:
    """Read a recipe export into records; malformed rows go to the reject report.

    ``record-lines`` is one JSON object per line with fields id, title,
    ingredients (array of {quantity, unit, name}), instructions.
    ``delimited-table`` is a CSV with the same four columns, list-valued cells
    JSON-encoded.  Raises :class:`EmptyCorpusError` when no row parses.
    """
    path = Path(path)
    records: list[RecipeRecord] = []
    rejects: list[tuple[int, str]] = []

    if format == "record-lines":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(_record_from_obj(json.loads(line)))
                except (ValueError, TypeError) as exc:
                    rejects.append((lineno, str(exc)))
    elif format == "delimited-table":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    obj = {
                        "id": row["id"],
                        "title": row["title"],
                        "ingredients": json.loads(row["ingredients"]),
                        "instructions": json.loads(row["instructions"]),
                    }
                    records.append(_record_from_obj(obj))
                except (ValueError, TypeError, KeyError) as exc:
                    rejects.append((lineno, str(exc)))
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    if not records:
        raise EmptyCorpusError(f"no parseable records in {path}")
    return IngestResult(records=records, rejects=rejects)


def _quantity_to_str(q: Fraction | None):
    if q is None:
        return None
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def export_records(records: list[RecipeRecord], path: str | Path, format: str = "record-lines") -> None:
    """Write records back out in an ingestible format."""
    path = Path(path)
    rows = []
    for r in records:
        rows.append(
            {
                "id": r.id,
                "title": r.title,
                "ingredients": [
                    {"quantity": _quantity_to_str(l.quantity), "unit": l.unit, "name": l.name}
                    for l in r.ingredients
                ],
                "instructions": list(r.instructions),
            }
        )
    if format == "record-lines":
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    elif format == "delimited-table":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "title", "ingredients", "instructions"])
            for row in rows:
                writer.writerow(
                    [
                        row["id"],
                        row["title"],
                        json.dumps(row["ingredients"], ensure_ascii=False),
                        json.dumps(row["instructions"], ensure_ascii=False),
                    ]
                )
    else:
        raise ValueError(f"unknown corpus format {format!r}")


def _dedupe_key(record: RecipeRecord):
    title = normalize_text(record.title).lower()
    names = tuple(sorted(normalize_text(l.name).lower() for l in record.ingredients))
    return title, names


def clean(records: list[RecipeRecord]) -> tuple[list[RecipeRecord], list[tuple[str, str]]]:
    """Drop incomplete and redundant records.

    Redundant means identical normalized title plus identical ingredient-name
    multiset; the first occurrence wins.  Returns (kept, [(id, reason)]).
    """
    kept: list[RecipeRecord] = []
    rejected: list[tuple[str, str]] = []
    seen = set()
    for record in records:
        if record.problems():
            rejected.append((record.id, "incomplete"))
            continue
        key = _dedupe_key(record)
        if key in seen:
            rejected.append((record.id, "redundant"))
            continue
        seen.add(key)
        kept.append(record)
    return kept, rejected


def length_stats(docs: list[TaggedDocument], n_bins: int = 20) -> CorpusStats:
    """Mean, population standard deviation, and histogram of document lengths."""
    if not docs:
        raise EmptyCorpusError("length_stats over empty document list")
    lengths = [d.char_len for d in docs]
    n = len(lengths)
    mean = sum(lengths) / n
    var = sum((x - mean) ** 2 for x in lengths) / n
    lo, hi = min(lengths), max(lengths)
    width = max(1, math.ceil((hi - lo + 1) / n_bins))
    counts = [0] * math.ceil((hi - lo + 1) / width)
    for x in lengths:
        counts[(x - lo) // width] += 1
    return CorpusStats(
        n=n,
        mean_len=mean,
        std_len=math.sqrt(var),
        min_len=lo,
        max_len=hi,
        bin_width=width,
        bin_counts=counts,
    )


def select_window(
    docs: list[TaggedDocument], stats: CorpusStats, hard_cap: int = 2000
) -> tuple[list[TaggedDocument], list[TaggedDocument]]:
    """Drop over-length documents; keep everything at or under min(cap, mean+2*sigma).

    Short documents below the 2-sigma window floor are retained so that
    :func:`merge_short` can combine them later.
    """
    hi = min(hard_cap, stats.mean_len + 2 * stats.std_len)
    kept = [d for d in docs if d.char_len <= hi]
    dropped = [d for d in docs if d.char_len > hi]
    return kept, dropped


def merge_short(docs: list[TaggedDocument], stats: CorpusStats) -> list[TaggedDocument]:
    """Concatenate sub-(mean-3*sigma) documents until each run reaches mean-sigma.

    Merging is greedy in corpus order; each merged document sits at the
    position of its first member.  Non-short documents pass through unchanged
    and the total embedded recipe count is conserved.
    """
    floor = max(1.0, stats.mean_len - 3 * stats.std_len)
    target = stats.mean_len - stats.std_len

    out: list[TaggedDocument | None] = []
    buffer: list[TaggedDocument] = []
    buffer_slot: int | None = None

    def flush():
        nonlocal buffer, buffer_slot
        if not buffer:
            return
        merged = TaggedDocument(
            text="".join(d.text for d in buffer),
            n_recipes=sum(d.n_recipes for d in buffer),
        )
        assert buffer_slot is not None
        out[buffer_slot] = merged
        buffer = []
        buffer_slot = None

    for doc in docs:
        if doc.char_len < floor:
            if not buffer:
                buffer_slot = len(out)
                out.append(None)  # placeholder for the merged document
            buffer.append(doc)
            if sum(d.char_len for d in buffer) >= target:
                flush()
        else:
            out.append(doc)
    flush()
    return [d for d in out if d is not None]


def _render_quantity(q: Fraction) -> str:
    whole = q.numerator // q.denominator
    frac = q - whole
    if frac == 0:
        return str(whole)
    key = (frac.numerator, frac.denominator)
    frac_text = FRACTION_TOKENS.get(key, f"{frac.numerator}/{frac.denominator}")
    if whole > 0:
        return f"{whole} {frac_text}"
    return frac_text


def render_ingredient(line: IngredientLine) -> str:
    """Render one ingredient as ``{quantity} {unit} {name}``, absent fields omitted."""
    parts = []
    if line.quantity is not None:
        parts.append(_render_quantity(line.quantity))
    if line.unit:
        parts.append(line.unit)
    parts.append(line.name)
    return " ".join(parts)


def _check_payload(text: str, what: str) -> None:
    if normalize_text(text) != text:
        raise ValidationError(f"{what} is not whitespace-normalized: {text!r}")
    for tok in CONTROL_TAGS:
        if tok in text:
            raise ValidationError(f"{what} contains reserved tag {tok}")
    for tok in TOKEN_TO_FRACTION:
        if tok in text:
            raise ValidationError(f"{what} contains reserved token {tok}")


def serialize(record: RecipeRecord) -> TaggedDocument:
    """Render a valid record into the canonical tagged document.

    Deterministic; quantities use fraction tokens where one exists.  Raises
    :class:`ValidationError` for invariant-violating records or payloads that
    would corrupt the tag structure.
    """
    probs = record.problems()
    if probs:
        raise ValidationError(f"record {record.id!r} violates invariants: {'; '.join(probs)}")
    _check_payload(record.title, "title")
    for line in record.ingredients:
        _check_payload(line.name, "ingredient name")
        _check_payload(line.unit, "ingredient unit") if line.unit else None
    for step in record.instructions:
        _check_payload(step, "instruction")

    parts = [RECIPE_START, INGR_START]
    for i, line in enumerate(record.ingredients):
        if i > 0:
            parts.append(NEXT_INGR)
        parts.append(render_ingredient(line))
    parts.append(INGR_END)
    parts.extend([TITLE_START, record.title, TITLE_END, INSTR_START])
    for i, step in enumerate(record.instructions):
        if i > 0:
            parts.append(NEXT_INSTR)
        parts.append(step)
    parts.extend([INSTR_END, RECIPE_END])
    return TaggedDocument(text=" ".join(parts))


@dataclass
class ParsedRecipe:
    """Best-effort parse output: the recovered record plus malformation notes."""

    record: RecipeRecord
    malformed: bool
    sections: list[str]  # which of ingredients/title/instructions were recovered


_INT_RE = re.compile(r"^\d+$")
_FRAC_RE = re.compile(r"^(\d+)/(\d+)$")


def _parse_quantity_tokens(tokens: list[str]) -> tuple[Fraction | None, int]:
    """Consume leading quantity-shaped tokens; returns (quantity, tokens used)."""
    if not tokens:
        return None, 0
    q = None
    used = 0
    if _INT_RE.match(tokens[0]):
        q = Fraction(int(tokens[0]))
        used = 1
    if used < len(tokens):
        tok = tokens[used]
        if tok in TOKEN_TO_FRACTION:
            q = (q or Fraction(0)) + TOKEN_TO_FRACTION[tok]
            used += 1
        else:
            m = _FRAC_RE.match(tok)
            if m and int(m.group(2)) != 0:
                q = (q or Fraction(0)) + Fraction(int(m.group(1)), int(m.group(2)))
                used += 1
    return q, used


def parse_ingredient(text: str) -> IngredientLine:
    """Inverse of :func:`render_ingredient` for lexicon-clean lines."""
    tokens = text.split()
    quantity, used = _parse_quantity_tokens(tokens)
    rest = tokens[used:]
    unit = ""
    if quantity is not None and len(rest) >= 2 and rest[0].lower() in UNIT_LEXICON:
        unit = rest[0]
        rest = rest[1:]
    elif quantity is None and len(rest) >= 2 and rest[0].lower() in UNIT_LEXICON:
        unit = rest[0]
        rest = rest[1:]
    return IngredientLine(name=" ".join(rest), quantity=quantity, unit=unit)


def _find_span(text: str, start_tag: str, end_tag: str, from_pos: int):
    """Locate `start_tag ... end_tag` at or after from_pos; None when incomplete."""
    i = text.find(start_tag, from_pos)
    if i < 0:
        return None
    j = text.find(end_tag, i + len(start_tag))
    if j < 0:
        return None
    return i, i + len(start_tag), j, j + len(end_tag)


def parse(text: str) -> ParsedRecipe:
    """Parse a tagged document back into a record.

    Inverse of :func:`serialize` on well-formed input; on malformed input
    returns whatever sections were completely recovered and sets the malformed
    flag.  Raises :class:`UnparseableError` when no recipe-start tag exists.
    """
    if RECIPE_START not in text:
        raise UnparseableError("no recipe-start tag in text")

    malformed = False
    sections: list[str] = []
    record = RecipeRecord(id="", title="", ingredients=[], instructions=[])

    body_start = text.find(RECIPE_START)
    if text[:body_start].strip():
        malformed = True
    cursor = body_start + len(RECIPE_START)

    ingr = _find_span(text, INGR_START, INGR_END, cursor)
    if ingr:
        payload = text[ingr[1] : ingr[2]]
        lines = [normalize_text(p) for p in payload.split(NEXT_INGR)]
        lines = [p for p in lines if p]
        if lines:
            record.ingredients = [parse_ingredient(p) for p in lines]
            sections.append("ingredients")
        else:
            malformed = True
        cursor = ingr[3]
    else:
        malformed = True

    title = _find_span(text, TITLE_START, TITLE_END, cursor)
    if title:
        payload = normalize_text(text[title[1] : title[2]])
        if payload:
            record.title = payload
            sections.append("title")
        else:
            malformed = True
        cursor = title[3]
    else:
        malformed = True

    instr = _find_span(text, INSTR_START, INSTR_END, cursor)
    if instr:
        payload = text[instr[1] : instr[2]]
        steps = [normalize_text(p) for p in payload.split(NEXT_INSTR)]
        steps = [p for p in steps if p]
        if steps:
            record.instructions = steps
            sections.append("instructions")
        else:
            malformed = True
        cursor = instr[3]
    else:
        malformed = True

    end = text.find(RECIPE_END, cursor)
    if end < 0 or text[end + len(RECIPE_END) :].strip():
        malformed = True

    # Bracketing tags appear exactly once; the list separators may repeat but
    # only inside their own section's span.
    if not malformed:
        for tag in (
            RECIPE_START, INGR_START, INGR_END, TITLE_START, TITLE_END,
            INSTR_START, INSTR_END, RECIPE_END,
        ):
            if text.count(tag) != 1:
                malformed = True
                break
    if not malformed and ingr:
        if text.count(NEXT_INGR) != text[ingr[1] : ingr[2]].count(NEXT_INGR):
            malformed = True
    if not malformed and instr:
        if text.count(NEXT_INSTR) != text[instr[1] : instr[2]].count(NEXT_INSTR):
            malformed = True
    return ParsedRecipe(record=record, malformed=malformed, sections=sections)


def split_documents(text: str) -> list[str]:
    """Split a multi-recipe text on recipe-start boundaries."""
    starts = [m.start() for m in re.finditer(re.escape(RECIPE_START), text)]
    if not starts:
        raise UnparseableError("no recipe-start tag in text")
    spans = list(zip(starts, starts[1:] + [len(text)]))
    return [text[a:b] for a, b in spans]


def parse_all(text: str) -> list[ParsedRecipe]:
    """Parse every recipe embedded in a (possibly merged) document."""
    return [parse(chunk) for chunk in split_documents(text)]


def ingredient_index(records: list[RecipeRecord]) -> list[str]:
    """Deduplicated, lowercased, sorted ingredient names for the picker endpoint."""
    names = {normalize_text(l.name).lower() for r in records for l in r.ingredients}
    return sorted(n for n in names if n)
