"""Deterministic synthetic corpora for demos, benchmarks, and self-checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .corpus import IngredientLine, RecipeRecord, serialize

_NAMES = (
    "flour", "sugar", "butter", "milk", "eggs", "honey", "yeast", "salt",
    "pepper", "onion", "garlic", "carrot", "celery", "tomato", "basil",
    "thyme", "lentils", "rice", "beans", "spinach", "cheese", "cream",
    "walnuts", "raisins", "apples", "lemon", "ginger", "paprika",
)

_UNITS = ("cup", "tbsp", "tsp", "oz", "lb", "g", "ml", "pinch", "clove", "slice")

_VERBS = (
    "mix", "whisk", "fold", "stir", "simmer", "bake", "roast", "chop",
    "dice", "saute", "season", "combine", "drain", "rinse", "toast",
)

_FILLER = (
    "stir", "gently", "and", "fold", "until", "smooth", "then", "let",
    "the", "mixture", "rest", "before", "serving", "warm",
)

_QUANTITIES = (None, 1, 2, 3, 4, Fraction(1, 2), Fraction(3, 4), Fraction(1, 4))


def _pad_to_length(record: RecipeRecord, target: int) -> RecipeRecord:
    """Grow the last instruction with filler words until the serialized
    document reaches the target character count (within one word)."""
    length = serialize(record).char_len
    words = []
    i = 0
    while length < target:
        word = _FILLER[i % len(_FILLER)]
        words.append(word)
        length += len(word) + 1
        i += 1
    if words:
        record.instructions[-1] += " " + " ".join(words)
    return record


def _base_record(rec_id: str, title: str, rng: random.Random) -> RecipeRecord:
    names = rng.sample(_NAMES, rng.randint(3, 6))
    ingredients = []
    for name in names:
        qty = rng.choice(_QUANTITIES)
        unit = rng.choice(_UNITS) if qty is not None else ""
        ingredients.append(IngredientLine(name=name, quantity=Fraction(qty) if qty is not None else None, unit=unit))
    steps = []
    for _ in range(rng.randint(3, 5)):
        verb = rng.choice(_VERBS)
        a, b = rng.sample(names, 2)
        steps.append(f"{verb} the {a} with the {b}")
    return RecipeRecord(id=rec_id, title=title, ingredients=ingredients, instructions=steps)


def demo_records(n: int = 40, seed: int = 0) -> list[RecipeRecord]:
    """Medium-sized varied recipes for demos and service fixtures."""
    rng = random.Random(seed)
    return [_base_record(f"demo-{i:04d}", f"demo dish {i}", rng) for i in range(n)]


_TOY_NAMES = ("rice", "bean", "corn", "kale", "plum", "pear", "mint", "oats", "figs", "yams")


def toy_records(n: int = 10, seed: int = 0) -> list[RecipeRecord]:
    """Tiny recipes with a small character set and one unique lead ingredient
    each, so a desk-scale model can commit the whole set to memory."""
    if n > len(_TOY_NAMES):
        raise ValueError(f"at most {len(_TOY_NAMES)} toy recipes available")
    rng = random.Random(seed)
    records = []
    for i in range(n):
        name = _TOY_NAMES[i]
        second = _TOY_NAMES[(i + 3) % len(_TOY_NAMES)]
        records.append(
            RecipeRecord(
                id=f"toy-{i}",
                title=f"{name} bowl",
                ingredients=[
                    IngredientLine(name=name, quantity=Fraction(rng.randint(1, 3)), unit="cup"),
                    IngredientLine(name=second, quantity=Fraction(1, 2), unit="tsp"),
                ],
                instructions=[f"mix the {name} and {second}", "serve warm"],
            )
        )
    return records


def planted_records(seed: int = 0) -> tuple[list[RecipeRecord], dict]:
    """A 1000-record corpus with known defects planted at known slots.

    925 well-formed records with serialized lengths spread over [1500, 1950],
    30 redundant copies of earlier records, 20 incomplete records, 10 records
    padded past the 2000-character cap, and 15 very short records well below
    the merge floor. The manifest maps each planted class to its record ids.
    """
    rng = random.Random(seed)
    total = 1000

    slots: dict[int, str] = {}

    def schedule(kind: str, count: int, step: int, offset: int) -> None:
        placed, p = 0, offset
        while placed < count:
            if p >= total:
                raise RuntimeError(f"ran out of slots for {kind}")
            if p not in slots:
                slots[p] = kind
                placed += 1
            p += step

    schedule("short", 15, 60, 60)
    schedule("long", 10, 97, 97)
    schedule("incomplete", 20, 41, 44)
    schedule("dup", 30, 31, 23)

    records: list[RecipeRecord] = []
    manifest: dict[str, list[str]] = {
        "normal": [], "short": [], "long": [], "incomplete": [], "dup": [],
    }
    last_normal: RecipeRecord | None = None

    for pos in range(total):
        kind = slots.get(pos, "normal")
        rec_id = f"r{pos:04d}"
        if kind == "normal":
            rec = _base_record(rec_id, f"dish {pos:04d}", rng)
            _pad_to_length(rec, rng.randint(1500, 1950))
            last_normal = rec
        elif kind == "long":
            rec = _base_record(rec_id, f"long dish {pos:04d}", rng)
            _pad_to_length(rec, rng.randint(2400, 2800))
        elif kind == "short":
            lead = rng.choice(_NAMES)
            rec = RecipeRecord(
                id=rec_id,
                title=f"tiny {pos:04d}",
                ingredients=[IngredientLine(name=lead, quantity=Fraction(1), unit="cup")],
                instructions=[f"warm the {lead}", "serve"],
            )
        elif kind == "incomplete":
            rec = _base_record(rec_id, f"broken {pos:04d}", rng)
            flavor = len(manifest["incomplete"]) % 3
            if flavor == 0:
                rec.title = ""
            elif flavor == 1:
                rec.ingredients = []
            else:
                rec.instructions = []
        else:  # dup
            assert last_normal is not None
            rec = RecipeRecord(
                id=rec_id,
                title=last_normal.title,
                ingredients=[
                    IngredientLine(name=l.name, quantity=Fraction(1), unit=l.unit)
                    for l in last_normal.ingredients
                ],
                instructions=list(reversed(last_normal.instructions)),
            )
        manifest[kind].append(rec_id)
        records.append(rec)

    return records, manifest
