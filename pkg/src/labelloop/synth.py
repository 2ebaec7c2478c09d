"""Synthetic commodity-name corpus generator for desk-scale simulation.

Items are short pseudo product names built from keyword families:

  positive   "{filler} {variant} {category} {filler}"   e.g. "premium mocha coffee 250g"
  negative   "{filler} {kw} {family} {filler}"          e.g. "instant sencha tea pack"
  ambiguous  "{category} {family} {filler}"             e.g. "coffee tea combo"

Ambiguous items mix fragments of the positive category and a distractor
family; their ground truth is negative (a "coffee tea" is a tea). A fraction
of pure negatives carries a "trap" term ("brew", "roast", ...) that the
companion lexicon scores positive, which gives the zero-shot scorer a
realistic false-positive rate while staying learnable for trained models
through the family root word.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import DataError, DataPoint, Pool, STREAM_SYNTH, derive_rng
from .models import ZeroShotLexicon

POSITIVE_VARIANTS = [
    "espresso",
    "latte",
    "mocha",
    "cappuccino",
    "americano",
    "macchiato",
    "ristretto",
    "affogato",
]

DISTRACTOR_FAMILIES = {
    "tea": ["sencha", "matcha", "oolong", "puerh", "darjeeling", "rooibos"],
    "juice": ["mango", "guava", "citrus", "lychee", "pomelo", "cranberry"],
    "snack": ["waffle", "pretzel", "biscuit", "granola", "cracker", "nougat"],
}

FILLERS = [
    "premium",
    "instant",
    "classic",
    "gold",
    "fresh",
    "daily",
    "pack",
    "combo",
    "250g",
    "500g",
]

TRAP_TERMS = ["brew", "roast", "barista", "crema"]

# lexicon coverage: first half of each keyword list
_COVERED_VARIANTS = POSITIVE_VARIANTS[:4]
_COVERED_DISTRACTORS = {f: kws[:3] for f, kws in DISTRACTOR_FAMILIES.items()}


def default_lexicon(category: str = "coffee", temperature: float = 1.0) -> ZeroShotLexicon:
    """Deliberately imperfect zero-shot lexicon matched to the generator."""
    positive = {category: 3.0}
    for v in _COVERED_VARIANTS:
        positive[v] = 3.0
    for t in TRAP_TERMS:
        positive[t] = 3.5
    for f in FILLERS:
        positive[f] = 0.4
    negative = {}
    for family, covered in _COVERED_DISTRACTORS.items():
        negative[family] = 3.0
        for kw in covered:
            negative[kw] = 3.0
    return ZeroShotLexicon(positive, negative, temperature)


def generate_pool(
    size: int,
    positive_fraction: float = 0.10,
    ambiguous_fraction: float = 0.05,
    seed: int = 0,
    category: str = "coffee",
    trap_fraction: float = 0.30,
) -> Pool:
    """Seeded corpus with exact class counts.

    Exactly round(size * positive_fraction) items are hidden-positive and
    round(size * ambiguous_fraction) are ambiguous (mixed-fragment,
    hidden-negative). Identical arguments give identical pools.
    """
    if size < 1:
        raise DataError(f"size must be >= 1, got {size}")
    for name, frac in (
        ("positive_fraction", positive_fraction),
        ("ambiguous_fraction", ambiguous_fraction),
        ("trap_fraction", trap_fraction),
    ):
        if not (0.0 <= frac <= 1.0):
            raise DataError(f"{name} must be in [0,1], got {frac}")
    n_pos = round(size * positive_fraction)
    n_amb = round(size * ambiguous_fraction)
    if n_pos + n_amb > size:
        raise DataError("positive_fraction + ambiguous_fraction exceed the pool")
    n_neg = size - n_pos - n_amb

    rng = derive_rng(seed, STREAM_SYNTH)
    families = sorted(DISTRACTOR_FAMILIES)

    def pick(items):
        return items[rng.integers(0, len(items))]

    texts: list[tuple[str, bool]] = []
    for _ in range(n_pos):
        text = f"{pick(FILLERS)} {pick(POSITIVE_VARIANTS)} {category} {pick(FILLERS)}"
        texts.append((text, True))
    for _ in range(n_amb):
        family = pick(families)
        texts.append((f"{category} {family} {pick(FILLERS)}", False))
    for _ in range(n_neg):
        family = pick(families)
        kw = pick(DISTRACTOR_FAMILIES[family])
        lead = pick(TRAP_TERMS) if rng.random() < trap_fraction else pick(FILLERS)
        texts.append((f"{lead} {kw} {family} {pick(FILLERS)}", False))

    order = rng.permutation(len(texts))
    width = max(5, len(str(size)))
    points = [
        DataPoint(id=f"d{i:0{width}d}", text=texts[j][0], hidden_label=texts[j][1])
        for i, j in enumerate(order)
    ]
    return Pool(points)
