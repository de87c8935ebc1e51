"""Core domain types: sentence coordinates, detection vectors, elements, records."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import ValidationError

# Sentinel magnitude of the absolute right subtree.  Twice the value still
# fits a signed 32-bit integer.
ARS_MAGNITUDE = 0x3F3F3F3F


class SentenceCoord(NamedTuple):
    """(paragraph index, sentence index); tuple ordering compares pi first, then si."""

    pi: int
    si: int

    def __str__(self) -> str:
        return f"({self.pi},{self.si})"


ARS_WEIGHT = SentenceCoord(ARS_MAGNITUDE, ARS_MAGNITUDE)
# Weight of the tree root: strictly below every real coordinate.
ROOT_WEIGHT = SentenceCoord(-1, -1)


def make_coord(pi: int, si: int) -> SentenceCoord:
    if isinstance(pi, bool) or isinstance(si, bool) or int(pi) != pi or int(si) != si:
        raise ValidationError(f"sentence coordinate must be integers, got ({pi!r},{si!r})")
    if pi < 0 or si < 0:
        raise ValidationError(f"sentence coordinate must be non-negative, got ({pi},{si})")
    return SentenceCoord(int(pi), int(si))


class Modality(str, Enum):
    TEXT = "Text"
    IMAGE = "Image"
    FUSED = "Fused"


@dataclass(frozen=True)
class DetectionVector:
    """One detector output: label, probability and the box (origin x,y, width w, height d)."""

    label: str
    prob: float
    x: float
    y: float
    w: float
    d: float

    def __post_init__(self):
        for name in ("prob", "x", "y", "w", "d"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ValidationError(f"detection {name} must be a finite number, got {v!r}")
        if not 0.0 <= self.prob <= 1.0:
            raise ValidationError(f"detection probability {self.prob!r} outside [0, 1]")
        if self.w <= 0 or self.d <= 0:
            raise ValidationError(f"detection box needs positive width/height, got w={self.w!r} d={self.d!r}")


@dataclass(frozen=True)
class Element:
    label: str
    text: str
    modality: Modality
    coord: SentenceCoord | None = None
    box: DetectionVector | None = None
    page: int = 1
    doc_id: str = ""

    def __post_init__(self):
        if self.page < 1:
            raise ValidationError(f"source page must be >= 1, got {self.page}")
        if self.modality is Modality.TEXT and self.coord is None:
            raise ValidationError("a text-modal element needs a sentence coordinate")
        if self.modality is Modality.IMAGE and self.box is None:
            raise ValidationError("an image-modal element needs a detection box")
        if self.modality is Modality.FUSED and self.coord is None and self.box is None:
            raise ValidationError("a fused element needs a coordinate or a box")

    def with_(self, **changes) -> Element:
        return replace(self, **changes)


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    text_elements: tuple[Element, ...] = ()
    image_elements: tuple[Element, ...] = ()
    sentence_table: dict[SentenceCoord, str] = field(default_factory=dict)

    def __post_init__(self):
        prev = None
        for el in self.text_elements:
            if prev is not None and el.coord < prev:
                raise ValidationError(
                    f"text elements of {self.doc_id!r} not in reading order: {el.coord} after {prev}"
                )
            prev = el.coord

    @property
    def last_coord(self) -> SentenceCoord | None:
        return max(self.sentence_table) if self.sentence_table else None


def sentence_table_from(elements: Iterable[Element]) -> dict[SentenceCoord, str]:
    """Map every coordinate to its text; elements sharing a sentence are joined by a space."""
    table: dict[SentenceCoord, str] = {}
    for el in elements:
        if el.coord is None:
            continue
        if el.coord in table:
            table[el.coord] = f"{table[el.coord]} {el.text}"
        else:
            table[el.coord] = el.text
    return dict(sorted(table.items()))


# Full stops that end a sentence.  ASCII ones only count when followed by
# whitespace or the end of the paragraph ("No. 2", "3.14" stay intact);
# CJK ones always end a sentence.  Semicolons are deliberately absent.
DEFAULT_TERMINATORS = ".!?。！？…"
_CLOSERS = "\"'”’）)]」』"


def _split_sentences(paragraph: str, terminators: str) -> list[str]:
    out = []
    start = 0
    i = 0
    n = len(paragraph)
    while i < n:
        ch = paragraph[i]
        if ch in terminators:
            j = i + 1
            while j < n and (paragraph[j] in terminators or paragraph[j] in _CLOSERS):
                j += 1
            if ch.isascii() and j < n and not paragraph[j].isspace():
                i = j
                continue
            piece = paragraph[start:j].strip()
            if piece:
                out.append(piece)
            start = i = j
            continue
        i += 1
    tail = paragraph[start:].strip()
    if tail:
        out.append(tail)
    return out


def segment(document_text: str, terminators: str = DEFAULT_TERMINATORS) -> dict[SentenceCoord, str]:
    """Split text into paragraphs (at line breaks) and sentences (after terminal punctuation).

    Blank lines are skipped, so paragraph indices stay dense.  Text without
    terminal punctuation forms a single trailing sentence.

    >>> sorted(segment("A. B.\\n\\nC."))
    [SentenceCoord(pi=0, si=0), SentenceCoord(pi=0, si=1), SentenceCoord(pi=1, si=0)]
    """
    table: dict[SentenceCoord, str] = {}
    pi = 0
    for line in re.split(r"\r\n|\r|\n", document_text):
        sentences = _split_sentences(line, terminators)
        if not sentences:
            continue
        for si, sentence in enumerate(sentences):
            table[SentenceCoord(pi, si)] = sentence
        pi += 1
    return table
