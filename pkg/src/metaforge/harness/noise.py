"""Simulated extractor errors: per-modality class confusion and OCR character noise."""

from __future__ import annotations

import string
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..model import DetectionVector, DocumentRecord, Element
from ..taxonomy import GOVDOC, Taxonomy
from .corpus import doc_rng

DEFAULT_ALPHABET = string.ascii_lowercase + string.digits


def identity_confusion(k: int) -> np.ndarray:
    return np.eye(k)


def confusion_from_spec(spec: Mapping | None, taxonomy: Taxonomy = GOVDOC) -> np.ndarray:
    """Build a row-stochastic table from ``{gold: predicted}`` or ``{gold: {predicted: p}}``.

    Classes not mentioned are predicted correctly.
    """
    k = taxonomy.k
    table = np.eye(k)
    for gold, target in (spec or {}).items():
        g = taxonomy.code(gold)
        row = np.zeros(k)
        if isinstance(target, str):
            row[taxonomy.code(target)] = 1.0
        else:
            for pred, p in target.items():
                row[taxonomy.code(pred)] += float(p)
        table[g] = row
    return table


def accuracy_confusion(k: int, accuracy: float) -> np.ndarray:
    """Each class right with probability ``accuracy``, errors spread uniformly over the rest."""
    table = np.full((k, k), (1.0 - accuracy) / (k - 1))
    np.fill_diagonal(table, accuracy)
    return table


@dataclass(frozen=True)
class NoiseModel:
    text_confusion: np.ndarray
    image_confusion: np.ndarray
    ocr_corruption_rate: float = 0.0
    seed: int = 0
    alphabet: str = DEFAULT_ALPHABET
    # detector confidences are drawn uniformly from this range
    prob_range: tuple[float, float] = (0.5, 1.0)

    def __post_init__(self):
        for name in ("text_confusion", "image_confusion"):
            t = np.asarray(getattr(self, name), dtype=float)
            if t.ndim != 2 or t.shape[0] != t.shape[1]:
                raise ValidationError(f"{name} must be square, got shape {t.shape}")
            if np.any(t < 0) or not np.allclose(t.sum(axis=1), 1.0, rtol=0, atol=1e-9):
                raise ValidationError(f"{name} rows must be probability distributions")
            object.__setattr__(self, name, t)
        if self.text_confusion.shape != self.image_confusion.shape:
            raise ValidationError("text and image confusion tables differ in size")
        if not 0.0 <= self.ocr_corruption_rate <= 1.0:
            raise ValidationError(f"ocr_corruption_rate {self.ocr_corruption_rate} outside [0, 1]")
        if not self.alphabet:
            raise ValidationError("substitution alphabet is empty")

    @property
    def k(self) -> int:
        return self.text_confusion.shape[0]

    @classmethod
    def identity(cls, k: int = GOVDOC.k, **kw) -> NoiseModel:
        return cls(np.eye(k), np.eye(k), **kw)

    @classmethod
    def from_dict(cls, d: Mapping, taxonomy: Taxonomy = GOVDOC) -> NoiseModel:
        def table(key):
            spec = d.get(key)
            if isinstance(spec, Mapping) and "accuracy" in spec:
                return accuracy_confusion(taxonomy.k, float(spec["accuracy"]))
            if isinstance(spec, list):
                return np.asarray(spec, dtype=float)
            return confusion_from_spec(spec, taxonomy)

        return cls(
            text_confusion=table("text"),
            image_confusion=table("image"),
            ocr_corruption_rate=float(d.get("ocr_rate", 0.0)),
            seed=int(d.get("seed", 0)),
            alphabet=str(d.get("alphabet", DEFAULT_ALPHABET)),
        )


def corrupt(text: str, rate: float, rng: np.random.Generator, alphabet: str = DEFAULT_ALPHABET) -> str:
    """Substitute each character with probability ``rate`` by a different alphabet character."""
    if rate <= 0 or not text:
        return text
    hits = rng.random(len(text)) < rate
    out = list(text)
    for i in np.flatnonzero(hits):
        out[i] = _substitute(out[i], rng, alphabet)
    return "".join(out)


def corrupt_exact(text: str, n: int, rng: np.random.Generator, alphabet: str = DEFAULT_ALPHABET) -> str:
    """Substitute exactly ``min(n, len(text))`` distinct positions."""
    n = min(n, len(text))
    out = list(text)
    for i in rng.choice(len(text), size=n, replace=False) if n else ():
        out[i] = _substitute(out[i], rng, alphabet)
    return "".join(out)


def _substitute(ch: str, rng: np.random.Generator, alphabet: str) -> str:
    choices = [c for c in alphabet if c != ch]
    if not choices:
        return ch
    return choices[int(rng.integers(len(choices)))]


def _resample(label: str, table: np.ndarray, rng: np.random.Generator, taxonomy: Taxonomy) -> str:
    row = table[taxonomy.code(label)]
    return taxonomy.label(int(rng.choice(len(row), p=row)))


def apply_noise(
    corpus: Sequence[DocumentRecord],
    model: NoiseModel,
    taxonomy: Taxonomy = GOVDOC,
) -> tuple[list[list[Element]], list[list[Element]]]:
    """Per-document predicted text-modal and image-modal elements, index-aligned with gold.

    Randomness is drawn from streams keyed by (seed, doc_id), so results do
    not depend on corpus order or on how documents are batched.
    """
    if model.k != taxonomy.k:
        raise ValidationError(f"noise model has k={model.k}, taxonomy {taxonomy.name!r} has k={taxonomy.k}")
    text_preds, image_preds = [], []
    for doc in corpus:
        rng_t = doc_rng(model.seed, doc.doc_id, 1)
        rng_i = doc_rng(model.seed, doc.doc_id, 2)
        text_preds.append([
            el.with_(label=_resample(el.label, model.text_confusion, rng_t, taxonomy))
            for el in doc.text_elements
        ])
        lo, hi = model.prob_range
        preds = []
        for el in doc.image_elements:
            label = _resample(el.label, model.image_confusion, rng_i, taxonomy)
            prob = float(rng_i.uniform(lo, hi))
            b = el.box
            preds.append(el.with_(
                label=label,
                text=corrupt(el.text, model.ocr_corruption_rate, rng_i, model.alphabet),
                box=DetectionVector(label, prob, b.x, b.y, b.w, b.d),
            ))
        image_preds.append(preds)
    return text_preds, image_preds
