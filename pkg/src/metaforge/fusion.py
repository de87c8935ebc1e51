"""Decision-matrix fusion of text-modal and image-modal class predictions.

Row ``j = k1 * k + k2`` of the matrix holds the weights ``(w1, w2)`` applied
to the text one-hot (class ``k1``) and the image one-hot (class ``k2``).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .model import DocumentRecord, Element, Modality
from .taxonomy import GOVDOC, Taxonomy
from .textmetrics import MatchResult

log = logging.getLogger(__name__)

TEXT_ONLY = (1.0, 0.0)
IMAGE_ONLY = (0.0, 1.0)
NEUTRAL = (0.5, 0.5)


@dataclass(frozen=True)
class OneHot:
    k: int
    index: int

    def __post_init__(self):
        if self.k < 1 or not 0 <= self.index < self.k:
            raise ValidationError(f"one-hot index {self.index} outside [0, {self.k})")

    def vector(self) -> np.ndarray:
        v = np.zeros(self.k)
        v[self.index] = 1.0
        return v


@dataclass(frozen=True)
class FusionSample:
    text_pred: int
    image_pred: int
    gold: int


class DecisionMatrix:
    """A k^2 x 2 weight table; read-only once constructed."""

    def __init__(self, k: int, weights: np.ndarray | None = None):
        if k < 2:
            raise ValidationError(f"decision matrix needs k >= 2, got {k}")
        if weights is None:
            weights = np.full((k * k, 2), 0.5)
        weights = np.array(weights, dtype=float)
        if weights.shape != (k * k, 2):
            raise ValidationError(f"weights must have shape {(k * k, 2)}, got {weights.shape}")
        weights.setflags(write=False)
        self.k = k
        self.weights = weights

    def row(self, k1: int, k2: int) -> int:
        if not (0 <= k1 < self.k and 0 <= k2 < self.k):
            raise ValidationError(f"class pair ({k1},{k2}) outside [0, {self.k})")
        return k1 * self.k + k2

    def __getitem__(self, pair: tuple[int, int]) -> tuple[float, float]:
        w1, w2 = self.weights[self.row(*pair)]
        return float(w1), float(w2)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DecisionMatrix) and self.k == other.k and np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        trained = int(np.sum(np.any(self.weights != 0.5, axis=1)))
        return f"DecisionMatrix(k={self.k}, non_neutral_rows={trained})"

    def format(self) -> list[str]:
        lines = [f"k={self.k}"]
        for j, (w1, w2) in enumerate(self.weights):
            lines.append(f"{j // self.k} {j % self.k} {w1:g} {w2:g}")
        return lines

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(self.format()) + "\n")

    @classmethod
    def load(cls, path) -> DecisionMatrix:
        with open(path, encoding="utf-8") as f:
            lines = [ln.strip() for ln in f if ln.strip()]
        if not lines or not lines[0].startswith("k="):
            raise ParseError("decision matrix must start with 'k=<int>'", path=str(path), lineno=1)
        try:
            k = int(lines[0][2:])
        except ValueError:
            raise ParseError(f"bad header {lines[0]!r}", path=str(path), lineno=1) from None
        if len(lines) - 1 != k * k:
            raise ParseError(f"expected {k * k} rows, found {len(lines) - 1}", path=str(path))
        weights = np.empty((k * k, 2))
        for n, line in enumerate(lines[1:], 2):
            parts = line.split()
            try:
                k1, k2, w1, w2 = int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
            except (ValueError, IndexError):
                raise ParseError(f"bad row {line!r}", path=str(path), lineno=n) from None
            if not (0 <= k1 < k and 0 <= k2 < k):
                raise ParseError(f"class pair ({k1},{k2}) outside [0, {k})", path=str(path), lineno=n)
            weights[k1 * k + k2] = (w1, w2)
        return cls(k, weights)


def train_decision_matrix(samples: Iterable[FusionSample | tuple[int, int, int]], k: int) -> DecisionMatrix:
    """Set each row by majority vote over which modality was right.

    Agreeing rows (k1 == k2) stay neutral, as do ties, unseen rows, and rows
    whose samples are all wrong in both modalities.
    """
    if k < 2:
        raise ValidationError(f"decision matrix needs k >= 2, got {k}")
    text_right = np.zeros(k * k, dtype=np.int64)
    image_right = np.zeros(k * k, dtype=np.int64)
    for s in samples:
        t, i, g = (s.text_pred, s.image_pred, s.gold) if isinstance(s, FusionSample) else s
        for c in (t, i, g):
            if not 0 <= c < k:
                raise ValidationError(f"sample class {c} outside [0, {k})")
        if t == i:
            continue
        j = t * k + i
        if g == t:
            text_right[j] += 1
        elif g == i:
            image_right[j] += 1
    weights = np.full((k * k, 2), 0.5)
    weights[text_right > image_right] = TEXT_ONLY
    weights[image_right > text_right] = IMAGE_ONLY
    return DecisionMatrix(k, weights)


def fuse(text: OneHot, image: OneHot, W: DecisionMatrix) -> tuple[np.ndarray, int]:
    """Weighted sum of the two one-hots; argmax ties go to the text class."""
    if not text.k == image.k == W.k:
        raise ValidationError(f"dimension mismatch: text k={text.k}, image k={image.k}, matrix k={W.k}")
    w1, w2 = W[text.index, image.index]
    scores = w1 * text.vector() + w2 * image.vector()
    best = scores.max()
    decided = text.index if scores[text.index] == best else int(np.argmax(scores))
    return scores, decided


def fuse_labels(text_label: str, image_label: str, W: DecisionMatrix, taxonomy: Taxonomy = GOVDOC) -> str:
    _, decided = fuse(OneHot(W.k, taxonomy.code(text_label)), OneHot(W.k, taxonomy.code(image_label)), W)
    return taxonomy.label(decided)


def fuse_document(
    record: DocumentRecord,
    matches: Sequence[MatchResult],
    W: DecisionMatrix,
    taxonomy: Taxonomy = GOVDOC,
) -> list[Element]:
    """Merge both modalities of one document into a single element list.

    Each text element accepted by at least one image element is fused with
    the closest such image element (lowest index on ties).  Text elements
    without a match keep their text-modal class; image elements that are
    unmatched, or lose the competition for a text element, pass through as
    image-modal elements without a coordinate.  Output: coordinate-bearing
    elements in reading order, then image-only ones in input order.
    """
    if W.k != taxonomy.k:
        raise ValidationError(f"matrix k={W.k} does not fit taxonomy {taxonomy.name!r} (k={taxonomy.k})")
    winner: dict[int, MatchResult] = {}
    for m in matches:
        if not m.accepted:
            continue
        cur = winner.get(m.best_text_element_index)
        if cur is None or (m.distance, m.image_element_index) < (cur.distance, cur.image_element_index):
            winner[m.best_text_element_index] = m
    used = {m.image_element_index for m in winner.values()}

    fused: list[Element] = []
    for ti, tel in enumerate(record.text_elements):
        m = winner.get(ti)
        if m is None:
            fused.append(tel)
            continue
        iel = record.image_elements[m.image_element_index]
        label = fuse_labels(tel.label, iel.label, W, taxonomy)
        fused.append(Element(label=label, text=tel.text, modality=Modality.FUSED, coord=tel.coord,
                             box=iel.box, page=iel.page, doc_id=record.doc_id or tel.doc_id))
    for ii, iel in enumerate(record.image_elements):
        if ii in used:
            continue
        log.warning("%s: image element %d (%r) has no text counterpart; passing through", record.doc_id, ii, iel.text)
        fused.append(iel.with_(coord=None))
    return fused
