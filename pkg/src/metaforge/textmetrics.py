"""Edit distance and OCR-to-text reconciliation."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from rapidfuzz.distance import Levenshtein as _Lev

from .errors import ParseError, ValidationError
from .model import Element


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance over code points."""
    return _Lev.distance(a, b)


def levenshtein_within(a: str, b: str, bound: int) -> int:
    """Exact distance when it is <= bound, otherwise ``bound + 1``."""
    if bound < 0:
        return 0 if a == b else 1
    return _Lev.distance(a, b, score_cutoff=bound)


_WS = re.compile(r"\s+")


def normalize_text(s: str, *, whitespace: bool = True, fold_width: bool = False, fold_case: bool = False) -> str:
    """Optional text normalization applied before distance computation.

    ``whitespace`` strips the ends and collapses internal runs to one space;
    ``fold_width`` applies NFKC (full-width punctuation and letters to
    half-width); ``fold_case`` casefolds.
    """
    if fold_width:
        s = unicodedata.normalize("NFKC", s)
    if fold_case:
        s = s.casefold()
    if whitespace:
        s = _WS.sub(" ", s).strip()
    return s


@dataclass(frozen=True)
class MatchResult:
    image_element_index: int
    best_text_element_index: int | None
    distance: int
    accepted: bool

    def __post_init__(self):
        if self.accepted and self.best_text_element_index is None:
            raise ValidationError("an accepted match needs a text element")


def reconcile(
    image_elements: Sequence[Element],
    text_elements: Sequence[Element],
    threshold: int = 3,
    *,
    relative: float | None = None,
    normalize: bool = True,
    fold_width: bool = False,
    fold_case: bool = False,
) -> list[MatchResult]:
    """Find the nearest text element for each image element's OCR text.

    A match is accepted when its distance is at most ``threshold`` or, in
    relative mode, at most ``relative * len(ocr_text)``.  Distance ties go to
    the text element with the smaller sentence coordinate.  Several image
    elements may share one text element.
    """
    if threshold < 0:
        raise ValidationError(f"threshold must be >= 0, got {threshold}")
    if relative is not None and relative < 0:
        raise ValidationError(f"relative threshold must be >= 0, got {relative}")

    def norm(s: str) -> str:
        return normalize_text(s, whitespace=normalize, fold_width=fold_width, fold_case=fold_case)

    # rank = position in coordinate order; lower rank wins distance ties
    order = sorted(range(len(text_elements)),
                   key=lambda i: (text_elements[i].coord is None, text_elements[i].coord or (0, 0), i))
    cands = [(rank, i, norm(text_elements[i].text)) for rank, i in enumerate(order)]
    exact: dict[str, int] = {}
    for _, i, text in cands:
        exact.setdefault(text, i)

    results = []
    for idx, img in enumerate(image_elements):
        if not cands:
            results.append(MatchResult(idx, None, 0, False))
            continue
        ocr = norm(img.text)
        limit = relative * len(ocr) if relative is not None else threshold
        if ocr in exact:
            results.append(MatchResult(idx, exact[ocr], 0, True))
            continue
        best = _nearest(ocr, cands, int(limit))
        if best is None:
            # nothing within the limit: still report the true minimum distance
            n = len(ocr)
            best = _nearest(ocr, sorted(cands, key=lambda c: (abs(len(c[2]) - n), c[0])), None)
        d, ti = best
        results.append(MatchResult(idx, ti, d, d <= limit))
    return results


def _nearest(ocr: str, cands, bound: int | None) -> tuple[int, int] | None:
    """(distance, text index) of the closest candidate, lowest rank on ties.

    With a ``bound`` only candidates within it are considered; ``None`` if
    there are none.
    """
    best: tuple[int, int, int] | None = None  # (distance, rank, index)
    n = len(ocr)
    for rank, i, text in cands:
        if best is None and bound is None:
            best = (levenshtein(ocr, text), rank, i)
            continue
        b = bound if best is None else best[0]
        if abs(len(text) - n) > b:
            continue
        d = levenshtein_within(ocr, text, b)
        if d > b:
            continue
        if best is None or (d, rank) < best[:2]:
            best = (d, rank, i)
            if d == 0 and rank == 0:
                break
    return None if best is None else (best[0], best[2])


def apply_corrections(
    image_elements: Sequence[Element],
    text_elements: Sequence[Element],
    matches: Iterable[MatchResult],
) -> list[Element]:
    """Copy text-modal strings and coordinates onto accepted image elements."""
    out = list(image_elements)
    for m in matches:
        if not m.accepted:
            continue
        src = text_elements[m.best_text_element_index]
        out[m.image_element_index] = out[m.image_element_index].with_(text=src.text, coord=src.coord)
    return out


MATCHES_HEADER = "image_idx\ttext_idx\tdistance\taccepted"


def format_matches(matches: Iterable[MatchResult]) -> list[str]:
    lines = [MATCHES_HEADER]
    for m in matches:
        ti = "" if m.best_text_element_index is None else str(m.best_text_element_index)
        lines.append(f"{m.image_element_index}\t{ti}\t{m.distance}\t{int(m.accepted)}")
    return lines


def write_matches(path, matches: Iterable[MatchResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in format_matches(matches):
            f.write(line + "\n")


def read_matches(path) -> list[MatchResult]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line == MATCHES_HEADER:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError("expected image_idx, text_idx, distance, accepted", path=str(path), lineno=lineno)
            try:
                out.append(MatchResult(int(parts[0]), int(parts[1]) if parts[1] else None,
                                       int(parts[2]), parts[3] == "1"))
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), lineno=lineno) from None
    return out
