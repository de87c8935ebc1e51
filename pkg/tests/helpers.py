"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from metaforge.model import Element, Modality, SentenceCoord

# criterion number -> "CRITERION n PASS/FAIL ..." line, printed in the pytest summary
ACCEPTANCE: dict[int, str] = {}

SECTIONS = {1: "Section1", 2: "Section2", 3: "Section3"}
HEAD = ("SignOfIssuingAuthority", "DocumentNumber", "Title", "Addressee")
TAIL = ("IssuingAuthority", "DateOfWriting")


def lev_oracle(a: str, b: str) -> int:
    """Literal memoized recursion: lev(i, j) over prefixes of length i and j."""

    @lru_cache(maxsize=None)
    def lev(i: int, j: int) -> int:
        if min(i, j) == 0:
            return max(i, j)
        return min(lev(i - 1, j) + 1,
                   lev(i, j - 1) + 1,
                   lev(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return lev(len(a), len(b))


def el(label: str, pi: int, si: int = 0, text: str | None = None, doc_id: str = "d") -> Element:
    return Element(label, text if text is not None else f"{label} {pi}.{si}", Modality.TEXT,
                   coord=SentenceCoord(pi, si), doc_id=doc_id)


def random_outline(rng: np.random.Generator, n_max: int = 200, max_depth: int = 4) -> list[Element]:
    """A valid reading-order element sequence: no level skips, strictly increasing coordinates.

    Header attributes come first, sign-off attributes last; paragraphs may
    span several sentences, each sentence its own element.
    """
    budget = int(rng.integers(1, n_max + 1))
    out: list[Element] = []
    pi = 0
    for label in HEAD:
        if len(out) < budget and rng.random() < 0.6:
            out.append(el(label, pi))
            pi += 1
    n_tail = min(int(rng.integers(0, 3)), budget - len(out))
    depth = 0
    while len(out) < budget - n_tail:
        r = rng.random()
        if r < 0.45 or depth == 0 and r < 0.6:
            # heading at a level 1..depth+1, capped below max_depth
            level = int(rng.integers(1, min(depth + 1, max_depth - 1) + 1))
            out.append(el(SECTIONS[level], pi))
            depth = level
            pi += 1
        else:
            for si in range(int(rng.integers(1, 4))):
                if len(out) >= budget - n_tail:
                    break
                out.append(el("Paragraph", pi, si))
            pi += 1
    for label in TAIL[:n_tail]:
        out.append(el(label, pi))
        pi += 1
    return out


def expected_parents(elements: list[Element], taxonomy) -> list[SentenceCoord | None]:
    """For each vertex element, the coordinate of its parent vertex (None for the root).

    Scans backwards for the nearest heading one level up; paragraphs take the
    nearest heading of any level.
    """
    out = []
    for i, e in enumerate(elements):
        role = taxonomy.role(e.label)
        if role in ("title", "attribute"):
            continue
        want = None if role == "paragraph" else taxonomy.section_level(e.label) - 1
        parent = None
        for prev in reversed(elements[:i]):
            if taxonomy.role(prev.label) != "section":
                continue
            lvl = taxonomy.section_level(prev.label)
            if want is None or lvl == want:
                parent = prev.coord
                break
            if lvl < want:
                break
        out.append(parent)
    return out


def brute_micro_f1(pred: list, gold: list) -> float:
    """Pooled one-vs-rest counts over the union of labels."""
    labels = sorted(set(pred) | set(gold))
    tp = fp = fn = 0
    for lab in labels:
        for p, g in zip(pred, gold):
            tp += p == lab and g == lab
            fp += p == lab and g != lab
            fn += p != lab and g == lab
    return 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0
