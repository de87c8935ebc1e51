"""Seeded synthetic governmental-style documents with gold labels in both modalities."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..model import DetectionVector, DocumentRecord, Element, Modality, SentenceCoord, sentence_table_from
from ..textmetrics import levenshtein_within

# Element counts of the reference governmental-document corpus, per class.
TABLE1_COUNTS = {
    "SignOfIssuingAuthority": 1347,
    "DocumentNumber": 1344,
    "Title": 1359,
    "Addressee": 1065,
    "Section1": 5184,
    "Section2": 4697,
    "Section3": 1415,
    "IssuingAuthority": 2073,
    "DateOfWriting": 1178,
    "Paragraph": 10280,
}


def _ratio(name: str) -> float:
    return TABLE1_COUNTS[name] / TABLE1_COUNTS["Title"]


@dataclass(frozen=True)
class LayoutProfile:
    """Per-document element counts.

    Presence probabilities apply to the single-occurrence header/footer
    classes; ``*_mean`` values are Poisson means on top of the ``min_*``
    floors.  Paragraphs hold ``sentences`` (inclusive range) sentences.
    """

    name: str = "default"
    sign_prob: float = min(1.0, _ratio("SignOfIssuingAuthority"))
    docnum_prob: float = min(1.0, _ratio("DocumentNumber"))
    addressee_prob: float = _ratio("Addressee")
    date_prob: float = _ratio("DateOfWriting")
    min_issuing: int = 1
    issuing_mean: float = _ratio("IssuingAuthority") - 1
    min_section1: int = 1
    section1_mean: float = _ratio("Section1") - 1
    section2_mean: float = _ratio("Section2")
    section3_mean: float = _ratio("Section3")
    min_paragraphs: int = 0
    paragraph_mean: float = _ratio("Paragraph")
    sentences: tuple[int, int] = (1, 3)
    words: tuple[int, int] = (5, 10)
    min_text_distance: int = 7

    @classmethod
    def from_dict(cls, d: dict) -> LayoutProfile:
        d = dict(d)
        for key in ("sentences", "words"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


DEFAULT_PROFILE = LayoutProfile()
MINIMAL_PROFILE = LayoutProfile(
    name="minimal", sign_prob=0.0, docnum_prob=0.0, addressee_prob=0.0, date_prob=0.0,
    min_issuing=0, issuing_mean=0.0, min_section1=1, section1_mean=0.0, section2_mean=0.0,
    section3_mean=0.0, min_paragraphs=1, paragraph_mean=0.0, sentences=(1, 1),
)
PROFILES = {"default": DEFAULT_PROFILE, "minimal": MINIMAL_PROFILE}


def resolve_profile(profile: str | dict | LayoutProfile | None) -> LayoutProfile:
    if profile is None:
        return DEFAULT_PROFILE
    if isinstance(profile, LayoutProfile):
        return profile
    if isinstance(profile, dict):
        return LayoutProfile.from_dict(profile)
    try:
        return PROFILES[profile]
    except KeyError:
        raise ValidationError(f"unknown layout profile {profile!r}; choose from {sorted(PROFILES)}") from None


_WORDS = (
    "notice epidemic prevention control office university ministry commission department committee "
    "province municipal county urban rural public health safety emergency response management work plan "
    "implementation opinion regulation measure policy reform development service supervision inspection "
    "education science technology industry finance market enterprise agriculture transport energy water "
    "resource environment protection housing construction employment social security medical insurance "
    "information data network platform system standard quality capacity training evaluation assessment "
    "coordination cooperation support guarantee funding budget project program pilot region district "
    "community resident citizen staff personnel organization responsibility accountability deadline report"
).split()
_VERBS = ("strengthen", "improve", "promote", "implement", "establish", "support", "coordinate", "ensure")
_AUTHORITIES = ("General Office of the State Council", "Ministry of Education", "Ministry of Finance",
                "National Health Commission", "Ministry of Transport", "University Office",
                "Provincial People's Government", "Municipal Development Commission")


@dataclass
class _Writer:
    rng: np.random.Generator
    profile: LayoutProfile
    doc_id: str
    texts: list[str] = field(default_factory=list)

    def words(self, n: int) -> str:
        return " ".join(self.rng.choice(_WORDS, size=n))

    def unique(self, make) -> str:
        # keep texts pairwise far apart so OCR noise cannot make them collide
        for _ in range(100):
            text = make()
            bound = self.profile.min_text_distance - 1
            if all(levenshtein_within(text, t, bound) > bound for t in self.texts):
                self.texts.append(text)
                return text
        raise RuntimeError(f"{self.doc_id}: could not draw a distinct text")  # pragma: no cover

    def sentence(self) -> str:
        lo, hi = self.profile.words
        s = self.words(int(self.rng.integers(lo, hi + 1)))
        return s[0].upper() + s[1:] + "."

    def paragraph(self) -> str:
        lo, hi = self.profile.sentences
        return " ".join(self.sentence() for _ in range(int(self.rng.integers(lo, hi + 1))))

    def heading(self, number: str) -> str:
        verb = str(self.rng.choice(_VERBS))
        return f"{number} {verb.capitalize()} {self.words(int(self.rng.integers(2, 5)))}"


def doc_rng(seed: int, doc_id: str, stream: int = 0) -> np.random.Generator:
    """Independent stream per (seed, document, purpose)."""
    return np.random.default_rng([seed, zlib.crc32(doc_id.encode("utf-8")), stream])


def _outline(rng: np.random.Generator, p: LayoutProfile) -> list[tuple[str, str]]:
    """Ordered (class, numbering) body items; numbering '' for paragraphs."""
    n1 = p.min_section1 + int(rng.poisson(p.section1_mean)) if p.section1_mean > 0 else p.min_section1
    n2 = int(rng.poisson(p.section2_mean)) if p.section2_mean > 0 and n1 > 0 else 0
    n3 = int(rng.poisson(p.section3_mean)) if p.section3_mean > 0 and n2 > 0 else 0
    n_par = p.min_paragraphs + (int(rng.poisson(p.paragraph_mean)) if p.paragraph_mean > 0 else 0)
    # each subsection picks its owner uniformly among the sections one level up
    s2_owner = np.sort(rng.integers(0, n1, size=n2)) if n1 else np.array([], dtype=int)
    s3_owner = np.sort(rng.integers(0, n2, size=n3)) if n2 else np.array([], dtype=int)
    # section slots: (0) preface, then one slot per section in reading order
    sections: list[tuple[str, str]] = []
    for i in range(n1):
        sections.append(("Section1", f"{i + 1}."))
        owned2 = [j for j in range(n2) if s2_owner[j] == i]
        for k, j in enumerate(owned2):
            sections.append(("Section2", f"{i + 1}.{k + 1}"))
            owned3 = [m for m in range(n3) if s3_owner[m] == j]
            for q, _ in enumerate(owned3):
                sections.append(("Section3", f"{i + 1}.{k + 1}.{q + 1}"))
    slots = len(sections) + 1
    par_slot = np.bincount(rng.integers(0, slots, size=n_par), minlength=slots) if n_par else np.zeros(slots, int)
    items: list[tuple[str, str]] = [("Paragraph", "")] * int(par_slot[0])
    for s, sec in enumerate(sections, 1):
        items.append(sec)
        items.extend([("Paragraph", "")] * int(par_slot[s]))
    return items


def generate_document(doc_id: str, profile: LayoutProfile, seed: int) -> DocumentRecord:
    rng = doc_rng(seed, doc_id)
    w = _Writer(rng, profile, doc_id)
    items: list[tuple[str, str]] = []
    if rng.random() < profile.sign_prob:
        items.append(("SignOfIssuingAuthority", w.unique(lambda: f"{rng.choice(_AUTHORITIES)} Document")))
    if rng.random() < profile.docnum_prob:
        items.append(("DocumentNumber", w.unique(
            lambda: f"Doc No. [{int(rng.integers(2000, 2023))}] {int(rng.integers(1, 1000))}")))
    items.append(("Title", w.unique(lambda: f"Notice on {w.words(int(rng.integers(3, 7)))}")))
    if rng.random() < profile.addressee_prob:
        items.append(("Addressee", w.unique(lambda: f"To all {w.words(2)} offices:")))
    for cls, number in _outline(rng, profile):
        if cls == "Paragraph":
            items.append((cls, w.unique(w.paragraph)))
        else:
            items.append((cls, w.unique(lambda: w.heading(number))))
    n_issuing = profile.min_issuing + (int(rng.poisson(profile.issuing_mean)) if profile.issuing_mean > 0 else 0)
    for _ in range(n_issuing):
        items.append(("IssuingAuthority", w.unique(lambda: f"{rng.choice(_AUTHORITIES)} of {w.words(2)}")))
    if rng.random() < profile.date_prob:
        items.append(("DateOfWriting", w.unique(
            lambda: f"{int(rng.integers(1990, 2023))}-{int(rng.integers(1, 13)):02d}-{int(rng.integers(1, 29)):02d}")))

    text_elements, image_elements = [], []
    page, y = 1, 60.0
    for pi, (cls, text) in enumerate(items):
        coord = SentenceCoord(pi, 0)
        lines = max(1, len(text) // 70 + 1)
        height = 28.0 if cls == "Title" else 16.0 * lines
        if y + height > 1060.0:
            page, y = page + 1, 60.0
        width = min(480.0, 7.0 * len(text)) if lines == 1 else 480.0
        x = 60.0 + (480.0 - width) / 2 if cls == "Title" else 60.0
        text_elements.append(Element(cls, text, Modality.TEXT, coord=coord, page=page, doc_id=doc_id))
        box = DetectionVector(cls, 1.0, x, y, width, height)
        image_elements.append(Element(cls, text, Modality.IMAGE, box=box, page=page, doc_id=doc_id))
        y += height + 12.0
    return DocumentRecord(doc_id=doc_id, text_elements=tuple(text_elements),
                          image_elements=tuple(image_elements),
                          sentence_table=sentence_table_from(text_elements))


def generate_corpus(n_docs: int, layout_profile: str | dict | LayoutProfile | None = None,
                    seed: int = 0) -> list[DocumentRecord]:
    """Gold documents; text and image element ``i`` describe the same element."""
    if n_docs < 1:
        raise ValidationError(f"n_docs must be >= 1, got {n_docs}")
    profile = resolve_profile(layout_profile)
    width = max(4, len(str(n_docs - 1)))
    return [generate_document(f"doc{i:0{width}d}", profile, seed) for i in range(n_docs)]


def class_counts(corpus: list[DocumentRecord]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for doc in corpus:
        for el in doc.text_elements:
            counts[el.label] = counts.get(el.label, 0) + 1
    return counts
