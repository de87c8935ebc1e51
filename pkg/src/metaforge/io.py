"""Line-oriented file formats exchanged between pipeline stages.

All formats are UTF-8, one record per line, tab separated.  Free-text fields
escape backslash, tab and newline (``\\\\``, ``\\t``, ``\\n``) so every record
stays on one line.  Floats are written with ``repr`` which round-trips exactly.

text-modal   doc_id, class, pi, si, text
image-modal  doc_id, page, class, prob, x, y, w, d, ocr_text
fused        doc_id, modality, class, pi, si, page, box_class, prob, x, y, w, d, text
samples      text_pred, image_pred, gold
triples      subject, predicate, object, pi, si
matches      image_idx, text_idx, distance, accepted   (with a header line)
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Iterator
from pathlib import Path

from .errors import ParseError, ValidationError
from .model import (
    DEFAULT_TERMINATORS,
    DetectionVector,
    DocumentRecord,
    Element,
    Modality,
    SentenceCoord,
    make_coord,
    sentence_table_from,
)
from .taxonomy import GOVDOC, Taxonomy

PathLike = str | os.PathLike

_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape(s: str) -> str:
    return "".join(_ESC.get(ch, ch) for ch in s)


def unescape(s: str) -> str:
    if "\\" not in s:
        return s
    out = []
    it = iter(s)
    for ch in it:
        if ch == "\\":
            nxt = next(it, "")
            out.append(_UNESC.get(nxt, "\\" + nxt))
        else:
            out.append(ch)
    return "".join(out)


def fmt_float(v: float) -> str:
    return repr(float(v))


def _lines(path: PathLike) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            yield lineno, line


def _fields(line: str, n: int, path: PathLike, lineno: int, what: str) -> list[str]:
    parts = line.split("\t", n - 1)
    if len(parts) != n:
        raise ParseError(f"expected {n} tab-separated fields for {what}, got {len(parts)}",
                         path=str(path), lineno=lineno)
    return parts


def _int(s: str, path: PathLike, lineno: int, name: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ParseError(f"field {name!r} is not an integer: {s!r}", path=str(path), lineno=lineno) from None


def _float(s: str, path: PathLike, lineno: int, name: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ParseError(f"field {name!r} is not a number: {s!r}", path=str(path), lineno=lineno) from None


def _at(path: PathLike, lineno: int, exc: ValidationError) -> ValidationError:
    if isinstance(exc, ParseError):
        return exc
    return ValidationError(f"{path}:{lineno}: {exc}")


def _write_lines(path: PathLike, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            f.write("\n")


# -- text modal ---------------------------------------------------------------

def read_text_modal(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> dict[str, DocumentRecord]:
    """Read a text-modal file that may hold several documents, keyed by doc_id."""
    per_doc: dict[str, list[Element]] = {}
    for lineno, line in _lines(path):
        doc_id, label, pi, si, text = _fields(line, 5, path, lineno, "text-modal record")
        try:
            taxonomy.validate(label)
            coord = make_coord(_int(pi, path, lineno, "pi"), _int(si, path, lineno, "si"))
            el = Element(label=label, text=unescape(text), modality=Modality.TEXT,
                         coord=coord, doc_id=doc_id)
        except ValidationError as exc:
            raise _at(path, lineno, exc) from None
        elements = per_doc.setdefault(doc_id, [])
        if elements and coord < elements[-1].coord:
            raise ValidationError(
                f"{path}:{lineno}: coordinate {coord} precedes {elements[-1].coord}; "
                "records must be in reading order"
            )
        elements.append(el)
    return {
        doc_id: DocumentRecord(doc_id=doc_id, text_elements=tuple(els),
                               sentence_table=sentence_table_from(els))
        for doc_id, els in per_doc.items()
    }


def ingest_text_modal(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> DocumentRecord:
    """Read a single-document text-modal file into a record with its sentence table."""
    docs = read_text_modal(path, taxonomy)
    if len(docs) > 1:
        raise ValidationError(f"{path}: expected one document, found {len(docs)}: {sorted(docs)}")
    if not docs:
        return DocumentRecord(doc_id=Path(path).stem)
    return next(iter(docs.values()))


def format_text_modal(elements: Iterable[Element]) -> list[str]:
    out = []
    for el in elements:
        if el.coord is None:
            raise ValidationError(f"cannot write element without coordinate as text-modal: {el.text!r}")
        out.append(f"{el.doc_id}\t{el.label}\t{el.coord.pi}\t{el.coord.si}\t{escape(el.text)}")
    return out


def write_text_modal(path: PathLike, elements: Iterable[Element]) -> None:
    _write_lines(path, format_text_modal(elements))


# -- image modal --------------------------------------------------------------

def read_image_modal(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> dict[str, list[Element]]:
    per_doc: dict[str, list[Element]] = {}
    for lineno, line in _lines(path):
        doc_id, page, label, prob, x, y, w, d, text = _fields(line, 9, path, lineno, "image-modal record")
        try:
            taxonomy.validate(label)
            box = DetectionVector(
                label=label,
                prob=_float(prob, path, lineno, "prob"),
                x=_float(x, path, lineno, "x"),
                y=_float(y, path, lineno, "y"),
                w=_float(w, path, lineno, "w"),
                d=_float(d, path, lineno, "d"),
            )
            el = Element(label=label, text=unescape(text), modality=Modality.IMAGE, box=box,
                         page=_int(page, path, lineno, "page"), doc_id=doc_id)
        except ValidationError as exc:
            raise _at(path, lineno, exc) from None
        per_doc.setdefault(doc_id, []).append(el)
    return per_doc


def ingest_image_modal(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> list[Element]:
    """Read every detection record of a file, in file order, with no merging."""
    docs = read_image_modal(path, taxonomy)
    return [el for els in docs.values() for el in els]


def format_image_modal(elements: Iterable[Element]) -> list[str]:
    out = []
    for el in elements:
        b = el.box
        if b is None:
            raise ValidationError(f"cannot write element without box as image-modal: {el.text!r}")
        out.append("\t".join([
            el.doc_id, str(el.page), el.label, fmt_float(b.prob), fmt_float(b.x), fmt_float(b.y),
            fmt_float(b.w), fmt_float(b.d), escape(el.text),
        ]))
    return out


def write_image_modal(path: PathLike, elements: Iterable[Element]) -> None:
    _write_lines(path, format_image_modal(elements))


# -- fused --------------------------------------------------------------------

def format_fused(elements: Iterable[Element]) -> list[str]:
    out = []
    for el in elements:
        c, b = el.coord, el.box
        coord = [str(c.pi), str(c.si)] if c is not None else ["", ""]
        box = ([b.label, fmt_float(b.prob), fmt_float(b.x), fmt_float(b.y), fmt_float(b.w), fmt_float(b.d)]
               if b is not None else [""] * 6)
        out.append("\t".join([el.doc_id, el.modality.value, el.label, *coord, str(el.page), *box,
                              escape(el.text)]))
    return out


def write_fused(path: PathLike, elements: Iterable[Element]) -> None:
    _write_lines(path, format_fused(elements))


def read_fused(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> list[Element]:
    out = []
    for lineno, line in _lines(path):
        f = _fields(line, 13, path, lineno, "fused record")
        doc_id, modality, label, pi, si, page = f[:6]
        box_label, prob, x, y, w, d, text = f[6:]
        try:
            taxonomy.validate(label)
            try:
                mod = Modality(modality)
            except ValueError:
                raise ValidationError(f"unknown modality {modality!r}") from None
            coord = (make_coord(_int(pi, path, lineno, "pi"), _int(si, path, lineno, "si"))
                     if pi != "" else None)
            box = None
            if box_label != "":
                taxonomy.validate(box_label)
                box = DetectionVector(box_label, _float(prob, path, lineno, "prob"),
                                      _float(x, path, lineno, "x"), _float(y, path, lineno, "y"),
                                      _float(w, path, lineno, "w"), _float(d, path, lineno, "d"))
            out.append(Element(label=label, text=unescape(text), modality=mod, coord=coord, box=box,
                               page=_int(page, path, lineno, "page"), doc_id=doc_id))
        except ValidationError as exc:
            raise _at(path, lineno, exc) from None
    return out


# -- BIO adapter --------------------------------------------------------------

def bio_to_elements(
    lines: Iterable[str],
    doc_id: str,
    taxonomy: Taxonomy = GOVDOC,
    sep: str = " ",
    terminators: str = DEFAULT_TERMINATORS,
) -> list[Element]:
    """Collapse a BIO token stream (``token<TAB>tag``) into text-modal elements.

    A blank line is a hard line break and starts a new paragraph.  Within a
    paragraph the sentence index advances after every token that ends in a
    terminator.  A span takes the coordinate of its first token.  An ``I-X``
    that does not continue an open ``X`` span starts a new one.
    """
    elements: list[Element] = []
    pi, si = 0, 0
    para_has_tokens = False
    cur_label: str | None = None
    cur_tokens: list[str] = []
    cur_coord: SentenceCoord | None = None

    def close():
        nonlocal cur_label, cur_tokens, cur_coord
        if cur_label is not None:
            elements.append(Element(label=cur_label, text=sep.join(cur_tokens), modality=Modality.TEXT,
                                    coord=cur_coord, doc_id=doc_id))
        cur_label, cur_tokens, cur_coord = None, [], None

    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            close()
            if para_has_tokens:
                pi += 1
                si = 0
                para_has_tokens = False
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected TOKEN<TAB>TAG", lineno=lineno)
        token, tag = parts
        para_has_tokens = True
        if tag == "O":
            close()
        else:
            prefix, _, label = tag.partition("-")
            if prefix not in ("B", "I") or not label:
                raise ParseError(f"invalid BIO tag {tag!r}", lineno=lineno)
            try:
                taxonomy.validate(label)
            except ValidationError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from None
            if prefix == "B" or cur_label != label:
                close()
                cur_label, cur_coord = label, SentenceCoord(pi, si)
            cur_tokens.append(token)
        if token and token[-1] in terminators:
            close()
            si += 1
    close()
    return elements


def convert_bio_file(src: PathLike, dst: PathLike, doc_id: str, taxonomy: Taxonomy = GOVDOC,
                     sep: str = " ") -> list[Element]:
    with open(src, encoding="utf-8") as f:
        elements = bio_to_elements(f, doc_id, taxonomy, sep=sep)
    write_text_modal(dst, elements)
    return elements


# -- small tables -------------------------------------------------------------

def read_samples(path: PathLike, taxonomy: Taxonomy = GOVDOC) -> list[tuple[int, int, int]]:
    """Read (text_pred, image_pred, gold) class-name triples as codes."""
    out = []
    for lineno, line in _lines(path):
        parts = _fields(line, 3, path, lineno, "fusion sample")
        try:
            out.append(tuple(taxonomy.code(p.strip()) for p in parts))
        except ValidationError as exc:
            raise _at(path, lineno, exc) from None
    return out


def write_samples(path: PathLike, samples: Iterable[tuple[int, int, int]], taxonomy: Taxonomy = GOVDOC) -> None:
    _write_lines(path, ("\t".join(taxonomy.label(c) for c in s) for s in samples))
