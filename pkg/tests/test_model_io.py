import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metaforge import io
from metaforge.errors import ParseError, ValidationError
from metaforge.model import (
    ARS_WEIGHT,
    ROOT_WEIGHT,
    DetectionVector,
    DocumentRecord,
    Element,
    Modality,
    SentenceCoord,
    make_coord,
    segment,
    sentence_table_from,
)
from metaforge.taxonomy import DOCBANK, GOVDOC, ElementClass, Taxonomy, load_taxonomy


def test_coord_ordering_is_lexicographic():
    assert SentenceCoord(2, 9) < SentenceCoord(3, 0) < SentenceCoord(3, 1)
    assert ROOT_WEIGHT < SentenceCoord(0, 0)
    assert SentenceCoord(10**6, 10**6) < ARS_WEIGHT
    assert str(SentenceCoord(4, 1)) == "(4,1)"


@pytest.mark.parametrize("pi,si", [(-1, 0), (0, -2), (1.5, 0), (True, 0)])
def test_make_coord_rejects(pi, si):
    with pytest.raises(ValidationError):
        make_coord(pi, si)


@pytest.mark.parametrize("kw", [
    dict(prob=1.2), dict(prob=-0.1), dict(w=0), dict(d=-3), dict(x=float("nan")), dict(prob=float("inf")),
])
def test_detection_vector_rejects(kw):
    args = dict(label="Title", prob=0.5, x=0.0, y=0.0, w=1.0, d=1.0) | kw
    with pytest.raises(ValidationError):
        DetectionVector(**args)


def test_element_modality_invariants():
    with pytest.raises(ValidationError):
        Element("Title", "t", Modality.TEXT)
    with pytest.raises(ValidationError):
        Element("Title", "t", Modality.IMAGE)
    with pytest.raises(ValidationError):
        Element("Title", "t", Modality.FUSED)
    with pytest.raises(ValidationError):
        Element("Title", "t", Modality.TEXT, coord=SentenceCoord(0, 0), page=0)


def test_record_requires_reading_order():
    a = Element("Title", "a", Modality.TEXT, coord=SentenceCoord(2, 0))
    b = Element("Paragraph", "b", Modality.TEXT, coord=SentenceCoord(1, 0))
    with pytest.raises(ValidationError):
        DocumentRecord("d", (a, b))
    assert DocumentRecord("d", (b, a), sentence_table=sentence_table_from([b, a])).last_coord == (2, 0)


def test_sentence_table_joins_shared_coordinates():
    els = [Element("Paragraph", "x", Modality.TEXT, coord=SentenceCoord(0, 0)),
           Element("Paragraph", "y", Modality.TEXT, coord=SentenceCoord(0, 0))]
    assert sentence_table_from(els) == {(0, 0): "x y"}


def test_segment_basic():
    table = segment("First one. Second one!\n\nNext para? Yes.\nNo stop here")
    assert table == {
        (0, 0): "First one.", (0, 1): "Second one!",
        (1, 0): "Next para?", (1, 1): "Yes.",
        (2, 0): "No stop here",
    }


def test_segment_keeps_abbreviations_and_decimals():
    assert segment("See Fig.2 and 3.14 here. Done.") == {(0, 0): "See Fig.2 and 3.14 here.", (0, 1): "Done."}


def test_segment_cjk_and_semicolons():
    table = segment("第一句。第二句；仍是第二句！“引号。”后面")
    assert list(table.values()) == ["第一句。", "第二句；仍是第二句！", "“引号。”", "后面"]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.text(alphabet="abc xyz", min_size=1, max_size=8).map(lambda s: s.strip() or "a"),
                         min_size=1, max_size=4), min_size=1, max_size=5))
def test_segment_recovers_constructed_text(paragraphs):
    text = "\n".join(" ".join(s + "." for s in para) for para in paragraphs)
    table = segment(text)
    expected = {(pi, si): s + "." for pi, para in enumerate(paragraphs) for si, s in enumerate(para)}
    assert table == expected


def test_taxonomy_codes_and_roles():
    assert GOVDOC.k == 10 and GOVDOC.code("Paragraph") == ElementClass.Paragraph == 9
    assert GOVDOC.section_level("Section3") == 3 and GOVDOC.role("Title") == "title"
    assert DOCBANK.k == 12 and DOCBANK.role("Section") == "section"
    with pytest.raises(ValidationError):
        GOVDOC.code("Bogus")
    assert Taxonomy.from_dict(GOVDOC.to_dict()) == GOVDOC
    assert load_taxonomy("docbank") is DOCBANK


def test_text_modal_round_trip_with_escapes(tmp_path):
    els = [Element("Title", "tab\there\\n and\nnewline", Modality.TEXT, coord=SentenceCoord(0, 0), doc_id="d1"),
           Element("Paragraph", "plain", Modality.TEXT, coord=SentenceCoord(1, 2), doc_id="d1"),
           Element("Paragraph", "other doc", Modality.TEXT, coord=SentenceCoord(0, 0), doc_id="d2")]
    p = tmp_path / "t.tsv"
    io.write_text_modal(p, els)
    docs = io.read_text_modal(p)
    assert list(docs) == ["d1", "d2"]
    assert list(docs["d1"].text_elements) + list(docs["d2"].text_elements) == els
    with pytest.raises(ValidationError):
        io.ingest_text_modal(p)


def test_image_modal_round_trip(tmp_path):
    box = DetectionVector("Section1", 0.1 + 0.2, 1.5, 2.25, 100.0, 16.0)
    els = [Element("Section1", "1. Heading", Modality.IMAGE, box=box, page=3, doc_id="d")]
    p = tmp_path / "i.tsv"
    io.write_image_modal(p, els)
    assert io.ingest_image_modal(p) == els


def test_fused_round_trip(tmp_path):
    box = DetectionVector("Title", 0.75, 1, 2, 3, 4)
    els = [Element("Title", "T", Modality.FUSED, coord=SentenceCoord(0, 0), box=box, doc_id="d"),
           Element("Paragraph", "P", Modality.TEXT, coord=SentenceCoord(1, 0), doc_id="d"),
           Element("Paragraph", "I", Modality.IMAGE, box=box, page=2, doc_id="d")]
    p = tmp_path / "f.tsv"
    io.write_fused(p, els)
    assert io.read_fused(p) == els


@pytest.mark.parametrize("line,exc,where", [
    ("d\tTitle\t0\tx\ttext", ParseError, ":2"),
    ("d\tBogus\t0\t0\ttext", ValidationError, ":2"),
    ("d\tTitle\t0", ParseError, ":2"),
    ("d\tTitle\t-1\t0\ttext", ValidationError, ":2"),
])
def test_text_modal_errors_name_line(tmp_path, line, exc, where):
    p = tmp_path / "bad.tsv"
    p.write_text("d\tTitle\t0\t0\tok\n" + line + "\n")
    with pytest.raises(exc, match=where):
        io.read_text_modal(p)


def test_text_modal_order_enforced(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("d\tTitle\t3\t0\ta\nd\tParagraph\t1\t0\tb\n")
    with pytest.raises(ValidationError, match="reading order"):
        io.read_text_modal(p)


def test_image_modal_rejects_bad_box(tmp_path):
    p = tmp_path / "i.tsv"
    p.write_text("d\t1\tTitle\t1.5\t0\t0\t1\t1\tt\n")
    with pytest.raises(ValidationError, match=":1"):
        io.ingest_image_modal(p)


def test_bio_adapter():
    lines = [
        "关于\tB-Title", "通知\tI-Title", "",
        "一、\tB-Section1", "总体\tI-Section1", "",
        "内容\tB-Paragraph", "一。\tI-Paragraph", "内容\tB-Paragraph", "二。\tI-Paragraph",
    ]
    els = io.bio_to_elements(lines, "doc", sep="")
    assert [(e.label, e.text, tuple(e.coord)) for e in els] == [
        ("Title", "关于通知", (0, 0)),
        ("Section1", "一、总体", (1, 0)),
        ("Paragraph", "内容一。", (2, 0)),
        ("Paragraph", "内容二。", (2, 1)),
    ]
    with pytest.raises(ParseError):
        io.bio_to_elements(["x\tQ-Title"], "doc")
    with pytest.raises(ValidationError):
        io.bio_to_elements(["x\tB-Nope"], "doc")


def test_samples_round_trip(tmp_path):
    p = tmp_path / "s.tsv"
    io.write_samples(p, [(0, 1, 2), (9, 9, 9)])
    assert io.read_samples(p) == [(0, 1, 2), (9, 9, 9)]
