import json

import pytest

from helpers import el
from metaforge.dst import build_dst, locate
from metaforge.errors import ParseError, ValidationError
from metaforge.metagraph import (
    ContextTriple,
    MetaGraph,
    build_reference_network,
    citation_markers,
    export,
    extract_triples_heuristic,
    format_for_path,
    generate,
    import_graph_json,
    node_id,
    parse_reference_list,
    read_triples,
    write_triples,
)
from metaforge.model import SentenceCoord


def doc_tree():
    return build_dst([
        el("Title", 0, text="Notice on data"), el("DocumentNumber", 1, text="No. 7"),
        el("Section1", 2, text="1. Methods"),
        el("Paragraph", 3, 0, text="The detector uses a ResNet backbone [1]."),
        el("Paragraph", 3, 1, text="Fusion improves accuracy [2, 3]."),
        el("Section2", 4, text="1.1 Data"),
        el("Paragraph", 5, text="The corpus contains notices [9]."),
        el("Section1", 6, text="2. Results"),
    ], doc_id="doc")


def hierarchy(g: MetaGraph, node_id_):
    kids = sorted((g.nodes[c] for c in g.hierarchy_children(node_id_)), key=lambda n: tuple(n.prop("weight")))
    return [(n.kind, tuple(n.prop("weight")), hierarchy(g, n.id)) for n in kids]


def tree_shape(node):
    return [("Section" if c.kind == "section" else "Paragraph", tuple(c.weight), tree_shape(c)) for c in node.subtree]


def test_generate_mirrors_tree():
    t = doc_tree()
    g = generate(t)
    doc = g.nodes[g.document_id]
    assert doc.kind == "Document" and doc.label == "Notice on data"
    assert hierarchy(g, g.document_id) == tree_shape(t.root)
    attrs = [g.nodes[e.dst] for e in g.out_edges(g.document_id, "has_attribute")]
    assert [(a.label, a.prop("key")) for a in attrs] == [("No. 7", "DocumentNumber")]


def test_triples_attach_to_located_section():
    t = doc_tree()
    triples = [ContextTriple("detector", "uses", "ResNet", SentenceCoord(3, 0)),
               ContextTriple("corpus", "contains", "notices", SentenceCoord(5, 0)),
               ContextTriple("title", "is", "short", SentenceCoord(1, 0))]
    g = generate(t, triples=triples)
    for tr in triples:
        owner = locate(tr.origin, t)
        owner_node = g.document_id if owner.kind == "root" else g.anchors[("Section", tuple(owner.weight))]
        subj = node_id("Entity", tr.subject)
        assert any(e.dst == subj for e in g.out_edges(owner_node, "mentions"))
        rel = [e for e in g.out_edges(subj, "relates")]
        assert dict(rel[0].props) == {"predicate": tr.predicate, "origin": tuple(tr.origin)}


def test_out_of_range_triple_is_rejected():
    g = generate(doc_tree(), triples=[ContextTriple("a", "is", "b", SentenceCoord(40, 0))])
    assert not g.by_kind("Entity") and "outside" in g.diagnostics[0]


def test_empty_triple_part_rejected():
    with pytest.raises(ValidationError):
        ContextTriple(" ", "is", "b", SentenceCoord(0, 0))


def test_heuristic_extraction():
    table = {SentenceCoord(0, 0): "The detector uses a ResNet backbone.",
             SentenceCoord(0, 1): "Nothing here."}
    assert extract_triples_heuristic(table) == [
        ContextTriple("detector", "uses", "ResNet backbone", SentenceCoord(0, 0))]


def test_triples_file_round_trip(tmp_path):
    ts = [ContextTriple("a", "is", "b", SentenceCoord(1, 2))]
    p = tmp_path / "t.tsv"
    write_triples(p, ts)
    assert read_triples(p) == ts
    p.write_text("a\tis\tb\t1\n")
    with pytest.raises(ParseError):
        read_triples(p)


def test_reference_parsing():
    refs = parse_reference_list("[1] A. Author. Title one.\n  continued.\n[2] B. Title two.\n\n[3] C.")
    assert refs == {1: "A. Author. Title one. continued.", 2: "B. Title two.", 3: "C."}
    with pytest.raises(ValidationError, match="duplicate"):
        parse_reference_list("[1] a\n[1] b")
    with pytest.raises(ValidationError):
        parse_reference_list("no bracket")
    assert citation_markers("see [1], [2-4] and [5, 7]") == [1, 2, 3, 4, 5, 7]


def test_reference_network():
    t = doc_tree()
    g = generate(t)
    refs = "[1] ResNet paper.\n[2] Fusion paper.\n[3] Survey.\n[4] Never cited."
    g2 = build_reference_network(refs, t.sentence_table(), g, t)
    assert g2 is not g and not g.by_kind("Reference")
    cites = {(g2.nodes[e.src].label, g2.nodes[e.dst].prop("number")) for e in g2.edges if e.rel == "cites"}
    assert cites == {("1. Methods", 1), ("1. Methods", 2), ("1. Methods", 3), ("Notice on data", 4)}
    assert any("[9]" in d for d in g2.diagnostics)
    assert build_reference_network("", {}, g, t) is g


def test_graph_json_round_trip_and_determinism():
    t = doc_tree()
    g = generate(t, triples=extract_triples_heuristic(t.sentence_table()))
    data = export(g, "graph-json")
    assert export(generate(t, triples=extract_triples_heuristic(t.sentence_table())), "graph-json") == data
    g2 = import_graph_json(data)
    assert g2 == g and export(g2, "graph-json") == data
    assert g2.anchors == g.anchors
    assert json.loads(data)["version"] == 1
    with pytest.raises(ValidationError):
        import_graph_json('{"version": 99}')


def test_cypher_and_dot_exports():
    g = generate(doc_tree(), triples=[ContextTriple("it's", "is", 'a "q"', SentenceCoord(3, 0))])
    cy = export(g, "cypher").decode()
    lines = cy.splitlines()
    assert sum(ln.startswith("CREATE (") and ")-[" not in ln for ln in lines) == len(g.nodes)
    assert sum(")-[" in ln for ln in lines) == len(g.edges)
    assert lines[-1].endswith(";") and cy.count(";") == 1
    assert "it\\'s" in cy
    dot = export(g, "dot").decode()
    assert dot.startswith("digraph") and dot.count("->") == len(g.edges)
    assert '\\"q\\"' in dot
    with pytest.raises(ValueError):
        export(g, "xml")


def test_format_for_path():
    assert [format_for_path(p) for p in ("g.json", "g.dot", "g.cypher", "g.cql")] == [
        "graph-json", "dot", "cypher", "cypher"]


def test_node_ids_are_valid_identifiers():
    g = generate(doc_tree())
    assert all(n.isidentifier() for n in g.nodes)
