"""
From a tree to a metaknowledge graph
====================================

The tree's hierarchy becomes Section and Paragraph nodes.  Attributes hang
off the document, contextual triples attach to the section that owns their
origin sentence, and bracketed citations link to a reference list.
"""

from metaforge import (
    ContextTriple,
    Element,
    Modality,
    SentenceCoord,
    build_dst,
    build_reference_network,
    export,
    generate,
    import_graph_json,
)


def el(label, pi, text):
    return Element(label, text, Modality.TEXT, coord=SentenceCoord(pi, 0))


tree = build_dst([
    el("Title", 0, "Detector study"),
    el("DateOfWriting", 1, "2024-01-01"),
    el("Section1", 2, "Method"),
    el("Paragraph", 3, "The detector uses a ResNet backbone [1]."),
], doc_id="demo")

triples = [ContextTriple("detector", "uses", "ResNet backbone", SentenceCoord(3, 0))]
g = generate(tree, triples=triples)
# Citation markers are read from the paragraph text, keyed by sentence coordinate.
paragraphs = {e.coord: e.text for e in tree.elements() if e.label == "Paragraph"}
g = build_reference_network("[1] He et al. Deep residual learning.", paragraphs, g, tree)

for node in sorted(g.nodes.values(), key=lambda n: (n.kind, n.label)):
    print(f"{node.kind:10s} {node.label}")

cypher = export(g, "cypher").decode()
print(cypher.splitlines()[0], "...", len(cypher), "bytes")

# graph-json is the lossless format.
again = import_graph_json(export(g, "graph-json"))
assert export(again, "graph-json") == export(g, "graph-json")
