"""
Building a document structure tree
==================================

Headings become vertices, paragraphs become leaves under the most recent
heading, and titles/attributes sit on the root.  Each level also has an
auxiliary right sibling with a huge weight so every vertex has a right
bound; this turns "which section owns sentence (p, s)" into a descent.
"""

from metaforge import Element, Modality, SentenceCoord, build_dst, check_properties, locate, right_parent


def el(label, pi, si=0):
    return Element(label, f"{label} {pi}.{si}", Modality.TEXT, coord=SentenceCoord(pi, si))


outline = [
    el("Title", 0),
    el("Section1", 1), el("Paragraph", 2), el("Paragraph", 2, 1),
    el("Section2", 3), el("Paragraph", 4),
    el("Section1", 5), el("Paragraph", 6),
    el("IssuingAuthority", 7),
]

tree = build_dst(outline, doc_id="demo")
print(tree.outline())
print("violations:", check_properties(tree))

sub = locate(SentenceCoord(3, 0), tree)
print("vertex at (3, 0):", sub.heading.label, "weight", sub.weight)
print("its right bound:", right_parent(sub).weight)

# Sentences in the body land in the section whose span covers them.
for pi in range(1, 7):
    print((pi, 0), "->", locate(SentenceCoord(pi, 0), tree))

# Round trip: the tree's elements come back in reading order.
assert [e.coord for e in tree.elements()] == [e.coord for e in outline]
