"""Metaknowledge graph: document hierarchy, attributes, contextual triples, citations.

Node kinds and edge relations::

    Document --has_section--> Section --has_section--> Section
    Document|Section --has_paragraph--> Paragraph
    Document --has_attribute--> Attribute          (key = element class)
    Document|Section --mentions--> Entity
    Entity --relates--> Entity                     (predicate = verb)
    Document|Section --cites--> Reference

Node ids are content hashes of (kind, label, weight, key), so re-running on
the same input reproduces the same ids.  The kind/relation vocabulary is a
reconstruction of the usual hierarchical layout (title layer, sections,
subsections), not a fixed external schema.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .dst import LEAF, ROOT, SECTION, Dst, DstNode, locate
from .errors import ParseError, ValidationError
from .model import Element, SentenceCoord

log = logging.getLogger(__name__)

GRAPH_FORMAT_VERSION = 1

KINDS = ("Document", "Section", "Paragraph", "Entity", "Attribute", "Reference")
HIERARCHY_RELS = ("has_section", "has_paragraph")


@dataclass(frozen=True)
class MetaNode:
    id: str
    kind: str
    label: str
    level: int
    props: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown node kind {self.kind!r}")

    def prop(self, key: str, default=None):
        return dict(self.props).get(key, default)


@dataclass(frozen=True)
class MetaEdge:
    src: str
    dst: str
    rel: str
    props: tuple[tuple[str, object], ...] = ()

    def sort_key(self):
        return (self.src, self.dst, self.rel, json.dumps(self.props, ensure_ascii=False))


@dataclass(frozen=True)
class ContextTriple:
    subject: str
    predicate: str
    object: str
    origin: SentenceCoord

    def __post_init__(self):
        if not (self.subject.strip() and self.predicate.strip() and self.object.strip()):
            raise ValidationError(f"triple parts must be non-empty: {self!r}")


def node_id(kind: str, label: str, weight: SentenceCoord | None = None, key: str = "") -> str:
    w = "" if weight is None else f"{weight[0]},{weight[1]}"
    h = hashlib.sha1(f"{kind}\x1f{label}\x1f{w}\x1f{key}".encode("utf-8")).hexdigest()
    return f"{kind[0].lower()}{h[:15]}"


@dataclass
class MetaGraph:
    nodes: dict[str, MetaNode] = field(default_factory=dict)
    edges: list[MetaEdge] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    document_id: str | None = None
    # tree vertex -> graph node, by (kind, weight); rebuilt on import
    anchors: dict[tuple, str] = field(default_factory=dict)
    _edge_keys: set = field(default_factory=set, repr=False, compare=False)

    def add_node(self, node: MetaNode) -> MetaNode:
        self.nodes.setdefault(node.id, node)
        return self.nodes[node.id]

    def add_edge(self, src: str, dst: str, rel: str, **props) -> MetaEdge:
        if src not in self.nodes or dst not in self.nodes:
            raise ValidationError(f"edge {rel} references a missing node")
        edge = MetaEdge(src, dst, rel, tuple(sorted(props.items())))
        if edge not in self._edge_keys:
            self._edge_keys.add(edge)
            self.edges.append(edge)
        return edge

    def warn(self, msg: str) -> None:
        self.diagnostics.append(msg)
        log.warning(msg)

    def by_kind(self, kind: str) -> list[MetaNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def out_edges(self, src: str, rel: str | None = None) -> list[MetaEdge]:
        return [e for e in self.edges if e.src == src and (rel is None or e.rel == rel)]

    def hierarchy_children(self, src: str) -> list[str]:
        return [e.dst for e in self.edges if e.src == src and e.rel in HIERARCHY_RELS]

    def copy(self) -> MetaGraph:
        return MetaGraph(dict(self.nodes), list(self.edges), list(self.diagnostics), self.document_id,
                         dict(self.anchors), set(self._edge_keys))

    # -- canonical JSON ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": GRAPH_FORMAT_VERSION,
            "document": self.document_id,
            "nodes": [
                {"id": n.id, "kind": n.kind, "label": n.label, "level": n.level, "props": dict(n.props)}
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
            "edges": [
                {"src": e.src, "dst": e.dst, "rel": e.rel, "props": dict(e.props)}
                for e in sorted(self.edges, key=MetaEdge.sort_key)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> MetaGraph:
        if data.get("version") != GRAPH_FORMAT_VERSION:
            raise ValidationError(f"unsupported graph format version {data.get('version')!r}")
        g = cls(document_id=data.get("document"))
        for n in data.get("nodes", []):
            g.add_node(MetaNode(n["id"], n["kind"], n["label"], int(n["level"]),
                                tuple(sorted(_untuple(n.get("props", {})).items()))))
        for e in data.get("edges", []):
            g.add_edge(e["src"], e["dst"], e["rel"], **_untuple(e.get("props", {})))
        if g.document_id is not None:
            g.anchors[("Document",)] = g.document_id
        for n in g.nodes.values():
            w = n.prop("weight")
            if n.kind in ("Section", "Paragraph") and w is not None:
                g.anchors[(n.kind, tuple(w))] = n.id
        return g

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MetaGraph) and self.to_dict() == other.to_dict()


def _untuple(props: Mapping) -> dict:
    return {k: (tuple(v) if isinstance(v, list) else v) for k, v in props.items()}


# -- generation ---------------------------------------------------------------

def _vertex_node(node: DstNode) -> MetaNode:
    el = node.content[0]
    kind = "Section" if node.kind == SECTION else "Paragraph"
    return MetaNode(node_id(kind, el.text, node.weight), kind, el.text, node.level,
                    (("class", el.label), ("weight", tuple(node.weight))))


def generate(
    tree: Dst,
    attributes: Iterable[Element] | None = None,
    triples: Iterable[ContextTriple] = (),
) -> MetaGraph:
    """Build the graph for one document tree.

    ``attributes`` defaults to the non-title content of the tree root.  A
    triple whose origin lies outside the document is rejected with a
    diagnostic; the graph is still produced.
    """
    g = MetaGraph()
    root = tree.root
    titles = [el for el in root.content if tree.taxonomy.role(el.label) == "title"]
    title = " ".join(el.text for el in titles) or tree.doc_id or "document"
    doc = g.add_node(MetaNode(node_id("Document", title, key=tree.doc_id), "Document", title, 0,
                              (("doc_id", tree.doc_id),)))
    g.document_id = doc.id
    g.anchors[("Document",)] = doc.id

    def walk(vertex: DstNode, parent_id: str):
        for child in vertex.subtree:
            mn = g.add_node(_vertex_node(child))
            g.anchors[(mn.kind, tuple(child.weight))] = mn.id
            g.add_edge(parent_id, mn.id, "has_section" if child.kind == SECTION else "has_paragraph")
            walk(child, mn.id)

    walk(root, doc.id)

    if attributes is None:
        attributes = [el for el in root.content if tree.taxonomy.role(el.label) != "title"]
    for el in attributes:
        an = g.add_node(MetaNode(node_id("Attribute", el.text, el.coord, key=el.label), "Attribute", el.text, 1,
                                 (("key", el.label),)))
        g.add_edge(doc.id, an.id, "has_attribute", key=el.label)

    for t in triples:
        attach_triple(g, tree, t)
    return g


def owner_id(g: MetaGraph, tree: Dst, coord: SentenceCoord) -> str:
    """Graph node of locate(coord): the owning section, or the document."""
    node = locate(coord, tree)
    if node.kind == ROOT:
        return g.document_id
    return g.anchors[("Section", tuple(node.weight))]


def attach_triple(g: MetaGraph, tree: Dst, t: ContextTriple) -> bool:
    if not tree.in_range(t.origin):
        g.warn(f"triple ({t.subject}, {t.predicate}, {t.object}) origin {t.origin} outside document; rejected")
        return False
    owner = owner_id(g, tree, t.origin)
    level = g.nodes[owner].level
    ids = []
    for label in (t.subject, t.object):
        en = g.add_node(MetaNode(node_id("Entity", label), "Entity", label, level))
        g.add_edge(owner, en.id, "mentions")
        ids.append(en.id)
    g.add_edge(ids[0], ids[1], "relates", predicate=t.predicate, origin=tuple(t.origin))
    return True


# -- triples ------------------------------------------------------------------

DEFAULT_VERBS = ("is", "are", "uses", "use", "detects", "detect", "predicts", "predict", "contains",
                 "includes", "proposes", "improves", "requires", "supports", "provides", "shows")

_TOKEN = re.compile(r"[\w\-']+|[^\w\s]", re.UNICODE)
_STOP = {"the", "a", "an", "this", "that", "these", "those", "it", "its", "our", "we", "their"}


def _phrase(tokens: list[str]) -> str:
    words = [t for t in tokens if re.match(r"[\w\-']", t)]
    while words and words[0].lower() in _STOP:
        words = words[1:]
    return " ".join(words)


def extract_triples_heuristic(
    sentence_table: Mapping[SentenceCoord, str],
    verbs: Iterable[str] = DEFAULT_VERBS,
) -> list[ContextTriple]:
    """Baseline subject-verb-object pattern matcher over a verb lexicon.

    For every lexicon verb in a sentence, the words before it (back to the
    previous verb or clause punctuation) form the subject and the words after
    it (up to the next verb or clause punctuation) the object.  Meant as a
    stand-in for a real relation extractor.
    """
    lexicon = {v.lower() for v in verbs}
    out = []
    for coord in sorted(sentence_table):
        tokens = _TOKEN.findall(sentence_table[coord])
        hits = [i for i, tok in enumerate(tokens) if tok.lower() in lexicon]
        stops = {i for i, tok in enumerate(tokens) if tok in {",", ";", ":", ".", "!", "?", "(", ")"}}
        for n, i in enumerate(hits):
            lo = hits[n - 1] + 1 if n > 0 else 0
            hi = hits[n + 1] if n + 1 < len(hits) else len(tokens)
            left = [j for j in range(lo, i) if j in stops]
            right = [j for j in range(i + 1, hi) if j in stops]
            subj = _phrase(tokens[(left[-1] + 1 if left else lo):i])
            obj = _phrase(tokens[i + 1:(right[0] if right else hi)])
            if subj and obj:
                out.append(ContextTriple(subj, tokens[i], obj, coord))
    return out


def read_triples(path) -> list[ContextTriple]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ParseError("expected subject, predicate, object, pi, si", path=str(path), lineno=lineno)
            try:
                out.append(ContextTriple(parts[0], parts[1], parts[2], SentenceCoord(int(parts[3]), int(parts[4]))))
            except (ValueError, ValidationError) as exc:
                raise ParseError(str(exc), path=str(path), lineno=lineno) from None
    return out


def write_triples(path, triples: Iterable[ContextTriple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for t in triples:
            f.write(f"{t.subject}\t{t.predicate}\t{t.object}\t{t.origin.pi}\t{t.origin.si}\n")


# -- references ---------------------------------------------------------------

_ENTRY = re.compile(r"^\s*\[(\d+)\]\s*(.*)$")
_MARKER = re.compile(r"\[(\d+(?:\s*[-\u2013,]\s*\d+)*)\]")


def parse_reference_list(text: str) -> dict[int, str]:
    """Parse a bracket-numbered reference list; continuation lines join the previous entry."""
    refs: dict[int, str] = {}
    current: int | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _ENTRY.match(line)
        if m:
            n = int(m.group(1))
            if n in refs:
                raise ValidationError(f"reference list line {lineno}: duplicate reference number [{n}]")
            refs[n] = m.group(2).strip()
            current = n
        elif current is None:
            raise ValidationError(f"reference list line {lineno}: expected a '[n] ...' entry, got {line.strip()!r}")
        else:
            refs[current] = f"{refs[current]} {line.strip()}".strip()
    return refs


def citation_markers(text: str) -> list[int]:
    """Reference numbers cited in text: ``[3]``, ``[1, 4]``, ``[2-5]``."""
    found: list[int] = []
    for m in _MARKER.finditer(text):
        for part in m.group(1).split(","):
            part = part.strip()
            bounds = re.split(r"\s*[-\u2013]\s*", part)
            if len(bounds) == 2:
                a, b = int(bounds[0]), int(bounds[1])
                found.extend(range(a, b + 1) if a <= b else [a, b])
            else:
                found.append(int(part))
    return found


def build_reference_network(
    reference_section_text: str | None,
    paragraphs: Mapping[SentenceCoord, str],
    graph: MetaGraph,
    tree: Dst,
) -> MetaGraph:
    """Add Reference nodes and ``cites`` edges from the sections that cite them.

    References never cited in the body attach to the document node; markers
    pointing at unknown numbers produce a diagnostic and no edge.
    """
    if not reference_section_text or not reference_section_text.strip():
        return graph
    refs = parse_reference_list(reference_section_text)
    g = graph.copy()
    ref_ids = {}
    for n in sorted(refs):
        rn = g.add_node(MetaNode(node_id("Reference", refs[n], key=str(n)), "Reference", refs[n], 0,
                                 (("number", n),)))
        ref_ids[n] = rn.id
    cited: set[int] = set()
    for coord in sorted(paragraphs):
        for n in citation_markers(paragraphs[coord]):
            if n not in ref_ids:
                g.warn(f"citation marker [{n}] at {coord} has no reference entry")
                continue
            g.add_edge(owner_id(g, tree, coord), ref_ids[n], "cites")
            cited.add(n)
    for n in sorted(set(refs) - cited):
        g.add_edge(g.document_id, ref_ids[n], "cites")
    return g


# -- export -------------------------------------------------------------------

FORMATS = ("graph-json", "dot", "cypher")


def export(graph: MetaGraph, format: str) -> bytes:
    if format == "graph-json":
        text = json.dumps(graph.to_dict(), ensure_ascii=False, sort_keys=True, indent=1) + "\n"
    elif format == "dot":
        text = _to_dot(graph)
    elif format == "cypher":
        text = _to_cypher(graph)
    else:
        raise ValueError(f"unknown export format {format!r}; choose from {', '.join(FORMATS)}")
    return text.encode("utf-8")


def import_graph_json(data: bytes | str) -> MetaGraph:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return MetaGraph.from_dict(json.loads(data))


def format_for_path(path: str) -> str:
    suffix = path.rsplit(".", 1)[-1].lower()
    return {"json": "graph-json", "dot": "dot", "gv": "dot", "cypher": "cypher", "cql": "cypher"}.get(
        suffix, "graph-json")


def _dot_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


_DOT_SHAPE = {"Document": "doubleoctagon", "Section": "box", "Paragraph": "note", "Entity": "ellipse",
              "Attribute": "component", "Reference": "cylinder"}


def _to_dot(g: MetaGraph) -> str:
    lines = ["digraph metaknowledge {", "  rankdir=LR;"]
    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        label = n.label if len(n.label) <= 60 else n.label[:57] + "..."
        lines.append(f"  {n.id} [label={_dot_str(label)}, shape={_DOT_SHAPE[n.kind]}];")
    for e in sorted(g.edges, key=MetaEdge.sort_key):
        rel = dict(e.props).get("predicate", e.rel)
        style = ", style=dashed" if e.rel == "cites" else ""
        lines.append(f"  {e.src} -> {e.dst} [label={_dot_str(str(rel))}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _cy_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_cy_value(x) for x in v) + "]"
    s = str(v).replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
    return f"'{s}'"


def _cy_map(d: Mapping) -> str:
    return "{" + ", ".join(f"{k}: {_cy_value(v)}" for k, v in d.items()) + "}"


def _to_cypher(g: MetaGraph) -> str:
    """One multi-clause CREATE statement: a clause per node, then per edge."""
    lines = ["// metaknowledge graph: run as one statement"]
    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        props = {"id": n.id, "label": n.label, "level": n.level, **dict(n.props)}
        lines.append(f"CREATE ({n.id}:{n.kind} {_cy_map(props)})")
    for e in sorted(g.edges, key=MetaEdge.sort_key):
        props = dict(e.props)
        body = f":{e.rel.upper()}" + (f" {_cy_map(props)}" if props else "")
        lines.append(f"CREATE ({e.src})-[{body}]->({e.dst})")
    if len(lines) > 1:
        lines[-1] += ";"
    return "\n".join(lines) + "\n"
