"""Document Structure Tree.

Vertices carry a (paragraph, sentence) weight.  Children are ordered by
strictly increasing weight and always outweigh their parent; the nearest
right vertex of a vertex's parent (its *right parent*) outweighs it.  Where
no real right parent exists an absolute-right-subtree sentinel (ARS) with
weight ``(0x3F3F3F3F, 0x3F3F3F3F)`` stands in.  One ARS sits at each of the
levels 1 .. max_depth-1; the ARS is compared against but never traversed.
"""

from __future__ import annotations

import bisect
import json
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .errors import ContractError, ValidationError
from .model import ARS_WEIGHT, ROOT_WEIGHT, DetectionVector, Element, Modality, SentenceCoord, make_coord
from .taxonomy import GOVDOC, Taxonomy

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

ROOT, SECTION, LEAF, ARS = "root", "section", "leaf", "ars"


class DstNode:
    """One vertex: ``content`` holds its element(s), ``subtree`` its ordered children."""

    __slots__ = ("content", "weight", "level", "subtree", "parent", "kind", "_ars")

    def __init__(self, weight: SentenceCoord, level: int, kind: str, parent: DstNode | None = None):
        self.content: list[Element] = []
        self.weight = weight
        self.level = level
        self.kind = kind
        self.subtree: list[DstNode] = []
        self.parent = parent
        self._ars: dict[int, DstNode] | None = None

    @property
    def is_ars(self) -> bool:
        return self.kind == ARS

    @property
    def heading(self) -> Element | None:
        return self.content[0] if self.content and self.kind != ROOT else None

    def add(self, child: DstNode) -> DstNode:
        child.parent = self
        self.subtree.append(child)
        return child

    def __repr__(self) -> str:
        text = self.content[0].text[:30] if self.content else ""
        if self.kind == ARS:
            return f"ArsNode(level={self.level})"
        return f"DstNode({self.kind}, level={self.level}, weight={tuple(self.weight)}, {text!r})"


def _ars(level: int) -> DstNode:
    return DstNode(ARS_WEIGHT, level, ARS)


@dataclass
class Dst:
    root: DstNode
    ars_per_level: dict[int, DstNode]
    max_depth: int = 4
    doc_id: str = ""
    taxonomy: Taxonomy = GOVDOC
    warnings: list[str] = field(default_factory=list)
    last_coord: SentenceCoord | None = None

    def nodes(self) -> Iterator[DstNode]:
        """Pre-order (root, then children left to right); the ARS never appears."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.subtree))

    def sections(self) -> list[DstNode]:
        return [n for n in self.nodes() if n.kind == SECTION]

    def elements(self) -> list[Element]:
        """All payload elements in reading order.

        Each vertex's content is merged with its children by weight, content
        first on ties; a child's whole subtree is emitted at its weight.
        """
        return [el for _, el in _content_in_order(self.root)]

    def sentence_table(self) -> dict[SentenceCoord, str]:
        table: dict[SentenceCoord, str] = {}
        for el in self.elements():
            table[el.coord] = f"{table[el.coord]} {el.text}" if el.coord in table else el.text
        return table

    def in_range(self, coord: SentenceCoord) -> bool:
        if coord.pi < 0 or coord.si < 0:
            return False
        return self.last_coord is not None and coord.pi <= self.last_coord.pi

    @property
    def depth(self) -> int:
        return max(n.level for n in self.nodes())

    # -- export --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "doc_id": self.doc_id,
            "max_depth": self.max_depth,
            "taxonomy": self.taxonomy.to_dict(),
            "warnings": list(self.warnings),
            "root": _node_to_dict(self.root),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1) + "\n"

    def outline(self) -> str:
        lines = []
        for node in self.nodes():
            text = " / ".join(el.text for el in node.content) if node.kind != ROOT else (
                " / ".join(el.text for el in node.content if self.taxonomy.role(el.label) == "title"))
            label = node.content[0].label if node.content and node.kind != ROOT else "Document"
            lines.append(f"{'  ' * node.level}{label} ({node.weight.pi},{node.weight.si}) {text}".rstrip())
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_json())

    @classmethod
    def from_dict(cls, data: dict) -> Dst:
        if data.get("version") != FORMAT_VERSION:
            raise ValidationError(f"unsupported tree format version {data.get('version')!r}")
        taxonomy = GOVDOC
        if isinstance(data.get("taxonomy"), dict):
            taxonomy = Taxonomy.from_dict(data["taxonomy"])
        max_depth = int(data.get("max_depth", 4))
        root = _node_from_dict(data["root"], None)
        tree = cls(root=root, ars_per_level={}, max_depth=max_depth, doc_id=data.get("doc_id", ""),
                   taxonomy=taxonomy, warnings=list(data.get("warnings", [])))
        _install_ars(tree)
        coords = [el.coord for el in tree.elements()]
        tree.last_coord = max(coords) if coords else None
        return tree

    @classmethod
    def from_json(cls, text: str) -> Dst:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> Dst:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def _content_in_order(node: DstNode) -> Iterator[tuple[DstNode, Element]]:
    # content before children at equal weight
    items = [(el.coord, 0, i, el) for i, el in enumerate(node.content)]
    items += [(child.weight, 1, i, child) for i, child in enumerate(node.subtree)]
    items.sort(key=lambda t: (t[0], t[1], t[2]))
    for _, is_child, _, item in items:
        if is_child:
            yield from _content_in_order(item)
        else:
            yield node, item


def element_to_dict(el: Element) -> dict:
    box = None
    if el.box is not None:
        b = el.box
        box = {"class": b.label, "prob": b.prob, "x": b.x, "y": b.y, "w": b.w, "d": b.d}
    return {
        "class": el.label,
        "text": el.text,
        "modality": el.modality.value,
        "coord": [el.coord.pi, el.coord.si] if el.coord is not None else None,
        "box": box,
        "page": el.page,
        "doc_id": el.doc_id,
    }


def element_from_dict(d: dict) -> Element:
    box = None
    if d.get("box") is not None:
        b = d["box"]
        box = DetectionVector(b["class"], b["prob"], b["x"], b["y"], b["w"], b["d"])
    coord = make_coord(*d["coord"]) if d.get("coord") is not None else None
    return Element(label=d["class"], text=d["text"], modality=Modality(d["modality"]), coord=coord,
                   box=box, page=d.get("page", 1), doc_id=d.get("doc_id", ""))


def _node_to_dict(node: DstNode) -> dict:
    return {
        "kind": node.kind,
        "level": node.level,
        "weight": [node.weight.pi, node.weight.si],
        "content": [element_to_dict(el) for el in node.content],
        "subtree": [_node_to_dict(c) for c in node.subtree],
    }


def _node_from_dict(d: dict, parent: DstNode | None) -> DstNode:
    node = DstNode(SentenceCoord(*d["weight"]), int(d["level"]), d.get("kind", SECTION), parent)
    node.content = [element_from_dict(e) for e in d.get("content", [])]
    for c in d.get("subtree", []):
        node.subtree.append(_node_from_dict(c, node))
    return node


def _install_ars(tree: Dst) -> None:
    tree.ars_per_level = {level: _ars(level) for level in range(1, tree.max_depth)}
    tree.root._ars = tree.ars_per_level


def build_dst(
    elements: Iterable[Element],
    taxonomy: Taxonomy = GOVDOC,
    max_depth: int = 4,
    doc_id: str | None = None,
) -> Dst:
    """Organize elements (in reading order) into a document structure tree.

    Titles and document attributes become root content.  A section of level
    L becomes the rightmost child of the most recently opened vertex of a
    lower level; if that vertex is not at level L-1 the skip is recorded in
    ``warnings`` and the vertex takes the level below its parent.  Paragraphs
    become leaves under the deepest open vertex.  Elements without a
    coordinate cannot be placed and are skipped with a warning.
    """
    if max_depth < 2:
        raise ValidationError(f"max_depth must be >= 2, got {max_depth}")
    root = DstNode(ROOT_WEIGHT, 0, ROOT)
    tree = Dst(root=root, ars_per_level={}, max_depth=max_depth, doc_id=doc_id or "", taxonomy=taxonomy)
    _install_ars(tree)

    stack = [root]
    prev: SentenceCoord | None = None
    last_vertex = ROOT_WEIGHT
    for el in elements:
        if not tree.doc_id and el.doc_id:
            tree.doc_id = el.doc_id
        if el.coord is None:
            msg = f"element {el.label} {el.text!r} has no sentence coordinate; not placed in tree"
            tree.warnings.append(msg)
            log.warning(msg)
            continue
        if prev is not None and el.coord < prev:
            raise ValidationError(f"elements not in reading order: {el.coord} after {prev}")
        prev = el.coord
        role = taxonomy.role(el.label)
        if role in ("title", "attribute"):
            root.content.append(el)
            continue
        if el.coord <= last_vertex:
            raise ValidationError(f"two tree vertices share coordinate {el.coord}")
        if role == "section":
            level = taxonomy.section_level(el.label)
            if level >= max_depth:
                raise ValidationError(
                    f"class {el.label} maps to level {level}, beyond max depth {max_depth}")
            while stack[-1].level >= level:
                stack.pop()
            parent = stack[-1]
            if parent.level != level - 1:
                msg = (f"{el.label} at {el.coord} has no open level-{level - 1} vertex; "
                       f"attached under level {parent.level}")
                tree.warnings.append(msg)
                log.warning(msg)
            node = parent.add(DstNode(el.coord, parent.level + 1, SECTION))
            stack.append(node)
        elif role == "paragraph":
            parent = stack[-1]
            node = parent.add(DstNode(el.coord, min(parent.level + 1, max_depth), LEAF))
        else:  # pragma: no cover - taxonomy roles are closed
            raise ValidationError(f"class {el.label} maps to no tree level")
        node.content.append(el)
        last_vertex = el.coord
    tree.last_coord = prev
    return tree


# -- queries ------------------------------------------------------------------

def _root_of(node: DstNode) -> DstNode:
    while node.parent is not None:
        node = node.parent
    return node


def _sibling(node: DstNode, offset: int) -> DstNode | None:
    if node.parent is None:
        return None
    sibs = node.parent.subtree
    i = next(i for i, s in enumerate(sibs) if s is node)
    j = i + offset
    return sibs[j] if 0 <= j < len(sibs) else None


def right_parent(node: DstNode) -> DstNode:
    """Nearest right sibling of the node's parent, else the ARS of the parent's level.

    The root has no right neighbour, so children of the root are bounded by
    the level-1 ARS.
    """
    if node.parent is None or node.is_ars:
        raise ContractError("right_parent is undefined for the root")
    parent = node.parent
    rp = _sibling(parent, 1)
    if rp is not None:
        return rp
    ars = _root_of(node)._ars
    if not ars:
        raise ContractError("node is not attached to a tree with ARS sentinels")
    return ars[max(parent.level, 1)]


def left_parent(node: DstNode) -> DstNode | None:
    if node.parent is None or node.is_ars:
        raise ContractError("left_parent is undefined for the root")
    return _sibling(node.parent, -1)


def subtree_bound(node: DstNode) -> SentenceCoord:
    """Exclusive upper weight of the node's subtree: the next vertex to its right up the chain."""
    cur = node
    while cur.parent is not None:
        sib = _sibling(cur, 1)
        if sib is not None:
            return sib.weight
        cur = cur.parent
    return ARS_WEIGHT


def locate(coord: SentenceCoord, tree: Dst) -> DstNode:
    """The deepest section (or the root) whose weight interval contains ``coord``."""
    if coord.pi < 0 or coord.si < 0:
        raise ValidationError(f"coordinate {coord} is negative")
    node = tree.root
    while True:
        secs = [c for c in node.subtree if c.kind == SECTION]
        i = bisect.bisect_right([c.weight for c in secs], coord)
        if i == 0:
            return node
        node = secs[i - 1]


# -- property checks ----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: str  # "property1", "order", "level", "property3"
    message: str
    nodes: tuple = ()


def _label(node: DstNode) -> str:
    if node.kind == ROOT:
        return "root"
    if node.is_ars:
        return f"ARS@{node.level}"
    return f"{node.content[0].label}@{tuple(node.weight)}" if node.content else f"vertex@{tuple(node.weight)}"


def check_properties(tree: Dst) -> list[Violation]:
    """Check every vertex against the weight and level rules; returns violations.

    property1  weight(parent) < weight(v) < weight(right_parent(v))
    order      siblings strictly increase left to right
    level      a child sits exactly one level below its parent, within max depth
    property3  per subtree scope, the smallest weight at each level is
               below the smallest weight of the next deeper level
    """
    out: list[Violation] = []
    for node in tree.nodes():
        for a, b in zip(node.subtree, node.subtree[1:]):
            if not a.weight < b.weight:
                out.append(Violation("order", f"{_label(a)} is not lighter than right sibling {_label(b)}", (a, b)))
        if node.parent is None:
            continue
        p = node.parent
        if not p.weight < node.weight:
            out.append(Violation("property1", f"parent {_label(p)} is not lighter than child {_label(node)}",
                                 (p, node)))
        rp = right_parent(node)
        if not node.weight < rp.weight:
            out.append(Violation("property1", f"child {_label(node)} is not lighter than right parent {_label(rp)}",
                                 (node, rp)))
        if node.level != p.level + 1 or node.level > tree.max_depth:
            out.append(Violation("level", f"{_label(node)} at level {node.level} under level {p.level}", (p, node)))

    def scope_minima(node: DstNode) -> dict[int, SentenceCoord]:
        mins = {node.level: node.weight}
        for child in node.subtree:
            for lvl, w in scope_minima(child).items():
                if lvl not in mins or w < mins[lvl]:
                    mins[lvl] = w
        if node.subtree:
            levels = sorted(mins)
            for l1, l2 in zip(levels, levels[1:]):
                if not mins[l1] < mins[l2]:
                    out.append(Violation(
                        "property3",
                        f"in scope {_label(node)}: min weight at level {l2} {tuple(mins[l2])} "
                        f"is not above min weight at level {l1} {tuple(mins[l1])}",
                        (node,)))
        return mins

    scope_minima(tree.root)
    return out
