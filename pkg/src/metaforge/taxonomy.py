"""Element class taxonomies.

The default taxonomy is the ten-class governmental-document set.  Other
class sets (e.g. the twelve DocBank layout classes) are described by a small
JSON file and loaded with :meth:`Taxonomy.from_file`::

    {
      "name": "docbank",
      "classes": [
        {"name": "Title", "role": "title"},
        {"name": "Section", "role": "section", "level": 1},
        {"name": "Paragraph", "role": "paragraph"},
        ...
      ]
    }

``role`` drives placement in the document structure tree: ``title`` and
``attribute`` payloads live on the root, ``section`` opens a vertex at
``level``, ``paragraph`` becomes a leaf.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from pathlib import Path

from .errors import ValidationError

ROLES = ("title", "attribute", "section", "paragraph")


class ElementClass(IntEnum):
    """The ten governmental-document element classes; the value is the one-hot code."""

    SignOfIssuingAuthority = 0
    DocumentNumber = 1
    Title = 2
    Addressee = 3
    Section1 = 4
    Section2 = 5
    Section3 = 6
    IssuingAuthority = 7
    DateOfWriting = 8
    Paragraph = 9


@dataclass(frozen=True)
class ClassSpec:
    name: str
    role: str
    level: int | None = None


class Taxonomy:
    """An ordered set of element classes with their structural roles."""

    def __init__(self, name: str, classes: list[ClassSpec] | tuple[ClassSpec, ...]):
        if len(classes) < 2:
            raise ValidationError("a taxonomy needs at least two classes")
        seen: dict[str, int] = {}
        for i, spec in enumerate(classes):
            if spec.name in seen:
                raise ValidationError(f"duplicate class name {spec.name!r}")
            if spec.role not in ROLES:
                raise ValidationError(f"class {spec.name!r}: unknown role {spec.role!r}")
            if spec.role == "section" and (spec.level is None or spec.level < 1):
                raise ValidationError(f"class {spec.name!r}: section role needs level >= 1")
            seen[spec.name] = i
        self.name = name
        self.classes = tuple(classes)
        self._codes = seen

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    def __contains__(self, name: object) -> bool:
        return name in self._codes

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Taxonomy) and self.classes == other.classes

    def __hash__(self) -> int:
        return hash(self.classes)

    def __repr__(self) -> str:
        return f"Taxonomy({self.name!r}, k={self.k})"

    def code(self, name: str) -> int:
        try:
            return self._codes[name]
        except KeyError:
            raise ValidationError(f"unknown element class {name!r} for taxonomy {self.name!r}") from None

    def label(self, code: int) -> str:
        if not 0 <= code < self.k:
            raise ValidationError(f"class code {code} outside [0, {self.k})")
        return self.classes[code].name

    def spec(self, name: str) -> ClassSpec:
        return self.classes[self.code(name)]

    def role(self, name: str) -> str:
        return self.spec(name).role

    def section_level(self, name: str) -> int | None:
        spec = self.spec(name)
        return spec.level if spec.role == "section" else None

    def validate(self, name: str) -> str:
        self.code(name)
        return name

    @classmethod
    def from_dict(cls, data: dict) -> Taxonomy:
        try:
            classes = [
                ClassSpec(name=str(c["name"]), role=str(c["role"]), level=c.get("level"))
                for c in data["classes"]
            ]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed taxonomy description: {exc}") from exc
        return cls(str(data.get("name", "custom")), classes)

    @classmethod
    def from_file(cls, path: str | Path) -> Taxonomy:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        out = []
        for c in self.classes:
            d: dict = {"name": c.name, "role": c.role}
            if c.level is not None:
                d["level"] = c.level
            out.append(d)
        return {"name": self.name, "classes": out}


def _builtin(name: str) -> Taxonomy:
    text = resources.files("metaforge.taxonomies").joinpath(f"{name}.json").read_text("utf-8")
    return Taxonomy.from_dict(json.loads(text))


GOVDOC = _builtin("govdoc")
DOCBANK = _builtin("docbank")
BUILTIN = {"govdoc": GOVDOC, "docbank": DOCBANK}


def load_taxonomy(name_or_path: str | Path | None) -> Taxonomy:
    """Resolve a built-in taxonomy name or a JSON file path; ``None`` gives the default."""
    if name_or_path is None:
        return GOVDOC
    if str(name_or_path) in BUILTIN:
        return BUILTIN[str(name_or_path)]
    return Taxonomy.from_file(name_or_path)
