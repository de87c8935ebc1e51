"""Text vs image vs fused comparison on a synthetic corpus.

Config (JSON)::

    {
      "n_docs": 500,
      "profile": "default",          # or "minimal", or a LayoutProfile dict
      "seed": 7,                     # corpus seed
      "train_fraction": 0.6,         # leading documents train the matrix
      "threshold": 3,                # OCR reconciliation threshold
      "relative": null,              # optional relative threshold
      "taxonomy": "govdoc",
      "noise": {
        "text": {"Section2": "Section3"},            # or {"accuracy": 0.85} or a k x k list
        "image": {"Section1": {"Section2": 1.0}},
        "ocr_rate": 0.0,
        "seed": 11
      }
    }
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field

from ..errors import ValidationError
from ..fusion import DecisionMatrix, FusionSample, fuse_document, train_decision_matrix
from ..model import DocumentRecord
from ..taxonomy import Taxonomy, load_taxonomy
from ..textmetrics import reconcile
from .corpus import generate_corpus
from .evaluate import EvalReport, evaluate
from .noise import NoiseModel, apply_noise

COLUMNS = ("text", "image", "fused")


@dataclass(frozen=True)
class ExperimentConfig:
    n_docs: int = 100
    profile: object = "default"
    seed: int = 0
    train_fraction: float = 0.6
    threshold: int = 3
    relative: float | None = None
    taxonomy: str = "govdoc"
    noise: Mapping = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class ExperimentResult:
    reports: dict[str, EvalReport]
    matrix: DecisionMatrix
    n_train: int
    n_test: int
    n_test_elements: int

    def micro(self) -> dict[str, float]:
        return {c: self.reports[c].micro_f1 for c in COLUMNS}

    def table_lines(self) -> list[str]:
        """Rows per element class, then micro and macro averages; columns text/image/fused."""
        labels = self.reports["text"].labels
        lines = ["element\ttext\timage\tfused"]
        for lab in labels:
            lines.append(lab + "".join(f"\t{self.reports[c].per_class[lab].f1:.4f}" for c in COLUMNS))
        lines.append("Average (micro)" + "".join(f"\t{self.reports[c].micro_f1:.4f}" for c in COLUMNS))
        lines.append("Average (macro)" + "".join(f"\t{self.reports[c].macro_f1:.4f}" for c in COLUMNS))
        return lines

    def table_tsv(self) -> str:
        return "\n".join(self.table_lines()) + "\n"


def fusion_samples(gold: list[DocumentRecord], text_preds, image_preds, taxonomy: Taxonomy) -> list[FusionSample]:
    out = []
    for doc, tp, ip in zip(gold, text_preds, image_preds):
        for g, t, i in zip(doc.text_elements, tp, ip):
            out.append(FusionSample(taxonomy.code(t.label), taxonomy.code(i.label), taxonomy.code(g.label)))
    return out


def run_fusion_experiment(config: ExperimentConfig | Mapping) -> ExperimentResult:
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    taxonomy = load_taxonomy(config.taxonomy)
    n_train = int(round(config.n_docs * config.train_fraction))
    if n_train < 1 or n_train >= config.n_docs:
        raise ValidationError(
            f"degenerate split: {n_train} training and {config.n_docs - n_train} test documents")
    corpus = generate_corpus(config.n_docs, config.profile, config.seed)
    model = NoiseModel.from_dict(config.noise, taxonomy)
    text_preds, image_preds = apply_noise(corpus, model, taxonomy)

    W = train_decision_matrix(
        fusion_samples(corpus[:n_train], text_preds[:n_train], image_preds[:n_train], taxonomy), taxonomy.k)

    cols: dict[str, list[str]] = {c: [] for c in COLUMNS}
    gold: list[str] = []
    for doc, tp, ip in zip(corpus[n_train:], text_preds[n_train:], image_preds[n_train:]):
        record = DocumentRecord(doc.doc_id, tuple(tp), tuple(ip))
        matches = reconcile(ip, tp, config.threshold, relative=config.relative)
        fused = fuse_document(record, matches, W, taxonomy)
        # fuse_document emits one element per text element first, in order
        gold.extend(el.label for el in doc.text_elements)
        cols["text"].extend(el.label for el in tp)
        cols["image"].extend(el.label for el in ip)
        cols["fused"].extend(el.label for el in fused[:len(tp)])
    reports = {c: evaluate(cols[c], gold, labels=taxonomy.names) for c in COLUMNS}
    return ExperimentResult(reports, W, n_train, config.n_docs - n_train, len(gold))
