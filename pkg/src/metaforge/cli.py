"""``forge`` command line: each pipeline stage as a subcommand, plus the full pipeline.

Exit codes: 0 ok, 1 validation error, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import io
from .dst import Dst, build_dst, check_properties
from .errors import MetaforgeError, ValidationError
from .fusion import DecisionMatrix, fuse_document, train_decision_matrix
from .harness.corpus import generate_corpus
from .harness.evaluate import evaluate
from .harness.experiment import ExperimentConfig, fusion_samples, run_fusion_experiment
from .harness.noise import NoiseModel, apply_noise
from .metagraph import (
    build_reference_network,
    export,
    extract_triples_heuristic,
    format_for_path,
    generate,
    read_triples,
)
from .model import DocumentRecord
from .taxonomy import Taxonomy, load_taxonomy
from .textmetrics import read_matches, reconcile, write_matches

log = logging.getLogger("metaforge")

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(MetaforgeError):
    pass


class StageError(MetaforgeError):
    def __init__(self, stage: str, doc_id: str, cause: BaseException):
        self.stage, self.doc_id, self.cause = stage, doc_id, cause
        super().__init__(f"stage {stage!r} failed for document {doc_id!r}: {cause}")


def _existing(path: str | None, what: str) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {path}")
    return p


def _single(docs: dict, path) -> tuple[str, object]:
    if len(docs) != 1:
        raise ValidationError(f"{path}: expected exactly one document, found {len(docs)}; use 'forge pipeline'")
    return next(iter(docs.items()))


def _write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(data)


# -- pipeline -----------------------------------------------------------------

@dataclass
class PipelineConfig:
    text: str | None = None
    image: str | None = None
    matrix: str | None = None
    triples: str | None = None
    refs: str | None = None
    out: str = "forge-out"
    threshold: int = 3
    relative: float | None = None
    max_depth: int = 4
    formats: list[str] = field(default_factory=lambda: ["graph-json", "dot", "cypher"])
    heuristic_triples: bool = True
    workers: int = 1
    seed: int = 0
    taxonomy: str | None = None

    def check_paths(self) -> None:
        if self.text is None or self.image is None:
            raise UsageError("pipeline needs both --text and --image inputs")
        for name in ("text", "image", "matrix", "triples", "refs"):
            _existing(getattr(self, name), f"{name} input")


_GRAPH_FILES = {"graph-json": "graph.json", "dot": "graph.dot", "cypher": "graph.cypher"}


def _per_doc(path: str | None, doc_id: str, suffix: str) -> Path | None:
    """A per-document input: the file itself, or ``<dir>/<doc_id><suffix>`` for a directory."""
    if path is None:
        return None
    p = Path(path)
    if p.is_dir():
        cand = p / f"{doc_id}{suffix}"
        return cand if cand.exists() else None
    return p


def process_document(record: DocumentRecord, cfg: PipelineConfig, taxonomy: Taxonomy, out_dir: Path) -> list[str]:
    """Run reconcile -> fuse -> tree -> graph for one document into ``out_dir``."""
    stage = "matrix"
    try:
        W = DecisionMatrix.load(cfg.matrix) if cfg.matrix else DecisionMatrix(taxonomy.k)
        stage = "reconcile"
        matches = reconcile(record.image_elements, record.text_elements, cfg.threshold, relative=cfg.relative)
        write_matches(out_dir / "matches.tsv", matches)
        stage = "fuse"
        fused = fuse_document(record, matches, W, taxonomy)
        io.write_fused(out_dir / "fused.tsv", fused)
        stage = "tree"
        tree = build_dst(fused, taxonomy, cfg.max_depth, doc_id=record.doc_id)
        tree.save(out_dir / "doc.dst.json")
        stage = "graph"
        triples_path = _per_doc(cfg.triples, record.doc_id, ".tsv")
        table = tree.sentence_table()
        if triples_path is not None:
            triples = read_triples(triples_path)
        elif cfg.heuristic_triples:
            triples = extract_triples_heuristic(table)
        else:
            triples = []
        graph = generate(tree, triples=triples)
        refs_path = _per_doc(cfg.refs, record.doc_id, ".txt")
        if refs_path is not None:
            graph = build_reference_network(refs_path.read_text(encoding="utf-8"), table, graph, tree)
        for fmt in cfg.formats:
            _write_bytes(out_dir / _GRAPH_FILES[fmt], export(graph, fmt))
        return tree.warnings + graph.diagnostics
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
        raise StageError(stage, record.doc_id, exc) from exc


def _process_into(args) -> tuple[str, list[str]]:
    record, cfg, taxonomy, final_dir = args
    final_dir = Path(final_dir)
    final_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{final_dir.name}.", dir=final_dir.parent))
    try:
        diags = process_document(record, cfg, taxonomy, tmp)
        if final_dir.exists():
            shutil.rmtree(final_dir)
        os.replace(tmp, final_dir)
        return record.doc_id, diags
    finally:
        if tmp.exists():
            shutil.rmtree(tmp, ignore_errors=True)


def run_pipeline(cfg: PipelineConfig) -> dict[str, list[str]]:
    """Process every document of the inputs; artifacts land in ``<out>/<doc_id>/``."""
    cfg.check_paths()
    taxonomy = load_taxonomy(cfg.taxonomy)
    unknown = [f for f in cfg.formats if f not in _GRAPH_FILES]
    if unknown:
        raise UsageError(f"unknown graph formats: {unknown}")
    texts = io.read_text_modal(cfg.text, taxonomy)
    images = io.read_image_modal(cfg.image, taxonomy)
    doc_ids = list(texts) + [d for d in images if d not in texts]
    out = Path(cfg.out)
    jobs = []
    for doc_id in doc_ids:
        t = texts.get(doc_id) or DocumentRecord(doc_id)
        record = DocumentRecord(doc_id, t.text_elements, tuple(images.get(doc_id, [])), t.sentence_table)
        jobs.append((record, cfg, taxonomy, str(out / doc_id)))
    results: dict[str, list[str]] = {}
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for doc_id, diags in pool.map(_process_into, jobs):
                results[doc_id] = diags
    else:
        for job in jobs:
            doc_id, diags = _process_into(job)
            results[doc_id] = diags
    return results


# -- subcommands --------------------------------------------------------------

def cmd_reconcile(args) -> int:
    tax = load_taxonomy(args.taxonomy)
    _existing(args.text, "text input")
    _existing(args.image, "image input")
    _, record = _single(io.read_text_modal(args.text, tax), args.text)
    images = io.ingest_image_modal(args.image, tax)
    matches = reconcile(images, record.text_elements, args.threshold, relative=args.relative,
                        normalize=not args.no_normalize, fold_width=args.fold_width, fold_case=args.fold_case)
    write_matches(args.output, matches)
    n_ok = sum(m.accepted for m in matches)
    log.info("%d of %d image elements reconciled", n_ok, len(matches))
    return EXIT_OK


def cmd_train_fusion(args) -> int:
    tax = load_taxonomy(args.taxonomy)
    _existing(args.samples, "samples file")
    W = train_decision_matrix(io.read_samples(args.samples, tax), tax.k)
    W.save(args.output)
    log.info("trained %r", W)
    return EXIT_OK


def cmd_fuse(args) -> int:
    tax = load_taxonomy(args.taxonomy)
    for p, what in ((args.text, "text input"), (args.image, "image input"), (args.matrix, "matrix"),
                    (args.matches, "matches file")):
        _existing(p, what)
    doc_id, text_rec = _single(io.read_text_modal(args.text, tax), args.text)
    images = io.ingest_image_modal(args.image, tax)
    record = DocumentRecord(doc_id, text_rec.text_elements, tuple(images), text_rec.sentence_table)
    matches = (read_matches(args.matches) if args.matches
               else reconcile(record.image_elements, record.text_elements, args.threshold))
    W = DecisionMatrix.load(args.matrix) if args.matrix else DecisionMatrix(tax.k)
    io.write_fused(args.output, fuse_document(record, matches, W, tax))
    return EXIT_OK


def cmd_tree(args) -> int:
    tax = load_taxonomy(args.taxonomy)
    _existing(args.fused, "fused input")
    elements = io.read_fused(args.fused, tax)
    doc_ids = {el.doc_id for el in elements}
    if len(doc_ids) > 1:
        raise ValidationError(f"{args.fused}: expected one document, found {sorted(doc_ids)}")
    tree = build_dst(elements, tax, args.max_depth)
    tree.save(args.output)
    if args.outline:
        Path(args.outline).write_text(tree.outline(), encoding="utf-8")
    for w in tree.warnings:
        log.warning(w)
    if args.check:
        violations = check_properties(tree)
        for v in violations:
            print(f"{v.rule}\t{v.message}")
        if violations:
            return EXIT_VALIDATION
        log.info("tree satisfies all structural properties")
    return EXIT_OK


def cmd_graph(args) -> int:
    _existing(args.tree, "tree input")
    _existing(args.triples, "triples file")
    _existing(args.refs, "reference list")
    tree = Dst.load(args.tree)
    table = tree.sentence_table()
    if args.triples:
        triples = read_triples(args.triples)
    elif args.no_heuristic:
        triples = []
    else:
        triples = extract_triples_heuristic(table)
    graph = generate(tree, triples=triples)
    if args.refs:
        graph = build_reference_network(Path(args.refs).read_text(encoding="utf-8"), table, graph, tree)
    for out in args.output:
        fmt = args.format or format_for_path(out)
        _write_bytes(Path(out), export(graph, fmt))
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    tax = load_taxonomy(args.taxonomy)
    cfg = args.config_data or {}
    profile = args.profile or cfg.get("profile", "default")
    corpus = generate_corpus(args.n_docs, profile, args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    io.write_text_modal(out / "gold_text.tsv", [el for d in corpus for el in d.text_elements])
    io.write_image_modal(out / "gold_image.tsv", [el for d in corpus for el in d.image_elements])
    if "noise" in cfg:
        model = NoiseModel.from_dict(cfg["noise"], tax)
        tp, ip = apply_noise(corpus, model, tax)
        io.write_text_modal(out / "pred_text.tsv", [el for doc in tp for el in doc])
        io.write_image_modal(out / "pred_image.tsv", [el for doc in ip for el in doc])
        samples = fusion_samples(corpus, tp, ip, tax)
        io.write_samples(out / "samples.tsv", [(s.text_pred, s.image_pred, s.gold) for s in samples], tax)
    log.info("wrote %d documents to %s", len(corpus), out)
    return EXIT_OK


def _labels(path: str, column: int) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if column >= len(parts):
                raise ValidationError(f"{path}:{lineno}: no column {column}")
            out.append(parts[column])
    return out


def cmd_eval(args) -> int:
    _existing(args.gold, "gold file")
    _existing(args.pred, "prediction file")
    gold = _labels(args.gold, args.gold_column)
    pred = _labels(args.pred, args.pred_column)
    report = evaluate(pred, gold)
    lines = ["class\tprecision\trecall\tf1\tsupport"]
    for lab in report.labels:
        s = report.per_class[lab]
        lines.append(f"{lab}\t{s.precision:.4f}\t{s.recall:.4f}\t{s.f1:.4f}\t{s.support}")
    lines.append(f"micro\t{report.micro_precision:.4f}\t{report.micro_recall:.4f}\t{report.micro_f1:.4f}\t{len(gold)}")
    lines.append(f"macro\t\t\t{report.macro_f1:.4f}\t{len(gold)}")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    data = dict(args.config_data or {})
    if args.experiment_config:
        _existing(args.experiment_config, "experiment config")
        with open(args.experiment_config, encoding="utf-8") as f:
            data.update(json.load(f))
    if args.seed_given:
        data["seed"] = args.seed
    result = run_fusion_experiment(ExperimentConfig.from_dict(data))
    _emit(result.table_tsv(), args.output)
    if args.matrix_out:
        result.matrix.save(args.matrix_out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig(**{f.name: getattr(args, f.name) for f in fields(PipelineConfig)
                            if getattr(args, f.name, None) is not None})
    results = run_pipeline(cfg)
    for doc_id, diags in results.items():
        log.debug("%s: done (%d diagnostics)", doc_id, len(diags))
    n_diag = sum(len(d) for d in results.values())
    log.info("wrote %d documents to %s (%d diagnostics)", len(results), cfg.out, n_diag)
    return EXIT_OK


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def shared(top: bool) -> argparse.ArgumentParser:
        # subcommand copies use SUPPRESS so they do not reset flags given before the subcommand
        d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=d(None), help="random seed (default 0)")
        g.add_argument("--config", default=d(None), help="JSON file with option defaults")
        g.add_argument("--quiet", action="store_true", default=d(False), help="only report errors")
        g.add_argument("--taxonomy", default=d(None), help="'govdoc' (default), 'docbank' or a JSON file")
        return g

    common = shared(False)
    p = argparse.ArgumentParser(prog="forge", description=__doc__.splitlines()[0], parents=[shared(True)])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("reconcile", parents=[common], help="match OCR text to text-modal elements")
    s.add_argument("--text", required=True)
    s.add_argument("--image", required=True)
    s.add_argument("--threshold", type=int, default=3)
    s.add_argument("--relative", type=float, default=None, help="accept distance <= R * len(ocr_text)")
    s.add_argument("--no-normalize", action="store_true", help="keep whitespace as is")
    s.add_argument("--fold-width", action="store_true", help="NFKC-normalize before comparing")
    s.add_argument("--fold-case", action="store_true")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_reconcile)

    s = sub.add_parser("train-fusion", parents=[common], help="learn the decision matrix from samples")
    s.add_argument("samples")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_train_fusion)

    s = sub.add_parser("fuse", parents=[common], help="fuse both modalities of one document")
    s.add_argument("--matrix")
    s.add_argument("--text", required=True)
    s.add_argument("--image", required=True)
    s.add_argument("--matches", help="matches.tsv from 'forge reconcile' (computed if omitted)")
    s.add_argument("--threshold", type=int, default=3)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_fuse)

    s = sub.add_parser("tree", parents=[common], help="build the document structure tree")
    s.add_argument("fused")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--max-depth", type=int, default=4)
    s.add_argument("--check", action="store_true", help="verify structural properties")
    s.add_argument("--outline", help="also write an indented text outline")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("graph", parents=[common], help="generate and export the metaknowledge graph")
    s.add_argument("tree")
    s.add_argument("--triples", help="TSV: subject, predicate, object, pi, si")
    s.add_argument("--refs", help="bracket-numbered reference list")
    s.add_argument("--no-heuristic", action="store_true", help="no fallback triple extraction")
    s.add_argument("--format", choices=["graph-json", "dot", "cypher"], help="override suffix detection")
    s.add_argument("-o", "--output", action="append", required=True)
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("gen-corpus", parents=[common], help="write a synthetic gold (and noisy) corpus")
    s.add_argument("-n", "--n-docs", type=int, default=10)
    s.add_argument("--profile", choices=["default", "minimal"])
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_gen_corpus)

    s = sub.add_parser("eval", parents=[common], help="per-class and micro F1 of aligned label files")
    s.add_argument("--gold", required=True)
    s.add_argument("--pred", required=True)
    s.add_argument("--gold-column", type=int, default=1, help="0-based TSV column (1 = text-modal class)")
    s.add_argument("--pred-column", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("experiment", parents=[common], help="text vs image vs fused comparison table")
    s.add_argument("experiment_config", nargs="?")
    s.add_argument("-o", "--output")
    s.add_argument("--matrix-out")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("pipeline", parents=[common], help="reconcile -> fuse -> tree -> graph")
    s.add_argument("--text")
    s.add_argument("--image")
    s.add_argument("--matrix")
    s.add_argument("--triples", help="file, or directory of <doc_id>.tsv")
    s.add_argument("--refs", help="file, or directory of <doc_id>.txt")
    s.add_argument("-o", "--out")
    s.add_argument("--threshold", type=int)
    s.add_argument("--relative", type=float)
    s.add_argument("--max-depth", type=int)
    s.add_argument("--formats", nargs="+", choices=list(_GRAPH_FILES))
    s.add_argument("--no-heuristic", dest="heuristic_triples", action="store_false", default=None)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_pipeline)
    return p


def _configure_logging(quiet: bool) -> None:
    # diagnostics go to stderr through the package logger only; the root logger is left alone
    for h in [h for h in log.handlers if getattr(h, "_forge", False)]:
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._forge = True
    log.addHandler(handler)
    log.setLevel(logging.ERROR if quiet else logging.INFO)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    _configure_logging(args.quiet)
    args.seed_given = args.seed is not None
    try:
        args.config_data = None
        if args.config:
            _existing(args.config, "config file")
            with open(args.config, encoding="utf-8") as f:
                args.config_data = json.load(f)
            if args.command == "pipeline":
                for key, value in args.config_data.items():
                    if getattr(args, key, None) is None:
                        setattr(args, key, value)
        if args.seed is None:
            args.seed = int((args.config_data or {}).get("seed", 0))
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except StageError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION if isinstance(exc.cause, ValidationError) else EXIT_INTERNAL
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
