"""Turn per-modality document element extractions into a hierarchical metaknowledge graph.

Stages: OCR reconciliation (:mod:`.textmetrics`), decision-matrix fusion
(:mod:`.fusion`), the document structure tree (:mod:`.dst`) and graph
generation/export (:mod:`.metagraph`).  :mod:`.harness` holds the synthetic
corpus, noise models and Micro-F1 evaluation.
"""

from .dst import Dst, DstNode, build_dst, check_properties, left_parent, locate, right_parent
from .errors import ContractError, MetaforgeError, ParseError, ValidationError
from .fusion import DecisionMatrix, FusionSample, OneHot, fuse, fuse_document, train_decision_matrix
from .io import ingest_image_modal, ingest_text_modal
from .metagraph import (
    ContextTriple,
    MetaGraph,
    build_reference_network,
    export,
    extract_triples_heuristic,
    generate,
    import_graph_json,
)
from .model import (
    ARS_MAGNITUDE,
    DetectionVector,
    DocumentRecord,
    Element,
    Modality,
    SentenceCoord,
    segment,
)
from .taxonomy import DOCBANK, GOVDOC, ElementClass, Taxonomy, load_taxonomy
from .textmetrics import MatchResult, levenshtein, reconcile

__version__ = "0.1.0"

__all__ = [
    "ARS_MAGNITUDE", "ContextTriple", "ContractError", "DOCBANK", "DecisionMatrix", "DetectionVector",
    "DocumentRecord", "Dst", "DstNode", "Element", "ElementClass", "FusionSample", "GOVDOC", "MatchResult",
    "MetaGraph", "MetaforgeError", "Modality", "OneHot", "ParseError", "SentenceCoord", "Taxonomy",
    "ValidationError", "build_dst", "build_reference_network", "check_properties", "export",
    "extract_triples_heuristic", "fuse", "fuse_document", "generate", "import_graph_json",
    "ingest_image_modal", "ingest_text_modal", "left_parent", "levenshtein", "load_taxonomy", "locate",
    "reconcile", "right_parent", "segment", "train_decision_matrix",
]
