import numpy as np
import pytest

from helpers import brute_micro_f1
from metaforge.dst import build_dst, check_properties
from metaforge.errors import ValidationError
from metaforge.harness import (
    TABLE1_COUNTS,
    NoiseModel,
    apply_noise,
    class_counts,
    confusion_from_spec,
    corrupt,
    corrupt_exact,
    evaluate,
    generate_corpus,
    run_fusion_experiment,
)
from metaforge.harness.evaluate import confusion_matrix
from metaforge.model import Modality
from metaforge.taxonomy import GOVDOC
from metaforge.textmetrics import levenshtein_within


def test_corpus_is_deterministic_and_seed_sensitive():
    a = generate_corpus(5, seed=1)
    assert a == generate_corpus(5, seed=1)
    assert a != generate_corpus(5, seed=2)
    # a document does not depend on how many others are generated
    assert generate_corpus(3, seed=1)[2] == a[2]


def test_corpus_documents_are_valid_outlines():
    for doc in generate_corpus(30, seed=4):
        assert [e.label for e in doc.text_elements] == [e.label for e in doc.image_elements]
        assert all(e.modality is Modality.IMAGE and e.box is not None for e in doc.image_elements)
        t = build_dst(doc.text_elements, doc_id=doc.doc_id)
        assert not t.warnings and check_properties(t) == []
        texts = [e.text for e in doc.text_elements]
        for i in range(len(texts)):
            for j in range(i + 1, len(texts)):
                assert levenshtein_within(texts[i], texts[j], 6) > 6


def test_corpus_class_ratios_follow_table1():
    counts = class_counts(generate_corpus(100, seed=0))
    titles = counts["Title"]
    assert titles == 100
    for cls in ("Section1", "Section2", "Paragraph", "IssuingAuthority"):
        expected = TABLE1_COUNTS[cls] / TABLE1_COUNTS["Title"]
        assert counts.get(cls, 0) / titles == pytest.approx(expected, rel=0.2)


def test_minimal_profile():
    (doc,) = generate_corpus(1, "minimal", seed=0)
    assert sorted(e.label for e in doc.text_elements) == ["Paragraph", "Section1", "Title"]


def test_corpus_rejects_empty():
    with pytest.raises(ValidationError):
        generate_corpus(0)


def test_corrupt_helpers():
    rng = np.random.default_rng(0)
    assert corrupt("abc", 0.0, rng) == "abc"
    s = "the quick brown fox"
    for n in range(5):
        out = corrupt_exact(s, n, rng)
        assert len(out) == len(s) and sum(a != b for a, b in zip(s, out)) == n
    assert corrupt("aaaa", 1.0, rng, alphabet="ab") == "bbbb"


def test_noise_model_validation():
    with pytest.raises(ValidationError):
        NoiseModel(np.eye(3) * 0.5, np.eye(3))
    with pytest.raises(ValidationError):
        NoiseModel(np.eye(3), np.eye(4))
    with pytest.raises(ValidationError):
        confusion_from_spec({"Section1": "Nope"})
    t = confusion_from_spec({"Section1": {"Section1": 0.25, "Section2": 0.75}})
    assert t[4, 4] == 0.25 and t[4, 5] == 0.75 and t[0, 0] == 1.0


def test_identity_noise_changes_nothing():
    corpus = generate_corpus(5, seed=3)
    tp, ip = apply_noise(corpus, NoiseModel.identity())
    for doc, t, i in zip(corpus, tp, ip):
        assert [e.label for e in t] == [e.label for e in doc.text_elements]
        assert [e.text for e in i] == [e.text for e in doc.image_elements]


def test_deterministic_confusion():
    corpus = generate_corpus(20, seed=3)
    model = NoiseModel.from_dict({"text": {"Section2": "Section3"}, "image": {"Title": "Paragraph"}})
    tp, ip = apply_noise(corpus, model)
    for doc, t, i in zip(corpus, tp, ip):
        for g, a, b in zip(doc.text_elements, t, i):
            assert a.label == ("Section3" if g.label == "Section2" else g.label)
            assert b.label == ("Paragraph" if g.label == "Title" else g.label)


def test_evaluate_hand_example():
    r = evaluate(["A", "B", "A"], ["A", "A", "B"])
    assert (r.tp, r.fp, r.fn) == (1, 2, 2)
    r = evaluate(["A", "A", "B", "C"], ["A", "B", "B", "C"], labels=["A", "B", "C"])
    assert r.per_class["A"].precision == 0.5 and r.per_class["B"].recall == 0.5
    assert r.micro_f1 == pytest.approx(0.75, abs=1e-12)


def test_evaluate_against_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        pred = list(rng.choice(list("abcd"), n))
        gold = list(rng.choice(list("abcd"), n))
        assert evaluate(pred, gold).micro_f1 == pytest.approx(brute_micro_f1(pred, gold), abs=1e-12)


def test_evaluate_errors_and_confusion():
    with pytest.raises(ValidationError):
        evaluate(["a"], [])
    with pytest.raises(ValidationError):
        evaluate(["z"], ["a"], labels=["a"])
    m = confusion_matrix(["a", "b", "b"], ["a", "a", "b"], ["a", "b"])
    assert m.tolist() == [[1, 1], [0, 1]]


def test_experiment_small():
    cfg = {"n_docs": 40, "seed": 2, "noise": {"text": {"Section2": "Section3"}, "image": {"Section1": "Section2"}}}
    res = run_fusion_experiment(cfg)
    micro = res.micro()
    assert micro["fused"] == 1.0 and micro["text"] < 1.0 and micro["image"] < 1.0
    lines = res.table_lines()
    assert lines[0] == "element\ttext\timage\tfused" and lines[-2].startswith("Average (micro)")
    assert len(lines) == 1 + GOVDOC.k + 2
    with pytest.raises(ValidationError):
        run_fusion_experiment({"n_docs": 1})
    with pytest.raises(ValidationError):
        run_fusion_experiment({"bogus": 1})
