import numpy as np
import pytest

import senseknn as sk
from conftest import pack_cwe1, two_sense_data


def test_store_roundtrip_matches_hand_packing():
    recs = [("b#1", [1.0, -2.5, 0.25]), ("a#0", [3.0, 4.0, 5.0])]
    store = sk.read_store(pack_cwe1(3, recs))
    assert store.dim == 3 and len(store) == 2
    np.testing.assert_array_equal(store.lookup("b#1"), np.float32([1.0, -2.5, 0.25]))
    assert store.lookup("zz#0") is None
    # The writer sorts keys.
    assert sk.write_store(store) == pack_cwe1(3, sorted(recs))
    assert sk.read_store(sk.write_store(store)) == store


def test_store_errors():
    with pytest.raises(sk.FormatError):
        sk.read_store(b"CWE2" + bytes(12))
    with pytest.raises(sk.FormatError):
        sk.read_store(pack_cwe1(2, [("a#0", [1, 2])]) + b"x")
    store = sk.VectorStore(2)
    with pytest.raises(sk.DimensionError):
        store.insert("a#0", np.float32([1, 2, 3]))
    assert issubclass(sk.FormatError, sk.SenseKnnError)


def test_cosine_distance():
    assert sk.cosine_distance(np.float32([1, 2, 3]), np.float32([1, 2, 3])) == 0.0
    assert sk.cosine_distance(np.float32([1, 0]), np.float32([0, 1])) == pytest.approx(1.0)
    with pytest.raises(sk.DomainError):
        sk.cosine_distance(np.float32([0, 0]), np.float32([1, 0]))


def test_build_classify_evaluate():
    text, recs = two_sense_data(3, "tr", 10, 12.0)
    corpus = sk.parse_jsonl(text.encode())
    store = sk.read_store(pack_cwe1(16, recs))
    index, missing = sk.build_index(corpus, store, sk.Keying.LEMMA)
    assert missing == [] and len(index) == 20
    assert index.words() == ["bank"]
    assert index.effective_k("bank", 50) == 10

    pred = index.classify("bank", store.lookup("tr0_3#1"), k=1)
    assert pred.sense == "bank%1:14:00::"
    assert pred.method == "knn"
    assert pred.neighbors[0] == ("tr0_3#1", "bank%1:14:00::", 0.0)

    result = sk.evaluate(index, corpus, store, 1)
    assert result.f1 == 1.0
    assert result.attempted + result.abstained + result.missing_vectors == result.total

    assert sk.load_index(index.save()) == index


def test_score_hand_values():
    r = sk.score([("a#0", "x%1"), ("b#0", None)], [("a#0", ["x%1"]), ("b#0", ["y%1"]), ("c#0", ["z%1"])])
    assert (r.precision, r.recall) == (1.0, pytest.approx(1 / 3))
    assert (r.attempted, r.abstained, r.missing_vectors, r.total) == (1, 1, 1, 3)


def test_sweep_default_grid():
    text, recs = two_sense_data(4, "tr", 3, 1.0)
    corpus = sk.parse_jsonl(text.encode())
    store = sk.read_store(pack_cwe1(16, recs))
    index, _ = sk.build_index(corpus, store)
    rows = sk.sweep_k(index, corpus, store)
    assert [k for k, _ in rows] == sk.default_k_grid()


def test_corpus_roundtrip_and_stats():
    text, _ = two_sense_data(5, "tr", 4, 1.0)
    corpus = sk.parse_jsonl(text.encode())
    assert sk.parse_jsonl(sk.write_jsonl(corpus)) == corpus
    stats = sk.compute_stats(corpus, sk.Keying.LEMMA)
    assert (stats.n_sentences, stats.n_instances, stats.n_distinct_words, stats.n_senses) == (8, 8, 1, 2)
    assert stats.avg_k_prime == 4.0


def test_tsne_smoke():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(size=(15, 20)) + 6, rng.normal(size=(15, 20)) - 6])
    labels = ["a%1"] * 15 + ["b%1"] * 15
    prov = [f"s{i}#0" for i in range(30)]
    y1, trace, perp = sk.tsne(x, labels, prov)
    y2, _, _ = sk.tsne(x, labels, prov)
    assert y1.shape == (30, 2)
    np.testing.assert_array_equal(y1, y2)
    assert trace[-1] <= trace[0]
    assert perp == pytest.approx(29 / 3)

    p, row_perp = sk.pairwise_affinities(x, 5.0)
    assert abs(p.sum() - 1.0) < 1e-9
    assert max(abs(r - 5.0) for r in row_perp) < 1e-4
