import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from imagineer.errors import EmptyCorpus, FormatError
from imagineer.text import (
    EmbeddingTable, PairVocab, Vocabulary, embed_avg, fit_pairs, fit_vocab, fitb_text_features,
    indicator_mi, pair_feature, symmetric_combine, text_dim, tokenize, train_embeddings,
    vp_text_features,
)


def test_tokenize_lowercases_and_splits():
    assert tokenize("Mike's  dog, RUNS!") == ["mike", "s", "dog", "runs"]
    assert tokenize("...") == []


def test_vocab_and_term_frequency():
    v = fit_vocab(["the dog", "The cat and the dog"])
    assert v.tokens == ("and", "cat", "dog", "the")
    assert v.term_frequency("the the dog zebra").tolist() == [0, 0, 1, 2]
    assert Vocabulary.loads(v.dumps()) == v
    with pytest.raises(EmptyCorpus):
        fit_vocab([])


def mi_from_definition(n11, n10, n01, n00):
    n = n11 + n10 + n01 + n00
    joint = {(1, 1): n11 / n, (1, 0): n10 / n, (0, 1): n01 / n, (0, 0): n00 / n}
    pa = {1: (n11 + n10) / n, 0: (n01 + n00) / n}
    pb = {1: (n11 + n01) / n, 0: (n10 + n00) / n}
    return sum(p * math.log(p / (pa[a] * pb[b])) for (a, b), p in joint.items() if p > 0)


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_indicator_mi_matches_definition(n11, n10, n01, n00):
    got = float(indicator_mi(n11, n10, n01, n00, smoothing=0.0)) if n11 + n10 + n01 + n00 else 0.0
    if n11 + n10 + n01 + n00:
        assert got == pytest.approx(mi_from_definition(n11, n10, n01, n00), abs=1e-12)
    smoothed = float(indicator_mi(n11, n10, n01, n00, smoothing=1.0))
    assert smoothed == pytest.approx(mi_from_definition(n11 + 1, n10 + 1, n01 + 1, n00 + 1), abs=1e-12)


def test_fit_pairs_threshold_and_order():
    pairs = [("red ball", "the ball"), ("red ball", "the ball"), ("red ball", "a ball"),
             ("blue sky", "the sky"), ("blue sky", "the sky")]
    v = fit_vocab([a + " " + b for a, b in pairs])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pv = fit_pairs(pairs, v, k=100, min_cooc=2)
    # only pairs co-occurring more than twice survive
    assert set(pv.pairs) == {("ball", "ball"), ("red", "ball")}
    assert list(pv.scores) == sorted(pv.scores, reverse=True)
    assert pv.pairs == tuple(sorted(pv.pairs, key=lambda p: (-pv.scores[pv.pairs.index(p)], p)))
    assert PairVocab.loads(pv.dumps()) == pv


def test_fit_pairs_warns_when_short():
    v = fit_vocab(["a b"])
    with pytest.warns(UserWarning, match="only 0 word pairs"):
        pv = fit_pairs([("a", "b")], v, k=5, min_cooc=10)
    assert len(pv) == 0


def test_pair_feature_is_one_hot_per_pair():
    pv = PairVocab((("dog", "cat"), ("sun", "moon")), (1.0, 0.5))
    f = pair_feature("the dog", "a moon", pv)
    assert f.tolist() == [0, 1, 0, 0, 0, 0, 1, 0]
    assert f.reshape(-1, 4).sum(1).tolist() == [1, 1]


def test_text_dimension_uses_actual_pair_count():
    v = Vocabulary(("a", "b", "c"))
    pv = PairVocab((("a", "b"),), (0.1,))
    emb = EmbeddingTable(5, {"a": np.ones(5)})
    assert text_dim(v, pv, emb) == 3 + 4 + 5
    assert len(fitb_text_features("a b", "c", v, pv, emb)) == 12
    assert len(vp_text_features("a b", "c", v, pv, emb)) == 24


def test_embed_avg_policies():
    vecs = {"dog": np.array([1.0, 0.0]), "cat": np.array([0.0, 3.0])}
    skip = EmbeddingTable(2, vecs)
    zero = EmbeddingTable(2, vecs, oov_policy="zero")
    assert embed_avg("dog cat zebra", skip).tolist() == [0.5, 1.5]
    assert embed_avg("dog cat zebra", zero).tolist() == pytest.approx([1 / 3, 1.0])
    assert embed_avg("zebra", skip).tolist() == [0.0, 0.0]


def test_embedding_file_round_trip_and_errors():
    emb = train_embeddings(["the dog runs", "the cat sleeps", "a dog sleeps"], dim=4)
    assert EmbeddingTable.loads(emb.dumps()) == emb
    with pytest.raises(FormatError):
        EmbeddingTable.loads("dog 1 2\ncat 1\n")
    with pytest.raises(FormatError):
        EmbeddingTable.loads("dog one two\n")


def test_train_embeddings_is_deterministic_with_fixed_signs():
    sents = ["the dog runs in the park", "the cat sleeps", "a dog and a cat play", "sun is hot"]
    a = train_embeddings(sents, dim=8)
    b = train_embeddings(list(sents), dim=8)
    assert a == b
    M = np.array([a.vectors[t] for t in sorted(a.vectors)])
    assert M.shape[1] == 8
    # every used direction has its largest-magnitude entry positive
    for col in M.T:
        if np.any(col):
            assert col[np.argmax(np.abs(col))] > 0


def test_vp_text_features_are_order_free():
    v = fit_vocab(["mike kicks the ball", "jenny holds the kite"])
    pv = PairVocab((("mike", "jenny"), ("ball", "kite")), (1.0, 1.0))
    emb = train_embeddings(["mike kicks the ball", "jenny holds the kite"], dim=3)
    a = vp_text_features("mike kicks the ball", "jenny holds the kite", v, pv, emb)
    b = vp_text_features("jenny holds the kite", "mike kicks the ball", v, pv, emb)
    assert np.array_equal(a, b)
    assert np.array_equal(symmetric_combine(np.array([1.0, 2.0]), np.array([3.0, -1.0])), [4.0, 1.0, 2.0, 3.0])
