"""Text-only features: term frequency, word-pair indicators, embedding means.

The tokenizer lowercases and splits on anything that is not a letter or
digit.  Word-pair mutual information is computed on the 2x2 table of
``(u in d1, v in d2)`` indicators with add-one smoothing on each cell.
"""
from __future__ import annotations

import logging
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, FormatError
from .scene import Description

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if t]


def _as_text(d) -> str:
    if isinstance(d, Description):
        return d.text()
    if isinstance(d, str):
        return d
    return " ".join(d)


@dataclass(frozen=True, eq=False)
class Vocabulary:
    tokens: tuple[str, ...]
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def term_frequency(self, text: str) -> np.ndarray:
        tf = np.zeros(len(self.tokens))
        for tok in tokenize(text):
            i = self.index.get(tok)
            if i is not None:
                tf[i] += 1
        return tf

    def dumps(self) -> str:
        return f"vocab v{FORMAT_VERSION}\n" + "".join(t + "\n" for t in self.tokens)

    @classmethod
    def loads(cls, text: str) -> "Vocabulary":
        lines = text.split("\n")
        if lines[0] != f"vocab v{FORMAT_VERSION}":
            raise FormatError(f"bad vocabulary header {lines[0]!r}", 1)
        return cls(tuple(t for t in lines[1:] if t))


def fit_vocab(descriptions: Iterable) -> Vocabulary:
    toks = set()
    n = 0
    for d in descriptions:
        n += 1
        toks.update(tokenize(_as_text(d)))
    if n == 0:
        raise EmptyCorpus("cannot fit a vocabulary on no descriptions")
    return Vocabulary(tuple(sorted(toks)))


# -- word pairs ---------------------------------------------------------------

@dataclass(frozen=True)
class PairVocab:
    pairs: tuple[tuple[str, str], ...]
    scores: tuple[float, ...] = ()

    def __len__(self):
        return len(self.pairs)

    def dumps(self) -> str:
        body = "".join(f"{u}\t{v}\t{s!r}\n" for (u, v), s in zip(self.pairs, self.scores))
        return f"pairs v{FORMAT_VERSION}\n" + body

    @classmethod
    def loads(cls, text: str) -> "PairVocab":
        lines = [l for l in text.split("\n") if l]
        if not lines or lines[0] != f"pairs v{FORMAT_VERSION}":
            raise FormatError("bad pair-vocabulary header", 1)
        pairs, scores = [], []
        for i, line in enumerate(lines[1:], start=2):
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"malformed pair line {line!r}", i)
            pairs.append((parts[0], parts[1]))
            scores.append(float(parts[2]))
        return cls(tuple(pairs), tuple(scores))


def indicator_mi(n11, n10, n01, n00, smoothing: float = 1.0):
    """Mutual information (nats) of two binary indicators from a 2x2 count table.

    Works elementwise on arrays.  ``n10`` counts (first=1, second=0).
    """
    c = [np.asarray(n, dtype=float) + smoothing for n in (n11, n10, n01, n00)]
    total = c[0] + c[1] + c[2] + c[3]
    p_a = (c[0] + c[1]) / total
    p_b = (c[0] + c[2]) / total
    mi = np.zeros(np.broadcast(*c).shape)
    for cell, pa, pb in ((c[0], p_a, p_b), (c[1], p_a, 1 - p_b),
                         (c[2], 1 - p_a, p_b), (c[3], 1 - p_a, 1 - p_b)):
        p = cell / total
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(p > 0, p * np.log(p / (pa * pb)), 0.0)
        mi = mi + term
    return mi


def _presence_matrix(docs: Sequence, vocab: Vocabulary) -> np.ndarray:
    m = np.zeros((len(docs), len(vocab)), dtype=np.float64)
    for r, d in enumerate(docs):
        for tok in set(tokenize(_as_text(d))):
            i = vocab.index.get(tok)
            if i is not None:
                m[r, i] = 1.0
    return m


def fit_pairs(pairs: Sequence, vocab: Vocabulary, k: int = 100,
              min_cooc: int = 100, smoothing: float = 1.0) -> PairVocab:
    """Top-``k`` word pairs ``(u, v)`` by MI of ``(u in d1, v in d2)``.

    Only pairs whose joint count exceeds ``min_cooc`` qualify.  Ties in MI
    are broken lexicographically on ``(u, v)``.
    """
    if not len(pairs):
        return PairVocab((), ())
    a = _presence_matrix([p[0] for p in pairs], vocab)
    b = _presence_matrix([p[1] for p in pairs], vocab)
    n = len(pairs)
    n11 = a.T @ b
    ca = a.sum(0)[:, None]
    cb = b.sum(0)[None, :]
    n10 = ca - n11
    n01 = cb - n11
    n00 = n - n11 - n10 - n01
    mi = indicator_mi(n11, n10, n01, n00, smoothing)
    ui, vi = np.nonzero(n11 > min_cooc)
    # vocab tokens are sorted, so index order is lexicographic order
    order = np.lexsort((vi, ui, -mi[ui, vi]))[:k]
    chosen = [(vocab.tokens[ui[o]], vocab.tokens[vi[o]]) for o in order]
    scores = [float(mi[ui[o], vi[o]]) for o in order]
    if len(chosen) < k:
        warnings.warn(f"only {len(chosen)} word pairs co-occur more than {min_cooc} times")
    return PairVocab(tuple(chosen), tuple(scores))


def pair_feature(d1, d2, pv: PairVocab) -> np.ndarray:
    """One-hot over the four presence cases per pair, 4 entries per pair."""
    s1 = set(tokenize(_as_text(d1)))
    s2 = set(tokenize(_as_text(d2)))
    out = np.zeros(4 * len(pv.pairs))
    for i, (u, v) in enumerate(pv.pairs):
        in1, in2 = u in s1, v in s2
        case = (0 if in2 else 1) if in1 else (2 if in2 else 3)
        out[4 * i + case] = 1.0
    return out


# -- embeddings ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    dim: int
    vectors: dict
    oov_policy: str = "skip"

    def __post_init__(self):
        for w, v in self.vectors.items():
            if len(v) != self.dim:
                raise ValueError(f"vector for {w!r} has length {len(v)}, expected {self.dim}")
        if self.oov_policy not in ("skip", "zero"):
            raise ValueError(f"unknown oov policy {self.oov_policy!r}")

    def dumps(self) -> str:
        lines = [f"{w} " + " ".join(repr(float(x)) for x in v) for w, v in sorted(self.vectors.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, oov_policy: str = "skip") -> "EmbeddingTable":
        vectors = {}
        dim = None
        for i, line in enumerate(text.split("\n"), start=1):
            if not line.strip():
                continue
            parts = line.split()
            try:
                vec = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise FormatError(f"non-numeric embedding entry in {line[:40]!r}", i) from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise FormatError(f"expected {dim} values, got {len(vec)}", i)
            vectors[parts[0]] = vec
        if dim is None:
            raise FormatError("empty embedding file")
        return cls(dim, vectors, oov_policy)

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddingTable)
            and self.dim == other.dim
            and self.vectors.keys() == other.vectors.keys()
            and all(np.array_equal(v, other.vectors[w]) for w, v in self.vectors.items())
        )


def load_embeddings(path, oov_policy: str = "skip") -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        return EmbeddingTable.loads(fh.read(), oov_policy)


def embed_avg(d, emb: EmbeddingTable) -> np.ndarray:
    """Mean word vector over every token of ``d`` (zero if none are known)."""
    total = np.zeros(emb.dim)
    n = 0
    for tok in tokenize(_as_text(d)):
        v = emb.vectors.get(tok)
        if v is None:
            if emb.oov_policy == "zero":
                n += 1
            continue
        total += v
        n += 1
    return total / n if n else total


def train_embeddings(sentences: Iterable[str], dim: int = 200, window: int = 0) -> EmbeddingTable:
    """Deterministic co-occurrence PCA embedding for when no vectors are given.

    Builds a within-sentence word co-occurrence matrix (or a +-``window``
    token window when ``window > 0``), applies positive PMI, and keeps the
    top singular directions scaled by sqrt of the singular values.  Signs
    are fixed so the largest-magnitude entry of every direction is
    positive.  Vectors are zero-padded when the vocabulary is smaller than
    ``dim``.
    """
    docs = [tokenize(s) for s in sentences]
    vocab = sorted({t for d in docs for t in d})
    if not vocab:
        return EmbeddingTable(dim, {})
    idx = {t: i for i, t in enumerate(vocab)}
    counts = np.zeros((len(vocab), len(vocab)))
    for d in docs:
        ids = [idx[t] for t in d]
        for i, a in enumerate(ids):
            lo, hi = (0, len(ids)) if window <= 0 else (max(0, i - window), min(len(ids), i + window + 1))
            for j in range(lo, hi):
                if j != i:
                    counts[a, ids[j]] += 1
    total = counts.sum()
    if total == 0:
        return EmbeddingTable(dim, {t: np.zeros(dim) for t in vocab})
    row = counts.sum(1, keepdims=True)
    col = counts.sum(0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(counts * total / (row * col))
    ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)
    u, s, _ = np.linalg.svd(ppmi)
    r = min(dim, len(vocab))
    vecs = u[:, :r] * np.sqrt(s[:r])
    flip = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(r)])
    flip[flip == 0] = 1.0
    vecs = vecs * flip
    padded = np.zeros((len(vocab), dim))
    padded[:, :r] = vecs
    return EmbeddingTable(dim, {t: padded[i] for i, t in enumerate(vocab)})


# -- task feature assembly ----------------------------------------------------

def text_dim(vocab: Vocabulary, pv: PairVocab, emb: EmbeddingTable) -> int:
    return len(vocab) + 4 * len(pv.pairs) + emb.dim


def fitb_text_features(q, o, vocab: Vocabulary, pv: PairVocab, emb: EmbeddingTable) -> np.ndarray:
    """``[tf(q + o) | pairs(q, o) | mean embedding(q + o)]``."""
    joined = (_as_text(q) + " " + _as_text(o)).strip()
    return np.concatenate([
        vocab.term_frequency(joined),
        pair_feature(q, o, pv),
        embed_avg(joined, emb),
    ])


def vp_text_features(d1, d2, vocab: Vocabulary, pv: PairVocab, emb: EmbeddingTable) -> np.ndarray:
    """Order-free pair features ``[f(d1,d2) + f(d2,d1) | |f(d1,d2) - f(d2,d1)|]``."""
    f1 = fitb_text_features(d1, d2, vocab, pv, emb)
    f2 = fitb_text_features(d2, d1, vocab, pv, emb)
    return symmetric_combine(f1, f2)


def symmetric_combine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.concatenate([a + b, np.abs(a - b)])
