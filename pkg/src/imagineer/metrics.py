"""Accuracy, average precision and human-agreement curves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import LengthMismatch, MissingResponses, NoPositives


def accuracy(choices, gts) -> float:
    c = np.asarray(choices)
    g = np.asarray(gts)
    if c.shape != g.shape:
        raise LengthMismatch(f"{len(c)} choices vs {len(g)} ground truths")
    if len(c) == 0:
        return float("nan")
    return float(np.mean(c == g))


def _ranked(scores, labels):
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape:
        raise LengthMismatch(f"{len(s)} scores vs {len(y)} labels")
    pos = y > 0
    if not pos.any():
        raise NoPositives("average precision needs at least one positive label")
    order = np.argsort(-s, kind="stable")   # ties keep input order
    return pos[order]


def average_precision(scores, labels) -> float:
    """Mean over positives of the precision at each positive's rank."""
    hits = _ranked(scores, labels)
    ranks = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, len(ranks) + 1) / ranks))


def pr_curve(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Recall and precision after each position of the ranked list."""
    hits = _ranked(scores, labels)
    tp = np.cumsum(hits)
    n = np.arange(1, len(hits) + 1)
    return tp / hits.sum(), tp / n


@dataclass(frozen=True)
class AgreementPoint:
    k: int
    n: int
    fraction: float
    acc_gt: float
    acc_mode: float


def response_mode(responses: Sequence[int], n_options: int = 4) -> tuple[int, int]:
    """``(mode, count)``; ties go to the lowest option index."""
    counts = np.bincount(np.asarray(responses, dtype=int), minlength=n_options)
    m = int(np.argmax(counts))
    return m, int(counts[m])


def agreement_subsets(qids: Sequence[str], choices, gts, responses: Mapping[str, Sequence[int]],
                      thresholds=range(5, 11), n_options: int = 4) -> list[AgreementPoint]:
    """Accuracy on the questions where at least K of the responders chose the mode."""
    choices = np.asarray(choices)
    gts = np.asarray(gts)
    if not (len(qids) == len(choices) == len(gts)):
        raise LengthMismatch("qids, choices and gts differ in length")
    modes, agree = [], []
    for q in qids:
        r = responses.get(q)
        if r is None or len(r) != 10:
            raise MissingResponses(f"question {q}: need 10 human responses")
        m, c = response_mode(r, n_options)
        modes.append(m)
        agree.append(c)
    modes = np.array(modes, dtype=int)
    agree = np.array(agree)
    out = []
    for k in thresholds:
        sel = agree >= k
        n = int(sel.sum())
        out.append(AgreementPoint(
            int(k), n, n / len(qids) if len(qids) else float("nan"),
            accuracy(choices[sel], gts[sel]), accuracy(choices[sel], modes[sel])))
    return out
