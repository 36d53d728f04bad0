"""Corpus entries, FITB / VP question construction and corpus file formats.

On-disk corpus directory::

    scenes.txt        scene records (``scene <id>`` + 58 object lines)
    descriptions.tsv  <scene_id> TAB <writer 0|1> TAB <sentence_index> TAB <sentence>
    tuples.tsv        optional; <scene_id> TAB <writer> TAB <sentence_index> TAB
                      <primary> TAB <relation> TAB <secondary or empty>

Writer 0 descriptions form the source set, writer 1 the distractor set.

Question files are JSON lines.  FITB fields: ``id``, ``scene_id``,
``body`` (list of sentences), ``body_tuples``, ``options`` (4 sentences),
``option_tuples``, ``gt``.  VP fields: ``id``, ``scene_id1``,
``scene_id2``, ``desc1``, ``desc2`` (each ``{"sentences", "tuples"}``)
and ``label`` (+1 / -1).  Tuples are ``[primary, relation, secondary,
sentence]`` lists.  Human responses are a TSV of ``<question_id>`` and
ten tab-separated responses.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyCorpus, FormatError, MissingDescription
from .scene import Description, Scene, Tuple, decode_scenes, encode_scenes
from .util import atomic_write_text

logger = logging.getLogger(__name__)

FITB_TRAIN_FRACTION = 7198 / 8959
VP_TRAIN_FRACTION = 24000 / 30060


@dataclass(frozen=True)
class CorpusEntry:
    scene_id: str
    scene: Scene
    desc_a: Description
    desc_b: Description


@dataclass(frozen=True)
class FitbQuestion:
    qid: str
    scene_id: str
    question_body: tuple[str, ...]
    options: tuple[str, ...]
    gt_index: int
    body_tuples: Optional[tuple[Tuple, ...]] = None
    option_tuples: Optional[tuple[tuple[Tuple, ...], ...]] = None
    human_responses: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if len(self.options) != 4:
            raise ValueError("a FITB question has exactly 4 options")
        if not 0 <= self.gt_index < 4:
            raise ValueError("gt_index must be in [0, 4)")

    def body_description(self) -> Description:
        return Description(self.question_body, self.body_tuples or ())

    def option_description(self, j: int) -> Description:
        tuples = self.option_tuples[j] if self.option_tuples is not None else ()
        return Description((self.options[j],), tuples)


@dataclass(frozen=True)
class VpQuestion:
    qid: str
    desc1: Description
    desc2: Description
    label: int
    scene_id1: str = ""
    scene_id2: str = ""
    human_responses: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        if self.label not in (1, -1):
            raise ValueError("VP label must be +1 or -1")


# -- splits -----------------------------------------------------------------------

def split_ids(ids: Sequence[str], train_fraction: float, seed: int) -> tuple[set, set]:
    """Seeded permutation split of scene ids at ``train_fraction``."""
    ordered = sorted(ids)
    perm = np.random.default_rng(seed).permutation(len(ordered))
    n_train = int(round(len(ordered) * train_fraction))
    train = {ordered[i] for i in perm[:n_train]}
    return train, set(ordered) - train


# -- FITB -------------------------------------------------------------------------

def build_fitb(corpus: Sequence[CorpusEntry], seed: int,
               train_fraction: float = FITB_TRAIN_FRACTION,
               require_tuples: bool = True):
    """One fill-in-the-blank question per usable entry, split into train/test.

    An entry is usable when its source description has at least two
    sentences and (with ``require_tuples``) at least one tuple.
    """
    if len(corpus) < 2:
        raise EmptyCorpus("FITB distractors need at least two corpus entries")
    rng = np.random.default_rng(seed)
    pool = [(i, s) for i, e in enumerate(corpus) for s in e.desc_b.sentences]
    pool_tuples = [
        tuple(Tuple(t.primary, t.relation, t.secondary, 0)
              for t in corpus[i].desc_b.tuples if t.sentence == j)
        for i, e in enumerate(corpus) for j in range(len(e.desc_b.sentences))
    ]
    questions = []
    for i, e in enumerate(corpus):
        src = e.desc_a
        if len(src.sentences) < 2:
            logger.info("skipping %s: source description has one sentence", e.scene_id)
            continue
        if require_tuples and not src.tuples:
            logger.info("skipping %s: no tuples in source description", e.scene_id)
            continue
        drop = int(rng.integers(len(src.sentences)))
        gt_sentence = src.sentences[drop]
        keep = [j for j in range(len(src.sentences)) if j != drop]
        renum = {j: n for n, j in enumerate(keep)}
        body = tuple(src.sentences[j] for j in keep)
        body_tuples = tuple(Tuple(t.primary, t.relation, t.secondary, renum[t.sentence])
                            for t in src.tuples if t.sentence != drop)
        gt_tuples = tuple(Tuple(t.primary, t.relation, t.secondary, 0)
                          for t in src.tuples if t.sentence == drop)
        chosen, seen = [], {gt_sentence}
        for _ in range(100 * len(pool)):
            p = int(rng.integers(len(pool)))
            owner, sent = pool[p]
            if owner == i or sent in seen:
                continue
            chosen.append(p)
            seen.add(sent)
            if len(chosen) == 3:
                break
        if len(chosen) < 3:
            raise EmptyCorpus("not enough distinct distractor sentences")
        options = [(gt_sentence, gt_tuples)] + [(pool[p][1], pool_tuples[p]) for p in chosen]
        order = rng.permutation(4)
        questions.append(FitbQuestion(
            qid=f"fitb-{e.scene_id}", scene_id=e.scene_id, question_body=body,
            options=tuple(options[o][0] for o in order),
            gt_index=int(np.flatnonzero(order == 0)[0]),
            body_tuples=body_tuples,
            option_tuples=tuple(options[o][1] for o in order),
        ))
    train_ids, _ = split_ids([q.scene_id for q in questions], train_fraction, seed)
    train = [q for q in questions if q.scene_id in train_ids]
    test = [q for q in questions if q.scene_id not in train_ids]
    return train, test


# -- VP ---------------------------------------------------------------------------

def build_vp(corpus: Sequence[CorpusEntry], neg_ratio: int = 2, seed: int = 0,
             train_fraction: float = VP_TRAIN_FRACTION):
    """One positive per scene plus ``neg_ratio`` negatives, split by scene.

    Negatives pair scenes within the same split whenever that split has
    enough scenes, so train and test negative pairs never coincide.
    """
    if len(corpus) < 3:
        raise EmptyCorpus("VP construction needs at least three corpus entries")
    rng = np.random.default_rng(seed)
    by_id = {e.scene_id: e for e in corpus}
    train_ids, test_ids = split_ids(list(by_id), train_fraction, seed)
    out = {"train": [], "test": []}
    used: dict[str, set] = {"train": set(), "test": set()}
    all_ids = sorted(by_id)
    for split, ids in (("train", sorted(train_ids)), ("test", sorted(test_ids))):
        other = "test" if split == "train" else "train"
        partners_pool = ids if len(ids) > neg_ratio else all_ids
        for sid in ids:
            e = by_id[sid]
            out[split].append(VpQuestion(f"vp-{sid}-pos", e.desc_a, e.desc_b, 1, sid, sid))
            cands = [p for p in partners_pool if p != sid
                     and frozenset((sid, p)) not in used[other]]
            if len(cands) < neg_ratio:
                raise EmptyCorpus(f"not enough partner scenes for negatives of {sid}")
            picks = rng.choice(len(cands), size=neg_ratio, replace=False) if neg_ratio else []
            for n, c in enumerate(picks):
                pid = cands[int(c)]
                used[split].add(frozenset((sid, pid)))
                q = VpQuestion(f"vp-{sid}-neg{n}", e.desc_a, by_id[pid].desc_b, -1, sid, pid)
                out[split].append(q)
    return out["train"], out["test"]


# -- corpus files -----------------------------------------------------------------

def _tsv_fields(line: str, n: int, path, lineno):
    parts = line.split("\t")
    if len(parts) != n:
        raise FormatError(f"expected {n} tab-separated fields, got {len(parts)}", lineno, path)
    return parts


def export_corpus(corpus: Sequence[CorpusEntry], directory) -> None:
    os.makedirs(directory, exist_ok=True)
    scenes = [(e.scene_id, e.scene) for e in corpus]
    atomic_write_text(os.path.join(directory, "scenes.txt"), encode_scenes(scenes).decode("ascii"))
    desc_lines, tuple_lines = [], []
    for e in corpus:
        for writer, d in ((0, e.desc_a), (1, e.desc_b)):
            for j, s in enumerate(d.sentences):
                if "\t" in s or "\n" in s:
                    raise FormatError(f"sentence of {e.scene_id} contains a tab or newline")
                desc_lines.append(f"{e.scene_id}\t{writer}\t{j}\t{s}\n")
            for t in d.tuples:
                tuple_lines.append(
                    f"{e.scene_id}\t{writer}\t{t.sentence}\t{t.primary}\t{t.relation}\t{t.secondary or ''}\n"
                )
    atomic_write_text(os.path.join(directory, "descriptions.tsv"), "".join(desc_lines))
    atomic_write_text(os.path.join(directory, "tuples.tsv"), "".join(tuple_lines))


def import_abstract_scenes(directory) -> list[CorpusEntry]:
    """Load a corpus directory (see module docstring)."""
    scene_path = os.path.join(directory, "scenes.txt")
    desc_path = os.path.join(directory, "descriptions.tsv")
    for p in (scene_path, desc_path):
        if not os.path.exists(p):
            raise FileNotFoundError(p)
    with open(scene_path, "rb") as fh:
        scenes = decode_scenes(fh.read(), path=scene_path)
    sentences: dict = {}
    with open(desc_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            sid, writer, idx, text = _tsv_fields(line, 4, desc_path, lineno)
            if writer not in ("0", "1") or not idx.isdigit():
                raise FormatError(f"bad writer/sentence index in {line!r}", lineno, desc_path)
            if sid not in scenes:
                raise FormatError(f"description for unknown scene {sid}", lineno, desc_path)
            sentences.setdefault((sid, int(writer)), {})[int(idx)] = text
    tuples: dict = {}
    tuple_path = os.path.join(directory, "tuples.tsv")
    if os.path.exists(tuple_path):
        with open(tuple_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                sid, writer, idx, a, r, b = _tsv_fields(line, 6, tuple_path, lineno)
                if not idx.isdigit() or writer not in ("0", "1"):
                    raise FormatError(f"bad tuple line {line!r}", lineno, tuple_path)
                tuples.setdefault((sid, int(writer)), []).append(Tuple(a, r, b or None, int(idx)))
    out = []
    for sid, scene in scenes.items():
        descs = []
        for writer in (0, 1):
            sent = sentences.get((sid, writer))
            if not sent:
                raise MissingDescription(f"scene {sid} lacks a description from writer {writer}")
            if sorted(sent) != list(range(len(sent))):
                raise FormatError(f"scene {sid} writer {writer}: sentence indices not contiguous",
                                  path=desc_path)
            descs.append(Description(tuple(sent[j] for j in range(len(sent))),
                                     tuple(tuples.get((sid, writer), ()))))
        out.append(CorpusEntry(sid, scene, descs[0], descs[1]))
    return out


# -- question files ---------------------------------------------------------------

def _tuples_json(tuples):
    return [[t.primary, t.relation, t.secondary, t.sentence] for t in tuples]


def _tuples_from_json(items):
    return tuple(Tuple(a, r, b, int(s)) for a, r, b, s in items)


def _desc_json(d: Description):
    return {"sentences": list(d.sentences), "tuples": _tuples_json(d.tuples)}


def _desc_from_json(d):
    return Description(tuple(d["sentences"]), _tuples_from_json(d.get("tuples", [])))


def fitb_to_json(q: FitbQuestion) -> dict:
    return {
        "id": q.qid, "scene_id": q.scene_id, "body": list(q.question_body),
        "body_tuples": None if q.body_tuples is None else _tuples_json(q.body_tuples),
        "options": list(q.options),
        "option_tuples": None if q.option_tuples is None
        else [_tuples_json(t) for t in q.option_tuples],
        "gt": q.gt_index,
    }


def fitb_from_json(d: dict) -> FitbQuestion:
    return FitbQuestion(
        qid=d["id"], scene_id=d["scene_id"], question_body=tuple(d["body"]),
        options=tuple(d["options"]), gt_index=int(d["gt"]),
        body_tuples=None if d.get("body_tuples") is None else _tuples_from_json(d["body_tuples"]),
        option_tuples=None if d.get("option_tuples") is None
        else tuple(_tuples_from_json(t) for t in d["option_tuples"]),
    )


def vp_to_json(q: VpQuestion) -> dict:
    return {"id": q.qid, "scene_id1": q.scene_id1, "scene_id2": q.scene_id2,
            "desc1": _desc_json(q.desc1), "desc2": _desc_json(q.desc2), "label": q.label}


def vp_from_json(d: dict) -> VpQuestion:
    return VpQuestion(d["id"], _desc_from_json(d["desc1"]), _desc_from_json(d["desc2"]),
                      int(d["label"]), d.get("scene_id1", ""), d.get("scene_id2", ""))


def write_questions(path, questions) -> None:
    lines = []
    for q in questions:
        d = fitb_to_json(q) if isinstance(q, FitbQuestion) else vp_to_json(q)
        lines.append(json.dumps(d, sort_keys=True) + "\n")
    atomic_write_text(path, "".join(lines))


def read_questions(path, kind: str):
    parse = fitb_from_json if kind == "fitb" else vp_from_json
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(parse(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad {kind} question: {exc}", lineno, path) from None
    return out


def read_human_responses(path) -> dict:
    """``{question_id: [r1..r10]}`` from a TSV file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 11:
                raise FormatError(f"expected id and 10 responses, got {len(parts)} fields",
                                  lineno, path)
            try:
                out[parts[0]] = [int(r) for r in parts[1:]]
            except ValueError:
                raise FormatError(f"non-integer response in {line!r}", lineno, path) from None
    return out


def write_human_responses(path, responses: dict) -> None:
    lines = [qid + "\t" + "\t".join(str(int(r)) for r in rs) + "\n"
             for qid, rs in responses.items()]
    atomic_write_text(path, "".join(lines))
