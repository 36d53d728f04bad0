import json

import pytest

from imagineer.corpus import (
    build_fitb, build_vp, export_corpus, import_abstract_scenes, read_human_responses,
    read_questions, split_ids, write_human_responses, write_questions,
)
from imagineer.errors import EmptyCorpus, FormatError, MissingDescription


def test_split_is_seeded_and_disjoint():
    ids = [f"{i:03d}" for i in range(50)]
    a, b = split_ids(ids, 0.8, seed=3)
    assert len(a) == 40 and not a & b and a | b == set(ids)
    assert split_ids(list(reversed(ids)), 0.8, seed=3) == (a, b)


def test_fitb_questions(corpus):
    train, test = build_fitb(corpus, seed=1, train_fraction=0.75)
    by_id = {e.scene_id: e for e in corpus}
    assert not {q.scene_id for q in train} & {q.scene_id for q in test}
    for q in train[:50] + test[:20]:
        src = by_id[q.scene_id].desc_a
        gt = q.options[q.gt_index]
        assert gt in src.sentences and gt not in q.question_body
        assert len(q.question_body) == len(src.sentences) - 1
        assert len(set(q.options)) == 4
        assert [t.sentence for t in q.body_tuples] == sorted(t.sentence for t in q.body_tuples)
    again = build_fitb(corpus, seed=1, train_fraction=0.75)
    assert again == (train, test)
    with pytest.raises(EmptyCorpus):
        build_fitb(corpus[:1], seed=0)


def test_gt_positions_are_balanced(corpus):
    train, test = build_fitb(corpus, seed=2)
    counts = [sum(q.gt_index == j for q in train + test) for j in range(4)]
    assert min(counts) > 0.15 * sum(counts)


def test_vp_questions(corpus):
    train, test = build_vp(corpus, neg_ratio=2, seed=4, train_fraction=0.8)
    for split in (train, test):
        pos = [q for q in split if q.label == 1]
        neg = [q for q in split if q.label == -1]
        assert len(neg) == 2 * len(pos)
        assert all(q.scene_id1 == q.scene_id2 for q in pos)
        assert all(q.scene_id1 != q.scene_id2 for q in neg)
    train_scenes = {q.scene_id1 for q in train} | {q.scene_id2 for q in train}
    test_scenes = {q.scene_id1 for q in test} | {q.scene_id2 for q in test}
    assert not train_scenes & test_scenes


def test_corpus_directory_round_trip(corpus, tmp_path):
    export_corpus(corpus[:30], tmp_path)
    back = import_abstract_scenes(tmp_path)
    assert back == list(corpus[:30])


def test_corpus_import_errors(corpus, tmp_path):
    export_corpus(corpus[:3], tmp_path)
    desc = tmp_path / "descriptions.tsv"
    lines = desc.read_text().splitlines()
    desc.write_text("\n".join(l for l in lines if not l.startswith("00001\t1\t")) + "\n")
    with pytest.raises(MissingDescription):
        import_abstract_scenes(tmp_path)
    desc.write_text("00000\t0\tbad line\n")
    with pytest.raises(FormatError, match="line 1"):
        import_abstract_scenes(tmp_path)
    with pytest.raises(FileNotFoundError):
        import_abstract_scenes(tmp_path / "nowhere")


def test_question_files_round_trip(corpus, tmp_path):
    fitb, _ = build_fitb(corpus[:40], seed=0)
    vp, _ = build_vp(corpus[:40], seed=0)
    write_questions(tmp_path / "f.jsonl", fitb)
    write_questions(tmp_path / "v.jsonl", vp)
    assert read_questions(tmp_path / "f.jsonl", "fitb") == fitb
    assert read_questions(tmp_path / "v.jsonl", "vp") == vp
    (tmp_path / "bad.jsonl").write_text(json.dumps({"id": "x"}) + "\n")
    with pytest.raises(FormatError, match="line 1"):
        read_questions(tmp_path / "bad.jsonl", "fitb")


def test_human_responses_round_trip(tmp_path):
    resp = {"q1": [0, 1, 2, 3, 0, 1, 2, 3, 0, 1], "q2": [2] * 10}
    write_human_responses(tmp_path / "r.tsv", resp)
    assert read_human_responses(tmp_path / "r.tsv") == resp
    (tmp_path / "bad.tsv").write_text("q1\t1\t2\n")
    with pytest.raises(FormatError):
        read_human_responses(tmp_path / "bad.tsv")
