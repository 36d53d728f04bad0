import os

import numpy as np
import pytest

from imagineer import tasks
from imagineer.corpus import build_fitb, build_vp, export_corpus
from imagineer.errors import DimMismatch, DomainError
from imagineer.generate import IcmConfig
from imagineer.learners import LinearModel
from imagineer.priors import GROUPS, N_SLOTS
from imagineer.synth import generate_synthetic

FAST = IcmConfig(restarts=1, stride=100)


@pytest.fixture(scope="module")
def small():
    return generate_synthetic(60, seed=3)


@pytest.fixture(scope="module")
def fitb_setup(small):
    cfg = tasks.PipelineConfig(min_cooc=2, emb_dim=8, icm=FAST, seed=1, folds=2, c_grid=(1.0,))
    train, test = build_fitb(small, 1, 0.7)
    art = tasks.fit_fitb_artifacts(cfg, train[:30], small)
    return cfg, train[:30], test[:10], art


def test_masks_cover_the_right_slots():
    tdim = 7
    assert tasks.fitb_mask({"text"}, tdim) == tuple(range(tdim))
    m = tasks.fitb_mask({"presence"}, tdim)
    assert m == tuple(tdim + s for s in sorted(GROUPS["presence"]))
    full = tasks.fitb_mask(set(tasks.FEATURE_GROUPS), tdim)
    assert full == tuple(range(tdim + N_SLOTS))
    v = tasks.vp_mask({"spatial"}, tdim)
    sp = sorted(GROUPS["spatial"])
    assert v == tuple([2 * tdim + s for s in sp] + [2 * tdim + N_SLOTS + s for s in sp])
    assert tasks.vp_mask(set(tasks.FEATURE_GROUPS), tdim) == tuple(range(2 * tdim + 2 * N_SLOTS))


def test_config_rejects_bad_values():
    with pytest.raises(DomainError):
        tasks.PipelineConfig(feature_set=frozenset())
    with pytest.raises(DomainError):
        tasks.PipelineConfig(feature_set={"colour"})
    with pytest.raises(DomainError):
        tasks.PipelineConfig(scene_source="dream")
    with pytest.raises(DomainError):
        tasks.PipelineConfig(task="qa")


def test_fitb_feature_dims(fitb_setup):
    cfg, train, test, art = fitb_setup
    phi = tasks.fitb_features(test[0], art)
    assert phi.shape == (4, art.fitb_dim())
    assert np.all(np.isfinite(phi))


def test_text_only_artifacts_skip_priors(small):
    cfg = tasks.PipelineConfig(feature_set={"text"}, min_cooc=2, emb_dim=8)
    train, test = build_fitb(small, 1, 0.7)
    art = tasks.fit_fitb_artifacts(cfg, train, small)
    assert art.pt is None and art.nm is None
    phi = tasks.fitb_features(test[0], art)
    assert np.all(phi[:, art.text_dim:] == 0)


def test_answer_fitb_checks_dimension(fitb_setup):
    cfg, train, test, art = fitb_setup
    bad = LinearModel(np.zeros(3), 1.0, 3)
    with pytest.raises(DimMismatch):
        tasks.answer_fitb(test[0], art, bad)
    good = LinearModel(np.ones(art.fitb_dim()), 1.0, art.fitb_dim())
    choice, scores = tasks.answer_fitb(test[0], art, good)
    assert choice == int(np.argmax(scores)) and len(scores) == 4


def test_answer_fitb_ties_go_to_lowest_index(fitb_setup):
    cfg, train, test, art = fitb_setup
    zero = LinearModel(np.zeros(art.fitb_dim()), 1.0, art.fitb_dim())
    assert tasks.answer_fitb(test[0], art, zero)[0] == 0


def test_evaluate_and_write_report(tmp_path, fitb_setup):
    cfg, train, test, art = fitb_setup
    tr = tasks.featurize_fitb(train, art)
    te = tasks.featurize_fitb(test, art)
    report, model = tasks.evaluate_fitb(tr, te, art, cfg)
    assert 0.0 <= report.value <= 1.0 and report.baseline is not None
    assert report.n_test == len(test)
    assert sum(v for k, v in report.confusion.items() if k.startswith("confusion")) == len(test)
    paths = tasks.write_report(tmp_path, report, model)
    for p in paths.values():
        assert os.path.isfile(p)
    lines = open(paths["report"]).read().splitlines()
    assert lines[0] == tasks.REPORT_HEADER
    assert any(l.startswith("accuracy\t") for l in lines)
    rows = open(paths["scores"]).read().splitlines()
    assert len(rows) == len(test) + 1


def test_artifacts_round_trip(tmp_path, fitb_setup, small):
    cfg, train, test, art = fitb_setup
    tasks.save_artifacts(tmp_path, art)
    back = tasks.load_artifacts(tmp_path, {e.scene_id: e.scene for e in small})
    assert back.text_dim == art.text_dim
    assert back.icm == art.icm and back.seed == art.seed
    np.testing.assert_allclose(tasks.fitb_features(test[0], back), tasks.fitb_features(test[0], art))


def test_parallel_features_match_serial(fitb_setup):
    cfg, train, test, art = fitb_setup
    a = tasks.visual_blocks(test[:4], art, jobs=1)
    b = tasks.visual_blocks(test[:4], art, jobs=2)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_gold_scenes_are_used_verbatim(small):
    cfg = tasks.PipelineConfig(scene_source="gold", min_cooc=2, emb_dim=8)
    train, test = build_fitb(small, 1, 0.7)
    art = tasks.fit_fitb_artifacts(cfg, train, small)
    q = test[0]
    assert tasks.imagine(tasks.fitb_description(q, 0), art, 0, q.scene_id) == art.gold[q.scene_id]


def test_vp_dims_and_answer(small):
    cfg = tasks.PipelineConfig(task="vp", min_cooc=2, emb_dim=8, icm=FAST)
    train, test = build_vp(small, 2, 1, 0.7)
    art = tasks.fit_vp_artifacts(cfg, train[:20], small)
    phi = tasks.vp_features(test[0], art)
    assert phi.shape == (art.vp_dim(),)
    model = LinearModel(np.ones(art.vp_dim()), 1.0, art.vp_dim(), kind="binary")
    s, label = tasks.answer_vp(test[0], art, model)
    assert label == (1 if s > 0 else -1)


def test_vp_run_experiment_writes_pr_curve(tmp_path, small):
    export_corpus(small, tmp_path / "corpus")
    cfg = tasks.PipelineConfig(task="vp", scene_source="gold", min_cooc=2, emb_dim=8, folds=2,
                               c_grid=(0.1, 1.0))
    report = tasks.run_experiment(cfg, tmp_path / "corpus", tmp_path / "out")
    assert report.metric == "average_precision" and 0.0 <= report.value <= 1.0
    pr = (tmp_path / "out" / "pr.tsv").read_text().splitlines()
    assert pr[0] == "recall\tprecision" and len(pr) > 1
    assert (tmp_path / "out" / "model.txt").exists()
