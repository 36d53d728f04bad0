"""FITB and VP pipelines: artifact fitting, imagination, features, training, evaluation.

Per-question feature vectors always carry every block; a model's
``feature_mask`` decides which slots it reads.  FITB vectors are
``[text | 22 visual slots]``; VP vectors are
``[symmetric text | v1 + v2 | |v1 - v2|]`` where ``v1`` scores the scene
imagined from the first description against the second description and
``v2`` the other way round.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from . import learners
from .corpus import (
    FITB_TRAIN_FRACTION, VP_TRAIN_FRACTION, CorpusEntry, FitbQuestion, VpQuestion, build_fitb,
    build_vp, import_abstract_scenes, read_human_responses, read_questions,
)
from .errors import DimMismatch, DomainError
from .generate import IcmConfig, generate_naive, generate_scene
from .learners import BinaryData, LinearModel, RankProblem
from .metrics import accuracy, agreement_subsets, average_precision, pr_curve, response_mode
from .priors import GROUPS, N_SLOTS, NounMap, PriorTables, fit_noun_map, fit_priors, visual_features
from .scene import Description, Scene, join_descriptions
from .text import (
    EmbeddingTable, PairVocab, Vocabulary, fit_pairs, fit_vocab, fitb_text_features,
    load_embeddings, symmetric_combine, text_dim, train_embeddings, vp_text_features,
)
from .util import atomic_write_text, derive_seed

logger = logging.getLogger(__name__)

FEATURE_GROUPS = ("text", "presence", "attribute", "spatial")
SCENE_SOURCES = ("icm", "naive", "gold")
REPORT_HEADER = "imagineer-report v1"


@dataclass(frozen=True)
class PipelineConfig:
    task: str = "fitb"
    feature_set: frozenset = frozenset(FEATURE_GROUPS)
    scene_source: str = "icm"
    seed: int = 0
    c_grid: tuple = learners.DEFAULT_C_GRID
    folds: int = 5
    n_pairs: int = 100
    min_cooc: int = 100
    pair_smoothing: float = 1.0
    emb_dim: int = 200
    embeddings: Optional[str] = None
    prior_smoothing: float = 1.0
    k_unary: int = 27
    k_pair: int = 24
    k_relation: int = 3
    icm: IcmConfig = IcmConfig()
    train_on_mode: bool = False
    fitb_train_fraction: float = FITB_TRAIN_FRACTION
    vp_train_fraction: float = VP_TRAIN_FRACTION
    vp_neg_ratio: int = 2
    jobs: int = 1

    def __post_init__(self):
        fs = frozenset(self.feature_set)
        if not fs:
            raise DomainError("feature_set must not be empty")
        bad = fs - set(FEATURE_GROUPS)
        if bad:
            raise DomainError(f"unknown feature groups: {sorted(bad)}")
        object.__setattr__(self, "feature_set", fs)
        if self.scene_source not in SCENE_SOURCES:
            raise DomainError(f"scene_source must be one of {SCENE_SOURCES}")
        if self.task not in ("fitb", "vp"):
            raise DomainError("task must be fitb or vp")

    @property
    def needs_scenes(self) -> bool:
        return bool(self.feature_set - {"text"})


@dataclass
class Artifacts:
    vocab: Vocabulary
    pairs: PairVocab
    emb: EmbeddingTable
    pt: Optional[PriorTables]
    nm: Optional[NounMap]
    icm: IcmConfig = IcmConfig()
    scene_source: str = "icm"
    seed: int = 0
    gold: Mapping[str, Scene] = field(default_factory=dict)

    @property
    def text_dim(self) -> int:
        return text_dim(self.vocab, self.pairs, self.emb)

    def fitb_dim(self) -> int:
        return self.text_dim + N_SLOTS

    def vp_dim(self) -> int:
        return 2 * self.text_dim + 2 * N_SLOTS


# -- masks ---------------------------------------------------------------------------

def fitb_mask(feature_set, tdim: int) -> tuple:
    idx = list(range(tdim)) if "text" in feature_set else []
    slots = sorted(s for g in feature_set if g != "text" for s in GROUPS[g])
    return tuple(idx + [tdim + s for s in slots])


def vp_mask(feature_set, tdim: int) -> tuple:
    idx = list(range(2 * tdim)) if "text" in feature_set else []
    slots = sorted(s for g in feature_set if g != "text" for s in GROUPS[g])
    base = 2 * tdim
    return tuple(idx + [base + s for s in slots] + [base + N_SLOTS + s for s in slots])


# -- fitting -------------------------------------------------------------------------

def fitb_description(q: FitbQuestion, j: int) -> Description:
    """The question body followed by option ``j``."""
    return join_descriptions([q.body_description(), q.option_description(j)])


def _embeddings(cfg: PipelineConfig, sentences) -> EmbeddingTable:
    if cfg.embeddings:
        return load_embeddings(cfg.embeddings)
    return train_embeddings(sentences, dim=cfg.emb_dim)


def _fit_visual(cfg: PipelineConfig, entries: Sequence[CorpusEntry]):
    pairs = [(d, e.scene) for e in entries for d in (e.desc_a, e.desc_b)]
    nm = fit_noun_map(pairs)
    pt = fit_priors(pairs, nm, smoothing=cfg.prior_smoothing, k_unary=cfg.k_unary,
                    k_pair=cfg.k_pair, k_relation=cfg.k_relation, seed=cfg.seed)
    return pt, nm


def fit_fitb_artifacts(cfg: PipelineConfig, train: Sequence[FitbQuestion],
                       corpus: Sequence[CorpusEntry]) -> Artifacts:
    """Text models on training questions; priors on the training questions' scenes."""
    texts = [" ".join(q.question_body + q.options) for q in train]
    vocab = fit_vocab(texts)
    pv = fit_pairs([(" ".join(q.question_body), q.options[q.gt_index]) for q in train], vocab,
                   k=cfg.n_pairs, min_cooc=cfg.min_cooc, smoothing=cfg.pair_smoothing)
    sentences = [s for q in train for s in q.question_body + q.options]
    emb = _embeddings(cfg, sentences)
    by_id = {e.scene_id: e for e in corpus}
    train_ids = sorted({q.scene_id for q in train})
    pt = nm = None
    if cfg.needs_scenes:
        pt, nm = _fit_visual(cfg, [by_id[s] for s in train_ids if s in by_id])
    return Artifacts(vocab, pv, emb, pt, nm, replace(cfg.icm, seed=cfg.seed), cfg.scene_source,
                     cfg.seed, {e.scene_id: e.scene for e in corpus})


def fit_vp_artifacts(cfg: PipelineConfig, train: Sequence[VpQuestion],
                     corpus: Sequence[CorpusEntry]) -> Artifacts:
    texts = [q.desc1.text() + " " + q.desc2.text() for q in train]
    vocab = fit_vocab(texts)
    pv = fit_pairs([(q.desc1.text(), q.desc2.text()) for q in train if q.label > 0], vocab,
                   k=cfg.n_pairs, min_cooc=cfg.min_cooc, smoothing=cfg.pair_smoothing)
    sentences = [s for q in train for s in q.desc1.sentences + q.desc2.sentences]
    emb = _embeddings(cfg, sentences)
    by_id = {e.scene_id: e for e in corpus}
    train_ids = sorted({s for q in train for s in (q.scene_id1, q.scene_id2)})
    pt = nm = None
    if cfg.needs_scenes:
        pt, nm = _fit_visual(cfg, [by_id[s] for s in train_ids if s in by_id])
    return Artifacts(vocab, pv, emb, pt, nm, replace(cfg.icm, seed=cfg.seed), cfg.scene_source,
                     cfg.seed, {e.scene_id: e.scene for e in corpus})


# -- imagination ------------------------------------------------------------------------

def question_seed(art: Artifacts, qid: str) -> int:
    return derive_seed(art.seed, qid)


def imagine(desc: Description, art: Artifacts, seed: int, gold_id: Optional[str] = None) -> Scene:
    if art.scene_source == "gold":
        return art.gold[gold_id]
    cfg = replace(art.icm, seed=seed)
    if art.scene_source == "naive":
        return generate_naive(desc, art.pt, art.nm, cfg)
    return generate_scene(desc, art.pt, art.nm, cfg)


def fitb_visual(q: FitbQuestion, art: Artifacts) -> np.ndarray:
    """``(4, 22)`` visual slots, one row per option."""
    seed = question_seed(art, q.qid)
    rows = []
    for j in range(4):
        d = fitb_description(q, j)
        scene = imagine(d, art, seed, q.scene_id)
        rows.append(visual_features(scene, d, art.pt, art.nm))
    return np.array(rows)


def vp_visual(q: VpQuestion, art: Artifacts) -> np.ndarray:
    """``(44,)`` symmetric visual block."""
    seed = question_seed(art, q.qid)
    s1 = imagine(q.desc1, art, seed, q.scene_id1)
    s2 = imagine(q.desc2, art, seed, q.scene_id2)
    v1 = visual_features(s1, q.desc2, art.pt, art.nm)
    v2 = visual_features(s2, q.desc1, art.pt, art.nm)
    return symmetric_combine(v1, v2)


def fitb_features(q: FitbQuestion, art: Artifacts, visual: Optional[np.ndarray] = None) -> np.ndarray:
    """``(4, text_dim + 22)``; the visual block is zero when ``visual`` is None and no priors exist."""
    body = " ".join(q.question_body)
    text = np.array([fitb_text_features(body, o, art.vocab, art.pairs, art.emb) for o in q.options])
    if visual is None:
        visual = fitb_visual(q, art) if art.pt is not None else np.zeros((4, N_SLOTS))
    return np.hstack([text, visual])


def vp_features(q: VpQuestion, art: Artifacts, visual: Optional[np.ndarray] = None) -> np.ndarray:
    text = vp_text_features(q.desc1, q.desc2, art.vocab, art.pairs, art.emb)
    if visual is None:
        visual = vp_visual(q, art) if art.pt is not None else np.zeros(2 * N_SLOTS)
    return np.concatenate([text, visual])


_WORKER_ART: Optional[Artifacts] = None


def _init_worker(art):
    global _WORKER_ART
    _WORKER_ART = art


def _visual_job(q):
    if isinstance(q, FitbQuestion):
        return fitb_visual(q, _WORKER_ART)
    return vp_visual(q, _WORKER_ART)


def visual_blocks(questions: Sequence, art: Artifacts, jobs: int = 1) -> list:
    """Visual blocks for every question, in input order."""
    if art.pt is None:
        return [None] * len(questions)
    if jobs <= 1 or len(questions) < 2:
        _init_worker(art)
        return [_visual_job(q) for q in questions]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(art,)) as ex:
        return list(ex.map(_visual_job, questions, chunksize=max(1, len(questions) // (4 * jobs))))


# -- answering ---------------------------------------------------------------------------

def _check_dim(model: LinearModel, dim: int):
    if model.dim != dim:
        raise DimMismatch(f"model expects {model.dim} features, artifacts give {dim}")


def answer_fitb(q: FitbQuestion, art: Artifacts, model: LinearModel,
                features: Optional[np.ndarray] = None) -> tuple[int, np.ndarray]:
    """Option with the highest score; ties go to the lowest index."""
    phi = fitb_features(q, art) if features is None else features
    _check_dim(model, phi.shape[1])
    s = model.scores(phi)
    return int(np.argmax(s)), s


def answer_vp(q: VpQuestion, art: Artifacts, model: LinearModel,
              features: Optional[np.ndarray] = None) -> tuple[float, int]:
    phi = vp_features(q, art) if features is None else features
    _check_dim(model, len(phi))
    s = float(model.scores(phi[None])[0])
    return s, (1 if s > 0 else -1)


# -- training ---------------------------------------------------------------------------------

def fitb_targets(questions: Sequence[FitbQuestion], use_mode: bool) -> list[int]:
    out = []
    for q in questions:
        if use_mode and q.human_responses is not None:
            out.append(response_mode(q.human_responses)[0])
        else:
            out.append(q.gt_index)
    return out


def fitb_rank_problem(feats: Sequence[np.ndarray], targets: Sequence[int], qids) -> RankProblem:
    gt = np.array([f[t] for f, t in zip(feats, targets)])
    ds = [np.delete(f, t, axis=0) for f, t in zip(feats, targets)]
    return RankProblem(gt, ds, list(qids))


def train_fitb_model(feats, targets, qids, mask, cfg: PipelineConfig) -> LinearModel:
    prob = fitb_rank_problem(feats, targets, qids)
    trainer = lambda p, C: learners.train_rank_svm(p, C, seed=cfg.seed, feature_mask=mask)  # noqa: E731
    C = learners.select_c(trainer, prob, folds=cfg.folds, grid=cfg.c_grid, seed=cfg.seed)
    return trainer(prob, C)


def train_vp_model(X, y, qids, mask, cfg: PipelineConfig) -> LinearModel:
    data = BinaryData(X, y, list(qids))
    trainer = lambda X_, y_, C: learners.train_binary_svm(  # noqa: E731
        X_, y_, C, seed=cfg.seed, feature_mask=mask)
    C = learners.select_c(trainer, data, folds=cfg.folds, grid=cfg.c_grid, seed=cfg.seed)
    return trainer(X, y, C)


# -- experiment -------------------------------------------------------------------------------

@dataclass
class EvalReport:
    task: str
    feature_set: tuple
    scene_source: str
    metric: str
    value: float
    C: float
    n_train: int
    n_test: int
    qids: list
    scores: list                   # FITB: per-option score arrays; VP: one score per pair
    predictions: list
    targets: list
    agreement: list = field(default_factory=list)
    confusion: dict = field(default_factory=dict)
    pr: Optional[tuple] = None
    baseline: Optional[float] = None   # text-only metric on the same split

    def lines(self) -> list[str]:
        out = [REPORT_HEADER,
               f"task\t{self.task}",
               f"feature_set\t{','.join(self.feature_set)}",
               f"scene_source\t{self.scene_source}",
               f"n_train\t{self.n_train}",
               f"n_test\t{self.n_test}",
               f"C\t{self.C!r}",
               f"{self.metric}\t{self.value!r}"]
        if self.baseline is not None:
            out.append(f"text_only_{self.metric}\t{self.baseline!r}")
        for k in sorted(self.confusion):
            out.append(f"{k}\t{self.confusion[k]}")
        return out


def _confusion(joint_ok, text_ok, human_ok=None) -> dict:
    out = {}
    for a in (True, False):
        for b in (True, False):
            sel = (joint_ok == a) & (text_ok == b)
            out[f"confusion_joint{'+' if a else '-'}_text{'+' if b else '-'}"] = int(sel.sum())
    if human_ok is not None:
        out["human_mode_correct"] = int(np.sum(human_ok))
        out["joint_agrees_human"] = int(np.sum(joint_ok == human_ok))
    return out


@dataclass
class FitbData:
    """Questions with their full feature tensors, computed once per scene source."""

    questions: list
    features: list


def featurize_fitb(questions, art: Artifacts, jobs: int = 1) -> FitbData:
    vis = visual_blocks(questions, art, jobs)
    return FitbData(list(questions), [fitb_features(q, art, v) for q, v in zip(questions, vis)])


def fitb_report(model: LinearModel, test: FitbData, cfg: PipelineConfig, n_train: int = 0,
                text_model: Optional[LinearModel] = None) -> EvalReport:
    """Score ``test`` with ``model``; ``text_model`` adds the text-only comparison."""
    scores = [model.scores(f) for f in test.features]
    choices = np.array([int(np.argmax(s)) for s in scores])
    gts = np.array([q.gt_index for q in test.questions])
    acc = accuracy(choices, gts)
    base = None
    confusion = {}
    if text_model is not None:
        tchoice = np.array([int(np.argmax(text_model.scores(f))) for f in test.features])
        base = accuracy(tchoice, gts)
        human = None
        if test.questions and all(q.human_responses is not None for q in test.questions):
            human = np.array([response_mode(q.human_responses)[0] for q in test.questions]) == gts
        confusion = _confusion(choices == gts, tchoice == gts, human)
    agreement = []
    responses = {q.qid: q.human_responses for q in test.questions if q.human_responses is not None}
    if test.questions and len(responses) == len(test.questions):
        agreement = agreement_subsets([q.qid for q in test.questions], choices, gts, responses)
    fs = _feature_set_of(model, cfg)
    return EvalReport("fitb", fs, cfg.scene_source, "accuracy", acc, model.C, n_train,
                      len(test.questions), [q.qid for q in test.questions], scores,
                      choices.tolist(), gts.tolist(), agreement, confusion, None, base)


def _feature_set_of(model, cfg) -> tuple:
    return tuple(g for g in FEATURE_GROUPS if g in cfg.feature_set)


def evaluate_fitb(train: FitbData, test: FitbData, art: Artifacts, cfg: PipelineConfig,
                  feature_set=None, baseline: bool = True):
    """Train on ``train`` with C chosen by CV, report accuracy on ``test``."""
    fs = frozenset(feature_set or cfg.feature_set)
    cfg = replace(cfg, feature_set=fs)
    targets = fitb_targets(train.questions, cfg.train_on_mode)
    qids = [q.qid for q in train.questions]
    model = train_fitb_model(train.features, targets, qids, fitb_mask(fs, art.text_dim), cfg)
    tmodel = None
    if baseline and fs != {"text"}:
        tmodel = train_fitb_model(train.features, targets, qids, fitb_mask({"text"}, art.text_dim), cfg)
    return fitb_report(model, test, cfg, len(train.questions), tmodel), model


@dataclass
class VpData:
    questions: list
    features: np.ndarray


def featurize_vp(questions, art: Artifacts, jobs: int = 1) -> VpData:
    vis = visual_blocks(questions, art, jobs)
    return VpData(list(questions), np.array([vp_features(q, art, v) for q, v in zip(questions, vis)]))


def vp_report(model: LinearModel, test: VpData, cfg: PipelineConfig, n_train: int = 0,
              text_model: Optional[LinearModel] = None) -> EvalReport:
    scores = model.scores(test.features)
    labels = np.array([q.label for q in test.questions])
    preds = np.where(scores > 0, 1, -1)
    ap = average_precision(scores, labels)
    base = None
    confusion = {}
    if text_model is not None:
        tscores = text_model.scores(test.features)
        base = average_precision(tscores, labels)
        confusion = _confusion(preds == labels, np.where(tscores > 0, 1, -1) == labels)
    return EvalReport("vp", _feature_set_of(model, cfg), cfg.scene_source, "average_precision", ap,
                      model.C, n_train, len(test.questions), [q.qid for q in test.questions],
                      scores.tolist(), preds.tolist(), labels.tolist(), [], confusion,
                      pr_curve(scores, labels), base)


def evaluate_vp(train: VpData, test: VpData, art: Artifacts, cfg: PipelineConfig,
                feature_set=None, baseline: bool = True):
    fs = frozenset(feature_set or cfg.feature_set)
    cfg = replace(cfg, feature_set=fs)
    y = np.array([q.label for q in train.questions], dtype=float)
    groups = [q.scene_id1 for q in train.questions]
    model = train_vp_model(train.features, y, groups, vp_mask(fs, art.text_dim), cfg)
    tmodel = None
    if baseline and fs != {"text"}:
        tmodel = train_vp_model(train.features, y, groups, vp_mask({"text"}, art.text_dim), cfg)
    return vp_report(model, test, cfg, len(train.questions), tmodel), model


# -- report files ----------------------------------------------------------------------------

def write_report(out_dir, report: EvalReport, model: Optional[LinearModel] = None) -> dict:
    """Write report, per-question scores, curves and the model; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"report": os.path.join(out_dir, "report.txt"),
             "scores": os.path.join(out_dir, "scores.tsv")}
    atomic_write_text(paths["report"], "\n".join(report.lines()) + "\n")
    rows = ["qid\tprediction\ttarget\tscores"]
    for qid, p, t, s in zip(report.qids, report.predictions, report.targets, report.scores):
        vals = ",".join(repr(float(v)) for v in np.atleast_1d(s))
        rows.append(f"{qid}\t{p}\t{t}\t{vals}")
    atomic_write_text(paths["scores"], "\n".join(rows) + "\n")
    if report.agreement:
        paths["agreement"] = os.path.join(out_dir, "agreement.tsv")
        lines = ["K\tfraction\tacc_gt\tacc_mode"] + [
            f"{a.k}\t{a.fraction!r}\t{a.acc_gt!r}\t{a.acc_mode!r}" for a in report.agreement]
        atomic_write_text(paths["agreement"], "\n".join(lines) + "\n")
    if report.pr is not None:
        paths["pr"] = os.path.join(out_dir, "pr.tsv")
        rec, prec = report.pr
        lines = ["recall\tprecision"] + [f"{r!r}\t{p!r}" for r, p in zip(rec.tolist(), prec.tolist())]
        atomic_write_text(paths["pr"], "\n".join(lines) + "\n")
    if model is not None:
        paths["model"] = os.path.join(out_dir, "model.txt")
        learners.save_model(paths["model"], model)
    return paths


# -- artifact files ------------------------------------------------------------------------------

ARTIFACT_HEADER = "imagineer-artifacts v1"


def save_artifacts(directory, art: Artifacts) -> None:
    from .priors import save_priors
    os.makedirs(directory, exist_ok=True)
    atomic_write_text(os.path.join(directory, "vocab.txt"), art.vocab.dumps())
    atomic_write_text(os.path.join(directory, "pairs.txt"), art.pairs.dumps())
    atomic_write_text(os.path.join(directory, "embeddings.txt"), art.emb.dumps())
    if art.pt is not None:
        save_priors(os.path.join(directory, "priors.json"), art.pt, art.nm)
    meta = [ARTIFACT_HEADER, f"scene_source = {art.scene_source}", f"seed = {art.seed}",
            f"icm_restarts = {art.icm.restarts}", f"icm_max_sweeps = {art.icm.max_sweeps}",
            f"icm_stride = {art.icm.stride}", f"icm_gmm_means = {int(art.icm.include_gmm_means)}"]
    atomic_write_text(os.path.join(directory, "artifacts.txt"), "\n".join(meta) + "\n")


def load_artifacts(directory, gold: Optional[Mapping[str, Scene]] = None) -> Artifacts:
    from .errors import FormatError
    from .priors import load_priors

    def read(name):
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            return fh.read()

    lines = read("artifacts.txt").splitlines()
    if not lines or lines[0] != ARTIFACT_HEADER:
        raise FormatError("bad artifact header", 1, os.path.join(directory, "artifacts.txt"))
    meta = dict(l.split(" = ", 1) for l in lines[1:] if l)
    icm = IcmConfig(restarts=int(meta["icm_restarts"]), max_sweeps=int(meta["icm_max_sweeps"]),
                    stride=int(meta["icm_stride"]), seed=int(meta["seed"]),
                    include_gmm_means=bool(int(meta["icm_gmm_means"])))
    pt = nm = None
    if os.path.exists(os.path.join(directory, "priors.json")):
        pt, nm = load_priors(os.path.join(directory, "priors.json"))
    return Artifacts(Vocabulary.loads(read("vocab.txt")), PairVocab.loads(read("pairs.txt")),
                     EmbeddingTable.loads(read("embeddings.txt")), pt, nm, icm,
                     meta["scene_source"], int(meta["seed"]), dict(gold or {}))


# -- one-call experiment -------------------------------------------------------------------------

def load_or_build_questions(cfg: PipelineConfig, corpus_dir, corpus):
    """Question files from ``corpus_dir`` when present, else built from the corpus."""
    tr = os.path.join(corpus_dir, f"{cfg.task}_train.jsonl")
    te = os.path.join(corpus_dir, f"{cfg.task}_test.jsonl")
    if os.path.exists(tr) and os.path.exists(te):
        train, test = read_questions(tr, cfg.task), read_questions(te, cfg.task)
    elif cfg.task == "fitb":
        train, test = build_fitb(corpus, cfg.seed, cfg.fitb_train_fraction)
    else:
        train, test = build_vp(corpus, cfg.vp_neg_ratio, cfg.seed, cfg.vp_train_fraction)
    resp_path = os.path.join(corpus_dir, f"{cfg.task}_responses.tsv")
    if os.path.exists(resp_path):
        resp = read_human_responses(resp_path)
        train = [replace(q, human_responses=tuple(resp[q.qid])) if q.qid in resp else q for q in train]
        test = [replace(q, human_responses=tuple(resp[q.qid])) if q.qid in resp else q for q in test]
    return train, test


def run_experiment(cfg: PipelineConfig, corpus_dir, out_dir) -> EvalReport:
    """Fit on the train split, imagine scenes, train with CV, evaluate on test, write files."""
    corpus = import_abstract_scenes(corpus_dir)
    train_q, test_q = load_or_build_questions(cfg, corpus_dir, corpus)
    logger.info("%s: %d train / %d test questions", cfg.task, len(train_q), len(test_q))
    if cfg.task == "fitb":
        art = fit_fitb_artifacts(cfg, train_q, corpus)
        tr, te = featurize_fitb(train_q, art, cfg.jobs), featurize_fitb(test_q, art, cfg.jobs)
        report, model = evaluate_fitb(tr, te, art, cfg)
    else:
        art = fit_vp_artifacts(cfg, train_q, corpus)
        tr, te = featurize_vp(train_q, art, cfg.jobs), featurize_vp(test_q, art, cfg.jobs)
        report, model = evaluate_vp(tr, te, art, cfg)
    write_report(out_dir, report, model)
    logger.info("%s = %.4f", report.metric, report.value)
    return report
