"""``imagineer`` command line.

Exit codes: 0 success, 1 runtime error (message on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys

from . import corpus as corpus_mod
from . import tasks
from .config import RunConfig, load_config
from .errors import ImagineerError
from .generate import IcmConfig, describe, generate_naive, generate_scene
from .learners import load_model, save_model
from .priors import fit_noun_map, fit_priors, load_priors, save_priors
from .scene import encode_scenes
from .synth import generate_synthetic
from .util import atomic_write_text, derive_seed

logger = logging.getLogger("imagineer")

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imagineer",
                                description="Answer FITB and VP questions by imagining clip-art scenes.")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default INFO)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("corpus", help="generate a synthetic corpus or build question sets")
    csub = c.add_subparsers(dest="corpus_command", required=True)
    s = csub.add_parser("synth", help="write a synthetic corpus directory")
    s.add_argument("--n", type=int, required=True, help="number of scenes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output corpus directory")
    for kind in ("fitb", "vp"):
        q = csub.add_parser(kind, help=f"build {kind.upper()} train/test question files")
        q.add_argument("--in", dest="inp", required=True, help="corpus directory")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out", required=True, help="directory for the question files")
        q.add_argument("--train-fraction", type=float, default=None)
        if kind == "vp":
            q.add_argument("--neg-ratio", type=int, default=2)

    pr = sub.add_parser("priors", help="fit visual priors and the noun map on a corpus")
    pr.add_argument("--corpus", required=True)
    pr.add_argument("--out", required=True, help="priors archive (JSON)")
    pr.add_argument("--questions", default=None,
                    help="restrict fitting to the scenes of these training questions")
    pr.add_argument("--task", choices=("fitb", "vp"), default="fitb",
                    help="question kind of --questions")
    _common(pr)

    im = sub.add_parser("imagine", help="generate one scene per description")
    im.add_argument("--desc", required=True, help="text file, one description per line")
    im.add_argument("--priors", required=True)
    im.add_argument("--out", required=True, help="scene records file")
    im.add_argument("--seed", type=int, default=0)
    im.add_argument("--restarts", type=int, default=5)
    im.add_argument("--stride", type=int, default=20)
    im.add_argument("--naive", action="store_true", help="only place the mentioned objects")

    for name, helptext in (("train", "fit artifacts and train a model on the train split"),
                           ("eval", "evaluate a trained model on the test split"),
                           ("run", "fit, train and evaluate in one go")):
        r = sub.add_parser(name, help=helptext)
        r.add_argument("--task", choices=("fitb", "vp"), default=None)
        r.add_argument("--corpus", default=None)
        r.add_argument("--out", default=None, help="report directory")
        if name in ("train", "eval"):
            r.add_argument("--artifacts", default=None, help="artifact directory")
            r.add_argument("--model", default=None, help="model file")
        _common(r)
    return p


def _common(p):
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        cfg.set(k, v)
    for key in ("task", "corpus", "out", "artifacts", "model"):
        v = getattr(args, key, None)
        if v is not None:
            cfg.values[key] = v
    if args.seed is not None:
        cfg.values["seed"] = args.seed
    cfg.values["jobs"] = args.jobs if args.jobs is not None else cfg.get("jobs", os.cpu_count() or 1)
    if args.log_level is None and cfg.get("log_level"):
        logging.getLogger().setLevel(_level(cfg.get("log_level")))
    return cfg


def _level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise UsageError(f"unknown log level {name!r}")
    return level


def _require(cfg: RunConfig, *keys):
    for k in keys:
        if not cfg.get(k):
            raise UsageError(f"missing required setting {k!r} (flag or config key)")


def _require_dir(path):
    if not os.path.isdir(path):
        raise FileNotFoundError(f"no such directory: {path}")


def _require_file(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such file: {path}")


# -- subcommands ------------------------------------------------------------------------

def cmd_corpus(args):
    if args.corpus_command == "synth":
        entries = generate_synthetic(args.n, args.seed)
        corpus_mod.export_corpus(entries, args.out)
        logger.info("wrote %d scenes to %s", len(entries), args.out)
        return
    _require_dir(args.inp)
    entries = corpus_mod.import_abstract_scenes(args.inp)
    if args.corpus_command == "fitb":
        frac = args.train_fraction if args.train_fraction is not None else corpus_mod.FITB_TRAIN_FRACTION
        train, test = corpus_mod.build_fitb(entries, args.seed, frac)
    else:
        frac = args.train_fraction if args.train_fraction is not None else corpus_mod.VP_TRAIN_FRACTION
        train, test = corpus_mod.build_vp(entries, args.neg_ratio, args.seed, frac)
    kind = args.corpus_command
    os.makedirs(args.out, exist_ok=True)
    corpus_mod.write_questions(os.path.join(args.out, f"{kind}_train.jsonl"), train)
    corpus_mod.write_questions(os.path.join(args.out, f"{kind}_test.jsonl"), test)
    logger.info("wrote %d train / %d test %s questions to %s", len(train), len(test), kind, args.out)


def cmd_priors(args):
    cfg = _run_config(args)
    _require_dir(args.corpus)
    entries = corpus_mod.import_abstract_scenes(args.corpus)
    if args.questions:
        _require_file(args.questions)
        qs = corpus_mod.read_questions(args.questions, args.task)
        ids = {q.scene_id for q in qs} if args.task == "fitb" else \
            {s for q in qs for s in (q.scene_id1, q.scene_id2)}
        entries = [e for e in entries if e.scene_id in ids]
    pc = cfg.pipeline()
    pairs = [(d, e.scene) for e in entries for d in (e.desc_a, e.desc_b)]
    nm = fit_noun_map(pairs)
    pt = fit_priors(pairs, nm, smoothing=pc.prior_smoothing, k_unary=pc.k_unary, k_pair=pc.k_pair,
                    k_relation=pc.k_relation, seed=pc.seed)
    save_priors(args.out, pt, nm)
    logger.info("fitted priors on %d scenes -> %s", len(entries), args.out)


def cmd_imagine(args):
    _require_file(args.desc)
    _require_file(args.priors)
    pt, nm = load_priors(args.priors)
    with open(args.desc, encoding="utf-8") as fh:
        texts = [line.strip() for line in fh if line.strip()]
    out = []
    for i, text in enumerate(texts):
        desc = describe([s for s in _SENTENCE_END.split(text) if s], nm)
        cfg = IcmConfig(restarts=args.restarts, stride=args.stride, seed=derive_seed(args.seed, i))
        scene = generate_naive(desc, pt, nm, cfg) if args.naive else generate_scene(desc, pt, nm, cfg)
        out.append((str(i), scene))
    atomic_write_text(args.out, encode_scenes(out).decode("ascii"))
    logger.info("imagined %d scenes -> %s", len(out), args.out)


def _prepare(cfg: RunConfig):
    _require(cfg, "task", "corpus")
    _require_dir(cfg.get("corpus"))
    pc = cfg.pipeline()
    entries = corpus_mod.import_abstract_scenes(cfg.get("corpus"))
    train_q, test_q = tasks.load_or_build_questions(pc, cfg.get("corpus"), entries)
    return pc, entries, train_q, test_q


def cmd_train(args):
    cfg = _run_config(args)
    _require(cfg, "artifacts", "model")
    pc, entries, train_q, _ = _prepare(cfg)
    if pc.task == "fitb":
        art = tasks.fit_fitb_artifacts(pc, train_q, entries)
        data = tasks.featurize_fitb(train_q, art, pc.jobs)
        model = tasks.train_fitb_model(data.features, tasks.fitb_targets(train_q, pc.train_on_mode),
                                       [q.qid for q in train_q],
                                       tasks.fitb_mask(pc.feature_set, art.text_dim), pc)
    else:
        art = tasks.fit_vp_artifacts(pc, train_q, entries)
        data = tasks.featurize_vp(train_q, art, pc.jobs)
        model = tasks.train_vp_model(data.features, [q.label for q in train_q],
                                     [q.scene_id1 for q in train_q],
                                     tasks.vp_mask(pc.feature_set, art.text_dim), pc)
    tasks.save_artifacts(cfg.get("artifacts"), art)
    save_model(cfg.get("model"), model)
    logger.info("trained %s model (C=%g) on %d questions", pc.task, model.C, len(train_q))


def cmd_eval(args):
    cfg = _run_config(args)
    _require(cfg, "artifacts", "model", "out")
    _require_dir(cfg.get("artifacts"))
    _require_file(cfg.get("model"))
    pc, entries, train_q, test_q = _prepare(cfg)
    art = tasks.load_artifacts(cfg.get("artifacts"), {e.scene_id: e.scene for e in entries})
    model = load_model(cfg.get("model"))
    if pc.task == "fitb":
        report = tasks.fitb_report(model, tasks.featurize_fitb(test_q, art, pc.jobs), pc, len(train_q))
    else:
        report = tasks.vp_report(model, tasks.featurize_vp(test_q, art, pc.jobs), pc, len(train_q))
    tasks.write_report(cfg.get("out"), report)
    logger.info("%s = %.4f", report.metric, report.value)


def cmd_run(args):
    cfg = _run_config(args)
    _require(cfg, "task", "corpus", "out")
    _require_dir(cfg.get("corpus"))
    tasks.run_experiment(cfg.pipeline(), cfg.get("corpus"), cfg.get("out"))


COMMANDS = {"corpus": cmd_corpus, "priors": cmd_priors, "imagine": cmd_imagine,
            "train": cmd_train, "eval": cmd_eval, "run": cmd_run}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        level = _level(args.log_level or "INFO")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"imagineer: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="level=%(levelname)s logger=%(name)s msg=%(message)s", force=True)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"imagineer: error: {exc}", file=sys.stderr)
        return 2
    except (ImagineerError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"imagineer: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
