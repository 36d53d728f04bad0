import logging
import os

import pytest

from imagineer.cli import main
from imagineer.config import load_config, parse_config
from imagineer.errors import FormatError
from imagineer.scene import decode_scenes


def test_parse_config_types_and_comments():
    cfg = parse_config("# comment\n\ntask = vp\nseed = 4\nc_grid = 0.1, 1, 10\n"
                       "feature_set = text spatial\nicm_gmm_means = no\n")
    assert cfg.get("task") == "vp" and cfg.get("seed") == 4
    assert cfg.get("c_grid") == (0.1, 1.0, 10.0)
    pc = cfg.pipeline()
    assert pc.feature_set == {"text", "spatial"}
    assert pc.icm.include_gmm_means is False and pc.icm.seed == 4


def test_unknown_key_reports_line():
    with pytest.raises(FormatError) as info:
        parse_config("seed = 1\nsede = 2\n", "run.cfg")
    assert info.value.line == 2 and "sede" in str(info.value)


def test_bad_value_and_missing_equals():
    with pytest.raises(FormatError):
        parse_config("seed = many\n")
    with pytest.raises(FormatError):
        parse_config("seed 3\n")


def test_relative_paths_resolve_against_config_file(tmp_path):
    p = tmp_path / "sub" / "run.cfg"
    p.parent.mkdir()
    p.write_text("corpus = data\nout = /abs/out\n")
    cfg = load_config(p)
    assert cfg.get("corpus") == os.path.join(str(p.parent), "data")
    assert cfg.get("out") == "/abs/out"


def test_unknown_flag_is_usage_error(capsys):
    assert main(["run", "--frobnicate"]) == 2


def test_missing_setting_is_usage_error(capsys):
    assert main(["run", "--task", "fitb"]) == 2
    assert "corpus" in capsys.readouterr().err


def test_missing_corpus_is_runtime_error(tmp_path, capsys):
    missing = str(tmp_path / "nowhere")
    assert main(["run", "--task", "fitb", "--corpus", missing, "--out", str(tmp_path / "o")]) == 1
    assert missing in capsys.readouterr().err


def test_bad_config_file_is_runtime_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["run", "--config", str(cfg)]) == 1
    assert "line 1" in capsys.readouterr().err


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli") / "corpus"
    assert main(["corpus", "synth", "--n", "60", "--seed", "2", "--out", str(d)]) == 0
    return d


def test_priors_and_imagine(tmp_path, corpus_dir):
    priors = tmp_path / "priors.json"
    assert main(["priors", "--corpus", str(corpus_dir), "--out", str(priors), "--jobs", "1"]) == 0
    desc = tmp_path / "desc.txt"
    desc.write_text("Mike is kicking the ball. Jenny is happy.\nThe dog is next to the tree.\n")
    out = tmp_path / "scenes.txt"
    args = ["imagine", "--desc", str(desc), "--priors", str(priors), "--out", str(out),
            "--restarts", "1", "--stride", "100"]
    assert main(args) == 0
    scenes = decode_scenes(out.read_bytes())
    assert sorted(scenes) == ["0", "1"]
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    assert main(args[:-4] + ["--naive"]) == 0


def test_fitb_questions_then_train_and_eval(tmp_path, corpus_dir):
    qdir = tmp_path / "q"
    assert main(["corpus", "fitb", "--in", str(corpus_dir), "--seed", "1", "--out", str(qdir)]) == 0
    assert (qdir / "fitb_train.jsonl").exists() and (qdir / "fitb_test.jsonl").exists()
    common = ["--task", "fitb", "--corpus", str(corpus_dir), "--jobs", "1",
              "--set", "min_cooc=2", "--set", "emb_dim=8", "--set", "folds=2",
              "--set", "c_grid=1", "--set", "icm_restarts=1", "--set", "icm_stride=100"]
    art, model, out = tmp_path / "art", tmp_path / "model.txt", tmp_path / "out"
    assert main(["train", *common, "--artifacts", str(art), "--model", str(model)]) == 0
    assert model.exists() and (art / "artifacts.txt").exists()
    assert main(["eval", *common, "--artifacts", str(art), "--model", str(model),
                 "--out", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "accuracy\t" in report


def test_set_requires_key_value(corpus_dir, tmp_path):
    assert main(["run", "--task", "fitb", "--corpus", str(corpus_dir), "--out", str(tmp_path),
                 "--set", "seed"]) == 2


def test_log_level_flag_and_config_key(tmp_path, capsys):
    assert main(["--log-level", "LOUD", "run"]) == 2
    cfg = tmp_path / "quiet.cfg"
    cfg.write_text("log_level = error\n")
    out = tmp_path / "c"
    assert main(["priors", "--config", str(cfg), "--corpus", str(tmp_path / "nowhere"),
                 "--out", str(out)]) == 1
    assert logging.getLogger().level == logging.ERROR
