"""Flat ``key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored.  Keys are the
names in :data:`KEYS`; unknown keys are an error so typos do not pass
silently.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import FormatError
from .generate import IcmConfig
from .tasks import FEATURE_GROUPS, PipelineConfig


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _groups(v: str) -> frozenset:
    return frozenset(x.strip() for x in v.replace(",", " ").split() if x.strip())


# key -> parser; paths and log level are kept as strings
KEYS = {
    "corpus": str, "out": str, "artifacts": str, "model": str, "embeddings": str,
    "log_level": str, "task": str, "feature_set": _groups, "scene_source": str,
    "seed": int, "c_grid": _floats, "folds": int, "n_pairs": int, "min_cooc": int,
    "pair_smoothing": float, "emb_dim": int, "prior_smoothing": float, "k_unary": int,
    "k_pair": int, "k_relation": int, "icm_restarts": int, "icm_max_sweeps": int,
    "icm_stride": int, "icm_gmm_means": _bool, "train_on_mode": _bool,
    "fitb_train_fraction": float, "vp_train_fraction": float, "vp_neg_ratio": int, "jobs": int,
}

PIPELINE_KEYS = ("task", "feature_set", "scene_source", "seed", "c_grid", "folds", "n_pairs",
                 "min_cooc", "pair_smoothing", "emb_dim", "embeddings", "prior_smoothing",
                 "k_unary", "k_pair", "k_relation", "train_on_mode", "fitb_train_fraction",
                 "vp_train_fraction", "vp_neg_ratio", "jobs")


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def set(self, key: str, raw: str, path=None, line=None):
        key = key.strip()
        if key not in KEYS:
            raise FormatError(f"unknown config key {key!r}", line, path)
        try:
            self.values[key] = KEYS[key](raw.strip())
        except ValueError as exc:
            raise FormatError(f"bad value for {key}: {exc}", line, path) from None

    def pipeline(self) -> PipelineConfig:
        kw = {k: self.values[k] for k in PIPELINE_KEYS if k in self.values}
        if "feature_set" not in kw:
            kw["feature_set"] = frozenset(FEATURE_GROUPS)
        icm = IcmConfig(
            restarts=self.values.get("icm_restarts", 5),
            max_sweeps=self.values.get("icm_max_sweeps", 50),
            stride=self.values.get("icm_stride", 20),
            seed=self.values.get("seed", 0),
            include_gmm_means=self.values.get("icm_gmm_means", True),
        )
        return PipelineConfig(icm=icm, **kw)


def parse_config(text: str, path=None) -> RunConfig:
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise FormatError(f"expected 'key = value', got {s!r}", lineno, path)
        key, value = s.split("=", 1)
        cfg.set(key, value, path, lineno)
    if path is not None:
        # relative paths in a config file are relative to that file
        base = os.path.dirname(os.path.abspath(path))
        for key in ("corpus", "out", "artifacts", "model", "embeddings"):
            v = cfg.values.get(key)
            if v and not os.path.isabs(v):
                cfg.values[key] = os.path.normpath(os.path.join(base, v))
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
