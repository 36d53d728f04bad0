"""Visual common-sense tables and the 22-slot scene/description features.

Every categorical table is stored as log-probabilities obtained from
add-``alpha`` smoothed counts.  Object locations use 2-D Gaussian
mixtures: one per (object, depth) slice for absolute positions, one pooled
mixture for pairwise offsets, one pooled mixture for offsets between
unmentioned objects, and two per relation for the primary/secondary
offsets of a tuple.

Feature slot order (0-based here):

====  =========  ==================================================
slot  name       sum over
====  =========  ==================================================
0     u_e        all objects, log P(e_k)
1     u_xyz      present objects, log p(x, y | object, z)
2     u_z        present objects
3     u_d        present objects
4     u_f        present persons
5     pw_e       present pairs, log P(e1 = 1, e2 = 1)
6     pw_xyd     present pairs, pooled offset mixture
7     pw_z       present pairs
8     pw_d       present pairs
9     pw_f       present pairs involving a person
10    n_abe      mapped tuple nouns, log P(e | noun object)
11    n_arf      tuples with a present person as primary
12    n_brf      tuples with a present person as secondary
13    r_xyd      tuples with both objects present, primary offset
14    r_xyd2     same, secondary offset
15    r_z        same
16    r_d        same
17    d_abe      unmentioned objects
18    d_abrf     unmentioned present persons
19    d_xyd      unmentioned present pairs
20    d_z        unmentioned present pairs
21    d_d        unmentioned present pairs
====  =========  ==================================================
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gmm as gmm_mod
from .errors import EmptyCorpus, FormatError, MissingTable
from .gmm import Gmm2D
from .scene import (
    HEIGHT, N_DEPTHS, N_OBJECTS, N_PERSON_ATTRS, PERSONS, WIDTH, Description, Scene,
)
from .text import indicator_mi, tokenize

logger = logging.getLogger(__name__)

FORMAT = "imagineer-priors"
FORMAT_VERSION = 1

SLOT_NAMES = (
    "u_e", "u_xyz", "u_z", "u_d", "u_f",
    "pw_e", "pw_xyd", "pw_z", "pw_d", "pw_f",
    "n_abe", "n_arf", "n_brf",
    "r_xyd", "r_xyd2", "r_z", "r_d",
    "d_abe", "d_abrf", "d_xyd", "d_z", "d_d",
)
N_SLOTS = len(SLOT_NAMES)
PRESENCE_SLOTS = (0, 5, 10, 17)
ATTRIBUTE_SLOTS = (4, 9, 11, 12, 18)
SPATIAL_SLOTS = tuple(i for i in range(N_SLOTS) if i not in PRESENCE_SLOTS + ATTRIBUTE_SLOTS)
GROUPS = {"presence": PRESENCE_SLOTS, "attribute": ATTRIBUTE_SLOTS, "spatial": SPATIAL_SLOTS}

UNIFORM_XY = -float(np.log(WIDTH * HEIGHT))
UNIFORM_OFFSET = -float(np.log((2 * WIDTH - 1) * (2 * HEIGHT - 1)))
DX_MIN, DY_MIN = -(WIDTH - 1), -(HEIGHT - 1)


def normalize_relation(relation: str) -> str:
    return " ".join(tokenize(relation))


def dir_index(d) -> int:
    return 0 if d < 0 else 1


# -- noun map -------------------------------------------------------------------

@dataclass(frozen=True)
class NounMap:
    """Noun -> object id, chosen by mutual information with object presence."""

    mapping: dict
    scores: dict = field(default_factory=dict)

    def get(self, noun: Optional[str]) -> Optional[int]:
        if noun is None:
            return None
        return self.mapping.get(noun.lower())

    @property
    def nouns(self) -> frozenset:
        return frozenset(self.mapping)

    def to_dict(self):
        return {n: [self.mapping[n], self.scores.get(n, 0.0)] for n in sorted(self.mapping)}

    @classmethod
    def from_dict(cls, d):
        return cls({n: int(v[0]) for n, v in d.items()}, {n: float(v[1]) for n, v in d.items()})


def fit_noun_map(corpus: Sequence[tuple[Description, Scene]]) -> NounMap:
    """Map each tuple noun to the object whose presence shares most MI with it.

    Ties go to the lower object id.  A noun with zero MI against every
    object (e.g. one present in every description) is left unmapped.
    """
    if not corpus:
        raise EmptyCorpus("noun map needs at least one (description, scene) pair")
    nouns = sorted({n.lower() for d, _ in corpus for t in d.tuples
                    for n in (t.primary, t.secondary) if n})
    col = {n: i for i, n in enumerate(nouns)}
    a = np.zeros((len(corpus), len(nouns)))
    b = np.zeros((len(corpus), N_OBJECTS))
    for r, (d, s) in enumerate(corpus):
        for t in d.tuples:
            for n in (t.primary, t.secondary):
                if n:
                    a[r, col[n.lower()]] = 1.0
        b[r] = s.present
    n = len(corpus)
    n11 = a.T @ b
    n10 = a.sum(0)[:, None] - n11
    n01 = b.sum(0)[None, :] - n11
    n00 = n - n11 - n10 - n01
    mi = indicator_mi(n11, n10, n01, n00, smoothing=0.0)
    mapping, scores = {}, {}
    for i, noun in enumerate(nouns):
        k = int(np.argmax(mi[i]))
        if mi[i, k] > 1e-12:
            mapping[noun] = k
            scores[noun] = float(mi[i, k])
    return NounMap(mapping, scores)


# -- tables ---------------------------------------------------------------------

def log_normalize(counts: np.ndarray, alpha: float, axes) -> np.ndarray:
    """Log of add-``alpha`` relative frequencies normalized over ``axes``.

    Rows with no counts and ``alpha == 0`` become uniform.
    """
    c = np.asarray(counts, dtype=float) + alpha
    total = c.sum(axis=axes, keepdims=True)
    size = np.prod([c.shape[a] for a in np.atleast_1d(axes)])
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(total > 0, np.log(c) - np.log(np.where(total > 0, total, 1.0)), -np.log(size))
    return out


def _gmm_or_none(d):
    return None if d is None else Gmm2D.from_dict(d)


def _gmm_dict(g):
    return None if g is None else g.to_dict()


@dataclass(eq=False)
class PriorTables:
    smoothing: float
    k_unary: int
    k_pair: int
    k_relation: int
    unary_e: np.ndarray          # (58, 2)
    unary_z: np.ndarray          # (58, 3)
    unary_d: np.ndarray          # (58, 2)
    unary_f: np.ndarray          # (2, 35)
    unary_xyz: dict              # (k, z) -> Gmm2D
    depth_xyz: list              # z -> pooled Gmm2D or None
    pair_e: np.ndarray           # (58, 58, 2, 2), k1 < k2
    pair_z: np.ndarray           # (58, 58, 3, 3)
    pair_d: np.ndarray           # (58, 58, 2, 2)
    pair_f_pp: np.ndarray        # (35, 35) for the two persons
    pair_f_po: np.ndarray        # (2, 58, 35) person attr given the other object
    pair_xyd: Optional[Gmm2D]
    noun_e: np.ndarray           # (58, 2)
    noun_arf: dict               # (person, relation) -> (35,)
    noun_arf_marg: np.ndarray    # (2, 35)
    noun_brf: dict
    noun_brf_marg: np.ndarray
    rel_xyd: dict                # relation -> Gmm2D
    rel_xyd_marg: Optional[Gmm2D]
    rel_xyd2: dict
    rel_xyd2_marg: Optional[Gmm2D]
    rel_z: dict                  # relation -> (3, 3)
    rel_z_marg: np.ndarray
    rel_d: dict                  # relation -> (2, 2)
    rel_d_marg: np.ndarray
    def_e: np.ndarray            # (58, 2)
    def_f: np.ndarray            # (2, 35)
    def_xyd: Optional[Gmm2D]
    def_z: np.ndarray            # (58, 58, 3, 3)
    def_d: np.ndarray            # (58, 58, 2, 2)
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- lookups -----------------------------------------------------------------

    def xyz_gmm(self, k: int, z: int) -> Optional[Gmm2D]:
        g = self.unary_xyz.get((k, z))
        return g if g is not None else self.depth_xyz[z]

    def xyz_logp(self, k: int, z: int, xy) -> np.ndarray:
        g = self.xyz_gmm(k, z)
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if g is None:
            return np.full(len(xy), UNIFORM_XY)
        return g.log_density(xy)

    def relation(self, name: str, key, strict: bool = False):
        table = getattr(self, name)
        if key in table:
            return table[key]
        if strict:
            raise MissingTable(f"{name}: no table for {key!r}")
        seen = self.cache.setdefault("_missing", set())
        if (name, key) not in seen:
            seen.add((name, key))
            logger.info("%s: unseen key %r, using relation marginal", name, key)
        marg = getattr(self, name + "_marg")
        if name in ("noun_arf", "noun_brf"):
            return marg[key[0]]
        return marg

    def categorical_tables(self) -> dict:
        """Name -> (log-table, normalization axes) for every categorical table."""
        out = {
            "unary_e": (self.unary_e, 1), "unary_z": (self.unary_z, 1),
            "unary_d": (self.unary_d, 1), "unary_f": (self.unary_f, 1),
            "pair_e": (self.pair_e, (2, 3)), "pair_z": (self.pair_z, (2, 3)),
            "pair_d": (self.pair_d, (2, 3)), "pair_f_pp": (self.pair_f_pp, (0, 1)),
            "pair_f_po": (self.pair_f_po, 2), "noun_e": (self.noun_e, 1),
            "noun_arf_marg": (self.noun_arf_marg, 1), "noun_brf_marg": (self.noun_brf_marg, 1),
            "rel_z_marg": (self.rel_z_marg, (0, 1)), "rel_d_marg": (self.rel_d_marg, (0, 1)),
            "def_e": (self.def_e, 1), "def_f": (self.def_f, 1),
            "def_z": (self.def_z, (2, 3)), "def_d": (self.def_d, (2, 3)),
        }
        for name in ("noun_arf", "noun_brf"):
            for key, v in getattr(self, name).items():
                out[f"{name}[{key[0]},{key[1]}]"] = (v, 0)
        for name in ("rel_z", "rel_d"):
            for key, v in getattr(self, name).items():
                out[f"{name}[{key}]"] = (v, (0, 1))
        return out

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        arr = lambda a: np.asarray(a).tolist()  # noqa: E731
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "header": {
                "n_objects": N_OBJECTS, "k_unary": self.k_unary, "k_pair": self.k_pair,
                "k_relation": self.k_relation, "smoothing": self.smoothing,
            },
            "tables": {
                "unary_e": arr(self.unary_e),
                "unary_xyz": [[k, z, _gmm_dict(g)] for (k, z), g in sorted(self.unary_xyz.items())],
                "depth_xyz": [_gmm_dict(g) for g in self.depth_xyz],
                "unary_z": arr(self.unary_z),
                "unary_d": arr(self.unary_d),
                "unary_f": arr(self.unary_f),
                "pair_e": arr(self.pair_e),
                "pair_xyd": _gmm_dict(self.pair_xyd),
                "pair_z": arr(self.pair_z),
                "pair_d": arr(self.pair_d),
                "pair_f_pp": arr(self.pair_f_pp),
                "pair_f_po": arr(self.pair_f_po),
                "noun_e": arr(self.noun_e),
                "noun_arf": [[p, r, arr(v)] for (p, r), v in sorted(self.noun_arf.items())],
                "noun_arf_marg": arr(self.noun_arf_marg),
                "noun_brf": [[p, r, arr(v)] for (p, r), v in sorted(self.noun_brf.items())],
                "noun_brf_marg": arr(self.noun_brf_marg),
                "rel_xyd": [[r, _gmm_dict(g)] for r, g in sorted(self.rel_xyd.items())],
                "rel_xyd_marg": _gmm_dict(self.rel_xyd_marg),
                "rel_xyd2": [[r, _gmm_dict(g)] for r, g in sorted(self.rel_xyd2.items())],
                "rel_xyd2_marg": _gmm_dict(self.rel_xyd2_marg),
                "rel_z": [[r, arr(v)] for r, v in sorted(self.rel_z.items())],
                "rel_z_marg": arr(self.rel_z_marg),
                "rel_d": [[r, arr(v)] for r, v in sorted(self.rel_d.items())],
                "rel_d_marg": arr(self.rel_d_marg),
                "def_e": arr(self.def_e),
                "def_f": arr(self.def_f),
                "def_xyd": _gmm_dict(self.def_xyd),
                "def_z": arr(self.def_z),
                "def_d": arr(self.def_d),
            },
        }

    @classmethod
    def from_dict(cls, d) -> "PriorTables":
        if d.get("format") != FORMAT or d.get("version") != FORMAT_VERSION:
            raise FormatError(f"not a version-{FORMAT_VERSION} priors archive")
        h, t = d["header"], d["tables"]
        if h["n_objects"] != N_OBJECTS:
            raise FormatError(f"archive has {h['n_objects']} objects, expected {N_OBJECTS}")
        a = np.array
        return cls(
            smoothing=h["smoothing"], k_unary=h["k_unary"], k_pair=h["k_pair"],
            k_relation=h["k_relation"],
            unary_e=a(t["unary_e"]), unary_z=a(t["unary_z"]), unary_d=a(t["unary_d"]),
            unary_f=a(t["unary_f"]),
            unary_xyz={(k, z): _gmm_or_none(g) for k, z, g in t["unary_xyz"]},
            depth_xyz=[_gmm_or_none(g) for g in t["depth_xyz"]],
            pair_e=a(t["pair_e"]), pair_z=a(t["pair_z"]), pair_d=a(t["pair_d"]),
            pair_f_pp=a(t["pair_f_pp"]), pair_f_po=a(t["pair_f_po"]),
            pair_xyd=_gmm_or_none(t["pair_xyd"]),
            noun_e=a(t["noun_e"]),
            noun_arf={(p, r): a(v) for p, r, v in t["noun_arf"]},
            noun_arf_marg=a(t["noun_arf_marg"]),
            noun_brf={(p, r): a(v) for p, r, v in t["noun_brf"]},
            noun_brf_marg=a(t["noun_brf_marg"]),
            rel_xyd={r: _gmm_or_none(g) for r, g in t["rel_xyd"]},
            rel_xyd_marg=_gmm_or_none(t["rel_xyd_marg"]),
            rel_xyd2={r: _gmm_or_none(g) for r, g in t["rel_xyd2"]},
            rel_xyd2_marg=_gmm_or_none(t["rel_xyd2_marg"]),
            rel_z={r: a(v) for r, v in t["rel_z"]}, rel_z_marg=a(t["rel_z_marg"]),
            rel_d={r: a(v) for r, v in t["rel_d"]}, rel_d_marg=a(t["rel_d_marg"]),
            def_e=a(t["def_e"]), def_f=a(t["def_f"]), def_xyd=_gmm_or_none(t["def_xyd"]),
            def_z=a(t["def_z"]), def_d=a(t["def_d"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "PriorTables":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"priors archive is not valid JSON: {exc}") from None
        return cls.from_dict(d)


def save_priors(path, pt: PriorTables, nm: NounMap):
    from .util import atomic_write_text
    payload = {"priors": pt.to_dict(), "noun_map": nm.to_dict()}
    atomic_write_text(path, json.dumps(payload, separators=(",", ":")))


def load_priors(path) -> tuple[PriorTables, NounMap]:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"priors archive is not valid JSON: {exc}", path=path) from None
    return PriorTables.from_dict(payload["priors"]), NounMap.from_dict(payload["noun_map"])


# -- fitting ----------------------------------------------------------------------

def map_tuples(desc: Description, nm: NounMap):
    """``[(a, b, relation)]`` with unmapped nouns as ``None``."""
    return [(nm.get(t.primary), nm.get(t.secondary), normalize_relation(t.relation))
            for t in desc.tuples]


def mentioned(mapped) -> set:
    return {k for a, b, _ in mapped for k in (a, b) if k is not None}


def pair_offset(s: Scene, k1: int, k2: int) -> tuple[int, int]:
    """Where ``k2`` sits as seen from ``k1``: ``(d1 * (x1 - x2), y1 - y2)``."""
    return int(s.dir[k1] * (s.x[k1] - s.x[k2])), int(s.y[k1] - s.y[k2])


def fit_priors(corpus: Sequence[tuple[Description, Scene]], nm: NounMap,
               smoothing: float = 1.0, k_unary: int = 27, k_pair: int = 24,
               k_relation: int = 3, seed: int = 0, gmm_tol: float = 1e-4,
               gmm_max_iter: int = 200) -> PriorTables:
    if not corpus:
        raise EmptyCorpus("cannot fit priors on an empty corpus")
    A = N_PERSON_ATTRS
    ue = np.zeros((N_OBJECTS, 2)); uz = np.zeros((N_OBJECTS, N_DEPTHS))
    ud = np.zeros((N_OBJECTS, 2)); uf = np.zeros((2, A))
    xyz_pts = {}
    pe = np.zeros((N_OBJECTS, N_OBJECTS, 2, 2))
    pz = np.zeros((N_OBJECTS, N_OBJECTS, N_DEPTHS, N_DEPTHS))
    pd = np.zeros((N_OBJECTS, N_OBJECTS, 2, 2))
    pf_pp = np.zeros((A, A)); pf_po = np.zeros((2, N_OBJECTS, A))
    pw_pts = []
    ne = np.zeros((N_OBJECTS, 2))
    arf, brf = {}, {}
    arf_m = np.zeros((2, A)); brf_m = np.zeros((2, A))
    rel_pts, rel_pts2, rz, rd = {}, {}, {}, {}
    de = np.zeros((N_OBJECTS, 2)); df = np.zeros((2, A))
    def_pts = []
    dz = np.zeros_like(pz); dd = np.zeros_like(pd)

    for desc, s in corpus:
        pres = np.asarray(s.present, dtype=int)
        onehot = np.stack([1 - pres, pres], axis=1).astype(float)
        ue += onehot
        pe += np.einsum("ia,jb->ijab", onehot, onehot)
        P = s.present_ids()
        for k in P:
            uz[k, s.z[k]] += 1
            ud[k, dir_index(s.dir[k])] += 1
            xyz_pts.setdefault((k, int(s.z[k])), []).append((s.x[k], s.y[k]))
            if k in PERSONS:
                uf[k, s.attr[k]] += 1
        for i, k1 in enumerate(P):
            for k2 in P[i + 1:]:
                pw_pts.append(pair_offset(s, k1, k2))
                pz[k1, k2, s.z[k1], s.z[k2]] += 1
                pd[k1, k2, dir_index(s.dir[k1]), dir_index(s.dir[k2])] += 1
                if k1 in PERSONS and k2 in PERSONS:
                    pf_pp[s.attr[k1], s.attr[k2]] += 1
                elif k1 in PERSONS:
                    pf_po[k1, k2, s.attr[k1]] += 1
                elif k2 in PERSONS:
                    pf_po[k2, k1, s.attr[k2]] += 1

        mapped = map_tuples(desc, nm)
        for a, b, r in mapped:
            for k in (a, b):
                if k is not None:
                    ne[k, pres[k]] += 1
            if a is not None and a in PERSONS and pres[a]:
                arf.setdefault((a, r), np.zeros(A))[s.attr[a]] += 1
                arf_m[a, s.attr[a]] += 1
            if b is not None and b in PERSONS and pres[b]:
                brf.setdefault((b, r), np.zeros(A))[s.attr[b]] += 1
                brf_m[b, s.attr[b]] += 1
            if a is not None and b is not None and a != b and pres[a] and pres[b]:
                rel_pts.setdefault(r, []).append(pair_offset(s, a, b))
                rel_pts2.setdefault(r, []).append(pair_offset(s, b, a))
                rz.setdefault(r, np.zeros((N_DEPTHS, N_DEPTHS)))[s.z[a], s.z[b]] += 1
                rd.setdefault(r, np.zeros((2, 2)))[dir_index(s.dir[a]), dir_index(s.dir[b])] += 1

        M = mentioned(mapped)
        unm = np.ones(N_OBJECTS, dtype=bool)
        unm[list(M)] = False
        de += onehot * unm[:, None]
        U = [k for k in P if unm[k]]
        for k in U:
            if k in PERSONS:
                df[k, s.attr[k]] += 1
        for i, k1 in enumerate(U):
            for k2 in U[i + 1:]:
                def_pts.append(pair_offset(s, k1, k2))
                dz[k1, k2, s.z[k1], s.z[k2]] += 1
                dd[k1, k2, dir_index(s.dir[k1]), dir_index(s.dir[k2])] += 1

    al = smoothing
    gkw = dict(tol=gmm_tol, max_iter=gmm_max_iter)
    unary_xyz = {}
    for (k, z), pts in sorted(xyz_pts.items()):
        unary_xyz[(k, z)] = gmm_mod.fit_reduced(np.array(pts), k_unary, seed=seed, **gkw)
    depth_xyz = []
    for z in range(N_DEPTHS):
        pts = [p for (k, zz), ps in sorted(xyz_pts.items()) if zz == z for p in ps]
        depth_xyz.append(gmm_mod.fit_reduced(np.array(pts).reshape(-1, 2), k_unary, seed=seed, **gkw))

    def rel_gmms(pts_by_rel):
        out = {r: gmm_mod.fit_reduced(np.array(p), k_relation, seed=seed, **gkw)
               for r, p in sorted(pts_by_rel.items())}
        allp = [p for r in sorted(pts_by_rel) for p in pts_by_rel[r]]
        marg = gmm_mod.fit_reduced(np.array(allp).reshape(-1, 2), k_relation, seed=seed, **gkw)
        return out, marg

    rel_xyd, rel_xyd_marg = rel_gmms(rel_pts)
    rel_xyd2, rel_xyd2_marg = rel_gmms(rel_pts2)
    rz_m = sum(rz.values(), np.zeros((N_DEPTHS, N_DEPTHS)))
    rd_m = sum(rd.values(), np.zeros((2, 2)))

    return PriorTables(
        smoothing=smoothing, k_unary=k_unary, k_pair=k_pair, k_relation=k_relation,
        unary_e=log_normalize(ue, al, 1), unary_z=log_normalize(uz, al, 1),
        unary_d=log_normalize(ud, al, 1), unary_f=log_normalize(uf, al, 1),
        unary_xyz=unary_xyz, depth_xyz=depth_xyz,
        pair_e=log_normalize(pe, al, (2, 3)), pair_z=log_normalize(pz, al, (2, 3)),
        pair_d=log_normalize(pd, al, (2, 3)),
        pair_f_pp=log_normalize(pf_pp, al, (0, 1)), pair_f_po=log_normalize(pf_po, al, 2),
        pair_xyd=gmm_mod.fit_reduced(np.array(pw_pts).reshape(-1, 2), k_pair, seed=seed, **gkw),
        noun_e=log_normalize(ne, al, 1),
        noun_arf={key: log_normalize(v, al, 0) for key, v in arf.items()},
        noun_arf_marg=log_normalize(arf_m, al, 1),
        noun_brf={key: log_normalize(v, al, 0) for key, v in brf.items()},
        noun_brf_marg=log_normalize(brf_m, al, 1),
        rel_xyd=rel_xyd, rel_xyd_marg=rel_xyd_marg,
        rel_xyd2=rel_xyd2, rel_xyd2_marg=rel_xyd2_marg,
        rel_z={r: log_normalize(v, al, (0, 1)) for r, v in rz.items()},
        rel_z_marg=log_normalize(rz_m, al, (0, 1)),
        rel_d={r: log_normalize(v, al, (0, 1)) for r, v in rd.items()},
        rel_d_marg=log_normalize(rd_m, al, (0, 1)),
        def_e=log_normalize(de, al, 1), def_f=log_normalize(df, al, 1),
        def_xyd=gmm_mod.fit_reduced(np.array(def_pts).reshape(-1, 2), k_pair, seed=seed, **gkw),
        def_z=log_normalize(dz, al, (2, 3)), def_d=log_normalize(dd, al, (2, 3)),
    )


# -- features ---------------------------------------------------------------------

def offset_logp(g: Optional[Gmm2D], offsets) -> np.ndarray:
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 2)
    if g is None:
        return np.full(len(offsets), UNIFORM_OFFSET)
    return g.log_density(offsets)


def pair_attr_logp(pt: PriorTables, k1: int, k2: int, f1: int, f2: int) -> float:
    """Pairwise attribute term; zero when neither object is a person."""
    if k1 in PERSONS and k2 in PERSONS:
        return float(pt.pair_f_pp[f1, f2]) if k1 < k2 else float(pt.pair_f_pp[f2, f1])
    if k1 in PERSONS:
        return float(pt.pair_f_po[k1, k2, f1])
    if k2 in PERSONS:
        return float(pt.pair_f_po[k2, k1, f2])
    return 0.0


def visual_features(scene: Scene, desc: Description, pt: PriorTables, nm: NounMap,
                    strict: bool = False) -> np.ndarray:
    """The 22 visual log-probability sums for a (scene, description) pair."""
    s = scene
    f = np.zeros(N_SLOTS)
    pres = np.asarray(s.present, dtype=int)
    idx = np.arange(N_OBJECTS)
    dirs = (s.dir > 0).astype(int)
    f[0] = pt.unary_e[idx, pres].sum()
    P = s.present_ids()
    for k in P:
        f[1] += pt.xyz_logp(k, int(s.z[k]), (s.x[k], s.y[k]))[0]
    if P:
        Pa = np.array(P)
        f[2] = pt.unary_z[Pa, s.z[Pa]].sum()
        f[3] = pt.unary_d[Pa, dirs[Pa]].sum()
        f[4] = sum(pt.unary_f[k, s.attr[k]] for k in P if k in PERSONS)

    pairs = [(k1, k2) for i, k1 in enumerate(P) for k2 in P[i + 1:]]
    if pairs:
        p1 = np.array([a for a, _ in pairs]); p2 = np.array([b for _, b in pairs])
        f[5] = pt.pair_e[p1, p2, 1, 1].sum()
        off = np.stack([s.dir[p1] * (s.x[p1] - s.x[p2]), s.y[p1] - s.y[p2]], axis=1)
        f[6] = offset_logp(pt.pair_xyd, off).sum()
        f[7] = pt.pair_z[p1, p2, s.z[p1], s.z[p2]].sum()
        f[8] = pt.pair_d[p1, p2, dirs[p1], dirs[p2]].sum()
        f[9] = sum(pair_attr_logp(pt, a, b, s.attr[a], s.attr[b]) for a, b in pairs)

    mapped = map_tuples(desc, nm)
    for a, b, r in mapped:
        for k in (a, b):
            if k is not None:
                f[10] += pt.noun_e[k, pres[k]]
        if a is not None and a in PERSONS and pres[a]:
            f[11] += pt.relation("noun_arf", (a, r), strict)[s.attr[a]]
        if b is not None and b in PERSONS and pres[b]:
            f[12] += pt.relation("noun_brf", (b, r), strict)[s.attr[b]]
        if a is not None and b is not None and a != b and pres[a] and pres[b]:
            f[13] += offset_logp(pt.relation("rel_xyd", r, strict), pair_offset(s, a, b))[0]
            f[14] += offset_logp(pt.relation("rel_xyd2", r, strict), pair_offset(s, b, a))[0]
            f[15] += pt.relation("rel_z", r, strict)[s.z[a], s.z[b]]
            f[16] += pt.relation("rel_d", r, strict)[dirs[a], dirs[b]]

    M = mentioned(mapped)
    unm = np.ones(N_OBJECTS, dtype=bool)
    unm[list(M)] = False
    f[17] = pt.def_e[idx[unm], pres[unm]].sum()
    U = [k for k in P if unm[k]]
    f[18] = sum(pt.def_f[k, s.attr[k]] for k in U if k in PERSONS)
    upairs = [(k1, k2) for i, k1 in enumerate(U) for k2 in U[i + 1:]]
    if upairs:
        p1 = np.array([a for a, _ in upairs]); p2 = np.array([b for _, b in upairs])
        off = np.stack([s.dir[p1] * (s.x[p1] - s.x[p2]), s.y[p1] - s.y[p2]], axis=1)
        f[19] = offset_logp(pt.def_xyd, off).sum()
        f[20] = pt.def_z[p1, p2, s.z[p1], s.z[p2]].sum()
        f[21] = pt.def_d[p1, p2, dirs[p1], dirs[p2]].sum()
    return f


def scene_energy(scene: Scene, desc: Description, pt: PriorTables, nm: NounMap,
                 weights=None) -> float:
    feats = visual_features(scene, desc, pt, nm)
    if weights is None:
        return float(feats.sum())
    return float(np.dot(np.asarray(weights, dtype=float), feats))
