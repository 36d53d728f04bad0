"""Tuple extraction and scene imagination by iterated conditional modes.

The energy maximized is the unit-weighted sum of the 22 visual slots,
``scene_energy(scene, desc)``.  One ICM move re-optimizes every variable
of a single object (presence, position from a candidate set, depth,
facing, attribute) with everything else held fixed.  Because the
attribute only interacts with other attributes, it is maximized on its
own; position, depth and facing are scored jointly as a
``(positions, 3, 2)`` array.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .gmm import Gmm2D
from .priors import (
    DX_MIN, DY_MIN, NounMap, PriorTables, UNIFORM_OFFSET, UNIFORM_XY, map_tuples, mentioned,
    scene_energy,
)
from .scene import (
    HEIGHT, N_DEPTHS, N_OBJECTS, PERSONS, WIDTH, Description, Scene, Tuple, is_person, n_attrs,
)
from .text import tokenize
from .util import derive_seed

logger = logging.getLogger(__name__)

IMPROVE_EPS = 1e-9
DIRS = np.array([-1, 1])


# -- tuple extraction -------------------------------------------------------------

def extract_tuples(sentence: str, nm: NounMap, sentence_index: int = 0) -> list[Tuple]:
    """Rule-based (primary, relation, secondary) tuples from one sentence.

    The first lexicon noun starts a tuple, the run of non-nouns after it
    is the relation, and a noun directly after that run is the secondary.
    Scanning resumes after the secondary.  A noun followed directly by
    another noun or by the end of the sentence starts no tuple.
    """
    toks = tokenize(sentence)
    lex = nm.nouns
    out = []
    i = 0
    while i < len(toks):
        if toks[i] not in lex:
            i += 1
            continue
        primary = toks[i]
        j = i + 1
        while j < len(toks) and toks[j] not in lex:
            j += 1
        if j == i + 1:
            # nothing between this noun and the next (or the end): no relation to record
            i = j
            continue
        relation = " ".join(toks[i + 1:j])
        secondary = toks[j] if j < len(toks) else None
        out.append(Tuple(primary, relation, secondary, sentence_index))
        i = j + 1
    return out


def describe(sentences: Sequence[str], nm: NounMap) -> Description:
    """Description whose tuples come from :func:`extract_tuples`."""
    tuples = [t for i, s in enumerate(sentences) for t in extract_tuples(s, nm, i)]
    return Description(tuple(sentences), tuple(tuples))


# -- configuration ------------------------------------------------------------------

@dataclass(frozen=True)
class IcmConfig:
    restarts: int = 5
    max_sweeps: int = 50
    stride: int = 20
    seed: int = 0
    include_gmm_means: bool = True
    positions: Optional[tuple] = None        # explicit (x, y) candidates replace the grid
    active_objects: Optional[tuple] = None   # others stay absent; None means all 58
    strict: bool = False

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")
        if self.stride < 1:
            raise DomainError(f"stride must be >= 1, got {self.stride}")
        if self.max_sweeps < 1:
            raise DomainError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.positions is not None:
            object.__setattr__(self, "positions", tuple((int(x), int(y)) for x, y in self.positions))
        if self.active_objects is not None:
            object.__setattr__(self, "active_objects", tuple(sorted(set(int(k) for k in self.active_objects))))

    def base_positions(self) -> np.ndarray:
        if self.positions is not None:
            return np.array(self.positions, dtype=np.int64).reshape(-1, 2)
        xs = np.arange(self.stride // 2, WIDTH, self.stride)
        ys = np.arange(self.stride // 2, HEIGHT, self.stride)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=1).astype(np.int64)


@dataclass
class IcmResult:
    scene: Scene
    energy: float
    restart: int
    traces: list = field(default_factory=list)   # per restart: energy after init and each accepted move
    sweeps: list = field(default_factory=list)


# -- precomputed lookups -------------------------------------------------------------

def _offset_table(pt: PriorTables, name: str) -> np.ndarray:
    """Log density of a pooled offset mixture on every integer offset."""
    key = ("offset_table", name)
    if key not in pt.cache:
        g: Optional[Gmm2D] = getattr(pt, name)
        nx, ny = 2 * WIDTH - 1, 2 * HEIGHT - 1
        if g is None:
            tab = np.full((nx, ny), UNIFORM_OFFSET)
        else:
            dy = np.arange(DY_MIN, DY_MIN + ny, dtype=float)
            tab = np.empty((nx, ny))
            for start in range(0, nx, 64):
                dx = np.arange(DX_MIN + start, DX_MIN + min(nx, start + 64), dtype=float)
                pts = np.stack(np.meshgrid(dx, dy, indexing="ij"), axis=-1).reshape(-1, 2)
                tab[start:start + len(dx)] = g.log_density(pts).reshape(len(dx), ny)
        pt.cache[key] = tab
    return pt.cache[key]


def _sym(a: np.ndarray) -> np.ndarray:
    """Mirror an upper-triangle (k1 < k2) matrix onto the lower triangle."""
    iu = np.triu_indices(N_OBJECTS, 1)
    out = np.zeros((N_OBJECTS, N_OBJECTS))
    out[iu] = a[iu]
    return out + out.T


def _bounds(pt: PriorTables) -> dict:
    if "icm_bounds" not in pt.cache:
        pt.cache["icm_bounds"] = {
            "pe11": _sym(pt.pair_e[:, :, 1, 1]),
            "pz": _sym(pt.pair_z.max(axis=(2, 3))),
            "pd": _sym(pt.pair_d.max(axis=(2, 3))),
            "dz": _sym(pt.def_z.max(axis=(2, 3))),
            "dd": _sym(pt.def_d.max(axis=(2, 3))),
            "pw": float(_offset_table(pt, "pair_xyd").max()),
            "def": float(_offset_table(pt, "def_xyd").max()),
        }
    return pt.cache["icm_bounds"]


def _candidates(pt: PriorTables, cfg: IcmConfig, k: int):
    """Candidate positions for object ``k`` and their ``(n, 3)`` location log densities."""
    key = ("icm_xyz", k, cfg.stride, cfg.include_gmm_means, cfg.positions)
    if key not in pt.cache:
        pos = cfg.base_positions()
        if cfg.include_gmm_means:
            means = [g.means for z in range(N_DEPTHS) if (g := pt.xyz_gmm(k, z)) is not None]
            if means:
                m = np.rint(np.concatenate(means)).astype(np.int64)
                m[:, 0] = np.clip(m[:, 0], 0, WIDTH - 1)
                m[:, 1] = np.clip(m[:, 1], 0, HEIGHT - 1)
                pos = np.unique(np.concatenate([pos, m]), axis=0)
        xyz = np.stack([pt.xyz_logp(k, z, pos) for z in range(N_DEPTHS)], axis=1)
        pt.cache[key] = (pos, xyz, float(xyz.max()))
    return pt.cache[key]


def _gmm_logp(g: Optional[Gmm2D], off: np.ndarray) -> np.ndarray:
    shape = off.shape[:-1]
    flat = off.reshape(-1, 2).astype(float)
    if g is None:
        return np.full(shape, UNIFORM_OFFSET)
    return g.log_density(flat).reshape(shape)


# -- the search state ------------------------------------------------------------------

class _Problem:
    """Everything about one (description, tables, config) that ICM needs."""

    def __init__(self, desc: Description, pt: PriorTables, nm: NounMap, cfg: IcmConfig):
        self.pt, self.nm, self.cfg = pt, nm, cfg
        self.mapped = map_tuples(desc, nm)
        self.mentioned = mentioned(self.mapped)
        self.n_mention = np.zeros(N_OBJECTS)
        for a, b, _ in self.mapped:
            for k in (a, b):
                if k is not None:
                    self.n_mention[k] += 1
        self.unm = np.ones(N_OBJECTS, dtype=bool)
        self.unm[list(self.mentioned)] = False
        active = set(range(N_OBJECTS)) if cfg.active_objects is None else set(cfg.active_objects)
        self.active = sorted(active | self.mentioned)
        self.pw_tab = _offset_table(pt, "pair_xyd")
        self.def_tab = _offset_table(pt, "def_xyd")
        self.bounds = _bounds(pt)
        # per-object tuple roles: (other, relation, k_is_primary)
        self.roles = {k: [] for k in range(N_OBJECTS)}
        self.attr_rel = {k: [] for k in PERSONS}
        for a, b, r in self.mapped:
            if a is not None and a in PERSONS:
                self.attr_rel[a].append(("noun_arf", r))
            if b is not None and b in PERSONS:
                self.attr_rel[b].append(("noun_brf", r))
            if a is not None and b is not None and a != b:
                self.roles[a].append((b, r, True))
                self.roles[b].append((a, r, False))
        e = pt.unary_e + self.n_mention[:, None] * pt.noun_e + self.unm[:, None] * pt.def_e
        self.e_base = e   # (58, 2) presence-only terms

    def rel(self, name, key):
        return self.pt.relation(name, key, self.cfg.strict)

    # attribute part -----------------------------------------------------------

    def attr_scores(self, k, st) -> np.ndarray | float:
        """Person ``k``: vector over attributes.  Other objects: a constant."""
        pt = self.pt
        others = [j for j in PERSONS if j != k and st.present[j]]
        if not is_person(k):
            return float(sum(pt.pair_f_po[j, k, st.attr[j]] for j in others))
        g = pt.unary_f[k].copy()
        if self.unm[k]:
            g += pt.def_f[k]
        for j in range(N_OBJECTS):
            if j == k or not st.present[j]:
                continue
            if j in PERSONS:
                g += pt.pair_f_pp[:, st.attr[j]] if k < j else pt.pair_f_pp[st.attr[j], :]
            else:
                g += pt.pair_f_po[k, j]
        for name, r in self.attr_rel[k]:
            g += self.rel(name, (k, r))
        return g

    # location part --------------------------------------------------------------

    def location_scores(self, k, st, pos) -> np.ndarray:
        """``(n, 3, 2)`` energy of placing ``k`` at each (position, depth, facing)."""
        pt = self.pt
        X = pos[:, 0].astype(np.int64)
        Y = pos[:, 1].astype(np.int64)
        n = len(pos)
        out = np.zeros((n, N_DEPTHS, 2))
        out += pt.unary_z[k][None, :, None] + pt.unary_d[k][None, None, :]
        others = _others(st, k)
        if len(others):
            xj, yj, zj, dj = st.x[others], st.y[others], st.z[others], st.dir[others]
            dij = (dj > 0).astype(int)
            out += float(self.bounds["pe11"][k, others].sum())
            hi = others > k
            lo = ~hi
            for tab, use in ((self.pw_tab, np.ones(len(others), bool)),
                             (self.def_tab, self.unm[others] & self.unm[k])):
                if not use.any():
                    continue
                sel = hi & use
                if sel.any():
                    # k is the first object: offset (d_k (x_k - x_j), y_k - y_j)
                    ddx = X[:, None] - xj[sel][None]
                    iy = (Y[:, None] - yj[sel][None]) - DY_MIN
                    for di, d in enumerate(DIRS):
                        out[:, :, di] += tab[d * ddx - DX_MIN, iy].sum(axis=1)[:, None]
                sel = lo & use
                if sel.any():
                    ix = dj[sel][None] * (xj[sel][None] - X[:, None]) - DX_MIN
                    iy = (yj[sel][None] - Y[:, None]) - DY_MIN
                    out += tab[ix, iy].sum(axis=1)[:, None, None]
            for zt, dt, use in ((pt.pair_z, pt.pair_d, None),
                                (pt.def_z, pt.def_d, self.unm[others] & self.unm[k])):
                h = hi if use is None else hi & use
                l_ = lo if use is None else lo & use
                if h.any():
                    out += zt[k, others[h], :, zj[h]].sum(axis=0)[None, :, None]
                    out += dt[k, others[h], :, dij[h]].sum(axis=0)[None, None, :]
                if l_.any():
                    out += zt[others[l_], k, zj[l_], :].sum(axis=0)[None, :, None]
                    out += dt[others[l_], k, dij[l_], :].sum(axis=0)[None, None, :]
        for j, r, k_first in self.roles[k]:
            if not st.present[j]:
                continue
            g1, g2 = self.rel("rel_xyd", r), self.rel("rel_xyd2", r)
            rz, rd = self.rel("rel_z", r), self.rel("rel_d", r)
            xj, yj, zj, dj = int(st.x[j]), int(st.y[j]), int(st.z[j]), int(st.dir[j])
            moving = np.stack([np.stack([d * (X - xj), Y - yj], axis=1) for d in DIRS], axis=1)  # (n,2,2)
            fixed = np.stack([dj * (xj - X), yj - Y], axis=1)                                       # (n,2)
            if k_first:
                out += _gmm_logp(g1, moving)[:, None, :] + _gmm_logp(g2, fixed)[:, None, None]
                out += rz[:, zj][None, :, None] + rd[:, int(dj > 0)][None, None, :]
            else:
                out += _gmm_logp(g1, fixed)[:, None, None] + _gmm_logp(g2, moving)[:, None, :]
                out += rz[zj, :][None, :, None] + rd[int(dj > 0), :][None, None, :]
        return out

    def absent_bounds(self, st) -> np.ndarray:
        """Upper bounds on each object's local energy if it were switched on.

        Persons get ``+inf`` (their attribute term is not bounded here), so
        they always go through the full evaluation.
        """
        if not hasattr(self, "_static_ub"):
            pt, b = self.pt, self.bounds
            xyz_max = np.array([_candidates(pt, self.cfg, k)[2] for k in range(N_OBJECTS)])
            self._static_ub = self.e_base[:, 1] + xyz_max + pt.unary_z.max(1) + pt.unary_d.max(1)
            pair = b["pe11"] + b["pw"] + b["pz"] + b["pd"]
            dflt = b["def"] + b["dz"] + b["dd"]
            np.fill_diagonal(pair, 0.0)
            np.fill_diagonal(dflt, 0.0)
            self._pair_ub, self._def_ub = pair, dflt * self.unm[:, None]
        pres = st.present
        ub = self._static_ub + self._pair_ub[:, pres].sum(1) + self._def_ub[:, pres & self.unm].sum(1)
        for j in PERSONS:
            if pres[j]:
                ub = ub + self.pt.pair_f_po[j, :, st.attr[j]]
        ub[list(PERSONS)] = np.inf
        return ub


def _others(st, k) -> np.ndarray:
    o = np.flatnonzero(st.present)
    return o[o != k]


class _State:
    def __init__(self, present, x, y, z, d, attr):
        self.present = np.asarray(present, dtype=bool).copy()
        self.x = np.asarray(x, dtype=np.int64).copy()
        self.y = np.asarray(y, dtype=np.int64).copy()
        self.z = np.asarray(z, dtype=np.int64).copy()
        self.dir = np.asarray(d, dtype=np.int64).copy()
        self.attr = np.asarray(attr, dtype=np.int64).copy()

    @classmethod
    def from_scene(cls, s: Scene):
        return cls(s.present, s.x, s.y, s.z, s.dir, s.attr)

    def scene(self) -> Scene:
        return Scene(self.present, self.x, self.y, self.z, self.dir, self.attr)


def _move(prob: _Problem, k: int, st: _State, clamp_present: Optional[bool]):
    """Best assignment of object ``k``; returns ``(gain, new values)`` or ``None``."""
    pos, xyz, _ = _candidates(prob.pt, prob.cfg, k)
    g = prob.attr_scores(k, st)
    if is_person(k):
        f_best = int(np.argmax(g))
        a_best = float(g[f_best])
    else:
        f_best, a_best = 0, float(g)
    e0 = float(prob.e_base[k, 0])

    if st.present[k]:
        cur_xy = np.array([[st.x[k], st.y[k]]])
        cur_xyz = np.array([[prob.pt.xyz_logp(k, z, cur_xy)[0] for z in range(N_DEPTHS)]])
        pos = np.concatenate([pos, cur_xy])
        xyz = np.concatenate([xyz, cur_xyz])

    loc = prob.location_scores(k, st, pos) + xyz[:, :, None] + prob.e_base[k, 1]
    if st.present[k]:
        a_cur = float(g[st.attr[k]]) if is_person(k) else a_best
        current = float(loc[-1, st.z[k], int(st.dir[k] > 0)]) + a_cur
    else:
        current = e0
    flat = int(np.argmax(loc))
    pi, zi, di = np.unravel_index(flat, loc.shape)
    best_on = float(loc[pi, zi, di]) + a_best
    if clamp_present is True or (clamp_present is None and best_on >= e0):
        best, new = best_on, (True, int(pos[pi, 0]), int(pos[pi, 1]), int(zi), int(DIRS[di]), f_best)
    else:
        best, new = e0, (False, int(st.x[k]), int(st.y[k]), int(st.z[k]), int(st.dir[k]), 0)
    if best > current + IMPROVE_EPS:
        return best - current, new
    return None


def _run_icm(prob: _Problem, st: _State, fixed_presence: bool, desc: Description):
    """Coordinate ascent from ``st``; returns (state, energy, trace, sweeps)."""
    energy = scene_energy(st.scene(), desc, prob.pt, prob.nm)
    trace = [energy]
    sweeps = 0
    ub = None
    for sweep in range(prob.cfg.max_sweeps):
        sweeps = sweep + 1
        moved = False
        for k in prob.active:
            if fixed_presence:
                if not st.present[k]:
                    continue
                clamp = True
            else:
                clamp = True if k in prob.mentioned else None
                if clamp is None and not st.present[k]:
                    # switching k on cannot beat leaving it off
                    if ub is None:
                        ub = prob.absent_bounds(st)
                    if ub[k] <= prob.e_base[k, 0] + IMPROVE_EPS:
                        continue
            res = _move(prob, k, st, clamp)
            if res is None:
                continue
            gain, (e, x, y, z, d, f) = res
            st.present[k] = e
            st.x[k], st.y[k], st.z[k], st.dir[k], st.attr[k] = x, y, z, d, f
            energy += gain
            trace.append(energy)
            moved = True
            ub = None
        if not moved:
            break
    return st, energy, trace, sweeps


# -- initializations ------------------------------------------------------------------------

def _top_mean(g: Optional[Gmm2D]):
    if g is None:
        return None
    return g.means[int(np.argmax(g.weights))]


def _clip_xy(x, y):
    return int(np.clip(round(float(x)), 0, WIDTH - 1)), int(np.clip(round(float(y)), 0, HEIGHT - 1))


def _snap(prob: _Problem, k: int, x, y) -> tuple[int, int]:
    """Nearest candidate position of object ``k``."""
    pos = _candidates(prob.pt, prob.cfg, k)[0]
    i = int(np.argmin((pos[:, 0] - x) ** 2 + (pos[:, 1] - y) ** 2))
    return int(pos[i, 0]), int(pos[i, 1])


def _mentioned_init(prob: _Problem) -> _State:
    """Mentioned objects at their most likely depth/facing/attribute and top mixture means.

    Every position is snapped to the object's candidate set.
    """
    pt = prob.pt
    st = _State(np.zeros(N_OBJECTS, bool), np.full(N_OBJECTS, WIDTH // 2), np.full(N_OBJECTS, HEIGHT // 2),
                np.zeros(N_OBJECTS), np.ones(N_OBJECTS), np.zeros(N_OBJECTS))
    for k in sorted(prob.mentioned):
        st.present[k] = True
        st.z[k] = int(np.argmax(pt.unary_z[k]))
        st.dir[k] = int(DIRS[int(np.argmax(pt.unary_d[k]))])
        if is_person(k):
            st.attr[k] = int(np.argmax(pt.unary_f[k]))
        m = _top_mean(pt.xyz_gmm(k, int(st.z[k])))
        if m is not None:
            st.x[k], st.y[k] = _clip_xy(*m)
    placed = set()
    for a, b, r in prob.mapped:
        if a is None or b is None or a == b or b in placed:
            continue
        m = _top_mean(prob.rel("rel_xyd", r))
        if m is None:
            continue
        # offset is (d_a (x_a - x_b), y_a - y_b)
        st.x[b], st.y[b] = _clip_xy(st.x[a] - st.dir[a] * m[0], st.y[a] - m[1])
        placed.add(b)
    for k in sorted(prob.mentioned):
        st.x[k], st.y[k] = _snap(prob, k, st.x[k], st.y[k])
    return st


def _random_init(prob: _Problem, rng: np.random.Generator, presence: Optional[np.ndarray] = None) -> _State:
    pt = prob.pt
    if presence is None:
        presence = np.zeros(N_OBJECTS, bool)
        act = np.array(prob.active, dtype=np.int64)
        presence[act] = rng.random(len(act)) < np.exp(pt.unary_e[act, 1])
        presence[list(prob.mentioned)] = True
    st = _State(presence, np.zeros(N_OBJECTS), np.zeros(N_OBJECTS), np.zeros(N_OBJECTS),
                np.ones(N_OBJECTS), np.zeros(N_OBJECTS))
    for k in range(N_OBJECTS):
        pos, _, _ = _candidates(pt, prob.cfg, k) if k in prob.active else (None, None, None)
        if pos is not None:
            st.x[k], st.y[k] = pos[rng.integers(len(pos))]
        st.z[k] = rng.integers(N_DEPTHS)
        st.dir[k] = DIRS[rng.integers(2)]
        st.attr[k] = rng.integers(n_attrs(k))
        if not st.present[k]:
            st.x[k], st.y[k], st.z[k], st.dir[k], st.attr[k] = WIDTH // 2, HEIGHT // 2, 0, 1, 0
    return st


def _search(desc, pt, nm, cfg, naive: bool) -> IcmResult:
    prob = _Problem(desc, pt, nm, cfg)
    best = None
    traces, sweeps = [], []
    presence = np.zeros(N_OBJECTS, bool)
    presence[list(prob.mentioned)] = True
    naive_start = None if naive else _search(desc, pt, nm, cfg, naive=True)
    for r in range(cfg.restarts):
        if r == 0:
            st = _State.from_scene(naive_start.scene) if naive_start is not None else _mentioned_init(prob)
        else:
            rng = np.random.default_rng(derive_seed(cfg.seed, "naive" if naive else "full", r))
            st = _random_init(prob, rng, presence if naive else None)
        st, energy, trace, n_sw = _run_icm(prob, st, naive, desc)
        traces.append(trace)
        sweeps.append(n_sw)
        if best is None or energy > best[1]:
            best = (st.scene(), energy, r)
    return IcmResult(best[0], best[1], best[2], traces, sweeps)


def icm(desc: Description, pt: PriorTables, nm: NounMap, cfg: IcmConfig = IcmConfig()) -> IcmResult:
    """Full ICM search; restart 0 continues from the naive solution."""
    return _search(desc, pt, nm, cfg, naive=False)


def icm_naive(desc: Description, pt: PriorTables, nm: NounMap, cfg: IcmConfig = IcmConfig()) -> IcmResult:
    """ICM with presence fixed to exactly the tuple-mapped objects."""
    return _search(desc, pt, nm, cfg, naive=True)


def generate_scene(desc: Description, pt: PriorTables, nm: NounMap, cfg: IcmConfig = IcmConfig()) -> Scene:
    return icm(desc, pt, nm, cfg).scene


def generate_naive(desc: Description, pt: PriorTables, nm: NounMap, cfg: IcmConfig = IcmConfig()) -> Scene:
    return icm_naive(desc, pt, nm, cfg).scene

