"""Linear ranking and binary SVMs with squared-hinge slack.

Both objectives are convex, piecewise quadratic and once differentiable:

    rank:   1/2 |w|^2 + C sum_ij max(0, 1 - w.(phi_gt_i - phi_ij))^2
    binary: 1/2 |w|^2 + C sum_n  max(0, 1 - y_n (w.x_n + b))^2

They are minimized with a primal Newton method using the generalized
Hessian on the active (margin-violating) rows and a backtracking line
search.  Each accepted step lowers the objective; the method stops when
the active set is stable and the gradient is small.  The bias is not
regularized.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimMismatch, EmptyGrid, FormatError, InsufficientData, SingleClass
from .metrics import average_precision

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
MODEL_HEADER = "imagineer-linear-model v1"


@dataclass
class RankProblem:
    """One group per question: the gt feature vector and its distractors."""

    gt: np.ndarray            # (n_groups, dim)
    distractors: list         # per group, (n_distractors, dim)
    group_ids: Optional[list] = None

    def __post_init__(self):
        self.gt = np.atleast_2d(np.asarray(self.gt, dtype=float))
        self.distractors = [np.atleast_2d(np.asarray(d, dtype=float)) for d in self.distractors]
        if len(self.distractors) != len(self.gt):
            raise DimMismatch(f"{len(self.gt)} gt vectors but {len(self.distractors)} distractor groups")
        for i, d in enumerate(self.distractors):
            if len(d) < 1:
                raise InsufficientData(f"group {i} has no distractors")
            if d.shape[1] != self.dim:
                raise DimMismatch(f"group {i}: distractor dim {d.shape[1]} != {self.dim}")
        if self.group_ids is None:
            self.group_ids = list(range(len(self.gt)))

    @property
    def dim(self) -> int:
        return self.gt.shape[1]

    def __len__(self):
        return len(self.gt)

    def differences(self) -> np.ndarray:
        """Rows ``phi_gt - phi_distractor`` for every constraint."""
        return np.concatenate([g[None] - d for g, d in zip(self.gt, self.distractors)])

    def subset(self, idx) -> "RankProblem":
        idx = list(idx)
        return RankProblem(self.gt[idx], [self.distractors[i] for i in idx],
                           [self.group_ids[i] for i in idx])

    def masked(self, mask) -> "RankProblem":
        m = np.asarray(mask, dtype=int)
        return RankProblem(self.gt[:, m], [d[:, m] for d in self.distractors], self.group_ids)


@dataclass
class BinaryData:
    X: np.ndarray
    y: np.ndarray
    group_ids: Optional[list] = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        if len(self.X) != len(self.y):
            raise DimMismatch(f"{len(self.X)} rows but {len(self.y)} labels")
        if self.group_ids is None:
            self.group_ids = list(range(len(self.y)))

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return len(self.y)

    def subset(self, idx) -> "BinaryData":
        idx = np.asarray(list(idx), dtype=int)
        return BinaryData(self.X[idx], self.y[idx], [self.group_ids[i] for i in idx])


@dataclass
class LinearModel:
    w: np.ndarray
    C: float
    dim: int
    bias: float = 0.0
    feature_mask: Optional[tuple] = None
    kind: str = "rank"
    trace: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.feature_mask is not None:
            self.feature_mask = tuple(int(i) for i in self.feature_mask)
        n = self.dim if self.feature_mask is None else len(self.feature_mask)
        if len(self.w) != n:
            raise DimMismatch(f"weight vector has {len(self.w)} entries, expected {n}")
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.bias)):
            raise ValueError("model weights must be finite")

    def _select(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise DimMismatch(f"feature dim {X.shape[-1]} != model dim {self.dim}")
        return X if self.feature_mask is None else X[..., list(self.feature_mask)]

    def scores(self, X) -> np.ndarray:
        return self._select(X) @ self.w + self.bias

    def full_weights(self) -> np.ndarray:
        if self.feature_mask is None:
            return self.w.copy()
        out = np.zeros(self.dim)
        out[list(self.feature_mask)] = self.w
        return out

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (self.kind == other.kind and self.dim == other.dim and self.C == other.C
                and self.bias == other.bias and self.feature_mask == other.feature_mask
                and np.array_equal(self.w, other.w))

    # -- model file -------------------------------------------------------------

    def dumps(self) -> str:
        mask = "none" if self.feature_mask is None else " ".join(map(str, self.feature_mask))
        lines = [MODEL_HEADER, f"kind {self.kind}", f"dim {self.dim}", f"C {self.C!r}",
                 f"bias {float(self.bias)!r}", f"mask {mask}", f"weights {len(self.w)}"]
        lines += [repr(float(v)) for v in self.w]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, path=None) -> "LinearModel":
        lines = text.splitlines()
        if not lines or lines[0] != MODEL_HEADER:
            raise FormatError(f"expected header {MODEL_HEADER!r}", line=1, path=path)
        fields = {}
        for i, key in enumerate(("kind", "dim", "C", "bias", "mask", "weights"), start=1):
            if i >= len(lines):
                raise FormatError(f"missing {key!r} line", line=i + 1, path=path)
            name, _, value = lines[i].partition(" ")
            if name != key:
                raise FormatError(f"expected {key!r}, found {name!r}", line=i + 1, path=path)
            fields[key] = value
        try:
            n = int(fields["weights"])
            w = np.array([float(v) for v in lines[7:7 + n]])
            mask = None if fields["mask"] == "none" else tuple(int(v) for v in fields["mask"].split())
            model = cls(w, float(fields["C"]), int(fields["dim"]), float(fields["bias"]), mask, fields["kind"])
        except ValueError as exc:
            raise FormatError(f"bad model file: {exc}", path=path) from None
        if len(w) != n:
            raise FormatError(f"expected {n} weights, found {len(w)}", path=path)
        return model


def save_model(path, model: LinearModel):
    from .util import atomic_write_text
    atomic_write_text(path, model.dumps())


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        return LinearModel.loads(fh.read(), path=path)


# -- solver ----------------------------------------------------------------------------

def squared_hinge_objective(w, A, C, reg_mask=None) -> float:
    """``1/2 |w_reg|^2 + C sum max(0, 1 - A w)^2``."""
    r = np.maximum(0.0, 1.0 - A @ w)
    wr = w if reg_mask is None else w * reg_mask
    return float(0.5 * wr @ wr + C * r @ r)


def _newton(A: np.ndarray, C: float, reg: np.ndarray, tol: float, max_iter: int):
    """Minimize ``1/2 w.diag(reg).w + C sum max(0, 1 - A w)^2``."""
    n, d = A.shape
    w = np.zeros(d)
    f = squared_hinge_objective(w, A, C, reg)
    trace = [f]
    for _ in range(max_iter):
        margin = A @ w
        act = margin < 1.0
        Aa = A[act]
        g = reg * w - 2.0 * C * Aa.T @ (1.0 - margin[act])
        gnorm = float(np.abs(g).max()) if d else 0.0
        if gnorm <= tol * max(1.0, f):
            break
        H = np.diag(reg) + 2.0 * C * Aa.T @ Aa
        H[np.diag_indices(d)] += 1e-12
        step = -np.linalg.solve(H, g)
        t = 1.0
        while True:
            w_new = w + t * step
            f_new = squared_hinge_objective(w_new, A, C, reg)
            if f_new <= f + 1e-4 * t * float(g @ step) or t < 1e-10:
                break
            t *= 0.5
        if f_new > f:
            break
        done = np.array_equal(A @ w_new < 1.0, act) and t == 1.0
        w, f = w_new, f_new
        trace.append(f)
        if done:
            # the quadratic on a fixed active set was minimized exactly
            break
    return w, trace


def train_rank_svm(p: RankProblem, C: float, seed: int = 0, tol: float = 1e-6,
                   max_epochs: int = 1000, feature_mask=None) -> LinearModel:
    """Ranking SVM over (gt, distractor) constraints; no bias.

    The solver is deterministic, so ``seed`` only exists for interface
    symmetry with :func:`train_binary_svm`.
    """
    full_dim = p.dim
    prob = p if feature_mask is None else p.masked(feature_mask)
    d = prob.dim
    if C <= 0:
        return LinearModel(np.zeros(d), float(C), full_dim, 0.0, feature_mask, "rank", [0.0])
    A = prob.differences()
    w, trace = _newton(A, float(C), np.ones(d), tol, max_epochs)
    return LinearModel(w, float(C), full_dim, 0.0, feature_mask, "rank", trace)


def train_binary_svm(X, y, C: float, seed: int = 0, tol: float = 1e-6, max_epochs: int = 1000,
                     feature_mask=None) -> LinearModel:
    """Squared-hinge linear SVM with an unregularized bias."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(X) != len(y):
        raise DimMismatch(f"{len(X)} rows but {len(y)} labels")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClass("binary SVM needs both classes")
    full_dim = X.shape[1]
    Xm = X if feature_mask is None else X[:, list(feature_mask)]
    d = Xm.shape[1]
    if C <= 0:
        return LinearModel(np.zeros(d), float(C), full_dim, 0.0, feature_mask, "binary", [0.0])
    A = y[:, None] * np.hstack([Xm, np.ones((len(Xm), 1))])
    reg = np.ones(d + 1)
    reg[-1] = 0.0
    w, trace = _newton(A, float(C), reg, tol, max_epochs)
    return LinearModel(w[:-1], float(C), full_dim, float(w[-1]), feature_mask, "binary", trace)


# -- prediction helpers ------------------------------------------------------------------------

def rank_choices(model: LinearModel, option_features: Sequence[np.ndarray]) -> np.ndarray:
    """Argmax option per question; ties go to the lowest index."""
    return np.array([int(np.argmax(model.scores(f))) for f in option_features])


def rank_accuracy(model: LinearModel, p: RankProblem) -> float:
    """Top-1 accuracy where the gt must strictly beat every distractor."""
    s_gt = model.scores(p.gt)
    ok = [s_gt[i] > model.scores(d).max() for i, d in enumerate(p.distractors)]
    return float(np.mean(ok))


# -- C selection ---------------------------------------------------------------------------------

def fold_assignment(group_ids: Sequence, folds: int, seed: int) -> np.ndarray:
    """Fold index per item; items sharing a group id share a fold."""
    uniq = sorted(set(group_ids), key=str)
    if len(uniq) < folds:
        raise InsufficientData(f"{len(uniq)} groups cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(len(uniq))
    fold_of = {uniq[g]: i % folds for i, g in enumerate(perm)}
    return np.array([fold_of[g] for g in group_ids])


def cv_score(trainer: Callable, data, C: float, folds: int = 5, seed: int = 0) -> float:
    """Mean held-out metric: top-1 accuracy for rank data, AP for binary data."""
    assign = fold_assignment(data.group_ids, folds, seed)
    vals = []
    for f in range(folds):
        tr = np.flatnonzero(assign != f)
        te = np.flatnonzero(assign == f)
        if isinstance(data, RankProblem):
            m = trainer(data.subset(tr), C)
            vals.append(rank_accuracy(m, data.subset(te)))
        else:
            train, test = data.subset(tr), data.subset(te)
            m = trainer(train.X, train.y, C)
            if not np.any(test.y > 0):
                continue
            vals.append(average_precision(m.scores(test.X), test.y))
    return float(np.mean(vals)) if vals else float("nan")


def select_c(trainer: Callable, data, folds: int = 5, grid=DEFAULT_C_GRID, seed: int = 0) -> float:
    """Grid value with the best mean fold metric; ties go to the smaller C.

    ``trainer`` is called as ``trainer(problem, C)`` for rank data and
    ``trainer(X, y, C)`` for :class:`BinaryData`.
    """
    grid = sorted(float(c) for c in grid)
    if not grid:
        raise EmptyGrid("C grid is empty")
    if len(grid) == 1:
        return grid[0]
    best_c, best = grid[0], -np.inf
    for c in grid:
        s = cv_score(trainer, data, c, folds, seed)
        logger.debug("C=%g cv=%.4f", c, s)
        if s > best:
            best_c, best = c, s
    return best_c
