"""Two-dimensional Gaussian mixtures fitted with EM.

Covariances are full 2x2 matrices whose eigenvalues are clipped from
below at ``COV_FLOOR`` px^2 in every M-step.  Clipping (rather than
adding a ridge) is the exact maximizer of the M-step objective under
that eigenvalue constraint, so EM stays monotone.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData

logger = logging.getLogger(__name__)

COV_FLOOR = 1.0
DEAD_MASS = 1e-8
LOG_2PI = float(np.log(2.0 * np.pi))


def logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Row-wise log-sum-exp; rows that are all ``-inf`` give ``-inf``."""
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True, eq=False)
class Gmm2D:
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    trace: tuple = field(default=(), repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.means, dtype=float).reshape(-1, 2)
        cov = np.asarray(self.covs, dtype=float).reshape(-1, 2, 2)
        if not (len(w) == len(mu) == len(cov)):
            raise ValueError("weights, means and covs disagree on k")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covs", cov)
        det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
        inv = np.empty_like(cov)
        inv[:, 0, 0] = cov[:, 1, 1] / det
        inv[:, 1, 1] = cov[:, 0, 0] / det
        inv[:, 0, 1] = -cov[:, 0, 1] / det
        inv[:, 1, 0] = -cov[:, 1, 0] / det
        with np.errstate(divide="ignore"):
            log_norm = np.log(w) - LOG_2PI - 0.5 * np.log(det)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_log_norm", log_norm)

    @property
    def k(self) -> int:
        return len(self.weights)

    def component_log_densities(self, points) -> np.ndarray:
        """Weighted per-component log densities, shape ``(n, k)``."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        dx = p[:, None, 0] - self.means[None, :, 0]
        dy = p[:, None, 1] - self.means[None, :, 1]
        inv = self._inv
        maha = dx * dx * inv[:, 0, 0] + 2.0 * dx * dy * inv[:, 0, 1] + dy * dy * inv[:, 1, 1]
        return self._log_norm[None, :] - 0.5 * maha

    def log_density(self, points) -> np.ndarray:
        return logsumexp(self.component_log_densities(points), axis=1)

    def __eq__(self, other):
        if not isinstance(other, Gmm2D):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.covs, other.covs)
        )

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covs": self.covs.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Gmm2D":
        return cls(np.array(d["weights"]), np.array(d["means"]), np.array(d["covs"]))


def log_density(g: Gmm2D, p) -> float | np.ndarray:
    """Log mixture density at one point ``(x, y)`` or at an ``(n, 2)`` array."""
    arr = np.asarray(p, dtype=float)
    out = g.log_density(arr)
    return float(out[0]) if arr.ndim == 1 else out


def _floor_cov(cov: np.ndarray, floor: float) -> np.ndarray:
    """Clip eigenvalues of one ``(2, 2)`` or a stack ``(k, 2, 2)`` from below."""
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, floor)
    out = (vecs * vals[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = [points[rng.integers(n)]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return np.array(centers, dtype=float)


def _m_step(points, resp, floor):
    nk = resp.sum(axis=0)
    safe = np.where(nk > 0, nk, 1.0)
    means = (resp.T @ points) / safe[:, None]
    diff = points[:, None, :] - means[None]
    covs = np.einsum("nk,nki,nkj->kij", resp, diff, diff) / safe[:, None, None]
    covs = _floor_cov(covs, floor)
    return nk, means, covs


def fit(points, k: int, seed: int = 0, tol: float = 1e-6, max_iter: int = 500,
        floor: float = COV_FLOOR) -> Gmm2D:
    """Fit a ``k``-component mixture by EM from a seeded k-means++ start.

    Stops when the mean per-point log-likelihood improves by less than
    ``tol`` or after ``max_iter`` iterations.  The returned model keeps
    the per-iteration mean log-likelihood in ``trace``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if k < 1 or n < k:
        raise InsufficientData(f"need at least k={k} points, got {n}")
    rng = np.random.default_rng(seed)

    centers = _kmeanspp(pts, k, rng)
    d2 = ((pts[:, None, :] - centers[None]) ** 2).sum(-1)
    resp = np.zeros((n, k))
    resp[np.arange(n), np.argmin(d2, axis=1)] = 1.0
    nk, means, covs = _m_step(pts, resp, floor)
    global_cov = _floor_cov(np.cov(pts.T, bias=True).reshape(2, 2), floor)
    for j in np.flatnonzero(nk <= 0):
        means[j] = centers[j]
        covs[j] = global_cov
    weights = np.maximum(nk, 1.0) / np.maximum(nk, 1.0).sum()

    trace = []
    prev = -np.inf
    for it in range(max_iter):
        g = Gmm2D(weights, means, covs)
        comp = g.component_log_densities(pts)
        ll_point = logsumexp(comp, axis=1)
        ll = float(ll_point.mean())
        trace.append(ll)
        if ll - prev < tol and it > 0:
            break
        prev = ll
        resp = np.exp(comp - ll_point[:, None])
        nk, means, covs = _m_step(pts, resp, floor)
        dead = np.flatnonzero(nk < DEAD_MASS)
        if len(dead):
            # reseed dead components on the worst-explained points
            order = np.argsort(ll_point, kind="stable")
            for slot, j in enumerate(dead):
                means[j] = pts[order[slot % n]]
                covs[j] = global_cov
                nk[j] = 1.0
            logger.debug("reseeded %d dead GMM components at iteration %d", len(dead), it)
        weights = nk / nk.sum()
    return Gmm2D(weights, means, covs, tuple(trace))


def fit_reduced(points, k: int, seed: int = 0, **kw) -> Gmm2D | None:
    """Fit with ``k`` components, shrinking to ``ceil(n/2)`` for small slices.

    Returns ``None`` when there are no points at all.
    """
    n = len(points)
    if n == 0:
        return None
    if n < k:
        k_new = max(1, -(-n // 2))
        logger.debug("slice has %d points < k=%d; using k=%d", n, k, k_new)
        k = k_new
    return fit(points, k, seed=seed, **kw)
