import numpy as np
import pytest
from scipy.stats import multivariate_normal

from imagineer import gmm
from imagineer.errors import InsufficientData


def test_log_density_matches_scipy(rng):
    w = np.array([0.2, 0.5, 0.3])
    means = rng.uniform(0, 400, size=(3, 2))
    A = rng.normal(size=(3, 2, 2)) * 10
    covs = A @ A.transpose(0, 2, 1) + 5 * np.eye(2)
    g = gmm.Gmm2D(w, means, covs)
    pts = rng.uniform(0, 500, size=(50, 2))
    want = np.log(sum(wi * multivariate_normal(m, c).pdf(pts) for wi, m, c in zip(w, means, covs)))
    assert np.allclose(g.log_density(pts), want, atol=1e-10)
    assert gmm.log_density(g, pts[0]) == pytest.approx(want[0], abs=1e-10)


def test_far_points_stay_finite():
    g = gmm.Gmm2D([1.0], [[0.0, 0.0]], [np.eye(2)])
    assert np.isfinite(g.log_density(np.array([[1e4, 1e4]])))[0]


def test_logsumexp_handles_all_neg_inf():
    a = np.array([[-np.inf, -np.inf], [0.0, np.log(3.0)]])
    out = gmm.logsumexp(a, axis=1)
    assert out[0] == -np.inf and out[1] == pytest.approx(np.log(4.0))


def test_fit_is_seeded_and_floors_covariance(rng):
    pts = np.repeat([[10.0, 10.0], [200.0, 50.0]], 30, axis=0)   # zero spread per cluster
    a = gmm.fit(pts, 2, seed=3)
    b = gmm.fit(pts, 2, seed=3)
    assert np.array_equal(a.means, b.means) and a.trace == b.trace
    assert np.all(np.linalg.eigvalsh(a.covs) >= gmm.COV_FLOOR - 1e-9)
    assert sorted(map(tuple, np.rint(a.means))) == [(10.0, 10.0), (200.0, 50.0)]


def test_fit_reduced_shrinks_small_slices():
    assert gmm.fit_reduced(np.zeros((0, 2)), 5) is None
    g = gmm.fit_reduced(np.array([[1.0, 2.0], [3.0, 4.0], [50.0, 60.0]]), 27)
    assert g.k == 2
    with pytest.raises(InsufficientData):
        gmm.fit(np.zeros((2, 2)), 3)


def test_dict_round_trip(rng):
    g = gmm.fit(rng.normal(100, 20, size=(80, 2)), 3, seed=1)
    h = gmm.Gmm2D.from_dict(g.to_dict())
    pts = rng.uniform(0, 300, size=(10, 2))
    assert np.array_equal(g.log_density(pts), h.log_density(pts))
