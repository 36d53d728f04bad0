import numpy as np
import pytest
from scipy.optimize import minimize

from imagineer.errors import DimMismatch, EmptyGrid, FormatError, InsufficientData, SingleClass
from imagineer.learners import (
    BinaryData, LinearModel, RankProblem, cv_score, fold_assignment, load_model, rank_accuracy,
    rank_choices, save_model, select_c, squared_hinge_objective, train_binary_svm, train_rank_svm,
)


def lbfgs_reference(A, C, reg):
    def f(w):
        r = np.maximum(0.0, 1.0 - A @ w)
        return 0.5 * (reg * w) @ w + C * r @ r, reg * w - 2 * C * A.T @ r
    return minimize(f, np.zeros(A.shape[1]), jac=True, method="L-BFGS-B",
                    options={"maxiter": 50000, "gtol": 1e-12, "ftol": 1e-16}).x


def noisy_binary(rng, n=120, d=5):
    X = rng.normal(size=(n, d))
    y = np.where(X @ rng.normal(size=d) + 0.8 * rng.normal(size=n) + 0.3 > 0, 1.0, -1.0)
    return X, y


@pytest.mark.parametrize("C", [0.01, 1.0, 30.0])
def test_binary_svm_matches_reference_optimum(rng, C):
    X, y = noisy_binary(rng)
    m = train_binary_svm(X, y, C)
    A = y[:, None] * np.hstack([X, np.ones((len(X), 1))])
    reg = np.r_[np.ones(X.shape[1]), 0.0]
    w_ref = lbfgs_reference(A, C, reg)
    ours = np.r_[m.w, m.bias]
    f_ours = squared_hinge_objective(ours, A, C, reg)
    f_ref = squared_hinge_objective(w_ref, A, C, reg)
    assert f_ours <= f_ref * (1 + 1e-9) + 1e-12
    assert np.allclose(ours, w_ref, atol=1e-4)
    assert np.all(np.diff(m.trace) <= 1e-12)


def test_rank_svm_matches_reference_and_has_no_bias(rng):
    gt = rng.normal(size=(40, 4)) + 0.5
    dis = [rng.normal(size=(3, 4)) for _ in range(40)]
    p = RankProblem(gt, dis)
    m = train_rank_svm(p, 2.0)
    w_ref = lbfgs_reference(p.differences(), 2.0, np.ones(4))
    assert m.bias == 0.0 and m.kind == "rank"
    assert np.allclose(m.w, w_ref, atol=1e-5)
    # invariance: adding a constant vector to every option of a group changes nothing
    shifted = RankProblem(gt + 5.0, [d + 5.0 for d in dis])
    assert np.allclose(train_rank_svm(shifted, 2.0).w, m.w)


def test_degenerate_inputs():
    X = np.eye(3)
    assert np.all(train_binary_svm(X, [1, -1, 1], 0.0).w == 0)
    with pytest.raises(SingleClass):
        train_binary_svm(X, [1, 1, 1], 1.0)
    with pytest.raises(DimMismatch):
        train_binary_svm(X, [1, -1], 1.0)
    with pytest.raises(InsufficientData):
        RankProblem(np.ones((1, 2)), [np.zeros((0, 2))])
    with pytest.raises(DimMismatch):
        RankProblem(np.ones((1, 2)), [np.zeros((1, 3))])


def test_feature_mask_restricts_the_model(rng):
    X, y = noisy_binary(rng, d=6)
    m = train_binary_svm(X, y, 1.0, feature_mask=(0, 2, 4))
    assert len(m.w) == 3 and m.dim == 6
    full = m.full_weights()
    assert np.all(full[[1, 3, 5]] == 0)
    X2 = X.copy()
    X2[:, [1, 3, 5]] = 99.0
    assert np.array_equal(m.scores(X), m.scores(X2))
    with pytest.raises(DimMismatch):
        m.scores(X[:, :5])


def test_model_file_round_trip(tmp_path, rng):
    m = LinearModel(rng.normal(size=4), 0.1, 10, 0.25, (1, 3, 5, 7), "binary")
    path = tmp_path / "m.txt"
    save_model(path, m)
    m2 = load_model(path)
    assert m2 == m and m2.dumps() == m.dumps()
    text = path.read_text().replace("C 0.1", "C zero")
    with pytest.raises(FormatError):
        LinearModel.loads(text)
    with pytest.raises(FormatError):
        LinearModel.loads("wrong header\n")


def test_rank_choices_ties_go_low():
    m = LinearModel(np.array([1.0, 0.0]), 1.0, 2)
    opts = [np.array([[1.0, 0.0], [1.0, 5.0], [0.0, 0.0]])]
    assert rank_choices(m, opts).tolist() == [0]
    p = RankProblem(np.array([[1.0, 0.0]]), [np.array([[1.0, 3.0]])])
    assert rank_accuracy(m, p) == 0.0   # a tie is not a win


def test_folds_keep_groups_together():
    groups = ["a", "a", "b", "c", "c", "c", "d", "e"]
    f = fold_assignment(groups, 3, seed=1)
    for g in set(groups):
        assert len({f[i] for i, x in enumerate(groups) if x == g}) == 1
    assert np.array_equal(f, fold_assignment(groups, 3, seed=1))
    with pytest.raises(InsufficientData):
        fold_assignment(["a", "b"], 3, seed=0)


def test_select_c_prefers_smaller_on_ties_and_rejects_empty_grid(rng):
    X, y = noisy_binary(rng)
    data = BinaryData(X, y)
    constant = lambda X_, y_, C: LinearModel(np.ones(X_.shape[1]), C, X_.shape[1], kind="binary")  # noqa: E731
    assert select_c(constant, data, folds=3, grid=(10.0, 0.1, 1.0)) == 0.1
    with pytest.raises(EmptyGrid):
        select_c(constant, data, grid=())
    trainer = lambda X_, y_, C: train_binary_svm(X_, y_, C)  # noqa: E731
    c = select_c(trainer, data, folds=4, grid=(0.01, 1.0), seed=2)
    assert c in (0.01, 1.0)
    assert 0.0 <= cv_score(trainer, data, c, folds=4, seed=2) <= 1.0
