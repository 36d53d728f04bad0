import numpy as np
import pytest

from imagineer.errors import LengthMismatch, MissingResponses, NoPositives
from imagineer.metrics import accuracy, agreement_subsets, average_precision, pr_curve, response_mode


def test_accuracy():
    assert accuracy([0, 1, 2, 3], [0, 1, 0, 0]) == 0.5
    assert np.isnan(accuracy([], []))
    with pytest.raises(LengthMismatch):
        accuracy([0], [0, 1])


def test_average_precision_hand_cases():
    assert average_precision([0.9, 0.8, 0.1], [1, -1, 1]) == pytest.approx((1 + 2 / 3) / 2)
    assert average_precision([0.1, 0.2, 0.3], [1, 1, 1]) == 1.0
    # equal scores keep input order
    assert average_precision([0.5, 0.5], [-1, 1]) == 0.5
    with pytest.raises(NoPositives):
        average_precision([1.0, 2.0], [-1, -1])


def test_pr_curve_endpoints():
    rec, prec = pr_curve([3.0, 2.0, 1.0, 0.0], [1, -1, 1, -1])
    assert rec.tolist() == [0.5, 0.5, 1.0, 1.0]
    assert prec.tolist() == [1.0, 0.5, 2 / 3, 0.5]


def test_response_mode_ties_go_low():
    assert response_mode([2, 2, 1, 1, 3]) == (1, 2)
    assert response_mode([0] * 10) == (0, 10)


def test_agreement_subsets():
    qids = ["q1", "q2", "q3"]
    responses = {"q1": [0] * 10, "q2": [1] * 6 + [2] * 4, "q3": [3] * 5 + [0] * 5}
    pts = agreement_subsets(qids, [0, 2, 3], [0, 1, 3], responses)
    by_k = {p.k: p for p in pts}
    assert [p.k for p in pts] == list(range(5, 11))
    assert by_k[5].n == 3 and by_k[5].acc_gt == pytest.approx(2 / 3)
    # q3 mode is option 0 (5-5 tie goes low), so agreeing with humans there fails
    assert by_k[5].acc_mode == pytest.approx(1 / 3)
    assert by_k[6].n == 2 and by_k[10].n == 1 and by_k[10].fraction == pytest.approx(1 / 3)
    with pytest.raises(MissingResponses):
        agreement_subsets(["q1", "q4"], [0, 0], [0, 0], responses)
