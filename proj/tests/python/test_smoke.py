# Copyright 2026 The rankopt Authors.
# SPDX-License-Identifier: Apache-2.0

import math

import pytest

import rankopt


def test_metrics_on_a_small_list():
    ranks = [2, 1, 3]
    labels = [1, 0, 1]
    assert rankopt.reciprocal_rank(ranks, labels) == pytest.approx(0.5)
    assert rankopt.average_precision(ranks, labels) == pytest.approx((0.5 + 2 / 3) / 2)
    assert rankopt.evaluate(ranks, labels, "RR") == rankopt.reciprocal_rank(ranks, labels)
    assert rankopt.nrbp(ranks, labels, 0.5) == pytest.approx(
        rankopt.rbp(ranks, labels, 0.5) / ((1 - 0.5) * (1 + 0.5))
    )
    ideal = sum(1 / math.log2(r + 1) for r in (1, 2))
    got = (1 / math.log2(3) + 1 / math.log2(4)) / ideal
    assert rankopt.ndcg(ranks, labels) == pytest.approx(got)


def test_exact_ranks_break_ties_by_id():
    assert rankopt.exact_ranks([0.5, 0.9, 0.5]) == [2, 1, 3]


def test_swap_delta_matches_recomputation():
    ranks = [3, 1, 2, 4]
    labels = [1, 0, 1, 0]
    swapped = [1, 3, 2, 4]
    want = abs(rankopt.evaluate(swapped, labels, "AP") - rankopt.evaluate(ranks, labels, "AP"))
    assert rankopt.swap_delta("AP", ranks, labels, 0, 1) == pytest.approx(want, abs=1e-12)
    with pytest.raises(ValueError):
        rankopt.swap_delta("AP", ranks, labels, 0, 2)


def test_list_loss_gradient_matches_finite_difference():
    scores = [0.3, -0.2, 1.1, 0.0, -0.7]
    labels = [1, 0, 0, 1, 0]
    for kind in ("RR", "AP", "NDCG", "NRBP"):
        _, grad = rankopt.list_loss(kind, scores, labels)
        h = 1e-6
        for k in range(len(scores)):
            up = list(scores)
            down = list(scores)
            up[k] += h
            down[k] -= h
            fd = (rankopt.list_loss(kind, up, labels)[0] - rankopt.list_loss(kind, down, labels)[0]) / (2 * h)
            assert grad[k] == pytest.approx(fd, abs=1e-6)


def test_lambdas_push_positive_up():
    out = rankopt.lambdas("NDCG", [0.0, 1.0], [1, 0])
    assert out[0] > 0 > out[1]
    assert out[0] == pytest.approx(-out[1])


def test_synthetic_split_and_training_are_deterministic():
    data = rankopt.generate_synthetic(20, 80, 3, 25, 4)
    assert data.n_users == 20 and data.num_ratings() == 500
    split = rankopt.make_split(data, 0, 2.0, 1)
    user = split.users[0]
    assert (len(user.train_pos), len(user.test_pos)) == (20, 5)
    assert (len(user.train_neg), len(user.test_neg)) == (40, 10)
    a = rankopt.train(data, split, "listwise", "NRBP", 1.0, epochs=5, eval_every=5, dim=4)
    b = rankopt.train(data, split, "listwise", "NRBP", 1.0, epochs=5, eval_every=5, dim=4)
    assert a == b
    assert a["epochs"] == [0, 5]
    assert a["metrics"] == rankopt.protocol_metrics()
    assert not a["diverged"]


def test_invalid_loss_is_rejected():
    data = rankopt.generate_synthetic(5, 40, 2, 25, 1)
    split = rankopt.make_split(data, 0, 1.0, 1)
    with pytest.raises(ValueError):
        rankopt.train(data, split, "listwise", "NRBP@0.9", 0.1)
