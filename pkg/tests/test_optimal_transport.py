from itertools import permutations

from hypothesis import given, strategies as st
import numpy as np
import pytest

from algorithms.optimal_transport import (
    EmptyRowError, SupportError, gaussian_target_order, kl_divergence, ot_sort_transform, transport_objective,
)


@pytest.mark.parametrize("k, peak, order", [
    (4, 1, [1, 0, 2, 3]),
    (3, 0, [0, 1, 2]),
    (5, 2, [2, 1, 3, 0, 4]),
])
def test_gaussian_target_order(k, peak, order):
    assert gaussian_target_order(k, peak) == order


def test_gaussian_target_order_peak_out_of_range():
    with pytest.raises(ValueError):
        gaussian_target_order(4, 4)


def test_sort_transform_example():
    transform, row = ot_sort_transform([5.0, 0.2, 3.0, 1.0])
    assert row.tolist() == [1.0, 0.2, 3.0, 5.0]
    assert transform.perm.tolist() == [3, 1, 2, 0]
    assert transform.displaced_fraction == 0.5


def test_unimodal_row_unchanged():
    transform, row = ot_sort_transform([3.0, 0.5, 1.0, 4.0])
    assert row.tolist() == [3.0, 0.5, 1.0, 4.0]
    assert transform.displaced_fraction == 0.0


def test_constant_row_unchanged():
    transform, row = ot_sort_transform([2.0] * 4)
    assert row.tolist() == [2.0] * 4
    assert transform.perm.tolist() == [0, 1, 2, 3]


def test_absent_entries_stay_absent():
    transform, row = ot_sort_transform([1.0, None, 0.5, 4.0, 2.0])
    assert np.ma.getmaskarray(row).tolist() == [False, True, False, False, False]
    assert row.filled(-1).tolist() == [4.0, -1, 0.5, 1.0, 2.0]
    assert transform.perm[1] == 1
    assert transform.displaced_fraction == pytest.approx(0.4)


def test_masked_input_row():
    row = np.ma.array([0.0, 3.0, 1.0, 7.0], mask=[True, False, False, False])
    _, transformed = ot_sort_transform(row)
    assert np.ma.getmaskarray(transformed).tolist() == [True, False, False, False]
    assert transformed[2] == 1.0


def test_all_absent_row():
    with pytest.raises(EmptyRowError):
        ot_sort_transform([None, None])


def test_transform_maximises_gaussian_objective(rng):
    for _ in range(200):
        values = rng.exponential(2.0, 6)
        _, row = ot_sort_transform(values)
        peak = int(np.argmin(values))
        q = np.exp(-(np.arange(6) - peak) ** 2 / 2.0)
        q /= q.sum()
        best = transport_objective(q, row.data)
        assert all(transport_objective(q, values[list(p)]) <= best + 1e-12 for p in permutations(range(6)))


def test_transform_keeps_values(rng):
    values = rng.normal(size=8)
    transform, row = ot_sort_transform(values)
    assert sorted(row.data.tolist()) == sorted(values.tolist())
    moved = np.empty_like(values)
    moved[transform.perm] = values
    assert np.array_equal(moved, row.data)


def test_kl_divergence():
    p = np.array([0.2, 0.3, 0.5])
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2))
    assert kl_divergence([0.5, 0.5], [0.9, 0.1]) > 0


@pytest.mark.parametrize("q, p", [
    ([0.5, 0.5], [1.0, 0.0]),
    ([0.5, 0.6], [0.5, 0.5]),
    ([1.0], [0.5, 0.5]),
    ([-0.5, 1.5], [0.5, 0.5]),
])
def test_kl_support_violation(q, p):
    with pytest.raises(SupportError):
        kl_divergence(q, p)


@given(st.integers(1, 16).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k - 1))))
def test_target_order_is_distance_ranked(args):
    k, peak = args
    order = gaussian_target_order(k, peak)
    assert sorted(order) == list(range(k))
    assert order[0] == peak
    distances = [abs(i - peak) for i in order]
    assert distances == sorted(distances)


@given(st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=1, max_size=12))
def test_transformed_row_grows_away_from_minimum(values):
    _, row = ot_sort_transform(values)
    data = row.data
    peak = int(np.argmin(values))
    assert data[peak] == min(values)
    for i in range(len(data)):
        for j in range(len(data)):
            if abs(i - peak) < abs(j - peak):
                assert data[i] <= data[j]
