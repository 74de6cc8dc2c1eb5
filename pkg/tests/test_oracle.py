from __future__ import annotations

import numpy as np
import pytest

from orlicz_lorentz.core import INF, StepFn, seq_to_step
from orlicz_lorentz.envelope import envelope_modular_P
from orlicz_lorentz.modular import modular_iv, modular_m
from orlicz_lorentz.oracle import (
    amemiya_grid,
    balanced_matrix_check,
    grid_search_P,
    grid_search_P_general,
    min_over_permutations,
    random_balanced_matrix,
    random_equimeasurable,
)
from orlicz_lorentz.orlicz import Power
from orlicz_lorentz.rearrange import rearrange_seq
from orlicz_lorentz.weights import Weight


def test_permutation_example():
    best, perm = min_over_permutations([8, 1], [4, 1], Power(2))
    assert best == 17 and perm.images == (0, 1)
    assert modular_iv([8, 1], [1, 4], Power(2)) == 64.25


def test_constant_x_ties():
    best, perm = min_over_permutations([2, 2, 2], [3, 2, 1], Power(2))
    assert perm.images == (0, 1, 2)
    assert best == modular_m([2, 2, 2], [3, 2, 1], Power(2))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        min_over_permutations(list(range(9)), [1] * 9, Power(2))


def test_zero_padded_weight_forces_infinity():
    assert min_over_permutations([1, 2, 3], [2, 1, 0], Power(2))[0] == INF
    assert modular_m([1, 2, 3], [2, 1, 0], Power(2)) == INF


def test_balanced_matrix_examples():
    x, w = [3, 1, 2], [3, 2, 1]
    lhs, rhs = balanced_matrix_check(x, w, np.eye(3, dtype=int), Power(2))
    assert lhs == rhs
    lhs, rhs = balanced_matrix_check(x, w, np.ones((3, 3), dtype=int), Power(2))
    assert lhs == pytest.approx(3 * modular_m(x, w, Power(2)))
    xs = rearrange_seq(x)
    direct = sum(float(Power(2)(xs[i] / w[j])) * w[j] for i in range(3) for j in range(3))
    assert rhs == pytest.approx(direct)
    assert lhs <= rhs


def test_balanced_matrix_rejects_unbalanced():
    A = np.array([[0, 1], [0, 0]])
    with pytest.raises(ValueError, match="row 0"):
        balanced_matrix_check([1, 2], [2, 1], A, Power(2))


def test_random_balanced_matrices_balanced(rng):
    for _ in range(50):
        A = random_balanced_matrix(5, rng)
        assert (A.sum(axis=0) == A.sum(axis=1)).all()


def test_random_equimeasurable():
    y = random_equimeasurable([2, 1], 0, seed=3)
    assert sorted(y) == [1, 2]
    for seed in range(1000):
        z = random_equimeasurable([2, 1, 5], 2, seed=seed)
        assert rearrange_seq(z) == [5, 2, 1, 0, 0]


def test_grid_oracle_linear_and_indicator():
    f = seq_to_step([3, 4])
    assert grid_search_P(f, Weight.constant(), Power(1)) == pytest.approx(7.0, rel=1e-12)
    chi = StepFn.indicator(2.0, height=0.5)
    w = Weight.power(0.5)
    exact = w.W(2.0) * float(Power(2)(2.0 / (2 * w.W(2.0))))
    assert grid_search_P(chi, w, Power(2)) == pytest.approx(exact, rel=1e-6)


def test_grid_oracle_refinement_monotone():
    f = seq_to_step([3, 1.5, 1])
    w = Weight.from_sequence([3, 1, 0.5])
    vals = [grid_search_P(f, w, Power(2), resolution=r, zoom_rounds=0) for r in (5, 10, 20, 40)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_grid_oracle_agrees_with_solver(rng):
    for _ in range(10):
        f = seq_to_step(rng.uniform(0.2, 3, 3).tolist())
        w = Weight.from_sequence(sorted(rng.uniform(0.2, 3, 4).tolist(), reverse=True))
        a = envelope_modular_P(f, w, Power(2)).value
        assert grid_search_P(f, w, Power(2)) == pytest.approx(a, rel=1e-4)
        assert grid_search_P_general(list(rng.permutation([1.0, 2.0, 0.0, 3.0])), w, Power(2)) == \
            pytest.approx(envelope_modular_P(seq_to_step([3, 2, 1]), w, Power(2)).value, rel=1e-4)


def test_amemiya_grid():
    ks = np.linspace(0.01, 5, 2000)
    assert amemiya_grid([1.0], [1.0], Power(2), ks) == pytest.approx(2.0, rel=1e-5)
