from __future__ import annotations

import math

import numpy as np
import pytest

from orlicz_lorentz.core import INF, StepFn
from orlicz_lorentz.orlicz import Expm1, Power
from orlicz_lorentz.weights import (
    Weight,
    as_weight,
    inv_w_delta2,
    is_phi_controlled,
    is_regular,
    w1_envelope,
)

CATALOG = [
    Weight.constant(),
    Weight.constant(2.0, a=5.0),
    Weight.power(0.5),
    Weight.power(0.25),
    Weight.from_step(StepFn((0, 1, 3, INF), (3, 1, 0.5))),
    Weight.from_sequence([4, 2, 1]),
    Weight.example314(),
    Weight.example415(),
]


def _grid(w, n=97):
    return [t for t in w.sample_points(n) if t < w.domain_end]


@pytest.mark.parametrize("w", CATALOG, ids=repr)
def test_catalog_invariants(w):
    ts = _grid(w)
    vals = [w(t) for t in ts]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    ratio = [w.W(t) / t for t in ts]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(ratio, ratio[1:]))
    w1 = w1_envelope(w)
    w1v = [w1(t) for t in ts]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(w1v, vals))
    assert all(b <= a * (1 + 1e-12) for a, b in zip(w1v, w1v[1:]))


def test_cumulative_closed_forms():
    assert Weight.constant(3.0).W(2.0) == 6.0
    assert math.isclose(Weight.power(0.5).W(4.0), 4.0, rel_tol=1e-15)
    w = Weight.from_step(StepFn((0, 1, 3, INF), (3, 1, 0.5)))
    assert w.W(2.0) == 4.0
    assert w.W(5.0) == 6.0
    assert w.mass(0.5, 2.0) == 2.5


def test_regular_examples():
    v = is_regular(Weight.constant())
    assert v.holds and v.constant == pytest.approx(1.0, rel=1e-12)
    v = is_regular(Weight.power(0.5))
    assert v.holds and v.constant == pytest.approx(2.0, rel=1e-12)
    assert not is_regular(Weight.example415()).holds


def test_inv_w_delta2_examples():
    assert inv_w_delta2(Weight.constant()).holds
    v = inv_w_delta2(Weight.example314())
    assert not v.holds
    tks = [4.0 ** (-k * k) for k in range(1, 9)]
    assert any(math.isclose(v.witness, t, rel_tol=1e-12) for t in tks)
    assert inv_w_delta2(Weight.example415()).holds


def test_phi_controlled_examples():
    v = is_phi_controlled(Weight.constant(), Expm1())
    assert v.holds and v.constant == pytest.approx(1.0)
    v = is_phi_controlled(Weight.power(0.5), Power(1))
    assert v.holds and v.constant == pytest.approx(1.0)
    assert not is_phi_controlled(Weight.example314(), Power(2)).holds


def test_regular_implies_inv_delta2():
    for w in CATALOG:
        if is_regular(w).holds:
            assert inv_w_delta2(w).holds, w


def test_example314_below_inverse_sqrt():
    w = Weight.example314()
    for b in w.breakpoints[1:]:
        if b <= 1:
            assert w.right_value(b) <= b ** -0.5 * (1 + 1e-12) or w(b) <= b ** -0.5 * (1 + 1e-12)


def test_truncated_weight_raises_below_floor():
    w = Weight.example314()
    with pytest.raises(ValueError):
        w(w.floor / 2)


def test_w1_examples():
    w1 = w1_envelope(Weight.constant())
    assert all(w1(t) == pytest.approx(1.0, rel=1e-15) for t in (0.01, 1.0, 100.0))
    w1 = w1_envelope(Weight.from_step(StepFn((0, 1, INF), (2, 0))))
    assert w1(0.5) == pytest.approx(2.0)
    assert w1(1.0) == pytest.approx(2.0)
    assert w1(2.0) == pytest.approx(1.0)
    assert w1(3.0) == pytest.approx(2.0 / 3.0)


def test_w1_bounded_by_regularity_constant():
    w = Weight.power(0.5)
    C = is_regular(w).constant
    w1 = w1_envelope(w)
    for t in np.logspace(-4, 4, 33):
        assert w1(t) <= C * w(t) * (1 + 1e-9)


def test_json_and_coercion():
    for w in (Weight.constant(2.0, a=5.0), Weight.power(0.5), Weight.example415(kmax=4)):
        again = Weight.from_json(w.to_json())
        assert again.W(0.5) == w.W(0.5)
    w = as_weight([3, 2, 1])
    assert w.W(3.0) == 6.0
    with pytest.raises(ValueError):
        Weight.from_json({"kind": "mystery"})


def test_increasing_weight_rejected():
    with pytest.raises(ValueError):
        Weight.from_sequence([1, 2])
