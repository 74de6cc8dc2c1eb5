from __future__ import annotations

import math

import numpy as np
import pytest

from orlicz_lorentz.core import INF, StepFn, integrate, seq_to_step
from orlicz_lorentz.envelope import (
    check_regular_equivalence,
    envelope_modular_P,
    envelope_modular_p,
    envelope_norm,
    envelope_norm_seq,
    fundamental_G,
    fundamental_M,
    fundamental_M_env,
)
from orlicz_lorentz.modular import luxemburg_norm, modular_M
from orlicz_lorentz.orlicz import Expm1, Power
from orlicz_lorentz.oracle import grid_search_P
from orlicz_lorentz.rearrange import cumulative
from orlicz_lorentz.weights import Weight, w1_envelope


def _feasible(v: StepFn, w: Weight) -> bool:
    if not v.is_nonincreasing():
        return False
    for b in v.breakpoints[1:]:
        if b == INF:
            continue
        if b <= w.domain_end and cumulative(v, b) > w.W(b) * (1 + 1e-12):
            return False
    return True


def test_linear_phi_gives_l1():
    sol = envelope_modular_p([3, 4], [2, 1], Power(1))
    assert sol.value == pytest.approx(7.0, rel=1e-15)
    assert all(c > 0 for c in sol.minimizer.values[:2])


@pytest.mark.parametrize("w", [Weight.constant(), Weight.power(0.5), Weight.power(0.25)], ids=repr)
@pytest.mark.parametrize("phi", [Power(2), Power(1.5), Expm1()], ids=repr)
def test_indicator_closed_form(w, phi):
    for t in (0.3, 1.0, 4.0):
        for c in (0.5, 1.0, 2.0):
            f = StepFn.indicator(t, height=1 / c)
            Wt = w.W(t)
            exact = Wt * float(phi(t / (c * Wt)))
            assert envelope_modular_P(f, w, phi).value == pytest.approx(exact, rel=1e-9)


def test_constant_weight_indicator_value():
    assert envelope_modular_P(StepFn.indicator(3.0), Weight.constant(), Power(2)).value == pytest.approx(3.0)


def test_solution_bookkeeping(rng):
    for _ in range(40):
        n = int(rng.integers(1, 5))
        f = seq_to_step(rng.uniform(0, 3, n).tolist())
        w = Weight.from_sequence(sorted(rng.uniform(0.2, 3, n + 2).tolist(), reverse=True))
        phi = [Power(1.5), Power(2), Expm1()][int(rng.integers(0, 3))]
        sol = envelope_modular_P(f, w, phi)
        assert sol.lower <= sol.value <= sol.upper
        assert sol.lower == modular_M(f, w1_envelope(w), phi)
        assert sol.upper == modular_M(f, w, phi)
        assert _feasible(sol.minimizer, w)


def test_weight_vanishing_before_support():
    # w is zero beyond 1.5 but f lives on (0, 3]; P stays finite while M is infinite
    w = Weight.from_step(StepFn((0, 0.5, 1.5, INF), (3, 1, 0)))
    f = seq_to_step([2, 1, 0.5])
    for phi in (Power(1), Power(2)):
        sol = envelope_modular_P(f, w, phi)
        assert sol.upper == INF
        assert math.isfinite(sol.value) and not math.isnan(sol.clamp)
        assert _feasible(sol.minimizer, w)
        assert sol.value == pytest.approx(grid_search_P(f, w, phi), rel=1e-4)


def test_infinite_cases():
    w = Weight.constant()
    assert envelope_modular_P(StepFn.constant(1), w, Power(2)).value == INF
    assert envelope_modular_P(StepFn.zero(), w, Power(2)).value == 0
    assert envelope_norm(StepFn.zero(), w, Power(2)) == 0


def test_norm_examples():
    assert envelope_norm(StepFn.indicator(4), Weight.constant(), Power(2)) == pytest.approx(2.0, rel=1e-9)
    f = seq_to_step([3, -1, 2.5])
    assert envelope_norm(f, Weight.constant(), Power(1)) == pytest.approx(integrate(f), rel=1e-6)
    assert envelope_norm_seq([3, 4], [1, 1], Power(2)) == pytest.approx(5.0, rel=1e-9)


def test_norm_below_luxemburg(rng):
    for _ in range(60):
        n = int(rng.integers(1, 5))
        f = seq_to_step(rng.uniform(-3, 3, n).tolist())
        w = Weight.power(float(rng.choice([0.0, 0.25, 0.5])))
        phi = Power(float(rng.choice([1.5, 2, 3])))
        assert envelope_norm(f, w, phi) <= luxemburg_norm(f, w, phi) * (1 + 1e-6)


def test_monotone_limits_on_truncations():
    f = seq_to_step([3, 2.5, 2, 1, 0.5])
    w = Weight.power(0.5)
    vals = [envelope_modular_P(f.truncate(k).with_domain(INF), w, Power(2)).value for k in range(1, 6)]
    assert all(b >= a * (1 - 1e-9) for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(envelope_modular_P(f, w, Power(2)).value, rel=1e-9)


def test_fundamental_examples():
    w, phi = Weight.constant(), Power(2)
    assert fundamental_M_env(4, w, phi) == pytest.approx(2.0, rel=1e-15)
    assert fundamental_M(4, w, phi) == pytest.approx(2.0, rel=1e-12)
    assert fundamental_G(4, w, phi) == pytest.approx(2.0, rel=1e-15)
    for t in (0.5, 3.0, 10.0):
        assert fundamental_M_env(t, w, Power(1)) == pytest.approx(t, rel=1e-15)


@pytest.mark.parametrize("w,phi", [(Weight.power(0.5), Power(2)), (Weight.power(0.25), Expm1()),
                                   (Weight.from_step(StepFn((0, 1, 3, INF), (3, 1, 0.5))), Power(1.5))])
def test_fundamental_sandwich(w, phi):
    for t in np.logspace(-2, 2, 9):
        F, G, F2 = fundamental_M(t, w, phi), fundamental_G(t, w, phi), fundamental_M(2 * t, w, phi)
        assert F <= G * (1 + 1e-9) and G <= F2 * (1 + 1e-9)


def test_regular_equivalence_reports(rng):
    fs = [seq_to_step(rng.uniform(0, 3, 3).tolist()) for _ in range(5)]
    rep = check_regular_equivalence(Weight.constant(), Power(2), fs)
    assert rep.holds and max(rep.ratios) <= 1 + 1e-6
    rep = check_regular_equivalence(Weight.power(0.5), Power(2), fs)
    assert rep.holds and rep.bound == pytest.approx(2.0) and max(rep.ratios) <= 2
    rep = check_regular_equivalence(Weight.example415(), Power(2))
    assert not rep.regular.holds and rep.holds


def test_solver_diagnostics_serialize():
    sol = envelope_modular_P(seq_to_step([3, 1, 2]), Weight.power(0.5), Power(2))
    obj = sol.to_json()
    assert {"value", "gap", "lower", "upper", "iterations", "minimizer"} <= set(obj)
    assert sol.gap <= 1e-6 * (1 + sol.value)
