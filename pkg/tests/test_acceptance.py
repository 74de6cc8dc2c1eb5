"""Acceptance criteria, one test each; every test records a pass/fail line.

The lines are printed in pytest's terminal summary (see conftest.py) and
when this file is run directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from orlicz_lorentz.core import INF, StepFn, add, integrate, seq_to_step
from orlicz_lorentz.duality import holder_pairing, norming_supremum, orlicz_norm_amemiya, trivial_dual_probe
from orlicz_lorentz.envelope import envelope_modular_P, envelope_norm, fundamental_G, fundamental_M
from orlicz_lorentz.modular import check_p_concavity, check_superadditive, luxemburg_norm, modular_iv, modular_m
from orlicz_lorentz.oracle import (
    balanced_matrix_check,
    grid_search_P,
    grid_search_P_general,
    min_over_permutations,
    random_balanced_matrix,
    random_equimeasurable,
)
from orlicz_lorentz.orlicz import Expm1, Power
from orlicz_lorentz.rearrange import Permutation, cumulative
from orlicz_lorentz.weights import Weight, inv_w_delta2, is_regular

RESULTS: dict = {}

POWERS = (1.0, 1.5, 2.0, 3.0)

CATALOG = (
    ("w=1, u^2", Weight.constant(), Power(2)),
    ("w=t^-1/2, u^2", Weight.power(0.5), Power(2)),
    ("w=t^-1/4, e^u-1", Weight.power(0.25), Expm1()),
    ("w=step(3,1,0.5), u^1.5", Weight.from_step(StepFn((0, 1, 3, INF), (3, 1, 0.5))), Power(1.5)),
)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)


def rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def decreasing(rng, n, lo=0.1, hi=4.0):
    return sorted(rng.uniform(lo, hi, n).tolist(), reverse=True)


def random_weight(rng):
    k = int(rng.integers(0, 3))
    if k == 0:
        return Weight.power(float(rng.choice([0.0, 0.25, 0.5])))
    m = int(rng.integers(1, 5))
    b = np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 3.0, m))]).tolist() + [INF]
    vals = decreasing(rng, m + 1, 0.2, 4.0)
    if k == 2:
        vals[-1] = 0.0
    return Weight.from_step(StepFn(tuple(b), tuple(vals)))


def test_criterion_01_permutation_minimality():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        w = decreasing(rng, n)
        x = rng.uniform(-5, 5, n).tolist()
        phi = Power(float(rng.choice(POWERS)))
        best, _ = min_over_permutations(x, w, phi)
        worst = max(worst, rel(best, modular_m(x, w, phi)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10
    record(1, ok, f"200 instances, max rel err {worst:.2e} (<= 1e-12), {elapsed:.2f}s (< 10s)")
    assert ok


def test_criterion_02_balanced_matrices():
    rng = np.random.default_rng(102)
    violations, worst = 0, -INF
    for _ in range(500):
        n = int(rng.integers(2, 7))
        w = decreasing(rng, n)
        x = rng.uniform(-5, 5, n).tolist()
        phi = Power(float(rng.choice(POWERS)))
        A = random_balanced_matrix(n, rng, terms=int(rng.integers(1, 2 * n + 1)))
        lhs, rhs = balanced_matrix_check(x, w, A, phi)
        excess = (lhs - rhs) / max(abs(rhs), 1e-300)
        worst = max(worst, excess)
        violations += excess > 1e-12
    ok = violations == 0
    record(2, ok, f"500 instances, {violations} violations, max (lhs-rhs)/rhs {worst:.2e}")
    assert ok


def test_criterion_03_sequence_infimum():
    rng = np.random.default_rng(103)
    violations = missed = 0
    for _ in range(500):
        n = int(rng.integers(2, 8))
        pad = int(rng.integers(0, 4))
        w = decreasing(rng, n)
        N = n + pad
        x = rng.uniform(-5, 5, N)
        x[rng.random(N) < rng.uniform(0, 0.6)] = 0.0
        x = x.tolist()
        phi = Power(float(rng.choice(POWERS)))
        v = random_equimeasurable(w, pad, seed=int(rng.integers(0, 2 ** 31)))
        m = modular_m(x, w, phi)
        iv = modular_iv(x, v, phi)
        violations += not (m <= iv or rel(m, iv) <= 1e-12)
        wp = list(w) + [0.0] * pad
        v_sort = [0.0] * N
        for i, j in enumerate(Permutation.sorting(x).images):
            v_sort[j] = wp[i]
        missed += rel(modular_iv(x, v_sort, phi), m) > 1e-12
    ok = violations == 0 and missed == 0
    record(3, ok, f"500 trials, {violations} lower-bound violations, {missed} sorted-arrangement mismatches")
    assert ok


def test_criterion_04_lp_identity():
    rng = np.random.default_rng(104)
    worst = 0.0
    for i in range(100):
        p = float(rng.choice([1.0, 1.5, 2.0, 2.5, 3.0, 4.0]))
        n = int(rng.integers(1, 8))
        x = rng.uniform(-5, 5, n)
        if i % 2:
            lengths = rng.uniform(0.1, 3.0, n)
            b = tuple(np.concatenate([[0.0], np.cumsum(lengths)]).tolist()) + (INF,)
            f = StepFn(b, tuple(x.tolist()) + (0.0,))
            exact = float(np.sum(np.abs(x) ** p * lengths) ** (1 / p))
        else:
            f = seq_to_step(x.tolist())
            exact = float(np.linalg.norm(x, p))
        worst = max(worst, rel(luxemburg_norm(f, Weight.constant(), Power(p)), exact))
    ok = worst <= 1e-8
    record(4, ok, f"100 instances, max rel err vs exact l_p/L_p norm {worst:.2e} (<= 1e-8)")
    assert ok


def test_criterion_05_l1_identity():
    rng = np.random.default_rng(105)
    worst = 0.0
    w, phi = Weight.constant(), Power(1)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        lengths = rng.uniform(0.2, 2.0, n)
        b = tuple(np.concatenate([[0.0], np.cumsum(lengths)]).tolist()) + (INF,)
        f = StepFn(b, tuple(rng.uniform(-4, 4, n).tolist()) + (0.0,))
        l1 = integrate(f)
        worst = max(worst, abs(luxemburg_norm(f, w, phi) - l1), abs(envelope_norm(f, w, phi) - l1))
    ok = worst <= 1e-6
    record(5, ok, f"50 instances, max |norm - int|f|| {worst:.2e} (<= 1e-6)")
    assert ok


def _feasible(v: StepFn, w: Weight) -> bool:
    if v is None or not v.is_nonincreasing():
        return False
    for lo, hi, c in v.cells():
        if hi == INF:
            if c != 0:
                return False
            continue
        if hi <= w.domain_end and cumulative(v, hi) > w.W(hi) * (1 + 1e-12):
            return False
    return True


def test_criterion_06_envelope_sandwich():
    rng = np.random.default_rng(106)
    bad_bounds = 0
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        lengths = rng.uniform(0.25, 2.0, n)
        b = tuple(np.concatenate([[0.0], np.cumsum(lengths)]).tolist()) + (INF,)
        f = StepFn(b, tuple(rng.uniform(0.1, 3.0, n).tolist()) + (0.0,))
        w = random_weight(rng)
        phi = Expm1() if rng.random() < 0.2 else Power(float(rng.choice(POWERS)))
        sol = envelope_modular_P(f, w, phi)
        bad_bounds += not (sol.lower <= sol.value <= sol.upper and _feasible(sol.minimizer, w))
        worst = max(worst, rel(sol.value, grid_search_P(f, w, phi)))
    ok = bad_bounds == 0 and worst <= 1e-4
    record(6, ok, f"100 runs, {bad_bounds} bound/feasibility breaches, max rel gap to lattice oracle {worst:.2e} (<= 1e-4)")
    assert ok


def test_criterion_07_envelope_fundamental_closed_form():
    worst = 0.0
    for _, w, phi in CATALOG:
        for t in np.logspace(-2, 2, 20):
            Wt = w.W(float(t))
            closed = t / (Wt * phi.inverse(1.0 / Wt))
            chi = StepFn.indicator(float(t))
            worst = max(worst, rel(envelope_norm(chi, w, phi), closed))
    ok = worst <= 1e-6
    record(7, ok, f"20 t x 4 catalog pairs, max rel err {worst:.2e} (<= 1e-6)")
    assert ok


def test_criterion_08_fundamental_sandwich():
    rng = np.random.default_rng(108)
    violations = 0
    for _, w, phi in CATALOG:
        for t in np.exp(rng.uniform(math.log(1e-3), math.log(1e3), 50)):
            F, G, F2 = fundamental_M(t, w, phi), fundamental_G(t, w, phi), fundamental_M(2 * t, w, phi)
            violations += F > G * (1 + 1e-9) or G > F2 * (1 + 1e-9)
    ok = violations == 0
    record(8, ok, f"50 t x 4 catalog pairs, {violations} violations of F(t) <= G(t) <= F(2t) at 1e-9")
    assert ok


def test_criterion_09_weight_verdicts():
    const = is_regular(Weight.constant())
    root = is_regular(Weight.power(0.5))
    d314 = inv_w_delta2(Weight.example314())
    tks = [4.0 ** (-k * k) for k in range(1, 9)]
    d415 = inv_w_delta2(Weight.example415())
    r415 = is_regular(Weight.example415())
    checks = {
        "w=1 regular C=1": const.holds and math.isclose(const.constant, 1.0, rel_tol=1e-9),
        "t^-1/2 regular C=2": root.holds and math.isclose(root.constant, 2.0, rel_tol=1e-9),
        "ex314 1/w not D2 at t_k": (not d314.holds) and any(math.isclose(d314.witness, t, rel_tol=1e-12) for t in tks),
        "ex415 1/w D2": d415.holds,
        "ex415 not regular": not r415.holds,
    }
    ok = all(checks.values())
    record(9, ok, "; ".join(f"{k}: {'ok' if v else 'WRONG'}" for k, v in checks.items())
           + f" (ex314 witness {d314.witness:.6g})")
    assert ok


def test_criterion_10_duality():
    rng = np.random.default_rng(110)
    holder_bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        f = seq_to_step(rng.uniform(-5, 5, n).tolist())
        g = seq_to_step(rng.uniform(-5, 5, n).tolist())
        w = random_weight(rng)
        phi = Power.normalized(float(rng.uniform(1.2, 4.0)))
        pairing, bound = holder_pairing(f, g, w, phi)
        holder_bad += pairing > bound * (1 + 1e-6)
    norming_bad, worst = 0, INF
    for _ in range(100):
        n = int(rng.integers(1, 6))
        f = seq_to_step(decreasing(rng, n))
        w = random_weight(rng)
        phi = Power.normalized(float(rng.uniform(1.2, 4.0)))
        sup = norming_supremum(f, w, phi).value
        ame = orlicz_norm_amemiya(f, w, phi.conjugate_fn()).value
        worst = min(worst, sup / ame)
        norming_bad += sup < 0.95 * ame
    rows, diverges = trivial_dual_probe(Power(2))
    probe_ok = diverges and rows[-1].pairing > 1e3 and all(r.modular <= 1 for r in rows)
    ok = holder_bad == 0 and norming_bad == 0 and probe_ok
    record(10, ok, f"Holder {holder_bad}/200 violations; norming min ratio {worst:.6f} (>= 0.95); "
                   f"probe pairing {rows[-1].pairing:.3g} with max modular {max(r.modular for r in rows):.12f}")
    assert ok


def test_criterion_11_structure():
    rng = np.random.default_rng(111)
    sup_bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        vals = rng.uniform(0, 4, n)
        owner = rng.random(n) < 0.5
        f = seq_to_step(np.where(owner, vals, 0.0).tolist())
        g = seq_to_step(np.where(owner, 0.0, vals).tolist())
        both, parts = check_superadditive(f, g, random_weight(rng), Power(float(rng.choice(POWERS))))
        sup_bad += both < parts * (1 - 1e-12)
    tri_bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        f = seq_to_step(rng.uniform(-4, 4, n).tolist())
        g = seq_to_step(rng.uniform(-4, 4, n).tolist())
        w = random_weight(rng)
        phi = Expm1() if rng.random() < 0.1 else Power(float(rng.choice(POWERS)))
        s = add(f, g)
        nf, ng, ns = envelope_norm(f, w, phi), envelope_norm(g, w, phi), envelope_norm(s, w, phi)
        tri_bad += ns > nf + ng + 1e-6 * (1 + nf + ng)
    ri_worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        pad = int(rng.integers(0, 3))
        x = rng.uniform(0.1, 4, n).tolist()
        w = Weight.from_sequence(decreasing(rng, n + pad, 0.2, 3.0))
        phi = Expm1() if rng.random() < 0.2 else Power(float(rng.choice(POWERS)))
        y = random_equimeasurable(x, pad, seed=int(rng.integers(0, 2 ** 31)))
        P_sorted = envelope_modular_P(seq_to_step(x), w, phi).value
        P_perm = envelope_modular_P(seq_to_step(y), w, phi).value
        # the definition itself, over all v < w with no ordering imposed
        direct = grid_search_P_general(y, w, phi)
        ri_worst = max(ri_worst, rel(P_sorted, P_perm), rel(P_sorted, direct))
    pc_bad = 0
    for _ in range(100):
        p = float(rng.choice(POWERS))
        fs = [seq_to_step(rng.uniform(0, 4, int(rng.integers(2, 6))).tolist()) for _ in range(int(rng.integers(1, 4)))]
        lhs, rhs = check_p_concavity(fs, p, random_weight(rng), Power(p))
        pc_bad += lhs < rhs * (1 - 1e-9)
    ok = sup_bad == 0 and tri_bad == 0 and ri_worst <= 1e-5 and pc_bad == 0
    record(11, ok, f"superadditivity {sup_bad}/200, triangle {tri_bad}/200, "
                   f"rearrangement invariance max rel {ri_worst:.2e} (<= 1e-5), p-concavity {pc_bad}/100")
    assert ok


def test_criterion_12_check_all():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "all.json"
        start = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "orlicz_lorentz.cli", "check", "--all", "--no-timestamp",
                               "--out", str(out)], capture_output=True, text=True, timeout=600)
        elapsed = time.perf_counter() - start
    ok = proc.returncode == 0 and elapsed < 300
    record(12, ok, f"check --all exit {proc.returncode} in {elapsed:.1f}s (< 300s)")
    assert ok, proc.stderr


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
