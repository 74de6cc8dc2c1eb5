"""Seeded property suites, one per verified statement.

Each suite is a function ``(rng, ctx) -> list[Outcome]`` run once per
trial.  The generator of trial ``i`` is seeded by an integer drawn from
``SeedSequence([seed, i])``; that integer is reported with every row, so a
failing trial can be replayed alone.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import INF, StepFn, pointwise_compose, seq_to_step
from .duality import holder_pairing, norming_supremum, orlicz_norm_amemiya, trivial_dual_probe
from .envelope import (
    check_regular_equivalence,
    envelope_modular_P,
    envelope_norm,
    fundamental_G,
    fundamental_M,
)
from .modular import (
    check_p_concavity,
    check_superadditive,
    luxemburg_norm,
    modular_iv,
    modular_m,
)
from .oracle import (
    balanced_matrix_check,
    grid_search_P,
    grid_search_P_general,
    min_over_permutations,
    random_balanced_matrix,
    random_equimeasurable,
)
from .orlicz import Expm1, OrliczFn, PiecewiseLinear, Power
from .rearrange import Permutation, exchange_inequality, hardy_littlewood_check
from .report import CheckReport, TrialRow, digest
from .weights import Weight, is_regular


class PreconditionError(ValueError):
    """An injected instance violates a suite's precondition."""


@dataclass
class Outcome:
    lhs: float
    rhs: float
    ok: bool
    inputs: dict = field(default_factory=dict)
    check: str = ""
    note: str = ""


@dataclass
class Context:
    tol: float = 1e-6
    phi: OrliczFn | None = None
    weight: Weight | None = None
    instance: dict | None = None
    trial: int = 0


# ---------------------------------------------------------------------------
# generators


def _le(a, b, rtol):
    """``a <= b`` up to relative ``rtol`` (inf-aware)."""
    if b == INF:
        return True
    if a == INF:
        return False
    return a <= b + rtol * max(abs(b), abs(a), 1e-300)


def _close(a, b, rtol):
    if a == INF or b == INF:
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def rand_power(rng, ps=(1.0, 1.5, 2.0, 3.0)) -> Power:
    return Power(float(rng.choice(ps)))


def rand_phi(rng, ctx: Context, expm1_rate=0.2) -> OrliczFn:
    if ctx.phi is not None:
        return ctx.phi
    if rng.random() < expm1_rate:
        return Expm1()
    return rand_power(rng, (1.0, 1.5, 2.0, 3.0))


def rand_smooth_power(rng, ctx: Context) -> Power:
    if ctx.phi is not None:
        return ctx.phi
    return Power.normalized(float(rng.uniform(1.2, 4.0)))


def rand_decreasing(rng, n, lo=0.1, hi=4.0) -> list:
    return sorted(rng.uniform(lo, hi, n).tolist(), reverse=True)


def rand_seq(rng, n, zero_rate=0.2, signed=True) -> list:
    x = rng.uniform(-5 if signed else 0, 5, n)
    x[rng.random(n) < zero_rate] = 0.0
    return x.tolist()


def rand_step(rng, n, max_value=4.0, zero_rate=0.15) -> StepFn:
    """Random step function on ``(0, inf)`` with ``n`` finite cells and a zero tail."""
    lengths = rng.uniform(0.25, 2.0, n)
    b = np.concatenate([[0.0], np.cumsum(lengths)]).tolist()
    v = rng.uniform(0.0, max_value, n)
    v[rng.random(n) < zero_rate] = 0.0
    return StepFn(tuple(b) + (INF,), tuple(v.tolist()) + (0.0,))


def rand_weight(rng, ctx: Context) -> Weight:
    if ctx.weight is not None:
        return ctx.weight
    kind = rng.integers(0, 3)
    if kind == 0:
        return Weight.power(float(rng.choice([0.0, 0.25, 0.5])))
    n = int(rng.integers(1, 6))
    lengths = rng.uniform(0.3, 3.0, n)
    b = np.concatenate([[0.0], np.cumsum(lengths)]).tolist() + [INF]
    vals = rand_decreasing(rng, n + 1, 0.2, 4.0)
    if kind == 2:
        vals[-1] = 0.0
    return Weight.from_step(StepFn(tuple(b), tuple(vals)))


def _winfo(w: Weight) -> dict:
    return w.to_json()


# ---------------------------------------------------------------------------
# suites


def suite_prop_finite(rng, ctx):
    n = int(rng.integers(2, 8))
    w = rand_decreasing(rng, n)
    x = rand_seq(rng, n)
    phi = ctx.phi or rand_power(rng)
    best, perm = min_over_permutations(x, w, phi)
    m = modular_m(x, w, phi)
    return [Outcome(best, m, _close(best, m, 1e-12), {"x": x, "w": w, "phi": phi.to_json()},
                    note=f"argmin {list(perm.images)}")]


def suite_balanced_matrix(rng, ctx):
    n = int(rng.integers(2, 7))
    w = rand_decreasing(rng, n)
    x = rand_seq(rng, n)
    phi = ctx.phi or rand_power(rng)
    A = random_balanced_matrix(n, rng, terms=int(rng.integers(1, 2 * n + 1)))
    lhs, rhs = balanced_matrix_check(x, w, A, phi)
    return [Outcome(lhs, rhs, _le(lhs, rhs, 1e-12),
                    {"x": x, "w": w, "A": A.tolist(), "phi": phi.to_json()})]


def suite_seq_infimum(rng, ctx):
    n = int(rng.integers(2, 8))
    pad = int(rng.integers(0, 4))
    w = rand_decreasing(rng, n)
    N = n + pad
    x = rand_seq(rng, N, zero_rate=float(rng.uniform(0.0, 0.6)))
    phi = ctx.phi or rand_power(rng)
    v = random_equimeasurable(w, pad, seed=int(rng.integers(0, 2 ** 31)))
    m = modular_m(x, w, phi)
    iv = modular_iv(x, v, phi)
    # the sorting arrangement attains m(x)
    perm = Permutation.sorting(x).images
    wp = list(w) + [0.0] * pad
    v_sort = [0.0] * N
    for i, j in enumerate(perm):
        v_sort[j] = wp[i]
    iv_sort = modular_iv(x, v_sort, phi)
    inputs = {"x": x, "w": w, "v": v, "phi": phi.to_json()}
    return [
        Outcome(m, iv, _le(m, iv, 1e-12), inputs, check="lower-bound"),
        Outcome(iv_sort, m, _close(iv_sort, m, 1e-12), inputs, check="equality"),
    ]


def suite_sandwich(rng, ctx):
    n = int(rng.integers(1, 4))
    f = rand_step(rng, n, max_value=3.0, zero_rate=0.0)
    w = rand_weight(rng, ctx)
    phi = rand_phi(rng, ctx)
    sol = envelope_modular_P(f, w, phi)
    grid = grid_search_P(f, w, phi)
    v = sol.minimizer
    inputs = {"f": f.to_json(), "w": _winfo(w), "phi": phi.to_json()}
    bounds = sol.lower <= sol.value <= sol.upper
    feasible = v is not None and v.is_nonincreasing() and _minimizer_feasible(v, w)
    return [
        Outcome(sol.lower, sol.value, bounds and sol.lower <= sol.value, inputs, check="lower"),
        Outcome(sol.value, sol.upper, bounds and feasible, inputs, check="upper"),
        Outcome(sol.value, grid, _close(sol.value, grid, 1e-4), inputs, check="oracle"),
    ]


def _minimizer_feasible(v: StepFn, w: Weight) -> bool:
    """``int_0^t v <= W(t)`` at every breakpoint of the decreasing ``v``."""
    total = 0.0
    for lo, hi, c in v.cells():
        if hi == INF:
            return c == 0
        total += c * (hi - lo)
        if hi <= w.domain_end and total > w.W(hi):
            return False
    return True


def suite_superadditive(rng, ctx):
    n = int(rng.integers(2, 7))
    vals = rng.uniform(0, 4, n)
    owner = rng.random(n) < 0.5
    f = seq_to_step(np.where(owner, vals, 0.0).tolist())
    g = seq_to_step(np.where(owner, 0.0, vals).tolist())
    w = rand_weight(rng, ctx)
    phi = rand_phi(rng, ctx)
    both, parts = check_superadditive(f, g, w, phi)
    return [Outcome(parts, both, _le(parts, both, 1e-12),
                    {"f": f.to_json(), "g": g.to_json(), "w": _winfo(w), "phi": phi.to_json()})]


def suite_p_concavity(rng, ctx):
    p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    phi = ctx.phi or Power(p)
    if ctx.phi is not None:
        p = phi.homogeneity or p
    k = int(rng.integers(1, 4))
    n = int(rng.integers(2, 6))
    fs = [seq_to_step(rand_seq(rng, n, signed=False)) for _ in range(k)]
    w = rand_weight(rng, ctx)
    lhs, rhs = check_p_concavity(fs, p, w, phi)
    return [Outcome(rhs, lhs, _le(rhs, lhs, 1e-9),
                    {"fs": [f.to_json() for f in fs], "p": p, "w": _winfo(w), "phi": phi.to_json()})]


def suite_ri_envelope(rng, ctx):
    n = int(rng.integers(1, 4))
    pad = int(rng.integers(0, 3))
    x = rng.uniform(0.2, 3.0, n).tolist()
    w = ctx.weight or Weight.from_sequence(rand_decreasing(rng, n + pad, 0.2, 3.0))
    phi = rand_phi(rng, ctx)
    y = random_equimeasurable(x, pad, seed=int(rng.integers(0, 2 ** 31)))
    P_sorted = envelope_modular_P(seq_to_step(x), w, phi).value
    P_perm = envelope_modular_P(seq_to_step(y), w, phi).value
    direct = grid_search_P_general(y, w, phi)
    inputs = {"x": x, "y": y, "w": _winfo(w), "phi": phi.to_json()}
    return [
        Outcome(P_sorted, direct, _close(P_sorted, direct, 1e-5), inputs, check="definition"),
        Outcome(P_sorted, P_perm, _close(P_sorted, P_perm, 1e-5), inputs, check="permuted"),
    ]


def suite_convexity_envelope(rng, ctx):
    n = int(rng.integers(1, 6))
    f = seq_to_step(rand_seq(rng, n))
    g = seq_to_step(rand_seq(rng, n))
    w = rand_weight(rng, ctx)
    phi = rand_phi(rng, ctx, expm1_rate=0.1)
    tol = ctx.tol
    s = pointwise_compose(f, g, lambda a, b: a + b)
    h = pointwise_compose(f, g, lambda a, b: (a + b) / 2)
    nf, ng, ns = (envelope_norm(z, w, phi) for z in (f, g, s))
    Pf, Pg, Ph = (envelope_modular_P(z, w, phi).value for z in (f, g, h))
    inputs = {"f": f.to_json(), "g": g.to_json(), "w": _winfo(w), "phi": phi.to_json()}
    mid = (Pf + Pg) / 2
    return [
        Outcome(ns, nf + ng, ns <= nf + ng + tol * (1 + nf + ng), inputs, check="triangle"),
        Outcome(Ph, mid, Ph <= mid + tol * (1 + mid), inputs, check="midpoint"),
    ]


FUNDAMENTAL_CATALOG = (
    ("constant", lambda: Weight.constant(), lambda: Power(2)),
    ("power-1/2", lambda: Weight.power(0.5), lambda: Power(2)),
    ("power-1/4", lambda: Weight.power(0.25), lambda: Expm1()),
    ("step", lambda: Weight.from_step(StepFn((0, 1, 3, INF), (3, 1, 0.5))), lambda: Power(1.5)),
)


def suite_fundamental_sandwich(rng, ctx):
    out = []
    pairs = FUNDAMENTAL_CATALOG
    if ctx.weight is not None or ctx.phi is not None:
        pairs = (("spec", lambda: ctx.weight or Weight.constant(), lambda: ctx.phi or Power(2)),)
    for name, mk_w, mk_phi in pairs:
        w, phi = mk_w(), mk_phi()
        hi = w.domain_end / 2 if w.domain_end < INF else 1e3
        lo = max(w.floor * 2, hi * 1e-6)
        t = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
        F, G, F2 = fundamental_M(t, w, phi), fundamental_G(t, w, phi), fundamental_M(2 * t, w, phi)
        inputs = {"t": t, "w": _winfo(w), "phi": phi.to_json()}
        out.append(Outcome(F, G, _le(F, G, 1e-9), inputs, check=f"{name}:lower"))
        out.append(Outcome(G, F2, _le(G, F2, 1e-9), inputs, check=f"{name}:upper"))
    return out


REGULAR_CATALOG = (
    ("constant", lambda: Weight.constant(), lambda: Power(2)),
    ("power-1/2", lambda: Weight.power(0.5), lambda: Power(2)),
)


def suite_regular_equivalence(rng, ctx):
    out = []
    n = int(rng.integers(1, 5))
    f = seq_to_step(rand_seq(rng, n))
    pairs = REGULAR_CATALOG
    if ctx.weight is not None or ctx.phi is not None:
        pairs = (("spec", lambda: ctx.weight or Weight.constant(), lambda: ctx.phi or Power(2)),)
    for name, mk_w, mk_phi in pairs:
        w, phi = mk_w(), mk_phi()
        reg = is_regular(w)
        inputs = {"f": f.to_json(), "w": _winfo(w), "phi": phi.to_json()}
        if not reg:
            rep = check_regular_equivalence(w, phi)
            out.append(Outcome(max(rep.ratios), 1.0, rep.holds, inputs, check=f"{name}:unbounded"))
            continue
        a, b = luxemburg_norm(f, w, phi), envelope_norm(f, w, phi, 1e-9)
        C = reg.constant
        out.append(Outcome(b, a, _le(b, a, 1e-7), inputs, check=f"{name}:embedding"))
        out.append(Outcome(a, C * b, _le(a, C * b, 1e-6), inputs, check=f"{name}:equivalence"))
    return out


def suite_regular_equivalence_nonregular(ctx):
    """Example-weight row, run once per report."""
    w, phi = Weight.example415(), Power(2)
    rep = check_regular_equivalence(w, phi)
    return Outcome(max(rep.ratios), min(rep.ratios), rep.holds,
                   {"w": _winfo(w), "phi": phi.to_json()}, check="example415:unbounded")


def suite_holder(rng, ctx):
    n = int(rng.integers(1, 6))
    f = seq_to_step(rand_seq(rng, n))
    g = seq_to_step(rand_seq(rng, n))
    w = rand_weight(rng, ctx)
    phi = rand_smooth_power(rng, ctx)
    pairing, bound = holder_pairing(f, g, w, phi)
    return [Outcome(pairing, bound, pairing <= bound * (1 + 1e-6),
                    {"f": f.to_json(), "g": g.to_json(), "w": _winfo(w), "phi": phi.to_json()})]


def suite_norming(rng, ctx):
    n = int(rng.integers(1, 6))
    f = seq_to_step(sorted(rng.uniform(0.1, 4.0, n).tolist(), reverse=True))
    w = rand_weight(rng, ctx)
    phi = rand_smooth_power(rng, ctx)
    sup = norming_supremum(f, w, phi)
    ame = orlicz_norm_amemiya(f, w, phi.conjugate_fn()).value
    inputs = {"f": f.to_json(), "w": _winfo(w), "phi": phi.to_json()}
    return [
        Outcome(sup.value, ame, sup.value >= 0.95 * ame, inputs, check="norming"),
        Outcome(sup.value, ame, sup.value <= ame * (1 + 1e-6), inputs, check="holder-side"),
    ]


TRIVIAL_DUAL_PHIS = (Power(2), Power(1.5), Power.normalized(3), Power(4))


def suite_trivial_dual(rng, ctx):
    phi = ctx.phi or TRIVIAL_DUAL_PHIS[ctx.trial % len(TRIVIAL_DUAL_PHIS)]
    rows, diverges = trivial_dual_probe(phi)
    out = [Outcome(rows[-1].pairing, 1e3, diverges, {"phi": phi.to_json()}, check="pairing")]
    out.append(Outcome(max(r.modular for r in rows), 1.0, all(r.modular <= 1 + 1e-12 for r in rows),
                       {"phi": phi.to_json()}, check="unit-ball"))
    return out


def suite_hl_pairing(rng, ctx):
    n = int(rng.integers(1, 7))
    lengths = rng.uniform(0.25, 2.0, n)
    b = tuple(np.concatenate([[0.0], np.cumsum(lengths)]).tolist()) + (INF,)
    f = StepFn(b, tuple(rand_seq(rng, n)) + (0.0,))
    g = StepFn(b, tuple(rand_seq(rng, n)) + (0.0,))
    lhs, rhs = hardy_littlewood_check(f, g)
    inputs = {"f": f.to_json(), "g": g.to_json()}
    out = [Outcome(lhs, rhs, _le(lhs, rhs, 1e-12), inputs, check="pairing")]
    x, y = [abs(v) for v in rand_seq(rng, n)], [abs(v) for v in rand_seq(rng, n)]
    best = max(math.fsum(a * y[j] for a, j in zip(x, perm)) for perm in itertools.permutations(range(n)))
    _, sorted_side = hardy_littlewood_check(seq_to_step(x), seq_to_step(y))
    out.append(Outcome(best, sorted_side, _close(best, sorted_side, 1e-12), {"x": x, "y": y},
                       check="permutation-max"))
    return out


def suite_exchange(rng, ctx):
    if ctx.instance:
        inst = ctx.instance
        try:
            s1, s2, t1, t2 = (float(inst[k]) for k in ("s1", "s2", "t1", "t2"))
        except KeyError as exc:
            raise PreconditionError(f"exchange instance missing field {exc.args[0]!r}") from None
        phi = ctx.phi or Power(2)
        try:
            lhs, rhs = exchange_inequality(s1, s2, t1, t2, phi)
        except ValueError as exc:
            raise PreconditionError(str(exc)) from None
        return [Outcome(lhs, rhs, _le(lhs, rhs, 1e-12), dict(inst))]
    s2, s1 = sorted(rng.uniform(0.05, 5.0, 2))
    t2, t1 = sorted(rng.uniform(0.05, 5.0, 2))
    if not (s1 > s2 and t1 > t2):
        s1, t1 = s1 * 1.5, t1 * 1.5
    choice = rng.integers(0, 3)
    phi = ctx.phi or [rand_power(rng), Expm1(), PiecewiseLinear(((1.0, 1.0), (2.0, 3.0), (3.0, 7.0)))][choice]
    lhs, rhs = exchange_inequality(s1, s2, t1, t2, phi)
    return [Outcome(lhs, rhs, _le(lhs, rhs, 1e-12),
                    {"s": [s1, s2], "t": [t1, t2], "phi": phi.to_json()})]


@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable
    trials: int
    statement: str


SUITES = {
    s.name: s
    for s in (
        Suite("prop-finite", suite_prop_finite, 200, "sorted arrangement minimizes the finite sum"),
        Suite("balanced-matrix", suite_balanced_matrix, 500, "balanced-matrix inequality"),
        Suite("seq-infimum", suite_seq_infimum, 500, "m(x) <= I_v(x) for v ~ w, equality when sorted"),
        Suite("sandwich", suite_sandwich, 100, "M_1 <= P <= M and lattice oracle agreement"),
        Suite("superadditive", suite_superadditive, 200, "M disjointly superadditive"),
        Suite("p-concavity", suite_p_concavity, 100, "p-concavity of ||.||_M for phi = u^p"),
        Suite("ri-envelope", suite_ri_envelope, 100, "P rearrangement invariant, decreasing v suffice"),
        Suite("convexity-envelope", suite_convexity_envelope, 200, "P convex, envelope norm subadditive"),
        Suite("fundamental-sandwich", suite_fundamental_sandwich, 50, "F_M(t) <= G_M(t) <= F_M(2t)"),
        Suite("regular-equivalence", suite_regular_equivalence, 50, "regular w: norms equivalent"),
        Suite("holder", suite_holder, 200, "Holder inequality with the Orlicz norm"),
        Suite("norming", suite_norming, 100, "unit ball of M is norming"),
        Suite("trivial-dual", suite_trivial_dual, 4, "W = inf: pairings diverge on the unit ball"),
        Suite("hl-pairing", suite_hl_pairing, 200, "Hardy-Littlewood pairing inequality"),
        Suite("exchange", suite_exchange, 200, "two-term exchange inequality"),
    )
}


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, dtype=np.uint64)[0] >> 1)


def run_trial(suite: str, seed: int, trial: int, ctx: Context) -> list:
    ts = trial_seed(seed, trial)
    rng = np.random.default_rng(ts)
    outcomes = SUITES[suite].run(rng, replace(ctx, trial=trial))
    return [
        TrialRow(f"{suite}/{o.check}" if o.check else suite, trial, ts, float(o.lhs), float(o.rhs),
                 bool(o.ok), digest(o.inputs), o.note)
        for o in outcomes
    ]


def _run_trial_star(args):
    return run_trial(*args)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("OLK_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(name: str, trials: int | None = None, seed: int = 0, ctx: Context | None = None) -> CheckReport:
    if name not in SUITES:
        raise KeyError(name)
    ctx = ctx or Context()
    suite = SUITES[name]
    trials = suite.trials if trials is None else trials
    if name == "exchange" and ctx.instance:
        trials = 1
    start = time.perf_counter()
    jobs = [(name, seed, i, ctx) for i in range(trials)]
    workers = min(_threads(), max(trials, 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_trial_star, jobs))
    else:
        chunks = [_run_trial_star(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    if name == "regular-equivalence" and ctx.weight is None and ctx.phi is None:
        o = suite_regular_equivalence_nonregular(ctx)
        rows.append(TrialRow(f"{name}/{o.check}", trials, 0, o.lhs, o.rhs, o.ok, digest(o.inputs)))
    report = CheckReport(name, trials, seed, ctx.tol, rows)
    report.wall_time = time.perf_counter() - start
    report.config = {
        "statement": suite.statement,
        "phi": ctx.phi.to_json() if ctx.phi is not None else None,
        "weight": ctx.weight.to_json() if ctx.weight is not None else None,
        "instance": ctx.instance,
        "threads": workers,
    }
    return report
