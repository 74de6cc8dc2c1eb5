"""The envelope functional ``P``, its norm and the fundamental functions.

``P(f) = inf { int phi(f*/v) v : v >= 0 decreasing, v < w }``.  On the
cells of f* the optimal ``v`` may be taken constant (averaging within a
cell keeps the constraints and, by convexity of ``psi(s, t) = phi(s/t) t``
in ``t``, does not raise the objective), so the problem is finite
dimensional.  It is solved in increment variables ``u_k = v_k - v_{k+1}``
by a log-barrier Newton method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .core import INF, StepFn, seq_to_step
from .modular import luxemburg_norm, modular_M
from .orlicz import OrliczFn, Power
from .rearrange import decreasing_rearrangement
from .verdict import Verdict, trend_unbounded
from .weights import Weight, as_weight, is_regular, w1_envelope


@dataclass
class EnvelopeSolution:
    value: float
    minimizer: StepFn | None
    gap: float
    lower: float
    upper: float
    iterations: int = 0
    method: str = "barrier"
    clamp: float = 0.0

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "gap": self.gap,
            "lower": self.lower,
            "upper": self.upper,
            "iterations": self.iterations,
            "method": self.method,
            "minimizer": self.minimizer.to_json() if self.minimizer is not None else None,
        }


@dataclass
class _Problem:
    s: np.ndarray        # f* values on its positive cells
    ell: np.ndarray      # cell lengths
    cum: np.ndarray      # right breakpoints
    Wk: np.ndarray       # W at the right breakpoints
    phi: OrliczFn
    domain: float
    A: np.ndarray = field(init=False)
    Bm: np.ndarray = field(init=False)

    def __post_init__(self):
        n = len(self.s)
        idx = np.arange(n)
        self.A = self.cum[np.minimum.outer(idx, idx)]
        self.Bm = np.triu(np.ones((n, n)))

    @property
    def n(self):
        return len(self.s)

    def objective(self, v):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            r = self.s / v
            val = np.asarray(self.phi(r), dtype=float) * v * self.ell
        if np.any(~np.isfinite(val)) or np.any(v <= 0):
            return INF
        return math.fsum(val)

    def grad_hess(self, v):
        r = self.s / v
        g = (np.asarray(self.phi(r)) - r * np.asarray(self.phi.deriv(r))) * self.ell
        h = np.asarray(self.phi.second_deriv(r)) * r * r / v * self.ell
        return g, h

    def feasible(self, v) -> bool:
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            return False
        V = np.cumsum(v * self.ell)
        return bool(np.all(V <= self.Wk))

    def step(self, v) -> StepFn:
        b = (0.0,) + tuple(float(x) for x in self.cum)
        vals = tuple(float(x) for x in v)
        if b[-1] < self.domain:
            b, vals = b + (self.domain,), vals + (0.0,)
        return StepFn(b, vals)


def _setup(f: StepFn, w: Weight, phi: OrliczFn):
    fs = decreasing_rearrangement(f)
    cells = [(lo, hi, c) for lo, hi, c in fs.cells() if c > 0]
    if not cells:
        return None
    if cells[-1][1] == INF:
        return INF
    end = cells[-1][1]
    if end > w.domain_end:
        raise ValueError(f"f* is supported beyond the weight domain (0, {w.domain_end!r}]")
    cum = np.array([float(hi) for _, hi, _ in cells])
    Wk = np.array([w.W(float(b)) for b in cum])
    if Wk[0] <= 0:
        return INF
    return _Problem(
        s=np.array([float(c) for _, _, c in cells]),
        ell=np.array([float(hi - lo) for lo, hi, _ in cells]),
        cum=cum, Wk=Wk, phi=phi, domain=float(fs.domain_end),
    )


def _averaged(pr: _Problem) -> np.ndarray:
    """``w`` averaged over the cells: feasible, decreasing, ``V = W`` at breakpoints."""
    prev = np.concatenate([[0.0], pr.Wk[:-1]])
    v = (pr.Wk - prev) / pr.ell
    return np.minimum.accumulate(v)


def _repair(pr: _Problem, v: np.ndarray) -> np.ndarray:
    """Shrink ``v`` until the float feasibility check passes exactly."""
    v = np.minimum.accumulate(np.maximum(v, 0.0))
    for _ in range(60):
        if pr.feasible(v):
            return v
        V = np.cumsum(v * pr.ell)
        ratio = float(np.max(V / pr.Wk))
        v = v / max(ratio, 1.0) * (1 - 1e-15)
    raise RuntimeError("could not restore feasibility")


def _interior_start(pr: _Problem) -> np.ndarray:
    """Strictly decreasing positive ``v`` with every constraint at half slack or better."""
    n = pr.n
    v0 = pr.Wk / pr.cum * (1 - np.arange(n) / (2 * n))
    V0 = np.cumsum(v0 * pr.ell)
    return v0 * 0.5 / float(np.max(V0 / pr.Wk))


def _barrier(pr: _Problem, tol: float, max_outer=40, max_newton=200):
    n = pr.n
    m = 2 * n
    Bm, A = pr.Bm, pr.A
    v0 = _interior_start(pr)
    u = np.concatenate([-np.diff(v0), [v0[-1]]])

    F0 = pr.objective(Bm @ u)
    if not math.isfinite(F0):
        return None
    tau = m / max(abs(F0), 1e-300)
    iters = 0

    def barrier_val(u, tau):
        if np.any(u <= 0):
            return INF
        sl = pr.Wk - A @ u
        if np.any(sl <= 0):
            return INF
        F = pr.objective(Bm @ u)
        if not math.isfinite(F):
            return INF
        return tau * F - np.sum(np.log(u)) - np.sum(np.log(sl))

    for _ in range(max_outer):
        for _ in range(max_newton):
            iters += 1
            v = Bm @ u
            sl = pr.Wk - A @ u
            g, h = pr.grad_hess(v)
            grad = tau * (Bm.T @ g) - 1.0 / u + A.T @ (1.0 / sl)
            H = tau * (Bm.T * h) @ Bm + np.diag(1.0 / u ** 2) + (A.T / sl ** 2) @ A
            d = 1.0 / np.sqrt(np.maximum(np.diag(H), 1e-300))
            try:
                step = -d * np.linalg.solve(H * np.outer(d, d), d * grad)
            except np.linalg.LinAlgError:
                step = -grad * d * d
            dec = -float(grad @ step)
            if dec < 0:
                step, dec = -grad * d * d, float(grad @ (grad * d * d))
            if dec / 2 <= 1e-11:
                break
            # fraction to the boundary
            alpha = 1.0
            neg = step < 0
            if np.any(neg):
                alpha = min(alpha, 0.99 * float(np.min(-u[neg] / step[neg])))
            Astep = A @ step
            pos = Astep > 0
            if np.any(pos):
                alpha = min(alpha, 0.99 * float(np.min(sl[pos] / Astep[pos])))
            if dec < 1e-2:
                # quadratic region: Armijo cannot resolve decreases below rounding of tau * F
                u = u + alpha * step
                continue
            f0 = barrier_val(u, tau)
            while alpha > 1e-16:
                if barrier_val(u + alpha * step, tau) <= f0 - 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            else:
                break
            u = u + alpha * step
        F = pr.objective(Bm @ u)
        if m / tau <= tol * (1 + abs(F)):
            break
        tau *= 10
    return Bm @ u, m / tau, iters


def envelope_modular_P(f: StepFn, w, phi: OrliczFn, tol: float = 1e-9) -> EnvelopeSolution:
    """Minimize ``int phi(f*/v) v`` over decreasing ``v >= 0`` with ``v < w``.

    ``value`` is the objective at a feasible ``v`` (an upper bound for
    ``P``), clamped into ``[lower, upper] = [M_1(f), M(f)]``; both ends are
    theorems, and ``clamp`` records how far the clamp moved the value.
    """
    w = as_weight(w)
    pr = _setup(f, w, phi)
    if pr is None:
        return EnvelopeSolution(0.0, StepFn.zero(f.domain_end), 0.0, 0.0, 0.0, method="zero")
    if pr == INF or not w.W_finite:
        return EnvelopeSolution(INF, None, 0.0, INF, INF, method="infinite")
    upper = modular_M(f, w, phi)
    lower = modular_M(f, w1_envelope(w), phi)

    cands = []
    va = _repair(pr, _averaged(pr))
    cands.append((pr.objective(va), va, 0.0, 0, "averaged"))
    v0 = _interior_start(pr)
    cands.append((pr.objective(v0), v0, 0.0, 0, "interior"))
    if not (isinstance(phi, Power) and phi.p == 1):
        # for linear phi the objective does not depend on v
        res = _barrier(pr, tol)
        if res is not None:
            v, gap, it = res
            v = _repair(pr, v)
            cands.append((pr.objective(v), v, gap, it, "barrier"))
    val, v, gap, it, method = min(cands, key=lambda c: c[0])
    clamped = min(max(val, lower), upper)
    return EnvelopeSolution(
        value=clamped, minimizer=pr.step(v), gap=gap, lower=lower, upper=upper,
        iterations=it, method=method, clamp=abs(clamped - val) if math.isfinite(val) else 0.0,
    )


def envelope_modular_p(x: Sequence, w: Sequence, phi: OrliczFn, tol: float = 1e-9) -> EnvelopeSolution:
    return envelope_modular_P(seq_to_step(x), Weight.from_sequence(w), phi, tol)


def envelope_norm(f: StepFn, w, phi: OrliczFn, tol: float = 1e-9) -> float:
    """``inf{eps > 0: P(f/eps) <= 1}``."""
    w = as_weight(w)
    if f.is_zero():
        return 0.0
    P = lambda eps: envelope_modular_P(f.scale(1.0 / eps), w, phi, tol).value
    p = phi.homogeneity
    if p is not None:
        val = envelope_modular_P(f, w, phi, tol).value
        return INF if val == INF else val ** (1.0 / p)
    scale = float(f.sup())
    hi = scale
    while P(hi) > 1:
        hi *= 2
        if hi > scale * 2.0 ** 60:
            return INF
    lo = hi / 2
    while P(lo) <= 1:
        hi, lo = lo, lo / 2
    g = lambda s: P(math.exp(s)) - 1
    s = optimize.brentq(g, math.log(lo), math.log(hi), xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return math.exp(s)


def envelope_norm_seq(x: Sequence, w: Sequence, phi: OrliczFn, tol: float = 1e-9) -> float:
    return envelope_norm(seq_to_step(x), Weight.from_sequence(w), phi, tol)


# ---------------------------------------------------------------------------
# fundamental functions


def fundamental_M_env(t, w, phi: OrliczFn) -> float:
    """``t / (W(t) phi^{-1}(1/W(t)))``."""
    w = as_weight(w)
    Wt = w.W(t)
    if Wt == INF:
        raise ValueError("W(t) is infinite")
    if Wt == 0:
        return INF
    return t / (Wt * phi.inverse(1.0 / Wt))


def indicator(t, w: Weight) -> StepFn:
    return StepFn.indicator(t, w.domain_end)


def fundamental_M(t, w, phi: OrliczFn) -> float:
    """``||chi_(0,t]||_M``."""
    w = as_weight(w)
    return luxemburg_norm(indicator(t, w), w, phi)


def fundamental_G(t, w, phi: OrliczFn) -> float:
    """``1 / (w(t) phi^{-1}(1/(t w(t))))``."""
    w = as_weight(w)
    wt = w(t)
    if wt == 0:
        return INF
    return 1.0 / (wt * phi.inverse(1.0 / (t * wt)))


# ---------------------------------------------------------------------------
# regularity and equivalence of the two norms


@dataclass
class EquivalenceReport:
    regular: Verdict
    holds: bool
    ratios: list
    bound: float | None = None
    points: list = field(default_factory=list)
    reason: str = ""


def check_regular_equivalence(w, phi: OrliczFn, fs: Sequence[StepFn] = (), tol: float = 1e-9) -> EquivalenceReport:
    """Compare ``||.||_M`` with ``||.||_env``.

    Regular ``w`` (constant ``C``): every ratio ``||f||_M / ||f||_env`` over
    ``fs`` stays below ``C``.  Non-regular ``w``: the ratio on indicators,
    taken at the weight's critical points, must grow without levelling off
    across the nested windows of the weight.
    """
    w = as_weight(w)
    reg = is_regular(w)
    if reg:
        C = reg.constant
        ratios = []
        for f in fs:
            a, b = luxemburg_norm(f, w, phi), envelope_norm(f, w, phi, tol)
            ratios.append(a / b if b > 0 else 1.0)
        ok = all(r <= C * (1 + 1e-6) for r in ratios)
        return EquivalenceReport(reg, ok, ratios, bound=C,
                                 reason="" if ok else "ratio above the regularity constant")
    pts = [t for t in w.critical if t > w.floor] or w.sample_points(65)
    ratios = [fundamental_M(t, w, phi) / fundamental_M_env(t, w, phi) for t in pts]
    windows = w.scales or []
    level, cur = [], -math.inf
    for lo, hi in windows:
        inside = [r for t, r in zip(pts, ratios) if lo <= t <= hi]
        if inside:
            cur = max(cur, max(inside))
        level.append(cur)
    ok = trend_unbounded(level)
    return EquivalenceReport(reg, ok, ratios, points=pts,
                             reason="" if ok else "norm ratio levels off on a non-regular weight")
