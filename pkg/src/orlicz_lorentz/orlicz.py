"""Orlicz functions: evaluation, inverse, derivatives, conjugates, predicates.

An Orlicz function here is convex, strictly increasing and vanishes at 0.
Three concrete families are provided (scaled powers, ``e^u - 1`` and
piecewise-linear convex interpolants) plus a numerical Legendre conjugate
that wraps any of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .verdict import DEFAULT_CEILING, Verdict, sup_verdict

INF = math.inf
_BRACKET_CAP = 2.0 ** 60


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


class OrliczFn:
    """Base class.  Subclasses implement ``_eval``, ``_deriv`` and friends."""

    kind = "abstract"

    def __call__(self, u):
        return _scalar(self._eval(np.asarray(u, dtype=float)))

    def deriv(self, u):
        """Right derivative."""
        return _scalar(self._deriv(np.asarray(u, dtype=float)))

    def second_deriv(self, u):
        return _scalar(self._deriv2(np.asarray(u, dtype=float)))

    def inverse(self, y: float) -> float:
        """``phi^{-1}(y)`` by bisection; subclasses override with closed forms."""
        if y <= 0:
            return 0.0
        if y == INF:
            return INF
        hi = 1.0
        while self(hi) < y:
            hi *= 2.0
            if hi > _BRACKET_CAP:
                return INF
        lo = 0.0
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if self(mid) < y:
                lo = mid
            else:
                hi = mid
        return hi

    def deriv_inverse(self, y: float) -> float:
        """Leftmost ``s >= 0`` with ``phi'_+(s) >= y`` (monotone bisection)."""
        if y <= self.deriv(0.0):
            return 0.0
        hi = 1.0
        while self.deriv(hi) < y:
            hi *= 2.0
            if hi > _BRACKET_CAP:
                return INF
        lo = 0.0
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if self.deriv(mid) < y:
                lo = mid
            else:
                hi = mid
        return hi

    def conjugate(self, t: float) -> float:
        """Complementary function ``sup_{s>0} (s t - phi(s))``."""
        exact = self._conjugate_exact(t)
        if exact is not None:
            return exact
        return numeric_conjugate(self, t)

    def _conjugate_exact(self, t):
        return None

    def conjugate_fn(self) -> "OrliczFn":
        """The complementary function as an :class:`OrliczFn`."""
        return NumericConjugate(self)

    def to_json(self) -> dict:
        raise NotImplementedError

    # homogeneity degree when phi(c u) = c^p phi(u), else None
    homogeneity = None


@dataclass(frozen=True)
class Power(OrliczFn):
    """``coef * u**p`` with ``p >= 1``."""

    p: float
    coef: float = 1.0
    kind: str = field(default="power", init=False, repr=False)

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"power Orlicz function needs p >= 1, got {self.p}")
        if not self.coef > 0:
            raise ValueError("coef must be positive")

    @classmethod
    def normalized(cls, p: float) -> "Power":
        """``u**p / p``."""
        return cls(p, 1.0 / p)

    @property
    def homogeneity(self):
        return self.p

    def _eval(self, u):
        return self.coef * np.power(u, self.p)

    def _deriv(self, u):
        if self.p == 1:
            return np.full_like(u, self.coef)
        return self.coef * self.p * np.power(u, self.p - 1)

    def _deriv2(self, u):
        if self.p == 1:
            return np.zeros_like(u)
        if self.p == 2:
            return np.full_like(u, 2 * self.coef)
        with np.errstate(divide="ignore"):
            return self.coef * self.p * (self.p - 1) * np.power(u, self.p - 2)

    def inverse(self, y):
        if y <= 0:
            return 0.0
        return (y / self.coef) ** (1.0 / self.p)

    def deriv_inverse(self, y):
        if self.p == 1:
            return 0.0 if y <= self.coef else INF
        if y <= 0:
            return 0.0
        return (y / (self.coef * self.p)) ** (1.0 / (self.p - 1))

    def _conjugate_exact(self, t):
        if t <= 0:
            return 0.0
        if self.p == 1:
            return 0.0 if t <= self.coef else INF
        c = self.conjugate_fn()
        return c(t)

    def conjugate_fn(self):
        if self.p == 1:
            raise ValueError("the conjugate of a linear function is not an Orlicz function")
        q = self.p / (self.p - 1)
        return Power(q, (self.coef * self.p) ** (-(q - 1)) / q)

    def to_json(self):
        if math.isclose(self.coef, 1.0 / self.p, rel_tol=1e-15):
            return {"kind": "power", "p": self.p, "normalized": True}
        if self.coef == 1.0:
            return {"kind": "power", "p": self.p, "normalized": False}
        return {"kind": "power", "p": self.p, "coef": self.coef}


@dataclass(frozen=True)
class Expm1(OrliczFn):
    """``e^u - 1``."""

    kind: str = field(default="expm1", init=False, repr=False)

    def _eval(self, u):
        with np.errstate(over="ignore"):
            return np.expm1(u)

    def _deriv(self, u):
        with np.errstate(over="ignore"):
            return np.exp(u)

    _deriv2 = _deriv

    def inverse(self, y):
        if y <= 0:
            return 0.0
        return math.log1p(y)

    def deriv_inverse(self, y):
        return 0.0 if y <= 1 else math.log(y)

    def _conjugate_exact(self, t):
        if t <= 1:
            return 0.0
        return t * math.log(t) - t + 1.0

    def to_json(self):
        return {"kind": "expm1"}


@dataclass(frozen=True)
class PiecewiseLinear(OrliczFn):
    """Convex piecewise-linear interpolant through ``(0,0)`` and ``points``.

    Extended beyond the last point with the last slope.
    """

    points: tuple
    kind: str = field(default="pwl", init=False, repr=False)

    def __post_init__(self):
        pts = sorted((float(t), float(y)) for t, y in self.points)
        if not pts or pts[0][0] != 0.0:
            pts.insert(0, (0.0, 0.0))
        if pts[0][1] != 0.0:
            raise ValueError("phi(0) must be 0")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("pwl abscissae must be distinct and positive")
        slopes = [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])]
        if slopes[0] <= 0:
            raise ValueError("pwl Orlicz function must be strictly increasing")
        if any(s1 < s0 for s0, s1 in zip(slopes, slopes[1:])):
            raise ValueError("pwl Orlicz function must be convex (slopes nondecreasing)")
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "_xs", np.array(xs))
        object.__setattr__(self, "_ys", np.array(ys))
        object.__setattr__(self, "_slopes", np.array(slopes))

    def _eval(self, u):
        xs, ys = self._xs, self._ys
        inner = np.interp(u, xs, ys)
        return np.where(u > xs[-1], ys[-1] + self._slopes[-1] * (u - xs[-1]), inner)

    def _deriv(self, u):
        # right derivative: slope of the segment starting at or before u
        k = np.searchsorted(self._xs, u, side="right") - 1
        k = np.clip(k, 0, len(self._slopes) - 1)
        return self._slopes[k]

    def _deriv2(self, u):
        return np.zeros_like(u)

    def inverse(self, y):
        if y <= 0:
            return 0.0
        xs, ys = self._xs, self._ys
        if y > ys[-1]:
            return float(xs[-1] + (y - ys[-1]) / self._slopes[-1])
        return float(np.interp(y, ys, xs))

    def _conjugate_exact(self, t):
        if t <= 0:
            return 0.0
        if t > self._slopes[-1]:
            return INF
        return float(max(0.0, np.max(self._xs * t - self._ys)))

    def to_json(self):
        return {"kind": "pwl", "points": [list(p) for p in self.points[1:]]}


class NumericConjugate(OrliczFn):
    """``phi_*`` computed by bracketing and bisecting the right derivative."""

    kind = "conjugate"

    def __init__(self, base: OrliczFn):
        self.base = base

    def __repr__(self):
        return f"NumericConjugate({self.base!r})"

    def _eval(self, t):
        return np.vectorize(lambda x: numeric_conjugate(self.base, float(x)), otypes=[float])(t)

    def _deriv(self, t):
        return np.vectorize(lambda x: conjugate_argmax(self.base, float(x)), otypes=[float])(t)

    def _deriv2(self, t):
        def fd(x):
            h = max(1e-6 * x, 1e-9)
            return (conjugate_argmax(self.base, x + h) - conjugate_argmax(self.base, max(x - h, 0.0))) / (
                x + h - max(x - h, 0.0))
        return np.vectorize(fd, otypes=[float])(t)

    def conjugate_fn(self):
        return NumericConjugate(self)

    def to_json(self):
        return {"kind": "conjugate", "of": self.base.to_json()}


def conjugate_argmax(phi: OrliczFn, t: float) -> float:
    """Maximizer of ``s t - phi(s)``; ``inf`` when the sup diverges."""
    if t <= 0:
        return 0.0
    # doubling until the concave objective turns down, capped at 2**60
    hi = 1.0
    while phi.deriv(hi) <= t:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            return INF
    lo = 0.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if phi.deriv(mid) <= t:
            lo = mid
        else:
            hi = mid
    return lo


def numeric_conjugate(phi: OrliczFn, t: float) -> float:
    if t <= 0:
        return 0.0
    s = conjugate_argmax(phi, t)
    if s == INF:
        return INF
    # the bracket [s, next float] both lie on the maximizing plateau edge
    cands = [s, np.nextafter(s, INF)]
    return max(0.0, max(c * t - phi(c) for c in cands))


# ---------------------------------------------------------------------------
# predicates


def _log_grid(lo=1e-8, hi=1e8, n=161):
    return np.logspace(math.log10(lo), math.log10(hi), n)


def is_delta2(phi: OrliczFn, lo=1e-8, hi=1e8, n=161, ceiling=DEFAULT_CEILING) -> Verdict:
    """``phi(2u) <= K phi(u)`` on a log grid; witness is the worst ``u``."""
    u = _log_grid(lo, hi, n)
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.asarray(phi(2 * u), dtype=float)
        den = np.asarray(phi(u), dtype=float)
        ratio = np.where(np.isinf(num), np.inf, num / den)
    windows = [(10.0 ** -j, 10.0 ** j) for j in range(0, 9)]
    return sup_verdict(list(u), list(ratio), windows=windows, ceiling=ceiling)


def is_n_function(phi: OrliczFn, lo=1e-8, hi=1e8, rel_drop=1e-3) -> bool:
    """``phi(t)/t -> 0`` at 0 and ``-> inf`` at infinity, judged by end trends."""
    def r(t):
        return float(phi(t)) / t
    small = r(lo) <= (1 - rel_drop) * r(lo * 100) and r(lo) < r(1.0)
    v_hi, v_mid = r(hi), r(hi / 100)
    large = (not math.isfinite(v_hi)) or (v_hi >= (1 + rel_drop) * v_mid and v_hi > r(1.0))
    return bool(small and large)


def is_p_concave(phi: OrliczFn, p: float, lo=1e-6, hi=1e6, n=121, tol=1e-10) -> Verdict:
    """Midpoint concavity of ``t -> phi(t**(1/p))`` on a log grid of triples."""
    ts = _log_grid(lo, hi, n)
    g = lambda t: float(phi(t ** (1.0 / p)))
    worst = 0.0
    where = None
    for a, b in zip(ts, ts[2:]):
        m = 0.5 * (a + b)
        gap = 0.5 * (g(a) + g(b)) - g(m)
        scale = max(abs(g(a)), abs(g(b)), 1e-300)
        if gap > tol * scale and gap / scale > worst:
            worst, where = gap / scale, (a, b)
    if where is None:
        return Verdict(True, constant=0.0)
    return Verdict(False, witness=where, reason=f"midpoint concavity violated by {worst:.3g} (relative)")


def _equivalence_constant(phi1: OrliczFn, phi2: OrliczFn, ts, c_max: float):
    """Smallest ``C`` in ``[1, c_max]`` with the two-sided bound on ``ts``, else None."""

    def ok(c):
        for t in ts:
            a = float(phi1(t / c))
            b = float(phi2(t))
            d = float(phi1(t * c))
            if a > b * (1 + 1e-12) or b > d * (1 + 1e-12):
                return False
        return True

    if not ok(c_max):
        return None
    if ok(1.0):
        return 1.0
    lo_c, hi_c = 1.0, c_max
    for _ in range(100):
        mid = math.sqrt(lo_c * hi_c)
        if ok(mid):
            hi_c = mid
        else:
            lo_c = mid
        if hi_c / lo_c < 1 + 1e-9:
            break
    return hi_c


def equivalent(phi1: OrliczFn, phi2: OrliczFn, lo=1e-6, hi=1e6, n=121, c_max=1e3) -> Verdict:
    """Smallest grid ``C`` with ``phi1(t/C) <= phi2(t) <= phi1(C t)``.

    The constant is computed on the full grid and on the grid with two
    decades trimmed at each end; if it still grows between the two, the
    needed constant depends on the range and the functions are reported
    as not equivalent.
    """
    ts = _log_grid(lo, hi, n)
    c_full = _equivalence_constant(phi1, phi2, ts, c_max)
    if c_full is None:
        return Verdict(False, witness=c_max, reason="no constant up to c_max")
    inner = ts[(ts >= lo * 100) & (ts <= hi / 100)]
    c_inner = _equivalence_constant(phi1, phi2, inner, c_max)
    if c_inner is not None and c_full > c_inner * (1 + 1e-3):
        return Verdict(False, witness=c_full, reason=f"constant grows with the range ({c_inner:.6g} -> {c_full:.6g})")
    return Verdict(True, constant=c_full)


def matuszewska_indices(h, lo: float, hi: float, n_t: int = 64, n_lambda: int = 64,
                        lambda_min: float = 2.0 ** -20, extra_t=()) -> tuple[float, float]:
    """Grid estimates of the lower and upper indices of ``h`` on ``[lo, hi]``.

    For each ``lambda`` in a log grid of ``[lambda_min, 1)`` the extremal log
    ratios ``log h(lambda t) - log h(t)`` over ``t`` (with ``lambda t >= lo``)
    are divided by ``log lambda``; the lower index estimate is the smallest
    such slope of the sup-ratio, the upper index the largest slope of the
    inf-ratio.  Exact for pure powers.
    """
    ts = np.unique(np.concatenate([np.logspace(math.log10(lo), math.log10(hi), n_t),
                                   np.asarray(list(extra_t), dtype=float)]))
    ts = ts[(ts >= lo) & (ts <= hi)]
    lams = np.logspace(math.log10(lambda_min), 0, n_lambda + 1)[:-1]
    logh = {float(t): math.log(float(h(float(t)))) for t in ts}
    alpha, beta = INF, -INF
    for lam in lams:
        diffs = []
        for t in ts:
            s = lam * t
            if s < lo:
                continue
            diffs.append(math.log(float(h(float(s)))) - logh[float(t)])
        if not diffs:
            continue
        ll = math.log(lam)
        alpha = min(alpha, max(diffs) / ll)
        beta = max(beta, min(diffs) / ll)
    return alpha, beta


def from_json(obj: dict) -> OrliczFn:
    if "phi" in obj and isinstance(obj["phi"], dict):
        obj = obj["phi"]
    kind = obj.get("kind")
    if kind == "power":
        p = float(obj["p"])
        if obj.get("normalized"):
            return Power.normalized(p)
        return Power(p, float(obj.get("coef", 1.0)))
    if kind == "expm1":
        return Expm1()
    if kind == "pwl":
        return PiecewiseLinear(tuple(tuple(pt) for pt in obj["points"]))
    if kind == "conjugate":
        return NumericConjugate(from_json(obj["of"]))
    raise ValueError(f"unknown Orlicz kind {kind!r}")
