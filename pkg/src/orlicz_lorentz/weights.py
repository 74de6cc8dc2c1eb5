"""Decreasing weights with exact cumulative integrals.

A :class:`Weight` is a finite list of pieces ``a * t**(-gamma)`` on
consecutive intervals starting at 0.  That covers step weights
(``gamma = 0``), the power weights ``t**(-gamma)`` and both counterexample
weights, whose pieces are constants and multiples of ``1/t``.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as sp_integrate

from .core import INF, StepFn, exact_sum, seq_to_step
from .orlicz import OrliczFn, Power
from .verdict import DEFAULT_CEILING, Verdict, sup_verdict


@dataclass(frozen=True)
class Piece:
    """``coef * t**(-gamma) + inv / t`` on ``(left, right]``."""

    left: float
    right: float
    coef: float
    gamma: float = 0.0
    inv: float = 0.0

    def value(self, t):
        base = self.coef if self.gamma == 0 else self.coef * t ** (-self.gamma)
        return base + self.inv / t if self.inv else base

    def mass(self, x, y):
        """Integral of the piece over ``(x, y]``, a sub-interval of the piece."""
        if y <= x:
            return 0.0
        extra = 0.0
        if self.inv:
            if x == 0 or y == INF:
                return INF
            extra = self.inv * math.log(y / x)
        return self._power_mass(x, y) + extra

    def _power_mass(self, x, y):
        if self.coef == 0:
            return 0.0
        if self.gamma == 0:
            return self.coef * (y - x)
        if y == INF:
            return INF
        if self.gamma == 1:
            if x == 0:
                return INF
            return self.coef * math.log(y / x)
        e = 1.0 - self.gamma
        if e < 0 and x == 0:
            return INF
        return self.coef * (y ** e - x ** e) / e


class Weight:
    """Nonincreasing weight on ``(0, a]`` built from power pieces.

    ``floor`` marks a truncation point: point evaluation below it raises,
    while integrals use the (capped) first piece.  ``scales`` lists nested
    windows ``(lo, hi)`` used by the boundedness predicates, shallow first.
    """

    def __init__(self, pieces: Sequence[Piece], name: str = "custom", floor: float = 0.0,
                 scales: Sequence[tuple] | None = None, critical: Sequence[float] = (),
                 spec: dict | None = None):
        pieces = tuple(pieces)
        if not pieces or pieces[0].left != 0:
            raise ValueError("weight pieces must start at 0")
        for p, q in zip(pieces, pieces[1:]):
            if p.right != q.left:
                raise ValueError("weight pieces must be contiguous")
        for p in pieces:
            if p.coef < 0 or p.gamma < 0 or p.inv < 0 or not p.right > p.left:
                raise ValueError(f"bad weight piece {p}")
            if p.right == INF and p is not pieces[-1]:
                raise ValueError("only the last piece may be infinite")
        for p, q in zip(pieces, pieces[1:]):
            if q.value(q.left) > p.value(p.right) * (1 + 1e-12):
                raise ValueError(f"weight must be nonincreasing (jump up at t={p.right!r})")
        self.pieces = pieces
        self.name = name
        self.floor = floor
        self.scales = tuple(scales) if scales else None
        self.critical = tuple(critical)
        self.spec = spec or {"kind": name}
        self._lefts = [p.left for p in pieces]
        cum = [0.0]
        for p in pieces[:-1]:
            cum.append(cum[-1] + p.mass(p.left, p.right))
        self._cum = cum

    def __repr__(self):
        return f"Weight({self.name!r}, {len(self.pieces)} pieces on (0, {self.domain_end!r}])"

    # catalog --------------------------------------------------------------
    @classmethod
    def constant(cls, c=1.0, a=INF) -> "Weight":
        return cls([Piece(0, a, float(c))], name="constant", scales=_dyadic_windows(a),
                   spec={"kind": "constant", "c": c})

    @classmethod
    def power(cls, gamma: float, a=INF) -> "Weight":
        """``t**(-gamma)`` with ``0 <= gamma < 1``."""
        if not 0 <= gamma < 1:
            raise ValueError("power weight needs 0 <= gamma < 1")
        return cls([Piece(0, a, 1.0, float(gamma))], name="power", scales=_dyadic_windows(a),
                   spec={"kind": "power", "gamma": gamma})

    @classmethod
    def from_step(cls, f: StepFn, name="step") -> "Weight":
        if not f.is_nonincreasing():
            raise ValueError("a weight must be nonincreasing")
        pieces = [Piece(float(lo), float(hi), float(c)) for lo, hi, c in f.simplify().cells()]
        return cls(pieces, name=name, spec={"kind": "step", **f.to_json()})

    @classmethod
    def from_sequence(cls, w: Sequence) -> "Weight":
        return cls.from_step(seq_to_step(w), name="sequence")

    @classmethod
    def example314(cls, kmax: int = 8) -> "Weight":
        """``2**(k*k)`` on ``(4**-((k+1)**2), 4**-(k*k)]``, truncated at level ``kmax``."""
        tau = 4.0 ** (-(kmax + 1) ** 2)
        pieces = [Piece(0.0, tau, 2.0 ** ((kmax + 1) ** 2))]
        for k in range(kmax, -1, -1):
            pieces.append(Piece(4.0 ** (-(k + 1) ** 2), 4.0 ** (-k * k), 2.0 ** (k * k)))
        tks = [4.0 ** (-k * k) for k in range(1, kmax + 1)]
        return cls(pieces, name="example314", floor=tau, critical=tks,
                   scales=[(t, 1.0) for t in tks],
                   spec={"kind": "example314", "kmax": kmax})

    @classmethod
    def example415(cls, kmax: int = 8) -> "Weight":
        """``max(2**-((k+1)**2) / t, 2**(k*k))`` on the same dyadic-square cells."""
        tau = 4.0 ** (-(kmax + 1) ** 2)
        pieces = [Piece(0.0, tau, 2.0 ** ((kmax + 1) ** 2))]
        crit = []
        for k in range(kmax, -1, -1):
            lo, hi = 4.0 ** (-(k + 1) ** 2), 4.0 ** (-k * k)
            knee = 2.0 ** (-(k + 1) ** 2 - k * k)
            pieces.append(Piece(lo, knee, 2.0 ** (-(k + 1) ** 2), 1.0))
            pieces.append(Piece(knee, hi, 2.0 ** (k * k)))
            crit += [knee, hi]
        # window k reaches the knee s_k inside cell k
        tks = [4.0 ** (-(k + 1) ** 2) for k in range(1, kmax + 1)]
        return cls(pieces, name="example415", floor=tau, critical=sorted(crit),
                   scales=[(t, 1.0) for t in tks],
                   spec={"kind": "example415", "kmax": kmax})

    @classmethod
    def from_json(cls, obj: dict) -> "Weight":
        if "weight" in obj and isinstance(obj["weight"], dict):
            obj = obj["weight"]
        kind = obj.get("kind")
        a = obj.get("a", INF)
        a = INF if a == "inf" else float(a)
        if kind == "constant":
            return cls.constant(float(obj.get("c", 1.0)), a)
        if kind == "power":
            return cls.power(float(obj["gamma"]), a)
        if kind == "step":
            return cls.from_step(StepFn.from_json(obj))
        if kind == "sequence":
            return cls.from_sequence(obj["values"])
        if kind == "example314":
            return cls.example314(int(obj.get("kmax", 8)))
        if kind == "example415":
            return cls.example415(int(obj.get("kmax", 8)))
        raise ValueError(f"unknown weight kind {kind!r}")

    def to_json(self) -> dict:
        return dict(self.spec)

    # queries --------------------------------------------------------------
    @property
    def domain_end(self):
        return self.pieces[-1].right

    @property
    def breakpoints(self) -> list:
        return [p.left for p in self.pieces] + [self.domain_end]

    @property
    def is_step(self) -> bool:
        return all(p.gamma == 0 and p.inv == 0 for p in self.pieces)

    @property
    def W_finite(self) -> bool:
        first = self.pieces[0]
        return first.inv == 0 and (first.coef == 0 or first.gamma < 1)

    def _index(self, t) -> int:
        return max(bisect_left(self._lefts, t) - 1, 0)

    def __call__(self, t):
        if t < self.floor:
            raise ValueError(f"t={t!r} is below the truncation point {self.floor!r} of {self.name}")
        if not 0 < t <= self.domain_end or t == INF:
            raise ValueError(f"t={t!r} outside (0, {self.domain_end!r}]")
        return self.pieces[self._index(t)].value(t)

    def right_value(self, t):
        """``w(t+)``, the value just right of ``t``."""
        k = max(bisect_left(self._lefts, t, lo=0) - (0 if t in self._lefts else 1), 0)
        k = min(k, len(self.pieces) - 1)
        return self.pieces[k].value(t)

    def W(self, t):
        """Cumulative integral over ``(0, t]``."""
        if t <= 0:
            return 0.0
        if t > self.domain_end:
            raise ValueError(f"t={t!r} beyond the weight domain")
        k = self._index(t)
        p = self.pieces[k]
        return self._cum[k] + p.mass(p.left, t)

    def mass(self, x, y):
        return self.W(y) - self.W(x)

    def to_stepfn(self) -> StepFn:
        if not self.is_step:
            raise ValueError(f"{self.name} weight is not piecewise constant")
        return StepFn(tuple(self.breakpoints), tuple(p.coef for p in self.pieces))

    def psi_integral(self, phi: OrliczFn, c, x, y):
        """``int_x^y phi(c / w) w`` with the ``0/0`` convention."""
        if c == 0 or y <= x:
            return 0.0
        if y > self.domain_end:
            raise ValueError(f"interval end {y!r} beyond the weight domain (0, {self.domain_end!r}]")
        terms = []
        k = self._index(x) if x > 0 else 0
        for p in self.pieces[k:]:
            lo, hi = max(p.left, x), min(p.right, y)
            if hi <= lo:
                if p.left >= y:
                    break
                continue
            terms.append(_psi_piece(phi, c, p, lo, hi))
        return exact_sum(terms)

    def sample_points(self, n=257, span=1e8) -> list:
        """Log grid over the domain plus breakpoints, critical points and their right limits."""
        lo = self.floor if self.floor > 0 else 1.0 / span
        bps = [b for b in self.breakpoints if 0 < b < INF]
        hi = self.domain_end if self.domain_end < INF else max([span] + [b * span for b in bps])
        pts = set(np.logspace(math.log10(lo), math.log10(hi), n).tolist())
        for b in bps + list(self.critical):
            if lo <= b <= hi:
                pts.add(b)
                nb = b * (1 + 1e-9)
                if nb <= hi:
                    pts.add(nb)
        pts.add(hi)
        # the capped piece below a truncation point is not part of the weight
        return sorted(p for p in pts if lo <= p <= hi and p > self.floor)


def _dyadic_windows(a, depth=40):
    if a == INF:
        return [(2.0 ** -j, 2.0 ** j) for j in range(depth + 1)]
    return [(a * 2.0 ** -j, a) for j in range(depth + 1)]


def _psi_piece(phi: OrliczFn, c, p: Piece, lo, hi):
    if p.coef == 0 and p.inv == 0:
        return INF
    if hi == INF:
        # phi(c/w) w >= c > 0 on an infinite interval
        return INF
    if p.inv == 0 and p.gamma == 0:
        return float(phi(c / p.coef)) * p.coef * (hi - lo)
    if isinstance(phi, Power) and p.inv == 0:
        # coef_phi * c^p * a^(1-p) * int t^(gamma (p-1))
        e = p.gamma * (phi.p - 1) + 1
        return phi.coef * c ** phi.p * p.coef ** (1 - phi.p) * (hi ** e - lo ** e) / e
    # integrate in s = log t; below hi * e^-700 the piece contributes nothing measurable
    lo_s = math.log(hi) - 700.0 if lo == 0 else math.log(lo)

    def g(s):
        t = math.exp(s)
        w = p.value(t)
        return float(phi(c / w)) * w * t

    with np.errstate(over="ignore"):
        if not math.isfinite(g(math.log(hi))):
            return INF
        val, _ = sp_integrate.quad(g, lo_s, math.log(hi), epsabs=0.0, epsrel=1e-12, limit=200)
    return val if math.isfinite(val) else INF


def as_weight(w) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, StepFn):
        return Weight.from_step(w)
    if isinstance(w, (list, tuple)):
        return Weight.from_sequence(w)
    raise TypeError(f"cannot interpret {type(w).__name__} as a weight")


# ---------------------------------------------------------------------------
# predicates


def is_regular(w: Weight, ceiling=DEFAULT_CEILING, n=257) -> Verdict:
    """``W(u) <= C u w(u)``: sup of ``W(u) / (u w(u+))`` over samples."""
    w = as_weight(w)
    if not w.W_finite:
        return Verdict(False, witness=None, reason="W is infinite")
    pts = w.sample_points(n)
    ratios = []
    for u in pts:
        wu = w.right_value(u) if u < w.domain_end else w(u)
        Wu = w.W(u)
        ratios.append(INF if wu == 0 else Wu / (u * wu))
    return sup_verdict(pts, ratios, windows=w.scales, ceiling=ceiling)


def inv_w_delta2(w: Weight, ceiling=DEFAULT_CEILING, n=257) -> Verdict:
    """``1/w`` satisfies Delta_2: sup of ``w(t)/w(2t)`` over samples with ``2t`` in the domain."""
    w = as_weight(w)
    a = w.domain_end
    base = w.sample_points(n)
    pts = set()
    for t in base:
        pts.add(t)
        pts.add(t / 2)
        pts.add(t / 2 * (1 + 1e-9))
    lo = w.floor if w.floor > 0 else 0.0
    pts = sorted(t for t in pts if t > lo and 2 * t <= a and 2 * t < INF)
    ratios = []
    for t in pts:
        w2 = w(2 * t)
        wt = w(t)
        ratios.append(INF if w2 == 0 and wt > 0 else (1.0 if wt == 0 else wt / w2))
    return sup_verdict(pts, ratios, windows=w.scales, ceiling=ceiling)


def is_phi_controlled(w: Weight, phi: OrliczFn, c_lo=1e-6, c_hi=1e6, n_c=49,
                      ceiling=DEFAULT_CEILING, n=129) -> Verdict:
    """``phi(c/w(2t)) w(2t) <= K phi(c/w(t)) w(t)`` over a ``(c, t)`` log grid.

    The witness is a pair ``(c, t)``.
    """
    w = as_weight(w)
    a = w.domain_end
    cs = np.logspace(math.log10(c_lo), math.log10(c_hi), n_c)
    lo = w.floor if w.floor > 0 else 0.0
    base = w.sample_points(n)
    ts = sorted({t for b in base for t in (b, b / 2, b / 2 * (1 + 1e-9))
                 if t > lo and 2 * t <= a and 2 * t < INF})
    pts, ratios = [], []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for t in ts:
            w1, w2 = w(t), w(2 * t)
            if w2 == 0:
                num = np.full_like(cs, INF)
            else:
                num = np.asarray(phi(cs / w2), dtype=float) * w2
            den = np.asarray(phi(cs / w1), dtype=float) * w1 if w1 > 0 else np.full_like(cs, INF)
            r = np.where(np.isinf(num) & ~np.isinf(den), INF,
                         np.where(np.isinf(den), 1.0, num / den))
            j = int(np.argmax(r))
            pts.append((float(cs[j]), t))
            ratios.append(float(r[j]))
    return sup_verdict(pts, ratios, windows=w.scales, ceiling=ceiling, key=lambda p: p[1])


def w1_envelope(w: Weight, refine: int = 64, span: float = 2.0 ** 40) -> Weight:
    """The weight ``W(t)/t``, exact where it has the form ``c t**-gamma + A/t``.

    On the first piece ``W(t)/t = w(t)/(1-gamma)``; on a later constant
    piece ``c`` starting at ``l`` it is ``c + (W(l) - c l)/t``.  Remaining
    pieces are cut into ``refine`` geometric sub-cells carrying the left-end
    value, a step over-estimate of the decreasing function.
    """
    w = as_weight(w)
    if not w.W_finite:
        raise ValueError("W is identically infinite; W(t)/t is undefined")
    first = w.pieces[0]
    out = [Piece(0.0, first.right, first.coef / (1 - first.gamma), first.gamma)]
    for p in w.pieces[1:]:
        if p.gamma == 0 and p.inv == 0:
            out.append(Piece(p.left, p.right, p.coef, 0.0, max(w.W(p.left) - p.coef * p.left, 0.0)))
            continue
        hi = p.right if p.right < INF else p.left * span
        edges = np.geomspace(p.left, hi, refine + 1)
        edges[0], edges[-1] = p.left, hi
        for x, y in zip(edges, edges[1:]):
            out.append(Piece(float(x), float(y), w.W(float(x)) / float(x)))
        if p.right == INF:
            out.append(Piece(hi, INF, 0.0, 0.0, w.W(hi)))
    return Weight(out, name=f"w1[{w.name}]", floor=w.floor, scales=w.scales,
                  critical=w.critical, spec={"kind": "w1", "of": w.to_json()})
