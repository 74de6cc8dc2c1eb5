"""Orlicz (Amemiya) norm, the Hölder pairing and the norming supremum.

All integrals against ``w dt`` are exact: on a cell of f* the integrand is
constant, so ``int phi*(k f*) w`` is a finite sum of values times
W-masses of the cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize

from .core import INF, StepFn, integrate, merge_breakpoints, multiply
from .modular import luxemburg_norm
from .orlicz import OrliczFn, Power, is_n_function
from .rearrange import decreasing_rearrangement
from .weights import Weight, as_weight


@dataclass
class DualNormResult:
    value: float
    amemiya_k: float | None = None
    attainer: StepFn | None = None
    h: list = field(default_factory=list)
    lam: float | None = None
    degraded: bool = False
    modular: float | None = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "amemiya_k": self.amemiya_k,
            "lambda": self.lam,
            "degraded": self.degraded,
            "modular": self.modular,
            "attainer": self.attainer.to_json() if self.attainer is not None else None,
        }


def _cells_with_mass(f: StepFn, w: Weight):
    """Positive cells of f* as ``(lo, hi, value, W-mass)``."""
    fs = decreasing_rearrangement(f)
    out = []
    for lo, hi, c in fs.cells():
        if c == 0:
            break
        if hi > w.domain_end:
            raise ValueError(f"f* is supported beyond the weight domain (0, {w.domain_end!r}]")
        out.append((lo, hi, float(c), w.mass(lo, hi)))
    return out


def _require_n_function(phi: OrliczFn, name: str):
    if not is_n_function(phi):
        raise ValueError(f"{name} must be an N-function")


def orlicz_norm_amemiya(f: StepFn, w, phi_star: OrliczFn, tol: float = 1e-12) -> DualNormResult:
    """``inf_k (1 + int phi*(k f*) w) / k``."""
    w = as_weight(w)
    _require_n_function(phi_star, "phi*")
    cells = _cells_with_mass(f, w)
    if not cells:
        return DualNormResult(0.0, amemiya_k=None)
    vals = np.array([c for _, _, c, _ in cells])
    mass = np.array([m for *_, m in cells])
    if np.any(np.isinf(mass)):
        return DualNormResult(INF)

    def J(logk):
        k = math.exp(logk)
        with np.errstate(over="ignore"):
            terms = np.asarray(phi_star(k * vals), dtype=float) * mass
        total = math.fsum(terms) if np.all(np.isfinite(terms)) else INF
        return (1 + total) / k

    # expanding bracket around k = 1/sup f* on log scale
    b = -math.log(vals[0])
    a, c = b - 1.0, b + 1.0
    for _ in range(200):
        if J(a) > J(b):
            break
        a, b = a - 2 * (b - a), a
    for _ in range(200):
        if J(c) > J(b):
            break
        b, c = c, c + 2 * (c - b)
    res = optimize.minimize_scalar(J, bracket=(a, b, c), method="golden", tol=tol)
    return DualNormResult(float(res.fun), amemiya_k=math.exp(res.x))


def holder_pairing(f: StepFn, g: StepFn, w, phi: OrliczFn, tol: float = 1e-12) -> tuple:
    """``(int |f g|, ||f||^0_{phi*} * ||g||_M)``."""
    w = as_weight(w)
    _require_n_function(phi, "phi")
    pairing = integrate(multiply(f, g))
    if g.is_zero() or f.is_zero():
        return pairing, 0.0
    dual = orlicz_norm_amemiya(f, w, phi.conjugate_fn(), tol).value
    return pairing, dual * luxemburg_norm(g, w, phi)


def norming_supremum(f: StepFn, w, phi: OrliczFn, tol: float = 1e-12) -> DualNormResult:
    """Pairing ``int f* g`` against the Lagrange attainer ``g = w h``.

    ``h = (phi')^{-1}(f*/lam)`` on each cell, with ``lam`` tuned so that
    ``M(g) = int phi(h) w = 1``.  When ``phi'`` has jumps the modular
    jumps too; the last ``lam`` with ``M(g) <= 1`` is kept and
    ``degraded`` is set.
    """
    w = as_weight(w)
    _require_n_function(phi, "phi")
    cells = _cells_with_mass(f, w)
    if not cells:
        return DualNormResult(0.0)
    vals = [c for _, _, c, _ in cells]
    mass = [m for *_, m in cells]

    def hs(lam):
        return [phi.deriv_inverse(c / lam) for c in vals]

    def modular(lam):
        h = hs(lam)
        if any(x == INF for x in h):
            return INF
        return math.fsum(float(phi(x)) * m for x, m in zip(h, mass))

    hi = 1.0
    while modular(hi) > 1:
        hi *= 2
    lo = hi / 2
    while modular(lo) <= 1:
        hi, lo = lo, lo / 2
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if modular(mid) <= 1:
            hi = mid
        else:
            lo = mid
    lam = hi
    h = hs(lam)
    mod = modular(lam)
    pairing = math.fsum(c * x * m for c, x, m in zip(vals, h, mass))
    degraded = abs(mod - 1) > 1e-6
    attainer = None
    if w.is_step:
        ends = [hi_ for _, hi_, _, _ in cells]
        bps, hv = (0,) + tuple(ends), tuple(h)
        if ends[-1] < w.domain_end:
            bps, hv = bps + (w.domain_end,), hv + (0.0,)
        attainer = multiply(StepFn(bps, hv), w.to_stepfn()).simplify()
    return DualNormResult(pairing, attainer=attainer, h=h, lam=lam, degraded=degraded, modular=mod)


@dataclass
class ProbeRow:
    log_ratio: float   # L = ln(b/u)
    c: float
    pairing: float
    modular: float


def trivial_dual_probe(phi: OrliczFn, b: float = 1.0, log_ratios=None,
                       ceiling: float = 1e3) -> tuple:
    """Test ``chi_(0,b]`` against ``c_u f_u``, ``f_u = (w ^ w(u)) chi_(0,b]``, for ``w = 1/t``.

    With ``L = ln(b/u)``: ``int_0^b w ^ w(u) = 1 + L``,
    ``c_u = phi^{-1}(1/(1+L))`` and the pairing is ``c_u (1+L)``.  The
    modular of ``c_u f_u`` is ``int_0^1 phi(c s)/s ds + phi(c) L``.
    ``b`` only fixes ``u = b e^{-L}``; the values depend on ``L`` alone.
    Returns ``(rows, diverges)`` where ``diverges`` means the pairing
    passes ``ceiling`` while every modular stays at most 1.
    """
    _require_n_function(phi, "phi")
    if not b > 0:
        raise ValueError("b must be positive")
    if log_ratios is None:
        log_ratios = [10.0 ** j for j in range(0, 13)]
    rows = []
    for L in log_ratios:
        mass = 1.0 + L
        c = phi.inverse(1.0 / mass)
        if isinstance(phi, Power):
            head = phi.coef * c ** phi.p / phi.p
        else:
            head, _ = sp_integrate.quad(lambda s: float(phi(c * s)) / s, 0.0, 1.0, epsrel=1e-12)
        rows.append(ProbeRow(L, c, c * mass, head + float(phi(c)) * L))
    diverges = rows[-1].pairing > ceiling and all(r.modular <= 1 + 1e-12 for r in rows) \
        and all(b.pairing >= a.pairing for a, b in zip(rows, rows[1:]))
    return rows, diverges


def check_duality_order(g: StepFn, v: StepFn, w, phi: OrliczFn) -> tuple:
    """``(int phi*(g*) v, int phi*(g*) w)`` for decreasing ``v < w``."""
    w = as_weight(w)
    gs = decreasing_rearrangement(g)
    conj = phi.conjugate
    lhs_terms, rhs_terms = [], []
    grid = merge_breakpoints(gs.breakpoints, v.breakpoints)
    for lo, hi in zip(grid, grid[1:]):
        c = gs._value_on(lo, hi)
        if c == 0:
            continue
        h = conj(c)
        lhs_terms.append(h * v._value_on(lo, hi) * (hi - lo))
    for lo, hi, c in gs.cells():
        if c == 0:
            break
        rhs_terms.append(conj(c) * w.mass(lo, hi))
    return math.fsum(lhs_terms), math.fsum(rhs_terms)
