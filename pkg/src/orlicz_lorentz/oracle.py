"""Brute-force ground truth: permutations, balanced matrices, lattices."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .core import INF, StepFn
from .orlicz import OrliczFn
from .rearrange import Permutation, decreasing_rearrangement, rearrange_seq
from .weights import as_weight

MAX_ENUM = 8


def _psi_table(xs: Sequence[float], ws: Sequence[float], phi: OrliczFn) -> np.ndarray:
    """``T[i, j] = phi(xs[i]/ws[j]) ws[j]`` with the ``0/0`` convention."""
    x = np.asarray(xs, dtype=float)[:, None]
    w = np.asarray(ws, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        T = np.asarray(phi(x / np.where(w > 0, w, 1.0)), dtype=float) * w
    T = np.where(w > 0, T, np.where(x > 0, INF, 0.0))
    return np.where(x > 0, T, 0.0)


def _pad(x, n):
    return list(x) + [0] * (n - len(x))


def min_over_permutations(x: Sequence, w: Sequence, phi: OrliczFn) -> tuple:
    """``min_s sum phi(x*(i)/w(s(i))) w(s(i))`` by enumerating all ``n!`` arrangements.

    Ties go to the lexicographically first permutation, so the identity
    wins whenever it is optimal.
    """
    n = max(len(x), len(w))
    if n > MAX_ENUM:
        raise ValueError(f"enumeration is capped at n = {MAX_ENUM}, got {n}")
    if n == 0:
        return 0.0, Permutation(())
    xs = rearrange_seq(_pad(x, n))
    T = _psi_table(xs, _pad(w, n), phi)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    with np.errstate(invalid="ignore"):
        vals = T[np.arange(n), perms].sum(axis=1)
    k = int(np.argmin(vals))
    best = math.fsum(T[i, perms[k, i]] for i in range(n))
    return best, Permutation(tuple(perms[k]))


def random_balanced_matrix(n: int, rng: np.random.Generator, terms: int | None = None,
                           max_coef: int = 3) -> np.ndarray:
    """Nonnegative integer combination of permutation matrices.

    Each row sum equals the matching column sum because every summand has
    all row and column sums equal to its coefficient.
    """
    terms = terms or n
    A = np.zeros((n, n), dtype=np.int64)
    for _ in range(terms):
        perm = rng.permutation(n)
        A[np.arange(n), perm] += int(rng.integers(0, max_coef + 1))
    return A


def balanced_matrix_check(x: Sequence, w: Sequence, A, phi: OrliczFn) -> tuple:
    """``(sum psi(x*_i, w_i) A_ij, sum psi(x*_i, w_j) A_ij)``; lhs never exceeds rhs."""
    A = np.asarray(A)
    n = len(x)
    if A.shape != (n, n) or len(w) != n:
        raise ValueError(f"need an {n}x{n} matrix and {n} weights")
    if np.any(A < 0):
        raise ValueError("matrix entries must be nonnegative")
    rows, cols = A.sum(axis=1), A.sum(axis=0)
    for i in range(n):
        if not math.isclose(rows[i], cols[i], rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(f"row {i} sums to {rows[i]} but column {i} sums to {cols[i]}")
    xs = rearrange_seq(x)
    T = _psi_table(xs, w, phi)
    Af = A.astype(float)
    with np.errstate(invalid="ignore"):
        diag = np.diag(T)[:, None] * Af
        full = T * Af
    diag = np.where(Af > 0, diag, 0.0)
    full = np.where(Af > 0, full, 0.0)
    return math.fsum(diag.ravel()), math.fsum(full.ravel())


def random_equimeasurable(x: Sequence, zero_padding: int = 0, seed: int = 0) -> list:
    """``x`` padded with zeros and shuffled by a seeded permutation."""
    rng = np.random.default_rng(seed)
    y = list(x) + [0] * zero_padding
    perm = rng.permutation(len(y))
    return [y[i] for i in perm]


# ---------------------------------------------------------------------------
# lattice oracle for the envelope functional


def _cells(f: StepFn, w):
    fs = decreasing_rearrangement(f)
    cells = [(lo, hi, c) for lo, hi, c in fs.cells() if c > 0]
    if cells and cells[-1][1] == INF:
        raise ValueError("positive infinite tail")
    s = np.array([float(c) for _, _, c in cells])
    ell = np.array([float(hi - lo) for lo, hi, _ in cells])
    Wk = np.array([w.W(float(hi)) for _, hi, _ in cells])
    return s, ell, Wk


def _objective(s, ell, phi, V):
    """Objective for lattice points ``V`` of shape ``(m, n)``; inf where undefined."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(phi(s / V), dtype=float) * V * ell
    vals = np.where(V > 0, vals, INF)
    return vals.sum(axis=1)


def _from_fractions(theta, ell, Wk):
    """Map ``theta in (0,1]^n`` onto feasible decreasing ``v`` coordinate by coordinate."""
    m, n = theta.shape
    v = np.empty_like(theta)
    used = np.zeros(m)
    prev = np.full(m, INF)
    for k in range(n):
        cap = np.minimum(prev, (Wk[k] - used) / ell[k])
        v[:, k] = theta[:, k] * np.maximum(cap, 0.0)
        used = used + v[:, k] * ell[k]
        prev = v[:, k]
    return v


def _to_fractions(v, ell, Wk):
    theta = np.empty_like(v)
    used, prev = 0.0, INF
    for k in range(len(v)):
        cap = min(prev, (Wk[k] - used) / ell[k])
        theta[k] = v[k] / cap if cap > 0 else 0.0
        used += v[k] * ell[k]
        prev = v[k]
    return np.clip(theta, 0.0, 1.0)


def grid_search_P(f: StepFn, w, phi: OrliczFn, resolution: int = 60, zoom_rounds: int = 60,
                  zoom_points: int = 11) -> float:
    """Upper bound for ``P(f)`` from lattice search over feasible cellwise-constant ``v``.

    Stage one scans ``resolution**n`` points of the box ``(0, w_1(b_1)]^n``
    and keeps the feasible ones.  Stage two zooms around the incumbent in
    coordinates ``theta_k = v_k / cap_k(v_0..v_{k-1})``, whose lattice
    contains the constraint boundary itself; each zoom lattice contains the
    incumbent, so the value never increases.
    """
    w = as_weight(w)
    s, ell, Wk = _cells(f, w)
    n = len(s)
    if n == 0:
        return 0.0
    if n > 3:
        raise ValueError(f"lattice oracle handles at most 3 cells, got {n}")
    hi = Wk[0] / ell[0]
    axis = hi * np.arange(1, resolution + 1) / resolution
    V = np.stack([g.ravel() for g in np.meshgrid(*([axis] * n), indexing="ij")], axis=1)
    ok = np.all(np.diff(V, axis=1) <= 0, axis=1) & np.all(np.cumsum(V * ell, axis=1) <= Wk, axis=1)
    V = V[ok]
    vals = _objective(s, ell, phi, V)
    k = int(np.argmin(vals))
    best, v_best = float(vals[k]), V[k]

    theta = _to_fractions(v_best, ell, Wk)
    half = 0.5
    for _ in range(zoom_rounds):
        axes = [np.unique(np.clip(np.concatenate([np.linspace(c - half, c + half, zoom_points), [c]]),
                                  1e-300, 1.0)) for c in theta]
        TH = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        V = _from_fractions(TH, ell, Wk)
        vals = _objective(s, ell, phi, V)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, theta = float(vals[k]), TH[k]
        half *= 0.6
        if half < 1e-12:
            break
    return best


def amemiya_grid(values: Sequence[float], masses: Sequence[float], phi_star: OrliczFn,
                 ks: Sequence[float]) -> float:
    """``min_k (1 + sum phi*(k f_k) m_k) / k`` over the supplied grid of ``k``."""
    f = np.asarray(values, dtype=float)
    m = np.asarray(masses, dtype=float)
    best = INF
    for k in ks:
        total = math.fsum(float(phi_star(k * fv)) * mv for fv, mv in zip(f, m))
        best = min(best, (1 + total) / k)
    return best


def grid_search_P_general(x: Sequence, w, phi: OrliczFn, zoom_rounds: int = 60,
                          zoom_points: int = 11) -> float:
    """``P`` of a sequence straight from the definition, without sorting ``x``.

    ``v`` ranges over nonnegative unit-cell sequences with ``v < w`` and no
    monotonicity; every ordering of the values of ``v`` is scanned, each
    with the zoomed fraction lattice of :func:`grid_search_P`.
    """
    w = as_weight(w)
    xs = [abs(float(t)) for t in x]
    support = [i for i, t in enumerate(xs) if t > 0]
    n = len(support)
    if n == 0:
        return 0.0
    if n > 3:
        raise ValueError(f"lattice oracle handles at most 3 nonzero entries, got {n}")
    vals = np.array([xs[i] for i in support])
    ell = np.ones(n)
    Wk = np.array([w.W(float(k + 1)) for k in range(n)])
    best = INF
    for order in itertools.permutations(range(n)):
        # v[support[j]] = u[order[j]] with u decreasing and u < w
        s = np.empty(n)
        s[list(order)] = vals
        theta = np.full(n, 0.5)
        half = 0.5
        local = INF
        for _ in range(zoom_rounds):
            axes = [np.unique(np.clip(np.concatenate([np.linspace(c - half, c + half, zoom_points), [c]]),
                                      1e-300, 1.0)) for c in theta]
            TH = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
            V = _from_fractions(TH, ell, Wk)
            objective = _objective(s, ell, phi, V)
            k = int(np.argmin(objective))
            if objective[k] < local:
                local, theta = float(objective[k]), TH[k]
            half *= 0.6
            if half < 1e-12:
                break
        best = min(best, local)
    return best
