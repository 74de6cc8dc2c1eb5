"""Distribution functions, decreasing rearrangements and submajorization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import INF, StepFn, exact_sum, ext_mul, integrate, multiply, seq_to_step
from .orlicz import OrliczFn


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{0, ..., n-1}``; ``images[i]`` is the image of ``i``."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(i) for i in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError(f"not a permutation: {imgs}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def sorting(cls, x: Sequence) -> "Permutation":
        """Permutation ``s`` with ``|x[s(i)]|`` nonincreasing in ``i`` (stable)."""
        return cls(tuple(sorted(range(len(x)), key=lambda i: -abs(x[i]))))

    def __len__(self):
        return len(self.images)

    def apply(self, x: Sequence) -> list:
        """``(x[s(0)], x[s(1)], ...)``."""
        if len(x) != len(self.images):
            raise ValueError("length mismatch")
        return [x[i] for i in self.images]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))


def dist(f: StepFn, s) -> object:
    """``|{t: |f(t)| > s}|``, exact."""
    if s < 0:
        raise ValueError("level s must be nonnegative")
    return exact_sum(hi - lo for lo, hi, c in f.cells() if c > s)


def decreasing_rearrangement(f: StepFn) -> StepFn:
    """Nonincreasing, equimeasurable with ``|f|``, on the same domain.

    A positive value ``c`` on an infinite cell makes ``d_f(s)`` infinite for
    ``s < c``; finite cells with values at most ``c`` then do not show in f*.
    """
    cells = list(f.cells())
    tail = None
    if f.domain_end == INF:
        tail = cells.pop()[2]
    floor = tail if tail else 0
    kept = [(hi - lo, c) for lo, hi, c in cells if c > floor]
    kept.sort(key=lambda lc: -lc[1])  # stable: ties keep cell order
    b, v = [0], []
    for length, c in kept:
        if v and v[-1] == c:
            b[-1] = b[-1] + length
        else:
            b.append(b[-1] + length)
            v.append(c)
    end = f.domain_end
    if b[-1] != end:
        if v and v[-1] == floor:
            b[-1] = end
        else:
            b.append(end)
            v.append(floor)
    return StepFn(tuple(b), tuple(v))


def rearrange_seq(x: Sequence) -> list:
    return sorted((abs(v) for v in x), reverse=True)


def permute_cells(f: StepFn, perm: Permutation) -> StepFn:
    """Reorder the finite cells of ``f`` (an infinite last cell stays last)."""
    cells = list(f.cells())
    tail = cells.pop() if f.domain_end == INF else None
    if len(perm) != len(cells):
        raise ValueError(f"permutation of size {len(perm)} for {len(cells)} finite cells")
    b, v = [0], []
    for lo, hi, c in perm.apply(cells):
        b.append(b[-1] + (hi - lo))
        v.append(c)
    if tail is not None:
        b.append(INF)
        v.append(tail[2])
    return StepFn(tuple(b), tuple(v))


def dilate2(f: StepFn) -> StepFn:
    """``(D_2 f)(t) = f(t/2)``, clipped to the domain of ``f``."""
    g = StepFn(tuple(2 * b for b in f.breakpoints), f.values)
    if f.domain_end != INF:
        g = g.with_domain(f.domain_end)
    return g


def dilate2_seq(x: Sequence) -> list:
    """``D_2 x(n) = x(ceil(n/2))``: every entry twice."""
    return [v for v in x for _ in range(2)]


def cumulative(f: StepFn, t):
    """``int_0^t f`` for ``0 <= t <= domain_end``."""
    total = []
    for lo, hi, c in f.cells():
        if lo >= t:
            break
        total.append(ext_mul(c, min(hi, t) - lo))
    return exact_sum(total)


def submajorizes(g: StepFn, f: StepFn) -> bool:
    """``g < f``: ``int_0^t g* <= int_0^t f*`` for every ``t``.

    Both cumulatives are concave and piecewise linear, so it is enough to
    compare them at the kinks and, on an infinite domain, the final slopes.
    """
    if g.domain_end != f.domain_end:
        raise ValueError("submajorization needs a common domain")
    gs, fs = decreasing_rearrangement(g), decreasing_rearrangement(f)
    grid = sorted({b for b in gs.breakpoints + fs.breakpoints if b != INF})
    if any(cumulative(gs, t) > cumulative(fs, t) for t in grid[1:]):
        return False
    if f.domain_end == INF:
        return gs.values[-1] <= fs.values[-1]
    return True


def submajorizes_seq(y: Sequence, x: Sequence) -> bool:
    n = max(len(x), len(y))
    pad = lambda z: list(z) + [0] * (n - len(z))
    return submajorizes(seq_to_step(pad(y)), seq_to_step(pad(x)))


def hardy_littlewood_check(f: StepFn, g: StepFn) -> tuple:
    """``(int |f g|, int f* g*)``; the first never exceeds the second."""
    lhs = integrate(multiply(f, g))
    rhs = integrate(multiply(decreasing_rearrangement(f), decreasing_rearrangement(g)))
    return lhs, rhs


def exchange_inequality(s1, s2, t1, t2, phi: OrliczFn) -> tuple:
    """Both sides of the two-term exchange step behind permutation minimality.

    Returns ``(phi(s1/t1) t1 + phi(s2/t2) t2, phi(s1/t2) t2 + phi(s2/t1) t1)``.
    """
    if not (s1 > s2 > 0 and t1 > t2 > 0):
        raise ValueError(f"need s1 > s2 > 0 and t1 > t2 > 0, got s=({s1}, {s2}) t=({t1}, {t2})")
    psi = lambda s, t: float(phi(s / t)) * t
    return psi(s1, t1) + psi(s2, t2), psi(s1, t2) + psi(s2, t1)
