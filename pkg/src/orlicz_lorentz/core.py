"""Extended reals, exact step functions and their integrals.

Every functional in the package reduces to finite sums over the cells of
piecewise-constant functions, so this module is the common substrate.
Values may be ``int``, ``float`` or :class:`fractions.Fraction`; when all
inputs are rational the arithmetic stays exact.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Sequence

INF = math.inf

#: A nonnegative real or ``math.inf``.
ExtReal = Real


def ext(x) -> ExtReal:
    """Validate ``x`` as a nonnegative extended real."""
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        x = float(x)
    if x != x:
        raise ValueError("NaN is not an extended real")
    if x < 0:
        raise ValueError(f"extended reals are nonnegative, got {x!r}")
    return x


def ext_mul(a: ExtReal, b: ExtReal) -> ExtReal:
    """Product with the convention ``0 * inf = 0``."""
    if a == 0 or b == 0:
        return 0
    return a * b


def ext_add(a: ExtReal, b: ExtReal) -> ExtReal:
    if a == INF or b == INF:
        return INF
    return a + b


def exact_sum(terms: Iterable[ExtReal]) -> ExtReal:
    """Sum nonnegative terms; exact for rationals, ``fsum`` for floats."""
    terms = list(terms)
    if any(t == INF for t in terms):
        return INF
    if all(isinstance(t, (int, Fraction)) for t in terms):
        return sum(terms, 0)
    return math.fsum(terms)


def _num(x):
    if isinstance(x, str):
        return ext(x)
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    return x


@dataclass(frozen=True)
class StepFn:
    """Nonnegative piecewise-constant function on ``(0, a)``.

    Cell ``k`` is ``(breakpoints[k], breakpoints[k+1]]`` and carries
    ``values[k]``.  Only the last cell may be infinite.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b = tuple(_num(x) for x in self.breakpoints)
        v = tuple(abs(_num(x)) for x in self.values)
        if len(b) < 2 or len(v) != len(b) - 1:
            raise ValueError("need N+1 breakpoints for N >= 1 values")
        if b[0] != 0:
            raise ValueError("first breakpoint must be 0")
        for lo, hi in zip(b, b[1:]):
            if not hi > lo:
                raise ValueError(f"breakpoints must increase strictly: {lo!r} !< {hi!r}")
        if any(x == INF for x in b[:-1]):
            raise ValueError("only the last cell may have infinite length")
        if any(x == INF or x != x for x in v):
            raise ValueError("cell values must be finite")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c, a=INF) -> "StepFn":
        return cls((0, a), (c,))

    @classmethod
    def indicator(cls, t, a=INF, height=1) -> "StepFn":
        """``height * chi_(0,t]`` on ``(0, a)``."""
        if t >= a:
            return cls((0, a), (height,))
        return cls((0, t, a), (height, 0))

    @classmethod
    def zero(cls, a=INF) -> "StepFn":
        return cls((0, a), (0,))

    # basic queries --------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return len(self.values)

    @property
    def domain_end(self):
        return self.breakpoints[-1]

    def lengths(self) -> list:
        b = self.breakpoints
        return [hi - lo for lo, hi in zip(b, b[1:])]

    def cells(self):
        """Yield ``(left, right, value)`` per cell."""
        b = self.breakpoints
        for k, c in enumerate(self.values):
            yield b[k], b[k + 1], c

    def __call__(self, t):
        if not 0 < t <= self.domain_end or (t == INF):
            raise ValueError(f"t={t!r} outside (0, {self.domain_end!r}]")
        k = bisect_left(self.breakpoints, t) - 1
        return self.values[max(k, 0)]

    def sup(self):
        return max(self.values)

    def support_end(self):
        """Right end of the last cell with a positive value (0 if none)."""
        for k in range(self.n_cells - 1, -1, -1):
            if self.values[k] > 0:
                return self.breakpoints[k + 1]
        return 0

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.values)

    def is_nonincreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    # transformations ------------------------------------------------------
    def scale(self, c) -> "StepFn":
        return StepFn(self.breakpoints, tuple(c * v for v in self.values))

    def map_values(self, fn: Callable) -> "StepFn":
        return StepFn(self.breakpoints, tuple(fn(v) for v in self.values))

    def simplify(self) -> "StepFn":
        """Merge adjacent cells carrying equal values."""
        b = [self.breakpoints[0]]
        v = []
        for lo, hi, c in self.cells():
            if v and v[-1] == c:
                b[-1] = hi
            else:
                v.append(c)
                b.append(hi)
        return StepFn(tuple(b), tuple(v))

    def refine(self, points: Iterable) -> "StepFn":
        """Same function on breakpoints merged with ``points``."""
        grid = merge_breakpoints(self.breakpoints, [p for p in points if 0 < p < self.domain_end])
        return StepFn(grid, tuple(self._value_on(lo, hi) for lo, hi in zip(grid, grid[1:])))

    def _value_on(self, lo, hi):
        # value on a sub-cell (lo, hi] of some original cell
        k = bisect_left(self.breakpoints, hi) - 1
        return self.values[max(k, 0)]

    def truncate(self, t) -> "StepFn":
        """Values set to 0 beyond ``t`` (same domain)."""
        if t >= self.domain_end:
            return self
        g = self.refine([t])
        vals = tuple(c if hi <= t else 0 for lo, hi, c in g.cells())
        return StepFn(g.breakpoints, vals)

    def with_domain(self, a) -> "StepFn":
        """Restrict to ``(0, a)`` or extend by a zero cell."""
        end = self.domain_end
        if a == end:
            return self
        if a > end:
            return StepFn(self.breakpoints + (a,), self.values + (0,))
        g = self.refine([a])
        k = g.breakpoints.index(a)
        return StepFn(g.breakpoints[: k + 1], g.values[:k])

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "breakpoints": [_json_num(x) for x in self.breakpoints],
            "values": [_json_num(x) for x in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StepFn":
        try:
            return cls(tuple(obj["breakpoints"]), tuple(obj["values"]))
        except KeyError as exc:
            raise ValueError(f"step function missing field {exc.args[0]!r}") from None


def _json_num(x):
    if x == INF:
        return "inf"
    if isinstance(x, Fraction):
        return float(x)
    return x


def merge_breakpoints(*grids: Sequence) -> tuple:
    pts = set()
    for g in grids:
        pts.update(g)
    return tuple(sorted(pts))


def integrate(f: StepFn) -> ExtReal:
    """Exact integral; ``inf`` iff a positive value sits on an infinite cell."""
    return exact_sum(ext_mul(c, hi - lo) for lo, hi, c in f.cells())


def seq_to_step(x: Sequence) -> StepFn:
    """Unit-cell embedding: ``|x(n)|`` on ``(n-1, n]``, then a zero tail."""
    x = [abs(_num(v)) for v in x]
    n = len(x)
    return StepFn(tuple(range(n + 1)) + (INF,), tuple(x) + (0,))


def step_to_seq(f: StepFn) -> list:
    """Inverse of :func:`seq_to_step` up to trailing zeros."""
    out = []
    for lo, hi, c in f.cells():
        if hi == INF:
            if c != 0:
                raise ValueError("positive infinite tail is not a finite sequence")
            break
        length = hi - lo
        if length != int(length) or lo != int(lo):
            raise ValueError("not a unit-cell step function")
        out.extend([c] * int(length))
    while out and out[-1] == 0:
        out.pop()
    return out


def pointwise_compose(f: StepFn, g: StepFn, op: Callable) -> StepFn:
    """Apply ``op`` cellwise on the common refinement of ``f`` and ``g``."""
    if f.domain_end != g.domain_end:
        raise ValueError(
            f"domain mismatch: (0, {f.domain_end!r}) vs (0, {g.domain_end!r})"
        )
    grid = merge_breakpoints(f.breakpoints, g.breakpoints)
    vals = []
    for lo, hi in zip(grid, grid[1:]):
        vals.append(op(f._value_on(lo, hi), g._value_on(lo, hi)))
    return StepFn(grid, tuple(vals))


def add(f: StepFn, g: StepFn) -> StepFn:
    return pointwise_compose(f, g, lambda a, b: a + b)


def multiply(f: StepFn, g: StepFn) -> StepFn:
    return pointwise_compose(f, g, lambda a, b: a * b)
