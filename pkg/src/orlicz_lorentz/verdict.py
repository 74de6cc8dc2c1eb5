"""Grid-based boundedness verdicts with witnesses.

A supremum over a continuum is replaced by a supremum over sample points.
Two things make the sample sup "unbounded": it exceeds a ceiling, or the
running sup over a nested sequence of windows (each reaching deeper into a
singular end) keeps growing at a non-decaying rate.  The second rule is
what lets truncated counterexamples be classified at float-safe depths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

DEFAULT_CEILING = 1e6


@dataclass(frozen=True)
class Verdict:
    holds: bool
    constant: float | None = None
    witness: Any = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def __iter__(self):
        # supports ``ok, c_or_witness = verdict``
        yield self.holds
        yield self.constant if self.holds else self.witness


def trend_unbounded(level_sups: Sequence[float], min_growth: float = 0.05,
                    keep_rate: float = 0.25) -> bool:
    """True when running sups grow without levelling off.

    ``level_sups`` is nondecreasing (sup over nested windows).  Growth is
    "sustained" when the total relative growth exceeds ``min_growth`` and the
    last increment is at least ``keep_rate`` times the largest increment.
    """
    s = [x for x in level_sups if math.isfinite(x)]
    if len(s) < 3:
        return False
    if s[-1] <= s[0] * (1 + min_growth):
        return False
    inc = [b - a for a, b in zip(s, s[1:])]
    big = max(inc)
    return big > 0 and inc[-1] >= keep_rate * big


def sup_verdict(points: Sequence, ratios: Sequence[float],
                windows: Sequence[tuple] | None = None,
                ceiling: float = DEFAULT_CEILING,
                key=None) -> Verdict:
    """Decide ``sup ratio < inf`` from samples.

    ``windows`` are nested ``(lo, hi)`` intervals ordered from shallow to
    deep; ``key(point)`` maps a sample point to the coordinate compared
    against them (identity by default).
    """
    if not len(points):
        raise ValueError("no sample points")
    key = key or (lambda p: p)
    for p, r in zip(points, ratios):
        if r != r:
            return Verdict(False, witness=p, reason="ratio undefined (nan)")
    best = max(ratios)
    cut = best * (1 - 1e-12) if math.isfinite(best) and best > 0 else best
    # ties resolve to the largest sample coordinate
    arg = max((p for p, r in zip(points, ratios) if r >= cut), key=key)
    if best > ceiling:
        return Verdict(False, witness=arg, reason=f"sup ratio {best:.6g} > ceiling {ceiling:.3g}")
    if windows:
        level = []
        for lo, hi in windows:
            inside = [r for p, r in zip(points, ratios) if lo <= key(p) <= hi]
            level.append(max(inside) if inside else -math.inf)
        running = []
        cur = -math.inf
        for x in level:
            cur = max(cur, x)
            running.append(cur)
        if trend_unbounded(running):
            return Verdict(False, witness=arg,
                           reason="running sup keeps growing across nested windows")
    return Verdict(True, constant=best)
