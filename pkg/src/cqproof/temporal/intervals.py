"""Integer intervals whose endpoints may be infinite.

``NEG_INF``/``POS_INF`` are the float infinities, so arithmetic with finite
integers saturates for free (``POS_INF - 3 == POS_INF``).  Empty results are
``None``; an Interval object is never empty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Union

POS_INF = math.inf
NEG_INF = -math.inf

Endpoint = Union[int, float]


def _check_endpoint(x) -> Endpoint:
    if isinstance(x, bool):
        raise TypeError("booleans are not interval endpoints")
    if isinstance(x, int):
        return x
    if isinstance(x, float) and math.isinf(x):
        return x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    raise TypeError(f"interval endpoints must be integers or infinite, got {x!r}")


def fmt_endpoint(x: Endpoint) -> str:
    if x == POS_INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return str(x)


@dataclass(frozen=True, order=True)
class Interval:
    lo: Endpoint
    hi: Endpoint

    def __post_init__(self):
        lo, hi = _check_endpoint(self.lo), _check_endpoint(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo > hi or lo == POS_INF or hi == NEG_INF:
            raise ValueError(f"empty interval [{fmt_endpoint(lo)},{fmt_endpoint(hi)}]")

    @classmethod
    def make(cls, lo: Endpoint, hi: Endpoint) -> Optional["Interval"]:
        """Like the constructor but returns None for an empty range."""
        if lo > hi or lo == POS_INF or hi == NEG_INF:
            return None
        return cls(lo, hi)

    @classmethod
    def point(cls, t: int) -> "Interval":
        return cls(t, t)

    @property
    def is_finite(self) -> bool:
        return not (math.isinf(self.lo) or math.isinf(self.hi))

    def __len__(self) -> int:
        if not self.is_finite:
            raise OverflowError("infinite interval has no finite length")
        return int(self.hi - self.lo + 1)

    def __contains__(self, t) -> bool:
        return self.lo <= t <= self.hi

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        return Interval.make(max(self.lo, other.lo), min(self.hi, other.hi))

    def shift(self, k: int) -> "Interval":
        return Interval(self.lo + k, self.hi + k)

    def minus(self, r: "Interval") -> "Interval":
        """All i with i + k in self for some k in r."""
        return Interval(self.lo - r.hi, self.hi - r.lo)

    def plus(self, r: "Interval") -> "Interval":
        """All i with i - k in self for some k in r."""
        return Interval(self.lo + r.lo, self.hi + r.hi)

    def touches(self, other: "Interval") -> bool:
        """Overlapping or directly adjacent."""
        return self.lo <= other.hi + 1 and other.lo <= self.hi + 1

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def points(self) -> range:
        return range(int(self.lo), int(self.hi) + 1)

    def __str__(self):
        return f"[{fmt_endpoint(self.lo)},{fmt_endpoint(self.hi)}]"


FULL = Interval(NEG_INF, POS_INF)


def union_if_contiguous(intervals: Iterable[Interval]) -> Optional[Interval]:
    """The union when it is a single interval, else None."""
    ivs = sorted(intervals)
    if not ivs:
        return None
    cur = ivs[0]
    for iv in ivs[1:]:
        if not cur.touches(iv):
            return None
        cur = cur.hull(iv)
    return cur


def coalesce(intervals: Iterable[Interval]) -> List[Interval]:
    """Maximal intervals covering the same points."""
    out: List[Interval] = []
    for iv in sorted(intervals):
        if out and out[-1].touches(iv):
            out[-1] = out[-1].hull(iv)
        else:
            out.append(iv)
    return out


def interval_arith(op: str, a: Interval, b: Optional[Interval] = None) -> Optional[Interval]:
    if op == "intersect":
        return a.intersect(b)
    if op == "shift+1":
        return a.shift(1)
    if op == "shift-1":
        return a.shift(-1)
    if op == "minus":
        return a.minus(b)
    if op == "plus":
        return a.plus(b)
    if op == "union_if_contiguous":
        return union_if_contiguous([a, b])
    raise ValueError(f"unknown interval operation {op!r}")


def cover(target: Interval, pieces: Iterable[Interval]) -> Optional[List[Interval]]:
    """Fewest pieces whose union contains ``target`` (greedy), or None."""
    ivs = sorted(set(pieces))
    chosen: List[Interval] = []
    reach = target.lo  # first point not yet covered
    while True:
        best = None
        for iv in ivs:
            if iv.lo <= reach and iv.hi >= reach and (best is None or iv.hi > best.hi):
                best = iv
        if best is None:
            return None
        chosen.append(best)
        if best.hi >= target.hi:
            return chosen
        reach = best.hi + 1
