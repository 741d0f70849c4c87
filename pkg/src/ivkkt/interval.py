"""Closed bounded real intervals with LU/CW orderings and the gH-difference.

Intervals are immutable. Degenerate intervals ``[a, a]`` are ordinary values;
real numbers embed through :meth:`Interval.point`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True, slots=True)
class Interval:
    """The closed interval ``[lo, hi]`` with finite bounds and ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval bounds must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"interval lower bound exceeds upper bound: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> Interval:
        return cls(x, x)

    @classmethod
    def from_center_width(cls, center: float, half_width: float) -> Interval:
        if half_width < 0:
            raise ValueError("half-width must be non-negative")
        return cls(center - half_width, center + half_width)

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other: Interval) -> Interval:
        return add(self, other)

    def __neg__(self) -> Interval:
        return scale(-1.0, self)

    def __rmul__(self, k: float) -> Interval:
        return scale(k, self)

    def __str__(self) -> str:
        return f"[{self.lo:.10g}, {self.hi:.10g}]"


IntervalTuple = tuple[Interval, ...]

ZERO = Interval(0.0, 0.0)


def add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def scale(k: float, a: Interval) -> Interval:
    """``k * a``; a negative factor swaps the endpoints."""
    if k >= 0:
        return Interval(k * a.lo, k * a.hi)
    return Interval(k * a.hi, k * a.lo)


def gh_diff(a: Interval, b: Interval) -> Interval:
    """Generalized Hukuhara difference ``a ⊖_g b``; always defined."""
    d_lo = a.lo - b.lo
    d_hi = a.hi - b.hi
    return Interval(min(d_lo, d_hi), max(d_lo, d_hi))


def hausdorff(a: Interval, b: Interval) -> float:
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


def leq_lu(a: Interval, b: Interval) -> bool:
    return a.lo <= b.lo and a.hi <= b.hi


def lt_lu(a: Interval, b: Interval) -> bool:
    return leq_lu(a, b) and a != b


def leq_cw(a: Interval, b: Interval) -> bool:
    return a.center <= b.center and a.half_width <= b.half_width


def lt_cw(a: Interval, b: Interval) -> bool:
    return leq_cw(a, b) and a != b


def _check_lengths(a: Sequence[Interval], b: Sequence[Interval]) -> None:
    if len(a) != len(b):
        raise ValueError(f"interval tuples differ in length: {len(a)} != {len(b)}")
    if not a:
        raise ValueError("interval tuples must be non-empty")


def tuple_leq_lu(a: Sequence[Interval], b: Sequence[Interval]) -> bool:
    _check_lengths(a, b)
    return all(leq_lu(x, y) for x, y in zip(a, b))


def tuple_lt_lu(a: Sequence[Interval], b: Sequence[Interval]) -> bool:
    """Componentwise ``<=_LU`` with strict ``<_LU`` in at least one slot."""
    _check_lengths(a, b)
    return tuple_leq_lu(a, b) and any(lt_lu(x, y) for x, y in zip(a, b))


def tuple_leq_cw(a: Sequence[Interval], b: Sequence[Interval]) -> bool:
    _check_lengths(a, b)
    return all(leq_cw(x, y) for x, y in zip(a, b))


def tuple_lt_cw(a: Sequence[Interval], b: Sequence[Interval]) -> bool:
    _check_lengths(a, b)
    return tuple_leq_cw(a, b) and any(lt_cw(x, y) for x, y in zip(a, b))


def interval_sum(items: Sequence[Interval]) -> Interval:
    total = ZERO
    for item in items:
        total = add(total, item)
    return total


def parse_interval(text: str) -> Interval:
    """Parse the literal ``[lo, hi]``."""
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"interval literal must look like [lo, hi]: {text!r}")
    parts = s[1:-1].split(",")
    if len(parts) != 2:
        raise ValueError(f"interval literal needs exactly two bounds: {text!r}")
    return Interval(float(parts[0]), float(parts[1]))
