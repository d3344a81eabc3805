"""Exact arithmetic on the circle R/Z and the angle-doubling map.

Angles are rationals reduced mod 1.  Arcs are half-open, ``[start, end)``,
running counterclockwise; a zero-length arc stands for the single point
``start`` and a ``full`` arc is the whole circle.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

AngleLike = Union["Angle", Fraction, int, str]


class Angle:
    """A point of R/Z held as an exact reduced fraction in [0, 1)."""

    __slots__ = ("_value",)

    def __init__(self, value: AngleLike, denominator: int | None = None):
        if denominator is not None:
            value = Fraction(int(value), denominator)
        elif isinstance(value, Angle):
            value = value._value
        elif isinstance(value, str):
            value = _parse_fraction(value)
        else:
            value = Fraction(value)
        self._value = value - math.floor(value)

    @property
    def numerator(self) -> int:
        return self._value.numerator

    @property
    def denominator(self) -> int:
        return self._value.denominator

    @property
    def value(self) -> Fraction:
        return self._value

    def __float__(self) -> float:
        return float(self._value)

    def __eq__(self, other):
        if isinstance(other, Angle):
            return self._value == other._value
        if isinstance(other, (int, Fraction)):
            return self._value == other
        return NotImplemented

    def __lt__(self, other: "Angle") -> bool:
        return self._value < Angle(other)._value

    def __le__(self, other: "Angle") -> bool:
        return self._value <= Angle(other)._value

    def __hash__(self):
        return hash(self._value)

    def __add__(self, other: AngleLike) -> "Angle":
        return Angle(self._value + Angle(other)._value)

    def __sub__(self, other: AngleLike) -> "Angle":
        return Angle(self._value - Angle(other)._value)

    def __neg__(self) -> "Angle":
        return Angle(-self._value)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self):
        return f"Angle('{self}')"


def _parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"-?\d+(/\d+)?|-?\d*\.\d+", text):
        raise ValueError(f"not an exact angle: {text!r}")
    return Fraction(text)


@dataclass(frozen=True)
class CircleArc:
    start: Angle
    end: Angle
    full: bool = False

    def __post_init__(self):
        object.__setattr__(self, "start", Angle(self.start))
        object.__setattr__(self, "end", Angle(self.end))
        if self.full and self.start != self.end:
            raise ValueError("a full arc must start and end at the same angle")

    @classmethod
    def circle(cls, start: AngleLike = 0) -> "CircleArc":
        s = Angle(start)
        return cls(s, s, full=True)

    @classmethod
    def from_length(cls, start: AngleLike, length: Fraction) -> "CircleArc":
        s = Angle(start)
        if length >= 1:
            return cls.circle(s)
        return cls(s, s + length)

    @property
    def length(self) -> Fraction:
        return arc_length(self)

    @property
    def degenerate(self) -> bool:
        return not self.full and self.start == self.end

    def contains(self, t: AngleLike) -> bool:
        """Half-open membership; a degenerate arc contains only its point."""
        t = Angle(t)
        if self.degenerate:
            return t == self.start
        return (t - self.start).value < self.length

    def __str__(self):
        if self.full:
            s = self.start
            return f"{s}..{s.numerator + s.denominator}/{s.denominator}"
        return f"{self.start}..{self.end}"

    @classmethod
    def parse(cls, text: str) -> "CircleArc":
        a, sep, b = text.strip().partition("..")
        if not sep:
            raise ValueError(f"not an arc: {text!r}")
        start, end = _parse_fraction(a), _parse_fraction(b)
        if end - start == 1:
            return cls.circle(start)
        return cls(Angle(start), Angle(end))


@dataclass(frozen=True)
class OrbitSummary:
    preperiod: int
    period: int


def double(t: AngleLike) -> Angle:
    return Angle(2 * Angle(t).value)


def halves(t: AngleLike) -> tuple[Angle, Angle]:
    """The two doubling preimages ``(t/2, t/2 + 1/2)``."""
    h = Angle(t).value / 2
    return Angle(h), Angle(h + Fraction(1, 2))


def orbit(t: AngleLike, n: int) -> list[Angle]:
    if n < 1:
        raise ValueError("n must be >= 1")
    out = [Angle(t)]
    for _ in range(n - 1):
        out.append(double(out[-1]))
    return out


def orbit_summary(t: AngleLike) -> OrbitSummary:
    t = Angle(t)
    q = t.denominator
    # strip the 2-adic part: preperiod is its exponent, period the order of 2 mod the odd part
    pre = 0
    while q % 2 == 0:
        q //= 2
        pre += 1
    period = 1
    if q > 1:
        r = 2 % q
        while r != 1:
            r = 2 * r % q
            period += 1
    return OrbitSummary(pre, period)


def arc_length(a: CircleArc) -> Fraction:
    if a.full:
        return Fraction(1)
    return (a.end - a.start).value


def image_arcs(a: CircleArc) -> list[CircleArc]:
    """Doubling image.  Arcs of length >= 1/2 cover the circle."""
    start = double(a.start)
    if a.full or arc_length(a) >= Fraction(1, 2):
        return [CircleArc.circle(start)]
    return [CircleArc.from_length(start, 2 * arc_length(a))]


def preimage_arcs(a: CircleArc) -> list[CircleArc]:
    half = arc_length(a) / 2
    lo, hi = halves(a.start)
    if a.degenerate:
        return [CircleArc(lo, lo), CircleArc(hi, hi)]
    return [CircleArc.from_length(lo, half), CircleArc.from_length(hi, half)]


def normalize_arcs(arcs: Iterable[CircleArc]) -> tuple[list[CircleArc], list[Angle]]:
    """Merge overlapping or abutting half-open arcs.

    Returns ``(arcs, points)``: disjoint nondegenerate arcs sorted by start, and
    the degenerate points not already covered by one of them.
    """
    arcs = list(arcs)
    points = sorted({a.start for a in arcs if a.degenerate})
    spans = []
    for a in arcs:
        if a.full:
            return [CircleArc.circle(0)], []
        if a.degenerate:
            continue
        s, e = a.start.value, a.start.value + arc_length(a)
        if e > 1:
            spans.append((s, Fraction(1)))
            spans.append((Fraction(0), e - 1))
        else:
            spans.append((s, e))
    spans.sort()
    merged: list[list[Fraction]] = []
    for s, e in spans:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if len(merged) == 1 and merged[0] == [0, 1]:
        return [CircleArc.circle(0)], []
    # rejoin the span that wraps through 0
    if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == 1:
        last = merged.pop()
        merged[0] = [last[0], merged[0][1] + 1]
    out = [CircleArc.from_length(s, e - s) for s, e in merged]
    pts = [p for p in points if not any(a.contains(p) for a in out)]
    return out, pts


def arcs_contain_arc(cover: Sequence[CircleArc], a: CircleArc) -> bool:
    """Exact test that half-open ``a`` lies inside the union ``cover``."""
    merged, points = normalize_arcs(cover)
    if a.degenerate:
        return any(b.contains(a.start) for b in merged) or a.start in points
    if merged and merged[0].full:
        return True
    if a.full:
        return False
    for b in merged:
        if b.contains(a.start) and arc_length(a) <= arc_length(b) - (a.start - b.start).value:
            return True
    return False


def total_length(arcs: Iterable[CircleArc]) -> Fraction:
    merged, _ = normalize_arcs(arcs)
    return sum((arc_length(a) for a in merged), Fraction(0))


# -- irrational rotation angle ------------------------------------------------


@dataclass(frozen=True)
class SiegelAngle:
    value: Fraction
    tail_bound: Fraction
    q_max: int
    lowest_terms: bool = False

    def __float__(self):
        return float(self.value)


def golden_mean_cf(n: int = 80) -> list[int]:
    """Continued fraction ``[0; 1, 1, 1, ...]`` of (sqrt(5) - 1)/2."""
    return [0] + [1] * n


def _cf_bounds(cf: Sequence[int]) -> tuple[Fraction, Fraction]:
    # consecutive convergents bracket the (irrational) limit strictly
    h0, h1 = 1, cf[0]
    k0, k1 = 0, 1
    prev = Fraction(h1, k1)
    cur = prev
    for a in cf[1:]:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        prev, cur = cur, Fraction(h1, k1)
    if prev == cur:
        raise ValueError("continued fraction needs at least two terms")
    return min(prev, cur), max(prev, cur)


def _theta_bounds(theta) -> tuple[Fraction, Fraction]:
    if isinstance(theta, str):
        digits = theta.strip().split(".")[-1]
        x = Fraction(theta.strip())
        half_ulp = Fraction(1, 2 * 10 ** len(digits))
        return x - half_ulp, x + half_ulp
    if isinstance(theta, tuple) and len(theta) == 2:
        return Fraction(theta[0]), Fraction(theta[1])
    return _cf_bounds(list(theta))


def siegel_tail_bound(q_max: int) -> Fraction:
    """Sum over q > q_max of (q-1) 2^-(q+1), in closed form."""
    return Fraction(q_max + 1, 2 ** (q_max + 1))


def siegel_angle(theta, q_max: int, lowest_terms: bool = False) -> SiegelAngle:
    """Partial sum of 2^-(q+1) over fractions 0 < p/q < theta with q <= q_max.

    ``theta`` is a continued fraction (list of partial quotients), a decimal
    string (known to +- half a unit in the last place) or an exact
    ``(lo, hi)`` bracket.  Raises ``ValueError`` when the supplied precision
    cannot decide some p/q against theta.

    By default every numerator p < q theta is counted, reduced or not; only
    this reading gives an angle whose doubling orbit stays in [s, s + 1/2].
    ``lowest_terms=True`` counts reduced fractions only.
    """
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    lo, hi = _theta_bounds(theta)
    if not (0 < lo < hi < 1):
        raise ValueError("theta must lie strictly inside (0, 1)")
    numer = 0
    for q in range(2, q_max + 1):
        # p/q <= lo is below theta, p/q >= hi is above; nothing may fall between
        count_to = math.floor(q * lo)
        if count_to + 1 < q * hi:
            raise ValueError(f"theta not resolved at denominator {q}")
        if lowest_terms:
            n = sum(1 for p in range(1, count_to + 1) if math.gcd(p, q) == 1)
        else:
            n = count_to
        numer += n * 2 ** (q_max - q)
    value = Fraction(numer, 2 ** (q_max + 1))
    return SiegelAngle(value, siegel_tail_bound(q_max), q_max, lowest_terms)


def siegel_orbit_in_window(s: SiegelAngle, steps: int = 200) -> bool:
    """Check the doubling orbit of s stays in [s, s + 1/2] for ``steps`` steps.

    The true angle lies in ``[value, value + tail]``.  The offset of the k-th
    iterate from s itself, (2^k - 1) s - m, is monotone in s, so both ends of
    the bracket are followed exactly.  Returns False only when the whole
    bracket leaves the window; raises ``ValueError`` when the bracket is too
    wide to decide (raise ``q_max``).
    """
    lo, hi = s.value, s.value + s.tail_bound
    half = Fraction(1, 2)
    p = 1
    for _ in range(steps):
        p *= 2
        m = math.floor(p * lo)
        if math.floor(p * hi) != m:
            raise ValueError("q_max too small for the requested number of steps")
        d_lo = (p - 1) * lo - m
        d_hi = (p - 1) * hi - m
        # offsets wrap mod 1: bring them next to the window [0, 1/2]
        shift = math.floor(d_lo + half)
        d_lo, d_hi = d_lo - shift, d_hi - shift
        if 0 <= d_lo and d_hi <= half:
            continue
        if d_hi < 0 or d_lo > half:
            return False
        raise ValueError("q_max too small for the requested number of steps")
    return True
