"""Symbolic dynamics of angle doubling relative to a critical portrait.

Two angles are taken to land together when their itineraries agree.  This
module decides biaccessibility and spine membership on that basis and turns
such verdicts into Monte Carlo estimates of Brolin measure.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .angles import (
    Angle,
    AngleLike,
    CircleArc,
    arcs_contain_arc,
    double,
    halves,
    image_arcs,
    normalize_arcs,
    total_length,
)


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"


_CODES = {kernels.NO: Verdict.NO, kernels.YES: Verdict.YES, kernels.UNDECIDED: Verdict.UNDECIDED}


@dataclass(frozen=True)
class CriticalPortrait:
    """Critical diameter {theta/2, theta/2 + 1/2} for the critical value angle theta."""

    theta: Angle

    def __post_init__(self):
        theta = Angle(self.theta)
        if theta == 0:
            raise ValueError("theta = 0 has no critical diameter separating theta")
        object.__setattr__(self, "theta", theta)

    @property
    def boundary(self) -> tuple[Angle, Angle]:
        return halves(self.theta)

    def label(self, t: AngleLike) -> str:
        t = Angle(t)
        lo, hi = self.boundary
        if t == lo or t == hi:
            return "*"
        return "A" if lo < t < hi else "B"

    @property
    def real_symmetric(self) -> bool:
        """True when the portrait is its own mirror image under t -> 1 - t.

        The critical value is real iff theta and 1 - theta have matching
        itineraries, with '*' matching anything.
        """
        th = self.theta
        if th.denominator <= 2:
            return True
        a = itinerary(th, self, 64).word
        b = itinerary(-th, self, 64).word
        return all(x == y or "*" in (x, y) for x, y in zip(a, b))


@dataclass(frozen=True)
class Itinerary:
    word: str
    depth: int

    def __str__(self):
        return " ".join(self.word)


def itinerary(t: AngleLike, portrait: CriticalPortrait, depth: int) -> Itinerary:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    t = Angle(t)
    th = portrait.theta
    word = kernels.labels(t.numerator, t.denominator, th.numerator, th.denominator, depth)
    return Itinerary(word, depth)


def equivalent(t: AngleLike, s: AngleLike, portrait: CriticalPortrait, depth: int) -> bool:
    """Itineraries agree to ``depth``; '*' only matches '*'."""
    return itinerary(t, portrait, depth).word == itinerary(s, portrait, depth).word


def _code(t: AngleLike, portrait: CriticalPortrait, depth: int, fn) -> Verdict:
    if depth < 2:
        raise ValueError("depth must be >= 2")
    t = Angle(t)
    th = portrait.theta
    return _CODES[fn(t.numerator, t.denominator, th.numerator, th.denominator, depth)]


def is_biaccessible(t: AngleLike, portrait: CriticalPortrait, depth: int = 40) -> Verdict:
    """Decide whether the landing point of t receives a second ray.

    The cylinder of angles sharing t's itinerary is refined to ``depth``.
    A piece that separated from t's own piece by half that depth and still
    survives is a partner: yes.  If everything left sits in t's piece, no.
    Orbits that hit the critical diameter are undecided.
    """
    return _code(t, portrait, depth, kernels.biaccess_verdict)


def partner_arcs(t: AngleLike, portrait: CriticalPortrait, depth: int) -> list[CircleArc]:
    """Depth-``depth`` cylinder pieces of t other than the one holding t."""
    t = Angle(t)
    th = portrait.theta
    word = itinerary(t, portrait, depth).word
    if "*" in word:
        raise ValueError(f"{t} hits the critical diameter")
    arcs, n = kernels.cylinder(word, th.numerator, th.denominator)
    out = []
    for s, length in arcs:
        a = CircleArc.from_length(Fraction(s, n), Fraction(length, n))
        if not (a.contains(t) and a.start != t):
            out.append(a)
    return out


def _require_real(portrait: CriticalPortrait):
    if not portrait.real_symmetric:
        raise ValueError(f"portrait theta={portrait.theta} is not symmetric under t -> 1-t")


def spine_test_real(t: AngleLike, portrait: CriticalPortrait, depth: int = 40) -> Verdict:
    """Whether the ray at t lands on the real spine [-beta, beta]."""
    _require_real(portrait)
    return _code(t, portrait, depth, kernels.spine_verdict)


# -- Monte Carlo ----------------------------------------------------------------


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    std_error: float
    samples: int
    depth: int
    seed: int
    undecided: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "value": self.value,
                "std_error": self.std_error,
                "samples": self.samples,
                "depth": self.depth,
                "seed": self.seed,
                "undecided": self.undecided,
            }
        )

    @classmethod
    def from_counts(cls, hits: int, decided: int, depth: int, seed: int, undecided: int = 0):
        if decided == 0:
            raise ValueError("no decided samples")
        v = hits / decided
        return cls(v, math.sqrt(v * (1 - v) / decided), decided, depth, seed, undecided)


class UndecidedCapExceeded(RuntimeError):
    def __init__(self, estimate: MeasureEstimate, cap: float):
        total = estimate.samples + estimate.undecided
        super().__init__(f"{estimate.undecided}/{total} undecided exceeds cap {cap:g}")
        self.estimate = estimate


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # deterministic for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sampling_modulus(depth: int) -> int:
    """Smallest prime above 2^(depth+1).

    Odd, so no sample sits on a dyadic orbit, and coprime to every portrait
    denominator of interest, so no sample hits the critical diameter.
    """
    m = 2 ** (depth + 1) + 1
    while not _is_prime(m):
        m += 2
    return m


def sample_numerators(samples: int, modulus: int, seed: int) -> list[int]:
    """Numerators uniform mod ``modulus``, one hash stream per (seed, index)."""
    nbytes = (modulus.bit_length() + 64) // 8
    out = []
    for i in range(samples):
        h = hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=nbytes).digest()
        out.append(int.from_bytes(h, "little") % modulus)
    return out


class PortraitPredicate:
    """Angle predicate bound to a portrait with a fast batch path."""

    name = "predicate"

    def __init__(self, portrait: CriticalPortrait):
        self.portrait = portrait

    def _kernel(self):
        raise NotImplementedError

    def __call__(self, t: AngleLike, depth: int) -> Verdict:
        t = Angle(t)
        th = self.portrait.theta
        fn = self._kernel()[0]
        return _CODES[fn(t.numerator, t.denominator, th.numerator, th.denominator, depth)]

    def batch(self, ks: Sequence[int], modulus: int, depth: int) -> np.ndarray:
        th = self.portrait.theta
        return self._kernel()[1](ks, modulus, th.numerator, th.denominator, depth)


class Biaccessible(PortraitPredicate):
    name = "biaccessible"

    def _kernel(self):
        return kernels.biaccess_verdict, kernels.biaccess_batch


class OnSpine(PortraitPredicate):
    name = "spine"

    def __init__(self, portrait: CriticalPortrait):
        _require_real(portrait)
        super().__init__(portrait)

    def _kernel(self):
        return kernels.spine_verdict, kernels.spine_batch


def _to_code(v) -> int:
    if isinstance(v, Verdict):
        return {Verdict.NO: kernels.NO, Verdict.YES: kernels.YES}.get(v, kernels.UNDECIDED)
    return kernels.YES if v else kernels.NO


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BIACCESS_THREADS", "1")))
    except ValueError:
        return 1


def measure_estimate(
    predicate: Callable,
    samples: int = 10000,
    depth: int = 40,
    seed: int = 1,
    undecided_cap: float = 0.01,
    threads: int | None = None,
) -> MeasureEstimate:
    """Fraction of uniformly sampled angles where ``predicate`` holds.

    ``predicate(t, depth)`` returns a Verdict or a bool.  Objects with a
    ``batch(ks, modulus, depth)`` method are evaluated in chunks, optionally
    on several threads; chunk results are reduced in index order.
    """
    if samples < 100:
        raise ValueError("samples must be >= 100")
    m = sampling_modulus(depth)
    ks = sample_numerators(samples, m, seed)
    if hasattr(predicate, "batch"):
        threads = threads or _threads()
        size = max(1, -(-samples // threads))
        chunks = [ks[i : i + size] for i in range(0, samples, size)]
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(lambda ch: predicate.batch(ch, m, depth), chunks))
        else:
            parts = [predicate.batch(ch, m, depth) for ch in chunks]
        codes = np.concatenate(parts)
    else:
        codes = np.array([_to_code(predicate(Angle(k, m), depth)) for k in ks])
    yes = int(np.count_nonzero(codes == kernels.YES))
    und = int(np.count_nonzero(codes == kernels.UNDECIDED))
    est = MeasureEstimate.from_counts(yes, samples - und, depth, seed, und)
    if und > undecided_cap * samples:
        raise UndecidedCapExceeded(est, undecided_cap)
    return est


# -- spine preimages ------------------------------------------------------------


def _grid_arcs_to_circle(arcs: Iterable[tuple[int, int]], n: int) -> list[CircleArc]:
    return [CircleArc.from_length(Fraction(s, n), Fraction(length, n)) for s, length in arcs]


def _merge_grid(arcs: list[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    spans = []
    for s, length in arcs:
        if length >= n:
            return [(0, n)]
        e = s + length
        if e > n:
            spans += [(s, n), (0, e - n)]
        else:
            spans.append((s, e))
    spans.sort()
    merged: list[list[int]] = []
    for s, e in spans:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e - s) for s, e in merged]


def spine_arcs(
    portrait: CriticalPortrait, depth: int, max_pieces: int = 200000
) -> tuple[list[tuple[int, int]], int]:
    """Angles whose first ``depth`` labels agree with those of their mirror.

    Open arcs (start, length) on the grid n = 2q 2^depth.  The piece count
    grows with the entropy of the spine; past ``max_pieces`` this raises
    ``ValueError`` (use per-sample spine tests instead).
    """
    _require_real(portrait)
    th = portrait.theta
    p, q = th.numerator, th.denominator
    n = 2 * q * 2**depth
    half = n // 2
    b1 = p * 2**depth
    a_arc = (b1, half)
    b_arc = ((b1 + half) % n, half)
    # E = {x : label(x) = label(-x)} = (A n -A) u (B n -B)
    even: list[tuple[int, int]] = []
    for s, length in (a_arc, b_arc):
        mirror = ((-s - length) % n, length)
        even += kernels.intersect(s, length, mirror[0], mirror[1], n)
    arcs = list(even)
    for _ in range(depth - 1):
        new = []
        for s, length in arcs:
            if length < 2:
                continue
            for s0 in (s // 2, (s + n) // 2):
                for h, hl in even:
                    new.extend(kernels.intersect(s0, length // 2, h, hl, n))
        arcs = _merge_grid(new, n)
        if len(arcs) > max_pieces:
            raise ValueError(f"spine cover exceeds {max_pieces} pieces at theta={th}")
    return arcs, n


def spine_preimage_cover(portrait: CriticalPortrait, n: int, depth: int = 40) -> list[CircleArc]:
    """Arcs covering every angle t with 2^k t in the depth-``depth`` spine set, k <= n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    base, grid = spine_arcs(portrait, depth)
    # work on a finer grid so that n halvings stay integral
    scale = 2**n
    big = grid * scale
    level = [(s * scale, length * scale) for s, length in base]
    cover = list(level)
    for _ in range(n):
        level = [(s0, length // 2) for s, length in level for s0 in (s // 2, (s + big) // 2)]
        level = _merge_grid(level, big)
        cover = _merge_grid(cover + level, big)
    return _grid_arcs_to_circle(cover, big)


def in_cover(t: AngleLike, cover: Sequence[CircleArc]) -> bool:
    return any(a.contains(t) for a in cover)


# -- zero-one law -------------------------------------------------------------------


class ZeroOne(str, Enum):
    ZERO = "measure-zero-consistent"
    ONE = "measure-one-consistent"
    VIOLATION = "violation"
    NOT_INVARIANT = "not-invariant"


def is_forward_invariant(arcs: Iterable[CircleArc]) -> bool:
    """Exact check that doubling maps the union into itself."""
    merged, points = normalize_arcs(arcs)
    cover = merged + [CircleArc(p, p) for p in points]
    for a in merged:
        if not all(arcs_contain_arc(cover, b) for b in image_arcs(a)):
            return False
    for p in points:
        d = double(p)
        if not (any(a.contains(d) for a in merged) or d in points):
            return False
    return True


def _largest_dyadic_density(arcs: list[CircleArc], depth: int) -> Fraction:
    # a dyadic interval of level j inside some arc has density 1 in E
    best = Fraction(0)
    for a in arcs:
        if a.full:
            return Fraction(1)
        for j in range(1, depth + 1):
            w = Fraction(1, 2**j)
            first = Fraction(math.ceil(a.start.value / w)) * w
            if first - a.start.value + w <= a.length:
                return Fraction(1)
    return best


def verify_zero_one(arcs: Sequence[CircleArc], depth: int = 40, eps: float = 1e-9) -> ZeroOne:
    """Check an arc union against the zero-one law for invariant sets.

    Invariance is tested exactly first.  For an invariant union any dyadic
    interval inside it has density one, and doubling carries that density to
    the whole circle, so its measure is bounded below by that density.
    """
    arcs = list(arcs)
    if not is_forward_invariant(arcs):
        return ZeroOne.NOT_INVARIANT
    merged, _ = normalize_arcs(arcs)
    length = total_length(merged)
    density = _largest_dyadic_density(merged, depth)
    if density > length:
        return ZeroOne.VIOLATION
    if length <= eps:
        return ZeroOne.ZERO
    if length >= 1 - eps:
        return ZeroOne.ONE
    return ZeroOne.VIOLATION
