"""Numerical dynamical plane of f(z) = z^2 + c.

External rays are traced level by level in potential.  At potential g the
ray point z at angle t solves f^n(z) = exp(2^n g + 2 pi i 2^n t) for an n
large enough that the Boettcher map is the identity to double precision;
Newton continuation from the previous point keeps us on the right branch.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .angles import Angle, AngleLike, double

# log|W| at which f^n(z) is taken to equal its Boettcher coordinate
_G_EXIT = 23.0


class Kind(str, Enum):
    CHEBYSHEV = "chebyshev"
    REAL_WINDOW = "real-window"
    PCF = "pcf-fixture"
    GENERIC = "generic"


def _rabbit_c() -> complex:
    # centre of the period-3 component: c^3 + 2c^2 + c + 1 = 0, Im c > 0
    roots = np.roots([1, 2, 1, 1])
    c = complex(max(roots, key=lambda r: r.imag))
    for _ in range(5):
        c -= (c**3 + 2 * c**2 + c + 1) / (3 * c**2 + 4 * c + 1)
    return c


def _golden_siegel_c() -> complex:
    theta = (math.sqrt(5) - 1) / 2
    lam = cmath.exp(2j * math.pi * theta)
    return lam / 2 - lam * lam / 4


@dataclass(frozen=True)
class Parameter:
    c: complex
    kind: Kind = Kind.GENERIC
    theta: Angle | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.theta is not None:
            object.__setattr__(self, "theta", Angle(self.theta))
        if self.kind is Kind.CHEBYSHEV and self.c != -2:
            raise ValueError("the Chebyshev parameter is c = -2")
        if self.kind is Kind.REAL_WINDOW and (self.c.imag != 0 or not -2 <= self.c.real <= 0.25):
            raise ValueError("real-window parameters satisfy -2 <= c <= 1/4")

    @property
    def is_real(self) -> bool:
        return self.c.imag == 0

    @classmethod
    def from_c(cls, c: complex, theta: AngleLike | None = None) -> "Parameter":
        c = complex(c)
        if c == -2:
            return cls(c, Kind.CHEBYSHEV, Angle(Fraction(1, 2)), "chebyshev")
        if c.imag == 0 and -2 <= c.real <= 0.25:
            return cls(c, Kind.REAL_WINDOW, theta)
        return cls(c, Kind.GENERIC, theta)

    def to_json(self) -> dict:
        return {
            "c": [self.c.real, self.c.imag],
            "kind": self.kind.value,
            "theta": None if self.theta is None else str(self.theta),
            "name": self.name,
        }


FIXTURES = {
    "chebyshev": Parameter(-2, Kind.CHEBYSHEV, Angle(Fraction(1, 2)), "chebyshev"),
    "basilica": Parameter(-1, Kind.PCF, Angle(Fraction(1, 3)), "basilica"),
    # the parameter angle of the rabbit component; its diameter lands on +-alpha
    "rabbit": Parameter(_rabbit_c(), Kind.PCF, Angle(Fraction(1, 7)), "rabbit"),
    "golden-siegel": Parameter(_golden_siegel_c(), Kind.GENERIC, None, "golden-siegel"),
}


def fixture(name: str) -> Parameter:
    try:
        return FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


# -- elementary dynamics --------------------------------------------------------


def iterate(z: complex, c: complex, n: int) -> complex:
    """f^n(z); an orbit that overflows is reported as complex infinity."""
    z, c = complex(z), complex(c)
    for _ in range(n):
        try:
            z = z * z + c
        except OverflowError:
            return complex(math.inf, math.inf)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return complex(math.inf, math.inf)
    return z


def green(z: complex, c: complex, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Escape rate G(z) = lim 2^-n log|f^n(z)|; 0 for orbits that stay bounded."""
    z, c = complex(z), complex(c)
    bail = 1e10
    scale = 1.0
    for _ in range(max_iter):
        az = abs(z)
        if az > bail:
            g = scale * math.log(az)
            # the next increment 2^-n log|1 + c/z^2| / 2 is below tol once |z| is this large
            corr = scale * abs(cmath.log(1 + c / (z * z))) / 2
            if corr < tol:
                return g + scale * (cmath.log(1 + c / (z * z)).real) / 2
            z = z * z + c
            scale /= 2
            continue
        z = z * z + c
        scale /= 2
    return 0.0


@dataclass(frozen=True)
class FixedPoints:
    alpha: complex
    beta: complex


def fixed_points(c: complex) -> FixedPoints:
    """Roots of z^2 - z + c with beta the more repelling one."""
    c = complex(c)
    if c == 0.25:
        raise ValueError("c = 1/4 has a single (parabolic) fixed point")
    s = cmath.sqrt(1 - 4 * c)
    a, b = (1 - s) / 2, (1 + s) / 2
    if abs(abs(a) - abs(b)) < 1e-12:
        # equal multipliers: beta is where the ray of angle 0 lands
        z0 = land(0, Parameter.from_c(c))
        if abs(a - z0) < abs(b - z0):
            a, b = b, a
    elif abs(a) > abs(b):
        a, b = b, a
    if c.imag == 0 and c.real <= 0.25:
        a, b = complex(a.real, 0.0), complex(b.real, 0.0)
    return FixedPoints(a, b)


# -- external rays ----------------------------------------------------------------


class RayStatus(str, Enum):
    LANDED = "landed"
    MAX_DEPTH = "max-depth"
    DIVERGED = "diverged"


@dataclass
class Ray:
    angle: Angle
    c: complex
    points: list[tuple[complex, float]]
    landed: complex | None = None
    status: RayStatus = RayStatus.MAX_DEPTH
    method: str | None = None

    @property
    def positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.points], dtype=np.complex128)

    @property
    def potentials(self) -> np.ndarray:
        return np.array([g for _, g in self.points])

    def distance_estimates(self) -> np.ndarray:
        return np.array([distance_estimate(z, self.c) for z, _ in self.points])

    def to_csv(self, residuals: Sequence[float] | None = None) -> str:
        rows = ["level,potential,re,im,residual"]
        for k, (z, g) in enumerate(self.points):
            r = "" if residuals is None or k >= len(residuals) else f"{residuals[k]:.6e}"
            rows.append(f"{k},{g:.17g},{z.real:.17g},{z.imag:.17g},{r}")
        return "\n".join(rows) + "\n"


def start_radius(c: complex) -> float:
    return 2 + abs(c) + 10


def distance_estimate(z: complex, c: complex) -> float:
    """G(z) / |grad G(z)|, which is comparable to the distance from z to K."""
    w, dw, n = complex(z), 1 + 0j, 0
    while abs(w) < 1e10 and n < 4000:
        dw = 2 * w * dw
        w = w * w + c
        n += 1
    if abs(w) < 1e10:
        return 0.0
    g = math.log(abs(w)) / 2**n
    grad = abs(dw) / (2**n * abs(w))
    return g / grad if grad > 0 else math.inf


def _targets(t: Fraction, potentials: Sequence[float]) -> list[tuple[int, float, float]]:
    out = []
    for g in potentials:
        n = max(0, math.ceil(math.log2(_G_EXIT / g))) if g < _G_EXIT else 0
        phase = (t * 2**n) % 1
        out.append((n, g * 2**n, 2 * math.pi * float(phase)))
    return out


class RayTracer:
    """Incremental tracer for one ray; ``extend`` adds levels on demand.

    Each potential halving is crossed in ``steps_per_level`` geometric
    sub-steps.  A sub-step whose Newton solve fails, or whose speed |dz/dg|
    jumps by more than a factor 4 against the previous one (a sign of
    hopping to a neighbouring ray), is split further.
    """

    max_split = 12
    # splits allowed per level; nested splitting is otherwise exponential
    split_budget = 256

    def __init__(self, t: AngleLike, c: complex, steps_per_level: int = 8):
        if steps_per_level < 1:
            raise ValueError("steps_per_level must be >= 1")
        self.t = Angle(t)
        self.c = complex(c)
        self.steps = steps_per_level
        self.g0 = math.log(start_radius(self.c))
        self.points: list[tuple[complex, float]] = []
        self.diverged = False
        self._z = start_radius(self.c) * cmath.exp(2j * math.pi * float(self.t.value))
        self._g = None
        self._speed = None
        self._budget = self.split_budget

    @property
    def depth(self) -> int:
        return len(self.points) - 1

    def _accept(self, pts, pots) -> int:
        # number of leading solutions that pass the speed test
        z, g, speed = self._z, self._g, self._speed
        for idx, (w, h) in enumerate(zip(pts, pots)):
            if g is not None:
                sp = abs(w - z) / (g - h)
                if speed is not None and speed > 0 and not speed / 4 < sp < speed * 4:
                    return idx
                speed = sp
            z, g = complex(w), h
        return len(pts)

    def _step_to(self, pots: list[float], split: int = 0) -> bool:
        pts, _ = kernels.ray_newton(self.c, self._z, _targets(self.t.value, pots))
        good = self._accept(pts, pots)
        for w, h in zip(pts[:good], pots[:good]):
            if self._g is not None:
                self._speed = abs(w - self._z) / (self._g - h)
            self._z, self._g = complex(w), h
        if good == len(pots):
            return True
        if split >= self.max_split or self._g is None or self._budget <= 0:
            return False
        self._budget -= 1
        g_hi, g_lo = self._g, pots[good]
        finer = [g_hi * (g_lo / g_hi) ** (i / 4) for i in range(1, 5)]
        finer[-1] = g_lo
        if not self._step_to(finer, split + 1):
            return False
        return self._step_to(pots[good + 1 :], split) if good + 1 < len(pots) else True

    def extend(self, depth: int) -> bool:
        """Trace up to level ``depth``; False once the ray is lost."""
        if self.diverged:
            return False
        while len(self.points) <= depth:
            k = len(self.points)
            if k == 0:
                pots = [self.g0]
            else:
                pots = [self.g0 * 2.0 ** -(k - 1 + j / self.steps) for j in range(1, self.steps + 1)]
                pots[-1] = self.g0 / 2**k
            self._budget = self.split_budget
            if not self._step_to(pots):
                self.diverged = True
                return False
            self.points.append((self._z, self._g))
        return True

    def ray(self) -> Ray:
        status = RayStatus.DIVERGED if self.diverged else RayStatus.MAX_DEPTH
        return Ray(self.t, self.c, list(self.points), None, status)


def trace_ray(t: AngleLike, param: Parameter | complex, depth: int = 40, steps_per_level: int = 8) -> Ray:
    """Ray points at potentials g0 / 2^k for k = 0..depth."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    c = param.c if isinstance(param, Parameter) else complex(param)
    tr = RayTracer(t, c, steps_per_level)
    tr.extend(depth)
    return tr.ray()


# -- landing ----------------------------------------------------------------------


class LandingError(RuntimeError):
    def __init__(self, ray: Ray):
        super().__init__(f"ray {ray.angle} did not land: {ray.status.value}")
        self.ray = ray


def _shoot_cycle(c: complex, guesses: list[complex], pre: int, iters: int = 60):
    """Newton for w_{j+1} = f(w_j), closing with f(w_last) = w_pre.

    The linearised system d_{j+1} = F_j + 2 w_j d_j is solved backwards
    (d_j = (d_{j+1} - F_j) / 2 w_j), which is the stable direction for a
    repelling cycle.  Returns (points, cycle multiplier) or None.
    """
    w = np.array(guesses, dtype=np.complex128)
    m = len(w)
    for _ in range(iters):
        nxt = np.concatenate([w[1:], [w[pre]]])
        F = w * w + c - nxt
        if np.any(w == 0):
            return None
        # d_pre = a * d_m + b with d_m = d_pre closing the loop
        a, b = 1 + 0j, 0j
        for j in range(m - 1, pre - 1, -1):
            a, b = a / (2 * w[j]), (b - F[j]) / (2 * w[j])
        if abs(1 - a) < 1e-14:
            return None
        d = np.zeros(m, dtype=np.complex128)
        dm = b / (1 - a)
        nxt_d = dm
        for j in range(m - 1, -1, -1):
            d[j] = (nxt_d - F[j]) / (2 * w[j])
            nxt_d = d[j]
        w = w + d
        if not np.all(np.isfinite(w)):
            return None
        if np.max(np.abs(d)) < 1e-15 * max(1.0, float(np.max(np.abs(w)))):
            break
    resid = np.abs(w * w + c - np.concatenate([w[1:], [w[pre]]]))
    if resid.max() > 1e-10:
        return None
    return w, complex(np.prod(2 * w[pre:]))


def _short_orbit(t: Angle, limit: int) -> tuple[int, int] | None:
    """(preperiod, period) of t under doubling if their sum is <= limit."""
    q = t.denominator
    pre = (q & -q).bit_length() - 1  # power of 2 in the denominator
    odd = q >> pre
    r = 1
    for per in range(1, limit - pre + 1):
        r = 2 * r % odd
        if r == 1 % odd:
            return pre, per
    return None


def _periodic_landing(t: Angle, c: complex, pts: list[complex]) -> complex | None:
    """Landing point of a rational ray as the repelling cycle its orbit shadows."""
    short = _short_orbit(t, 64)
    if short is None:
        return None
    pre, per = short
    m = pre + per
    depth = len(pts) - 1
    if depth < m + 8:
        return None
    z = pts[-1]
    guesses = [z]
    for _ in range(m - 1):
        guesses.append(guesses[-1] ** 2 + c)
    res = _shoot_cycle(c, guesses, pre)
    if res is None:
        return None
    w, mult = res
    if abs(mult) <= 1 + 1e-6:
        return None  # parabolic or attracting: not a landing point of a ray
    target = complex(w[0])
    # the ray must approach the point geometrically, at the rate the multiplier predicts
    ds = [abs(pts[k] - target) for k in range(depth, max(0, depth - 4 * per) - 1, -per)]
    if len(ds) < 3 or ds[0] > 0.1 or not all(ds[i] < ds[i + 1] for i in range(len(ds) - 1)):
        return None
    rate = ds[0] / ds[1] * abs(mult)
    if not 0.5 < rate < 2.0:
        return None
    return target


def land_ray(
    t: AngleLike, param: Parameter | complex, eps: float = 1e-9, max_depth: int = 60, steps_per_level: int = 8
) -> Ray:
    """Trace until successive levels move less than ``eps``.

    Rational angles whose rays land slowly on a repelling cycle are finished
    by solving for that cycle directly.  Otherwise the ray is reported at
    ``max-depth`` (or ``diverged`` if tracing broke down).
    """
    c = param.c if isinstance(param, Parameter) else complex(param)
    tr = RayTracer(t, c, steps_per_level)
    tr.extend(1)
    chunk = 4
    while tr.depth < max_depth and not tr.diverged:
        tr.extend(min(max_depth, tr.depth + chunk))
        pts = tr.points
        for k in range(max(1, len(pts) - chunk), len(pts)):
            if abs(pts[k][0] - pts[k - 1][0]) < eps:
                ray = tr.ray()
                ray.points = ray.points[: k + 1]
                ray.landed = pts[k][0]
                ray.status = RayStatus.LANDED
                ray.method = "cauchy"
                return ray
    ray = tr.ray()
    zs = [p for p, _ in ray.points]
    target = _periodic_landing(ray.angle, c, zs) if len(zs) > 2 else None
    if target is not None:
        ray.landed = target
        ray.status = RayStatus.LANDED
        ray.method = "cycle"
    return ray


def land(t: AngleLike, param: Parameter | complex, eps: float = 1e-9, max_depth: int = 60) -> complex:
    ray = land_ray(t, param, eps, max_depth)
    if ray.status is not RayStatus.LANDED:
        raise LandingError(ray)
    return ray.landed


@dataclass
class LandingRecord:
    angle: Angle
    z: complex | None
    status: RayStatus
    residual: float | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "angle": str(self.angle),
                "re": None if self.z is None else self.z.real,
                "im": None if self.z is None else self.z.imag,
                "status": self.status.value,
                "residual": self.residual,
            }
        )


def landing_record(t: AngleLike, param: Parameter, eps: float = 1e-9, max_depth: int = 60) -> LandingRecord:
    ray = land_ray(t, param, eps, max_depth)
    resid = None
    if ray.status is RayStatus.LANDED:
        try:
            z2 = land(double(t), param, eps, max_depth)
            resid = abs(ray.landed**2 + param.c - z2)
        except LandingError:
            resid = None
    return LandingRecord(Angle(t), ray.landed, ray.status, resid)


def conjugacy_residual(
    t: AngleLike, param: Parameter | complex, depth: int = 20, with_landing: bool = True, landing_eps: float = 1e-12
) -> float:
    """max_k |f(R_t[k]) - R_2t[k-1]|, plus |f(land t) - land 2t| when both land.

    Landing points carry an error of about ``landing_eps``, so it is kept
    well below the residuals being tested.
    """
    c = param.c if isinstance(param, Parameter) else complex(param)
    r1 = trace_ray(t, c, depth).positions
    r2 = trace_ray(double(t), c, depth).positions
    n = min(len(r1), len(r2) + 1)
    if n < 2:
        return math.inf
    res = float(np.max(np.abs(r1[1:n] ** 2 + c - r2[: n - 1])))
    if with_landing:
        a = land_ray(t, c, landing_eps)
        b = land_ray(double(t), c, landing_eps)
        if a.status is RayStatus.LANDED and b.status is RayStatus.LANDED:
            res = max(res, abs(a.landed**2 + c - b.landed))
    return res


def colands(t: AngleLike, s: AngleLike, param: Parameter | complex, eps: float = 1e-6, **kw) -> bool:
    if Angle(t) == Angle(s):
        return True
    return abs(land(t, param, **kw) - land(s, param, **kw)) < eps


def ray_symmetry_check(t: AngleLike, param: Parameter | complex, depth: int = 20) -> float:
    """max_k |R_{t+1/2}[k] + R_t[k]|."""
    c = param.c if isinstance(param, Parameter) else complex(param)
    a = trace_ray(t, c, depth).positions
    b = trace_ray(Angle(t) + Fraction(1, 2), c, depth).positions
    n = min(len(a), len(b))
    return float(np.max(np.abs(a[:n] + b[:n])))


def land_many(angles: Sequence[AngleLike], param: Parameter, eps: float = 1e-9, max_depth: int = 60) -> list[Ray]:
    return [land_ray(t, param, eps, max_depth) for t in angles]


# -- attracting cycles and basin membership -------------------------------------


def superattracting_cycle(c: complex, max_period: int = 64, tol: float = 1e-9) -> list[complex] | None:
    """The critical cycle [0, c, f(c), ...] if 0 is periodic, else None."""
    c = complex(c)
    z = 0j
    cyc = [z]
    for _ in range(max_period):
        z = z * z + c
        if abs(z) < tol:
            return cyc
        cyc.append(z)
    return None


def attracting_period(c: complex, transient: int = 200000, window: int = 400, tol: float = 1e-7) -> int | None:
    """Period of the cycle of Fatou components holding the critical orbit.

    The critical orbit is run through a long transient and the smallest p
    with |z_{n+p} - z_n| < tol over a whole window is reported, provided the
    shadowed cycle is not repelling.  Parabolic cycles count (they attract
    0 slowly).  None when 0 appears to lie in the Julia set.
    """
    c = complex(c)
    z = 0j
    for _ in range(transient):
        z = z * z + c
        if abs(z) > 2 + abs(c):
            return None
    tail = [z]
    for _ in range(window + 64):
        z = z * z + c
        tail.append(z)
    tail = np.array(tail)
    for p in range(1, 65):
        if np.all(np.abs(tail[p : p + window] - tail[:window]) < tol):
            mult = abs(np.prod(2 * tail[-p:]))
            return p if mult <= 1 + 1e-3 else None
    return None


def _refine_curve(curve: np.ndarray, c: complex, max_points: int) -> np.ndarray | None:
    # subdivide so each chord is short next to its distance from c,
    # which keeps the square root branch continuous along it
    # a chord ending exactly at c (a cycle point when 0 is periodic) needs no
    # care: its square root is the straight chord to 0
    a, b = curve[:-1], curve[1:]
    da, db = np.abs(a - c), np.abs(b - c)
    touch = (da == 0) | (db == 0)
    d = np.where(touch, np.inf, np.minimum(da, db))
    if np.any(d < 1e-14):
        return None
    n = np.maximum(1, np.ceil(np.abs(b - a) / (0.25 * d))).astype(np.int64)
    total = int(n.sum()) + 1
    if total > max_points:
        return None
    if total == len(curve):
        return curve
    idx = np.repeat(np.arange(len(a)), n)
    frac = (np.arange(total - 1) - np.repeat(np.cumsum(n) - n, n)) / np.repeat(n, n)
    out = np.empty(total, dtype=np.complex128)
    out[:-1] = a[idx] + frac * (b[idx] - a[idx])
    out[-1] = curve[-1]
    return out


def in_immediate_basin(
    z: complex, c: complex, cycle: Sequence[complex], radius: float = 1e-3, max_iter: int = 4000, max_points: int = 100000
) -> bool | None:
    """Whether z lies in a Fatou component that contains a point of ``cycle``.

    ``cycle`` is a superattracting cycle listed in orbit order.  The orbit of
    z is run until it enters the disk of ``radius`` about a cycle point; the
    segment from there to that cycle point is pulled back along the orbit,
    continuing the square root branch.  The pulled-back path stays in the
    component of z, and ends at a cycle point exactly when that component is
    one of the immediate ones.  None when the orbit does not settle or the
    path runs into the critical value.
    """
    c = complex(c)
    cyc = [complex(w) for w in cycle]
    per = len(cyc)
    bail = 4 + abs(c)
    orbit = [complex(z)]
    w = orbit[0]
    k = -1
    for _ in range(max_iter):
        k = next((j for j, v in enumerate(cyc) if abs(w - v) < radius), -1)
        if k >= 0:
            break
        w = w * w + c
        if abs(w) > bail:
            return False
        orbit.append(w)
    if k < 0:
        return None
    curve = np.linspace(orbit[-1], cyc[k], 8)
    for i in range(len(orbit) - 2, -1, -1):
        curve = _refine_curve(curve, c, max_points)
        if curve is None:
            return None
        r = np.sqrt(curve - c)
        flips = np.sign(np.real(r[1:] * np.conj(r[:-1])))
        flips[flips == 0] = 1
        r[1:] *= np.cumprod(flips)
        if abs(r[0] - orbit[i]) > abs(r[0] + orbit[i]):
            r = -r
        k = (k - 1) % per
        if abs(r[-1] - cyc[k]) > 1e-6 * max(1.0, abs(cyc[k])):
            return False
        r[0], r[-1] = orbit[i], cyc[k]
        curve = r
    return True
