"""Pure-Python versions of the hot kernels.

Used when the compiled extension is missing, when ``BIACCESS_PURE=1`` is set,
and for inputs too large for the fixed-width integers of the compiled path.
All integer work here is exact with Python ints.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

NO, YES, UNDECIDED = 0, 1, 2


# -- symbolic: itineraries and cylinders on an integer grid ------------------


def labels(k: int, m: int, p: int, q: int, depth: int) -> str:
    """Itinerary of k/m against the diameter {p/2q, p/2q + 1/2}."""
    out = []
    b1 = p * m
    b2 = b1 + q * m
    r = k % m
    for _ in range(depth):
        x = 2 * q * r
        if x == b1 or x == b2:
            out.append("*")
        elif b1 < x < b2:
            out.append("A")
        else:
            out.append("B")
        r = 2 * r % m
    return "".join(out)


def _intersect(s, length, h, hl, n):
    # pieces of the arc (s, s+length) inside (h, h+hl), all mod n
    s2 = (s - h) % n
    out = []
    for off in (0, n):
        lo = max(s2, off)
        hi = min(s2 + length, off + hl)
        if hi > lo:
            out.append(((lo + h) % n, hi - lo))
    return out


def cylinder(word: str, p: int, q: int) -> tuple[list[tuple[int, int]], int]:
    """Open arcs (start, length) on the grid Z/n of angles with itinerary ``word``.

    n = 2q 2^len(word).  Built by pulling the last half-circle back through
    the earlier labels, intersecting with each label's half-circle.
    """
    d = len(word)
    n = 2 * q * 2 ** d
    half = n // 2
    b1 = p * 2 ** d
    halves = {"A": (b1, half), "B": ((b1 + half) % n, half)}
    arcs = [halves[word[-1]]]
    for lab in reversed(word[:-1]):
        h, hl = halves[lab]
        new = []
        for s, length in arcs:
            for s0 in (s // 2, (s + n) // 2):
                new.extend(_intersect(s0, length // 2, h, hl, n))
        arcs = new
    return arcs, n


def _inside(k, m, s, length, n):
    # strict membership of k/m in the open arc (s, s+length) of grid n
    x = (k * n - s * m) % (n * m)
    return 0 < x < length * m


def biaccess_verdict(k: int, m: int, p: int, q: int, depth: int) -> int:
    """Persistence test for a second cylinder piece.

    The depth-``depth`` cylinder of k/m must keep material outside the
    depth-``depth // 2`` piece that contains k/m itself.
    """
    word = labels(k, m, p, q, depth)
    if "*" in word:
        return UNDECIDED
    d0 = max(1, depth // 2)
    arcs0, n0 = cylinder(word[:d0], p, q)
    main = [a for a in arcs0 if _inside(k, m, a[0], a[1], n0)]
    if len(main) != 1:
        return UNDECIDED
    s0, l0 = main[0]
    arcs, n = cylinder(word, p, q)
    scale = n // n0
    s0, l0 = s0 * scale, l0 * scale
    for s, length in arcs:
        off = (s - s0) % n
        if off + length > l0:
            return YES
    return NO


def spine_verdict(k: int, m: int, p: int, q: int, depth: int) -> int:
    """Compare the itineraries of k/m and its mirror (m-k)/m."""
    k %= m
    if 2 * k % m == 0:
        return YES
    a = labels(k, m, p, q, depth)
    b = labels(m - k, m, p, q, depth)
    undecided = False
    for x, y in zip(a, b):
        if x == y:
            continue
        if x == "*" or y == "*":
            undecided = True
            break
        return NO
    return UNDECIDED if undecided else YES


def biaccess_batch(ks, m: int, p: int, q: int, depth: int) -> np.ndarray:
    return np.array([biaccess_verdict(int(k), m, p, q, depth) for k in ks], dtype=np.int8)


def spine_batch(ks, m: int, p: int, q: int, depth: int) -> np.ndarray:
    return np.array([spine_verdict(int(k), m, p, q, depth) for k in ks], dtype=np.int8)


# -- plane: Newton tracing of external rays -----------------------------------


def ray_newton(c: complex, z0: complex, targets, newton_iter: int = 60):
    """Follow a ray through a list of (n, log|W|, arg W) targets.

    Each target asks for f^n(z) = W; Newton starts from the previous solution.
    Returns (points, ok) where ok is False if some level failed to converge.
    """
    z = complex(z0)
    pts = np.empty(len(targets), dtype=np.complex128)
    for j, (n, logw, argw) in enumerate(targets):
        n = int(n)
        ok = False
        prev = first = math.inf
        for _ in range(newton_iter):
            w = z
            dw = 1.0 + 0j
            for _ in range(n):
                dw = 2.0 * w * dw
                w = w * w + c
            if w == 0 or dw == 0:
                break
            # solve log f^n(z) = log W on the branch nearest the current value
            lw = cmath.log(w)
            delta = complex(logw - lw.real, (argw - lw.imag + math.pi) % (2 * math.pi) - math.pi)
            step = delta * w / dw
            z = z + step
            if abs(delta) < 1e-11 or abs(step) <= 1e-14 * max(1.0, abs(z)):
                ok = True
                break
            # stalled at the rounding floor, which grows like 2^n in log space;
            # the position is then known far better than the sub-step length
            if prev == math.inf:
                first = abs(step)
            elif abs(delta) < 0.5 and abs(step) >= 0.5 * prev and abs(step) < 1e-5 * first:
                ok = True
                break
            prev = abs(step)
        if not ok or not math.isfinite(z.real) or not math.isfinite(z.imag):
            return pts[:j], False
        pts[j] = z
    return pts, True


# -- plane: escape-time raster ------------------------------------------------


def escape_raster(c: complex, xmin, xmax, ymin, ymax, width: int, height: int, max_iter: int) -> np.ndarray:
    """Iteration count to escape |z| > R for each pixel centre; -1 if bounded."""
    out = np.full((height, width), -1, dtype=np.int32)
    r2 = max(4.0, (1 + abs(c)) ** 2) * 4
    for j in range(height):
        y = ymax - (j + 0.5) * (ymax - ymin) / height
        for i in range(width):
            x = xmin + (i + 0.5) * (xmax - xmin) / width
            z = complex(x, y)
            for it in range(max_iter):
                if z.real * z.real + z.imag * z.imag > r2:
                    out[j, i] = it
                    break
                z = z * z + c
    return out


def basin_attracted(c: complex, zs, cycle, radius: float, max_iter: int) -> np.ndarray:
    """True where the orbit of z falls within ``radius`` of a point of ``cycle``."""
    out = np.zeros(len(zs), dtype=bool)
    cyc = [complex(w) for w in cycle]
    for idx, z0 in enumerate(zs):
        z = complex(z0)
        for _ in range(max_iter):
            if abs(z) > 4 + abs(c):
                break
            if any(abs(z - w) < radius for w in cyc):
                out[idx] = True
                break
            z = z * z + c
    return out
