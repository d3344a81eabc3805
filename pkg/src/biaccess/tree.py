"""Regulated trees of quadratic Julia sets and the lemma verifiers built on them.

A tree is kept combinatorially: marked points, the arcs joining adjacent
ones, and the order of the points along the spine [-beta, beta].  Several
marked names may denote one site (for the Chebyshev map c = -beta, and 0 is
also xi); each site has a canonical name and the others are aliases.
Numeric positions ride along as witnesses.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import plane
from .angles import Angle
from .plane import Kind, Parameter
from .symbolic import (
    CriticalPortrait,
    MeasureEstimate,
    UndecidedCapExceeded,
    is_biaccessible,
    partner_arcs,
    sample_numerators,
    sampling_modulus,
    Verdict,
)


def _tolerance(depth: int) -> float:
    return 2.0 ** (-depth / 2)


def _sample_angles(samples: int, depth: int, seed: int) -> list[Angle]:
    if samples < 100:
        raise ValueError("samples must be >= 100")
    m = sampling_modulus(depth)
    return [Angle(k, m) for k in sample_numerators(samples, m, seed)]


def _ray_end(t: Angle, c: complex, depth: int) -> complex | None:
    ray = plane.trace_ray(t, c, depth, steps_per_level=4)
    if ray.status is plane.RayStatus.DIVERGED or len(ray.points) <= depth:
        return None
    return ray.points[-1][0]


# -- Fatou boundaries -------------------------------------------------------------


def _probes(y: complex, tol: float) -> list[complex]:
    out = []
    for ring, rho in enumerate((1.0, 0.25)):
        for j in range(6):
            out.append(y + tol * rho * cmath.exp(1j * math.pi * (2 * j + ring) / 6))
    return out


def near_immediate_basin(y: complex, c: complex, cycle: Sequence[complex], tol: float) -> bool | None:
    """Whether some probe within ``tol`` of y lies in an immediate basin component."""
    undecided = False
    for z in _probes(y, tol):
        v = plane.in_immediate_basin(z, c, cycle)
        if v:
            return True
        undecided |= v is None
    return None if undecided else False


def fatou_boundary_measure(
    param: Parameter, samples: int = 10000, depth: int = 40, seed: int = 1, undecided_cap: float = 0.01
) -> MeasureEstimate:
    """Measure of angles whose landing point is on the boundary of a bounded Fatou component.

    Every bounded component maps onto the immediate basin of the
    superattracting cycle, and the measure is invariant under pullback, so it
    is enough to look at the immediate components.  A sampled angle counts
    when a point within 2^(-depth/2) of its ray end at level ``depth`` lies in
    one of them.
    """
    c = param.c
    cycle = plane.superattracting_cycle(c)
    if cycle is None:
        raise ValueError("needs a parameter whose critical point is periodic")
    tol = _tolerance(depth)
    hits = und = 0
    for t in _sample_angles(samples, depth, seed):
        y = _ray_end(t, c, depth)
        v = None if y is None else near_immediate_basin(y, c, cycle, tol)
        if v is None:
            und += 1
        elif v:
            hits += 1
    est = MeasureEstimate.from_counts(hits, samples - und, depth, seed, und)
    if und > undecided_cap * samples:
        raise UndecidedCapExceeded(est, undecided_cap)
    return est


# -- the marked tree --------------------------------------------------------------


class TreeError(ValueError):
    pass


class LemmaViolation(AssertionError):
    pass


NAMES = (
    "beta", "minus_beta", "alpha", "minus_alpha", "zero", "omega", "minus_omega",
    "c", "minus_c", "xi", "minus_xi", "pi_c", "minus_pi_c", "pi_xi", "minus_pi_xi",
)  # fmt: skip

_NEG = {"zero": "zero"}
for _a in ("beta", "alpha", "c", "omega", "xi", "pi_c", "pi_xi"):
    _NEG[_a], _NEG["minus_" + _a] = "minus_" + _a, _a

# the modified map F on named points; c's image depends on the parameter
_F = {
    "beta": "beta",
    "minus_beta": "beta",
    "alpha": "alpha",
    "minus_alpha": "alpha",
    "omega": "zero",
    "minus_omega": "zero",
    "xi": "minus_beta",
    "minus_xi": "minus_beta",
    "zero": "c",
    "pi_xi": "pi_c",
    "minus_pi_xi": "pi_c",
}


@dataclass(frozen=True)
class MarkedPoint:
    id: str
    position: complex
    angles: tuple[Angle, ...] = ()
    fatou_center: str | None = None
    # centres only: a ray landing on the boundary of the component
    boundary_angle: Angle | None = None

    @property
    def biaccessible(self) -> bool:
        return len(self.angles) >= 2

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "position": [self.position.real, self.position.imag],
            "angles": [str(a) for a in self.angles],
            "fatou_center": self.fatou_center,
        }


@dataclass
class TreeModel:
    param: Parameter
    points: dict[str, MarkedPoint]
    alias: dict[str, str]
    arcs: tuple[tuple[str, str], ...]
    spine_order: tuple[str, ...]
    c_image: str | None = None
    real: bool = False
    _adj: dict[str, list[str]] = field(init=False, repr=False)

    def __post_init__(self):
        self._adj = {s: [] for s in self.sites}
        for a, b in self.arcs:
            self._adj[a].append(b)
            self._adj[b].append(a)
        if len(self.arcs) != len(self.sites) - 1 or len(self._reach(self.spine_order[0])) != len(self.sites):
            raise TreeError("marked arcs do not form a tree")

    @property
    def sites(self) -> list[str]:
        return sorted(set(self.alias.values()), key=NAMES.index)

    def canon(self, x: str | MarkedPoint) -> str:
        name = x.id if isinstance(x, MarkedPoint) else x
        try:
            return self.alias[name]
        except KeyError:
            raise TreeError(f"{name!r} is not a marked point") from None

    def names_at(self, site: str) -> list[str]:
        s = self.canon(site)
        return [n for n in NAMES if self.alias.get(n) == s]

    def point(self, x: str | MarkedPoint) -> MarkedPoint:
        return self.points[self.canon(x)]

    def angles_at(self, x: str | MarkedPoint) -> tuple[Angle, ...]:
        seen = []
        for n in self.names_at(x):
            for a in self.points[n].angles:
                if a not in seen:
                    seen.append(a)
        return tuple(seen)

    def _reach(self, start: str) -> set[str]:
        seen, todo = {start}, [start]
        while todo:
            for v in self._adj[todo.pop()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    def path(self, x, y) -> list[str]:
        """Sites along the regulated arc [x, y], endpoints included."""
        a, b = self.canon(x), self.canon(y)
        prev = {a: None}
        todo = [a]
        while todo:
            v = todo.pop()
            for w in self._adj[v]:
                if w not in prev:
                    prev[w] = v
                    todo.append(w)
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]

    def on_spine(self, x) -> bool:
        return self.canon(x) in self.spine_order

    def negate(self, x) -> str:
        return self.canon(_NEG[self.names_at(x)[0]])

    def to_json(self) -> dict:
        return {
            "parameter": self.param.to_json(),
            "points": [self.points[n].to_json() | {"site": self.alias[n]} for n in NAMES if n in self.points],
            "arcs": [list(a) for a in self.arcs],
            "spine_order": list(self.spine_order),
        }


def _edges(path: Sequence[str]) -> set[frozenset]:
    return {frozenset(p) for p in zip(path, path[1:])}


def joint(x, y, z, tree: TreeModel) -> MarkedPoint:
    """The point where the arcs [x, y], [y, z], [x, z] meet."""
    a, b, c = (tree.canon(v) for v in (x, y, z))
    if len({a, b, c}) < 3:
        raise TreeError("joint needs three distinct points")
    common = set(tree.path(a, b)) & set(tree.path(b, c)) & set(tree.path(a, c))
    (p,) = common
    return tree.points[p]


def project(x, tree: TreeModel) -> MarkedPoint:
    """pi(x): x itself on the spine, else the joint of -beta, x, beta."""
    if tree.on_spine(x):
        return tree.point(x)
    return joint("minus_beta", x, "beta", tree)


def F_action(x, tree: TreeModel) -> MarkedPoint:
    """Image of a marked point under the modified map F."""
    images = set()
    for n in tree.names_at(x):
        img = tree.c_image if n in ("c", "minus_c") else _F.get(n)
        if img is not None and img in tree.alias:
            images.add(tree.canon(img))
    if not images:
        raise TreeError(f"F({tree.canon(x)}) is not a marked point")
    if len(images) > 1:
        raise TreeError(f"names at {tree.canon(x)} disagree on F: {sorted(images)}")
    return tree.points[images.pop()]


def _try_F(x, tree: TreeModel) -> str | None:
    try:
        return F_action(x, tree).id
    except TreeError:
        return None


# -- builders -----------------------------------------------------------------------


def _assemble(param, pts: dict[str, MarkedPoint], alias, arcs, spine, c_image, real) -> TreeModel:
    for n in NAMES:
        if n not in pts:
            pts[n] = MarkedPoint(n, pts[alias[n]].position)
    points = {n: pts[n] for n in NAMES}
    return TreeModel(param, points, dict(alias), tuple(arcs), tuple(spine), c_image, real)


def _real_tree(param: Parameter) -> TreeModel:
    c = param.c.real
    if not -2 <= c < -0.75:
        raise TreeError("real trees need -2 <= c < -3/4 (a repelling alpha)")
    fp = plane.fixed_points(c)
    alpha, beta = fp.alpha.real, fp.beta.real
    per = plane.attracting_period(c)
    if per == 1:
        raise TreeError("alpha is not repelling")
    pos = {"beta": beta, "alpha": alpha, "zero": 0.0, "c": c}
    centers = {}
    if per is None:
        pos["omega"] = -math.sqrt(-c)
    else:
        orbit = [c]
        for _ in range(per - 2):
            orbit.append(orbit[-1] ** 2 + c)
        # centres c(U_k) = f^(k-1)(c) for the components U_0 ... U_(per-1)
        centers = {0.0: "U0"} | {w: f"U{k + 1}" for k, w in enumerate(orbit)}
        centers |= {-w: "-" + lab for w, lab in centers.items() if w != 0}
        pos["omega"] = -abs(orbit[-1])
    pos["xi"] = 1j * math.sqrt(max(0.0, beta + c))
    pos["pi_c"], pos["pi_xi"] = c, 0.0
    for n in list(pos):
        pos.setdefault(_NEG[n], -pos[n])
    half = Fraction(1, 2)
    angles = {
        "beta": (Angle(0),),
        "minus_beta": (Angle(half),),
        "alpha": (Angle(1, 3), Angle(2, 3)),
        "minus_alpha": (Angle(1, 6), Angle(5, 6)),
        "xi": (Angle(1, 4),),
        "minus_xi": (Angle(3, 4),),
    }
    if per is None and param.theta is not None:
        th = param.theta
        cang = tuple(dict.fromkeys([th, -th]))
        angles["c"] = cang
        angles["minus_c"] = tuple(dict.fromkeys(a + half for a in cang))
        angles["zero"] = tuple(sorted({h for a in cang for h in (Angle(a.value / 2), Angle(a.value / 2) + half)}))
    pts = {}
    for n in NAMES:
        z = complex(pos[n])
        label = next((lab for w, lab in centers.items() if abs(w - z) < 1e-12), None)
        pts[n] = MarkedPoint(n, z, angles.get(n, ()), label)
    alias = {}
    for n in NAMES:
        alias[n] = next(m for m in NAMES if abs(pts[m].position - pts[n].position) < 1e-12)
    sites = sorted(set(alias.values()), key=NAMES.index)
    spine = sorted((s for s in sites if pts[s].position.imag == 0), key=lambda s: pts[s].position.real)
    arcs = list(zip(spine, spine[1:]))
    for s in sites:
        if s not in spine:
            arcs.append((alias["zero"], s))
    fc = 0.0 if per == 2 else c * c + c
    c_image = next((n for n in NAMES if abs(pts[n].position - fc) < 1e-12), None)
    return _assemble(param, pts, alias, arcs, spine, c_image, True)


def _rabbit_tree(param: Parameter) -> TreeModel:
    """The rabbit with parameter angle 1/7: alpha carries the rays 1/7, 2/7, 4/7.

    Its components U0 (centre 0), U1 (centre c), U2 (centre f(c)) meet at
    alpha.  The spine runs -beta, U2, alpha, U0, -alpha, -U2, beta; c hangs
    off alpha and carries -xi beyond it, symmetrically -c and xi at -alpha.
    """
    c = param.c
    fp = plane.fixed_points(c)
    alpha, beta = fp.alpha, fp.beta
    r = Fraction
    # xi is the preimage of -beta reached by the ray 3/4
    root = cmath.sqrt(-beta - c)
    end = plane.trace_ray(r(3, 4), c, 30).points[-1][0]
    xi = root if abs(end - root) < abs(end + root) else -root
    pts = {
        "beta": MarkedPoint("beta", beta, (Angle(0),)),
        "minus_beta": MarkedPoint("minus_beta", -beta, (Angle(1, 2),)),
        "alpha": MarkedPoint("alpha", alpha, (Angle(1, 7), Angle(2, 7), Angle(4, 7))),
        "minus_alpha": MarkedPoint("minus_alpha", -alpha, (Angle(1, 14), Angle(9, 14), Angle(11, 14))),
        "zero": MarkedPoint("zero", 0j, (), "U0", Angle(4, 7)),
        "c": MarkedPoint("c", c, (), "U1", Angle(1, 7)),
        "minus_c": MarkedPoint("minus_c", -c, (), "-U1", Angle(9, 14)),
        "omega": MarkedPoint("omega", c * c + c, (), "U2", Angle(2, 7)),
        "minus_omega": MarkedPoint("minus_omega", -(c * c + c), (), "-U2", Angle(11, 14)),
        "xi": MarkedPoint("xi", xi, (Angle(3, 4),)),
        "minus_xi": MarkedPoint("minus_xi", -xi, (Angle(1, 4),)),
    }
    alias = {n: n for n in pts}
    alias |= {"pi_c": "alpha", "minus_pi_c": "minus_alpha", "pi_xi": "minus_alpha", "minus_pi_xi": "alpha"}
    spine = ["minus_beta", "omega", "alpha", "zero", "minus_alpha", "minus_omega", "beta"]
    arcs = list(zip(spine, spine[1:])) + [
        ("alpha", "c"),
        ("c", "minus_xi"),
        ("minus_alpha", "minus_c"),
        ("minus_c", "xi"),
    ]
    return _assemble(param, pts, alias, arcs, spine, "omega", False)


def _is_rabbit(param: Parameter) -> bool:
    return abs(param.c - plane.FIXTURES["rabbit"].c) < 1e-12 and param.theta in (None, Angle(1, 7))


def build_tree(param: Parameter) -> TreeModel:
    """Marked regulated tree for Chebyshev, the real window, basilica or rabbit."""
    if param.is_real and param.kind in (Kind.CHEBYSHEV, Kind.REAL_WINDOW, Kind.PCF):
        return _real_tree(param)
    if param.kind is Kind.PCF and _is_rabbit(param):
        return _rabbit_tree(param)
    raise TreeError(f"no tree model for {param.kind.value} parameter c={param.c}")


# -- verifier reports -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    def to_text(self) -> str:
        width = max([len(ch.name) for ch in self.checks] + [10])
        lines = [self.title]
        for ch in self.checks:
            lines.append(f"{'PASS' if ch.passed else 'FAIL'}  {ch.name:<{width}}  {ch.detail}".rstrip())
        lines.append(f"{'PASS' if self.passed else 'FAIL'}  overall")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [{"name": ch.name, "passed": ch.passed, "detail": ch.detail} for ch in self.checks],
        }


def _is_chebyshev(tree: TreeModel) -> bool:
    return tree.param.c == -2


def _index(tree: TreeModel, x) -> int:
    return tree.spine_order.index(tree.canon(x))


def _spine_between(tree: TreeModel, x, lo, hi, closed=True) -> bool:
    if not tree.on_spine(x):
        return False
    i, a, b = _index(tree, x), _index(tree, lo), _index(tree, hi)
    return a <= i <= b if closed else a < i < b


def verify_order(tree: TreeModel) -> Report:
    """Spine order and the fixed-point lemmas, combinatorially and (real trees) numerically."""
    rep = Report(f"order c={tree.param.c}")
    seven = ["minus_beta", "omega", "alpha", "zero", "minus_alpha", "minus_omega", "beta"]
    on = all(tree.on_spine(n) for n in seven)
    idx = [_index(tree, n) for n in seven] if on else []
    ok = on and all(a < b for a, b in zip(idx, idx[1:]))
    detail = "combinatorial"
    if tree.real:
        xs = [tree.point(n).position.real for n in seven]
        ok = ok and all(a < b for a, b in zip(xs, xs[1:]))
        detail = " < ".join(f"{x:.6g}" for x in xs)
    rep.add("spine order -beta<omega<alpha<0<-alpha<-omega<beta", ok, detail)

    ok = _spine_between(tree, "alpha", "minus_beta", "zero", closed=False)
    if tree.real:
        a, b = tree.point("alpha").position.real, tree.point("beta").position.real
        ok = ok and -b < a < 0
    rep.add("alpha in (-beta, 0)", ok)

    ok = _spine_between(tree, "omega", "minus_beta", "alpha", closed=False) and _try_F("omega", tree) == tree.canon("zero")
    rep.add("omega in (-beta, alpha), F(omega) = 0", ok)

    pc = project("c", tree).id
    ok = _spine_between(tree, pc, "minus_beta", "alpha")
    if tree.real:
        x = tree.point(pc).position.real
        ok = ok and -tree.point("beta").position.real <= x <= tree.point("alpha").position.real
    at_end = pc == tree.canon("minus_beta")
    cheb = tree.canon("c") == tree.canon("minus_beta")
    note = "Chebyshev exceptional branch: pi(c) = c = -beta" if at_end else ""
    rep.add("pi(c) in [-beta, alpha]", ok and at_end == cheb and cheb == _is_chebyshev(tree), note)

    px = project("xi", tree).id
    ok = _spine_between(tree, px, "alpha", "minus_alpha") and _try_F(px, tree) == pc
    ok = ok and tree.on_spine("c") == (px == tree.canon("zero"))
    note = ""
    if _is_chebyshev(tree):
        note = "Chebyshev: xi = 0 lies on the spine"
    else:
        ok = ok and not tree.on_spine("xi")
    rep.add("pi(xi) in [-alpha, alpha], F(pi(xi)) = pi(c)", ok, note)
    return rep


class ThreeCase(str, Enum):
    A = "case-a"
    B = "case-b"
    C = "case-c"


def _arc(tree: TreeModel, x) -> list[str]:
    return tree.path(x, project(x, tree).id)


def _overlap(p: Sequence[str], q: Sequence[str]) -> bool:
    return bool(_edges(p) & _edges(q))


def three_case_flags(x, tree: TreeModel) -> tuple[bool, bool]:
    """(I_x overlaps +-I_xi, pi(x) in the open arc (-pi(xi), pi(xi)))."""
    if tree.on_spine(x):
        raise TreeError(f"{tree.canon(x)} lies on the spine")
    ix = _arc(tree, x)
    a = _overlap(ix, _arc(tree, "xi")) or _overlap(ix, _arc(tree, "minus_xi"))
    px = project("xi", tree).id
    inner = tree.path(tree.negate(px), px)[1:-1]
    b = project(x, tree).id in inner
    return a, b


def classify_3case(x, tree: TreeModel) -> ThreeCase:
    a, b = three_case_flags(x, tree)
    if a and b:
        raise LemmaViolation(f"{tree.canon(x)} satisfies both case a and case b")
    return ThreeCase.A if a else ThreeCase.B if b else ThreeCase.C


def off_spine(tree: TreeModel) -> list[str]:
    return [s for s in tree.sites if not tree.on_spine(s)]


def verify_three_case(tree: TreeModel) -> Report:
    rep = Report("three cases")
    cases = {}
    ok = True
    for s in off_spine(tree):
        a, b = three_case_flags(s, tree)
        ok = ok and not (a and b)
        cases[s] = classify_3case(s, tree).value if not (a and b) else "a+b"
    rep.add("classification total and exclusive", ok, ", ".join(f"{k}:{v}" for k, v in cases.items()) or "no off-spine points")
    if tree.on_spine("c"):
        rep.add("c is never case b", True, "c lies on the spine")
    else:
        rep.add("c is never case b", cases.get(tree.canon("c")) in ("case-a", "case-c"), cases.get(tree.canon("c"), ""))
    if not _is_chebyshev(tree):
        rep.add("xi is case a", cases.get(tree.canon("xi")) == "case-a")
    return rep


def verify_F(tree: TreeModel) -> Report:
    """(F4) fixed points, the respect lemma and the named images of F."""
    rep = Report("F")
    images = {s: _try_F(s, tree) for s in tree.sites}
    fixed = sorted(s for s, v in images.items() if v == s)
    rep.add("F has exactly two fixed points, alpha and beta", fixed == sorted([tree.canon("alpha"), tree.canon("beta")]), str(fixed))

    want = [("xi", "minus_beta"), ("minus_xi", "minus_beta"), ("minus_beta", "beta"), ("omega", "zero"),
            ("minus_omega", "zero"), ("zero", "c"), ("pi_xi", "pi_c"), ("minus_pi_xi", "pi_c")]  # fmt: skip
    bad = [f"{a}->{b}" for a, b in want if images.get(tree.canon(a)) != tree.canon(b)]
    rep.add("F on marked points", not bad, ", ".join(bad))

    # F = f on Julia points of the tree
    worst = 0.0
    for s, v in images.items():
        p = tree.point(s)
        if v is None or p.fatou_center or tree.point(v).fatou_center:
            continue
        worst = max(worst, abs(p.position**2 + tree.param.c - tree.point(v).position))
    rep.add("F agrees with f on Julia points", worst < 1e-9, f"max residual {worst:.2e}")

    # every branch at 0, with 0 itself, maps homeomorphically
    zero = tree.canon("zero")
    problems = []
    for nb in tree._adj[zero]:
        branch = [zero] + sorted(tree._reach_without(nb, zero), key=NAMES.index)
        verts = [v for v in branch if images[v] is not None]
        imgs = [images[v] for v in verts]
        if len(set(imgs)) != len(imgs):
            problems.append(f"not injective near {nb}")
            continue
        for u, w in combinations(verts, 2):
            between = tree.path(u, w)[1:-1]
            span = tree.path(images[u], images[w])
            for v in between:
                if v in verts and images[v] not in span:
                    problems.append(f"F({v}) not in [F({u}), F({w})]")
    rep.add("F is a homeomorphism on each branch at 0", not problems, "; ".join(problems[:3]))
    return rep


def _reach_without(self: TreeModel, start: str, cut: str) -> set[str]:
    seen, todo = {start, cut}, [start]
    while todo:
        for v in self._adj[todo.pop()]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen - {cut}


TreeModel._reach_without = _reach_without


def verify_symmetry(tree: TreeModel) -> Report:
    rep = Report("symmetry")
    arcs = {frozenset(a) for a in tree.arcs}
    neg = {frozenset(tree.negate(v) for v in a) for a in tree.arcs}
    rep.add("tree is invariant under z -> -z", arcs == neg)
    worst = max(abs(tree.points[n].position + tree.points[_NEG[n]].position) for n in NAMES)
    rep.add("positions are symmetric", worst < 1e-9, f"{worst:.1e}")
    ok = all(project(tree.negate(s), tree).id == tree.negate(project(s, tree).id) for s in tree.sites)
    ok = ok and all(project(project(s, tree).id, tree).id == project(s, tree).id for s in tree.sites)
    rep.add("pi(-x) = -pi(x), pi idempotent", ok)
    return rep


def verify_landing(tree: TreeModel, eps: float = 1e-6) -> Report:
    """Rays listed at marked points land there."""
    rep = Report("landing")
    worst, missing = 0.0, []
    for s in tree.sites:
        for a in tree.angles_at(s):
            ray = plane.land_ray(a, tree.param.c)
            if ray.status is not plane.RayStatus.LANDED:
                missing.append(f"{a}")
                continue
            worst = max(worst, abs(ray.landed - tree.point(s).position))
    rep.add("listed rays land at their points", not missing and worst < eps, f"max distance {worst:.1e}" + (f"; not landed {missing}" if missing else ""))
    return rep


# -- arc measures -----------------------------------------------------------------------


class AmbiguityCapExceeded(RuntimeError):
    pass


@dataclass
class ArcMeasureTable:
    entries: dict[str, MeasureEstimate]
    arcs: dict[str, tuple[str, str]]
    rejected: int
    undecided: int
    method: str

    def __getitem__(self, name: str) -> MeasureEstimate:
        return self.entries[name]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "rejected": self.rejected,
            "undecided": self.undecided,
            "arcs": {
                k: {"ends": list(self.arcs[k]), "value": e.value, "std_error": e.std_error, "samples": e.samples}
                for k, e in self.entries.items()
            },
        }

    def to_text(self) -> str:
        lines = [f"{'arc':<28} {'measure':>10} {'std_err':>10}"]
        for k, e in self.entries.items():
            lines.append(f"{k:<28} {e.value:>10.6f} {e.std_error:>10.6f}")
        lines.append(f"rejected {self.rejected}, undecided {self.undecided} ({self.method})")
        return "\n".join(lines)


def tree_arcs(tree: TreeModel) -> dict[str, tuple[str, str]]:
    """Named arcs: the spine, its pieces between marked points, I_xi, -I_xi, I_c and [-beta, pi(c)]."""
    sp = tree.spine_order
    out = {"spine": (sp[0], sp[-1])}
    for a, b in zip(sp, sp[1:]):
        out[f"[{a},{b}]"] = (a, b)
    out["I_xi"] = (tree.canon("xi"), project("xi", tree).id)
    out["I_minus_xi"] = (tree.canon("minus_xi"), project("minus_xi", tree).id)
    out["I_c"] = (tree.canon("c"), project("c", tree).id)
    out["[minus_beta,pi_c]"] = (sp[0], project("c", tree).id)
    return out


def _seg_dist(z: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(z - a)
    s = min(1.0, max(0.0, ((z - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(z - (a + s * d))


def _interval_hits(tree: TreeModel, arcs, y: complex, tol: float):
    """Arcs within tol of y, or None when y sits on a branch or junction point."""
    for s in tree.sites:
        p = tree.points[s]
        if p.fatou_center is None and len(tree._adj[s]) >= 2 and abs(y - p.position) <= tol:
            return None
    hit = set()
    for name, (a, b) in arcs.items():
        path = tree.path(a, b)
        if len(path) < 2:
            continue
        pos = [tree.points[v].position for v in path]
        if min(_seg_dist(y, u, w) for u, w in zip(pos, pos[1:])) <= tol:
            hit.add(name)
    return hit


def _site_angle(tree: TreeModel, s: str) -> Angle:
    angs = tree.angles_at(s)
    if angs:
        return angs[0]
    b = tree.points[s].boundary_angle
    if b is None:
        raise TreeError(f"no angle known for {s}")
    return b


def _cuts(t: Angle, portrait: CriticalPortrait, depth: int):
    """Cut angles of t's landing point and arcs of angles too close to call.

    The partners are the depth-``depth`` cylinder pieces lying outside the
    depth/2 piece of t (the same persistence rule as is_biaccessible).
    """
    from . import kernels
    from .angles import CircleArc

    th = portrait.theta
    word = kernels.labels(t.numerator, t.denominator, th.numerator, th.denominator, depth)
    half = max(1, depth // 2)
    arcs0, n0 = kernels.cylinder(word[:half], th.numerator, th.denominator)
    main = [CircleArc.from_length(Fraction(s, n0), Fraction(l, n0)) for s, l in arcs0]
    main = [a for a in main if a.contains(t)]
    forbidden = list(main)
    cuts = [t.value]
    for a in partner_arcs(t, portrait, depth):
        if any(m.contains(a.start) for m in main):
            continue
        forbidden.append(a)
        cuts.append((a.start.value + a.length / 2) % 1)
    return sorted(cuts), forbidden


def _gap(cuts: list[Fraction], x: Fraction) -> int:
    import bisect

    return bisect.bisect_right(cuts, x) % len(cuts)


def arc_measures(
    tree: TreeModel, samples: int = 10000, depth: int = 40, seed: int = 1, reject_cap: float = 0.01
) -> ArcMeasureTable:
    """Monte Carlo measure of each named arc.

    Real trees: each sampled ray is traced to level ``depth`` and its end is
    assigned to the arcs (straight segments) within 2^(-depth/2); ends that
    close to a Julia branch point are rejected.  When the portrait angle is
    known only biaccessible samples are traced.  Rabbit: a sampled angle lies
    on [x, y] when it is biaccessible and its partner rays separate the rays
    of x from those of y; samples whose partner pieces swallow a marked
    angle are rejected.
    """
    arcs = tree_arcs(tree)
    live = {k: v for k, v in arcs.items() if v[0] != v[1]}
    hits = dict.fromkeys(arcs, 0)
    rejected = undecided = 0
    angles = _sample_angles(samples, depth, seed)
    c = tree.param.c
    portrait = None if tree.param.theta is None else CriticalPortrait(tree.param.theta)
    if tree.real:
        method = "interval"
        tol = _tolerance(depth)
        for t in angles:
            # points inside an arc are cut points: with a portrait at hand,
            # skip angles that are not biaccessible
            v = Verdict.YES if portrait is None else is_biaccessible(t, portrait, depth)
            if v is Verdict.UNDECIDED:
                undecided += 1
                continue
            if v is Verdict.NO:
                continue
            y = _ray_end(t, c, depth)
            if y is None:
                undecided += 1
                continue
            got = _interval_hits(tree, live, y, tol)
            if got is None:
                rejected += 1
                continue
            for k in got:
                hits[k] += 1
    else:
        method = "separation"
        if portrait is None:
            raise TreeError("separation needs the critical portrait angle")
        site_angle = {s: _site_angle(tree, s).value for s in tree.sites}
        for t in angles:
            v = is_biaccessible(t, portrait, depth)
            if v is Verdict.UNDECIDED:
                undecided += 1
                continue
            if v is Verdict.NO:
                continue
            cuts, forbidden = _cuts(t, portrait, depth)
            if any(a.contains(x) for a in forbidden for x in site_angle.values()):
                rejected += 1
                continue
            for k, (a, b) in live.items():
                if _gap(cuts, site_angle[a]) != _gap(cuts, site_angle[b]):
                    hits[k] += 1
    decided = samples - undecided - rejected
    if rejected > reject_cap * samples:
        raise AmbiguityCapExceeded(f"{rejected}/{samples} samples rejected")
    entries = {k: MeasureEstimate.from_counts(hits[k], decided, depth, seed, undecided + rejected) for k in arcs}
    return ArcMeasureTable(entries, arcs, rejected, undecided, method)


def _agree(e1: MeasureEstimate, e2: MeasureEstimate, k1: float = 1.0, k2: float = 1.0) -> tuple[bool, str]:
    diff = abs(k1 * e1.value - k2 * e2.value)
    se = math.hypot(k1 * e1.std_error, k2 * e2.std_error)
    return diff <= 3 * se + 1e-15, f"{k1 * e1.value:.5f} vs {k2 * e2.value:.5f} (3se {3 * se:.5f})"


def verify_measures(tree: TreeModel, table: ArcMeasureTable) -> Report:
    """Preimage relations for I_xi, I_c and [-beta, pi(c)] and the spine bookkeeping."""
    rep = Report("measures")
    e = table.entries
    rep.add("mu(I_xi) = mu(-I_xi)", *_agree(e["I_xi"], e["I_minus_xi"]))
    rep.add("mu(I_xi) = mu(I_c) / 2", *_agree(e["I_xi"], e["I_c"], 1, 0.5))
    rep.add("mu[-beta, pi(c)] = 2 mu(I_xi)", *_agree(e["[minus_beta,pi_c]"], e["I_xi"], 1, 2))
    rep.add("mu[-beta, pi(c)] = mu(I_c)", *_agree(e["[minus_beta,pi_c]"], e["I_c"]))
    pieces = [v for k, v in e.items() if k.startswith("[") and k != "[minus_beta,pi_c]"]
    total = sum(p.value for p in pieces)
    sp = e["spine"]
    rep.add("spine = sum of its pieces", abs(sp.value - total) <= 3 * sp.std_error + 1.0 / sp.samples, f"{sp.value:.5f} vs {total:.5f}")
    m = e["I_c"]
    if _is_chebyshev(tree):
        rep.add("Chebyshev spine carries all the measure", sp.value >= 0.99, f"{sp.value:.5f}")
    else:
        zero_spine = sp.value <= 3 * sp.std_error + 0.05
        zero_ic = m.value <= 3 * m.std_error + 0.05
        rep.add("mu(spine) = 0 iff mu(I_c) = 0", zero_spine == zero_ic, f"spine {sp.value:.5f}, I_c {m.value:.5f}")
    # growth corollary: its hypothesis needs m = mu(I_c) > 0
    rep.add("growth hypothesis m > 0 fails", m.value <= 3 * m.std_error, f"m = {m.value:.5f} +- {m.std_error:.5f}")
    return rep


def verify_tree(
    param: Parameter, samples: int = 10000, depth: int = 40, seed: int = 1, landing: bool = True
) -> tuple[Report, ArcMeasureTable]:
    """Every verifier on one parameter; returns the combined report and the arc table."""
    tree = build_tree(param)
    rep = Report(f"tree-verify c={param.c:.10g}" + (f" ({param.name})" if param.name else ""))
    for part in (verify_order(tree), verify_three_case(tree), verify_F(tree), verify_symmetry(tree)):
        rep.extend(part)
    if landing:
        rep.extend(verify_landing(tree))
    table = arc_measures(tree, samples, depth, seed)
    rep.extend(verify_measures(tree, table))
    return rep, table
