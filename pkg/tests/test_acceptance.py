"""Acceptance criteria 1-11, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line (shown even when
pytest captures output) and then asserts.  Run directly with
``python tests/test_acceptance.py`` for just the summary lines.
"""

import cmath
import json
import math
import random
import sys
import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from biaccess import cli, plane, symbolic, tree
from biaccess.angles import (
    Angle,
    CircleArc,
    arc_length,
    golden_mean_cf,
    image_arcs,
    preimage_arcs,
    siegel_angle,
    siegel_orbit_in_window,
)
from biaccess.plane import FIXTURES, Kind, Parameter
from biaccess.symbolic import CriticalPortrait, Verdict, ZeroOne

SEED = 1


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def _cli_json(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, [json.loads(x) for x in out.splitlines() if x.startswith("{")]


def _random_angles(n: int, seed: int = SEED) -> list[Angle]:
    m = symbolic.sampling_modulus(30)
    return [Angle(k, m) for k in symbolic.sample_numerators(n, m, seed)]


# 1 ------------------------------------------------------------------------------------


def test_criterion_01_chebyshev_dichotomy(report, capsys):
    t0 = time.perf_counter()
    code, (rec,) = _cli_json(["biaccess", "--theta=1/2", "--samples=10000", "--depth=40", "--seed=1"], capsys)
    dt = time.perf_counter() - t0
    total = rec["samples"] + rec["undecided"]
    ok = code == 0 and rec["value"] >= 0.99 and rec["undecided"] <= 0.01 * total and dt <= 60
    report(1, ok, f"value {rec['value']:.4f}, undecided {rec['undecided']}/{total}, {dt:.1f} s")
    assert ok


# 2 ------------------------------------------------------------------------------------


def _decays(rows) -> bool:
    steps = zip(rows, rows[1:])
    return all(b.value <= a.value + 2 * math.hypot(a.std_error, b.std_error) for a, b in steps)


def test_criterion_02_non_chebyshev_decay(report):
    t0 = time.perf_counter()
    depths = (10, 20, 30, 40)
    cases = {
        "biaccess theta=1/3": symbolic.Biaccessible(CriticalPortrait("1/3")),
        "biaccess theta=1/9": symbolic.Biaccessible(CriticalPortrait("1/9")),
        # real parameters go through their (real-symmetric) portraits
        "spine c=-1": symbolic.OnSpine(CriticalPortrait("1/3")),
        "spine c=-1.75": symbolic.OnSpine(CriticalPortrait("3/7")),
    }
    ok, parts = True, []
    for name, pred in cases.items():
        rows = [symbolic.measure_estimate(pred, 10000, d, SEED) for d in depths]
        good = _decays(rows) and rows[-1].value <= 0.05
        ok &= good
        parts.append(f"{name} " + "/".join(f"{r.value:.4f}" for r in rows))
    dt = time.perf_counter() - t0
    ok &= dt <= 300
    report(2, ok, "; ".join(parts) + f"; {dt:.1f} s")
    assert ok


# 3 ------------------------------------------------------------------------------------

CONJ_FIXTURES = {
    "c=0": Parameter.from_c(0),
    "c=-1": FIXTURES["basilica"],
    "c=-2": FIXTURES["chebyshev"],
    "c=i": Parameter.from_c(1j),
    "rabbit": FIXTURES["rabbit"],
}


def _beta(c: complex) -> complex:
    r = cmath.sqrt(1 - 4 * c)
    return max((1 + r) / 2, (1 - r) / 2, key=abs)


def test_criterion_03_conjugacy(report):
    worst, beta_err = 0.0, 0.0
    for p in CONJ_FIXTURES.values():
        for t in _random_angles(100):
            worst = max(worst, plane.conjugacy_residual(t, p, 20))
        beta_err = max(beta_err, abs(plane.land(0, p) - _beta(p.c)))
    ok = worst < 1e-6 and beta_err < 1e-6
    report(3, ok, f"max conjugacy residual {worst:.2e}, max |land(0) - beta| {beta_err:.2e}")
    assert ok


# 4 ------------------------------------------------------------------------------------


def _end(t, p):
    ray = plane.land_ray(t, p)
    return ray.landed if ray.landed is not None else ray.positions[-1]


def test_criterion_04_symmetry(report):
    sym = 0.0
    for p in CONJ_FIXTURES.values():
        for t in _random_angles(100):
            sym = max(sym, plane.ray_symmetry_check(t, p))
    conj = 0.0
    for p in (CONJ_FIXTURES["c=0"], CONJ_FIXTURES["c=-1"], CONJ_FIXTURES["c=-2"]):
        for t in _random_angles(100, seed=2):
            conj = max(conj, abs(_end(-t, p) - _end(t, p).conjugate()))
    ok = sym < 1e-6 and conj < 2e-6
    report(4, ok, f"max rotation residual {sym:.2e}, max |land(1-t) - conj land(t)| {conj:.2e}")
    assert ok


# 5 ------------------------------------------------------------------------------------


def test_criterion_05_exact_measure_laws(report):
    rng = random.Random(SEED)
    bad_pre = bad_img = injective = 0
    for _ in range(1000):
        q = rng.randint(2, 10**6)
        start = Fr(rng.randrange(q), q)
        length = Fr(rng.randrange(q), q)
        a = CircleArc.from_length(start, length)
        if sum(arc_length(b) for b in preimage_arcs(a)) != arc_length(a):
            bad_pre += 1
        if arc_length(a) < Fr(1, 2):
            injective += 1
            if sum(arc_length(b) for b in image_arcs(a)) != 2 * arc_length(a):
                bad_img += 1
    ok = bad_pre == 0 and bad_img == 0
    report(5, ok, f"preimage mismatches {bad_pre}/1000, image mismatches {bad_img}/{injective} injective arcs")
    assert ok


# 6 ------------------------------------------------------------------------------------


def _small_angles(qmax: int = 63) -> list[Angle]:
    return sorted({Angle(p, q) for q in range(1, qmax + 1) for p in range(q)}, key=lambda a: a.value)


def _oracle_disagreements(param: Parameter) -> tuple[int, int, int]:
    portrait = CriticalPortrait(param.theta)
    angles = _small_angles()
    depth = 128  # beyond preperiod + period of every denominator <= 63
    words = [symbolic.itinerary(t, portrait, depth).word for t in angles]
    zs = np.array([plane.land(t, param, eps=1e-9) for t in angles])
    bad = compared = undecided = 0
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            if "*" in words[i] or "*" in words[j]:
                undecided += 1
                continue
            compared += 1
            if (words[i] == words[j]) != (abs(zs[i] - zs[j]) < 1e-6):
                bad += 1
    return bad, compared, undecided


def test_criterion_06_oracle_equivalence(report):
    parts, ok = [], True
    for name in ("basilica", "rabbit"):
        bad, compared, und = _oracle_disagreements(FIXTURES[name])
        ok &= bad == 0
        parts.append(f"{name}: {bad} disagreements in {compared} pairs ({und} undecided)")
    report(6, ok, "; ".join(parts))
    assert ok


# 7 ------------------------------------------------------------------------------------

TREE_FIXTURES = [
    ["--fixture=chebyshev"],
    ["--fixture=basilica"],
    ["--c=-1.75", "--theta=3/7"],
    ["--fixture=rabbit"],
]


def test_criterion_07_lemma_verifiers(report, capsys):
    parts, ok = [], True
    for flags in TREE_FIXTURES:
        code, rows = _cli_json(["tree-verify", *flags], capsys)
        failed = [r["check"] for r in rows if "check" in r and not r["passed"]]
        good = code == 0 and rows[-1]["passed"] and not failed
        if flags == ["--fixture=chebyshev"]:
            good &= any("Chebyshev exceptional branch" in r.get("detail", "") for r in rows)
        ok &= good
        parts.append(f"{flags[0][2:]} {'ok' if good else 'failed ' + ','.join(failed)}")
    report(7, ok, "; ".join(parts))
    assert ok


# 8 ------------------------------------------------------------------------------------


def test_criterion_08_inclusion(report):
    portrait = CriticalPortrait("1/3")
    cover = symbolic.spine_preimage_cover(portrait, 10, 40)
    m = symbolic.sampling_modulus(40)
    flagged = outside = undecided = 0
    for k in symbolic.sample_numerators(1000, m, SEED):
        t = Angle(k, m)
        v = symbolic.is_biaccessible(t, portrait, 40)
        if v is Verdict.UNDECIDED:
            undecided += 1
        elif v is Verdict.YES:
            flagged += 1
            outside += not symbolic.in_cover(t, cover)
    ok = outside == 0
    report(8, ok, f"{flagged} flagged, {outside} outside the n=10 cover, {undecided} undecided")
    assert ok


# 9 ------------------------------------------------------------------------------------


def _pts(*xs):
    return [CircleArc(Fr(x), Fr(x)) for x in xs]


ZERO_ONE_CASES = [
    # the three worked examples
    ([CircleArc.circle()], ZeroOne.ONE),
    (_pts(0), ZeroOne.ZERO),
    ([CircleArc(0, Fr(1, 2))], ZeroOne.NOT_INVARIANT),
    # full measure
    ([CircleArc(0, Fr(1, 2)), CircleArc(Fr(1, 2), 0)], ZeroOne.ONE),
    ([CircleArc(Fr(1, 3), Fr(2, 3)), CircleArc(Fr(2, 3), Fr(1, 3))], ZeroOne.ONE),
    ([CircleArc.circle(Fr(1, 5))] + _pts(Fr(1, 7)), ZeroOne.ONE),
    ([CircleArc(0, Fr(1, 4)), CircleArc(Fr(1, 4), Fr(3, 4)), CircleArc(Fr(3, 4), 0)], ZeroOne.ONE),
    # finite invariant sets
    (_pts(Fr(1, 3), Fr(2, 3)), ZeroOne.ZERO),
    (_pts(Fr(1, 7), Fr(2, 7), Fr(4, 7)), ZeroOne.ZERO),
    (_pts(0, Fr(1, 2)), ZeroOne.ZERO),
    (_pts(Fr(1, 6), Fr(1, 3), Fr(2, 3)), ZeroOne.ZERO),
    (_pts(Fr(1, 5), Fr(2, 5), Fr(4, 5), Fr(3, 5)), ZeroOne.ZERO),
    (_pts(0, Fr(1, 3), Fr(2, 3), Fr(3, 7), Fr(6, 7), Fr(5, 7)), ZeroOne.ZERO),
    # not forward invariant
    ([CircleArc(Fr(1, 4), Fr(3, 4))], ZeroOne.NOT_INVARIANT),
    ([CircleArc(0, Fr(9, 10))], ZeroOne.NOT_INVARIANT),
    (_pts(Fr(1, 3)), ZeroOne.NOT_INVARIANT),
    (_pts(Fr(1, 6)), ZeroOne.NOT_INVARIANT),
    (_pts(Fr(1, 5), Fr(2, 5)), ZeroOne.NOT_INVARIANT),
    ([CircleArc(Fr(1, 3), Fr(1, 3) + Fr(1, 100))] + _pts(Fr(1, 3), Fr(2, 3)), ZeroOne.NOT_INVARIANT),
    ([CircleArc(0, Fr(1, 4)), CircleArc(Fr(1, 2), Fr(3, 4))], ZeroOne.NOT_INVARIANT),
]


def test_criterion_09_zero_one_law(report):
    wrong = [i for i, (arcs, want) in enumerate(ZERO_ONE_CASES) if symbolic.verify_zero_one(arcs) is not want]
    ok = not wrong and len(ZERO_ONE_CASES) == 20
    report(9, ok, f"{len(ZERO_ONE_CASES) - len(wrong)}/{len(ZERO_ONE_CASES)} cases correct" + (f", wrong {wrong}" if wrong else ""))
    assert ok


# 10 -----------------------------------------------------------------------------------


def test_criterion_10_siegel(report):
    cf = golden_mean_cf()
    s40, s41 = siegel_angle(cf, 40), siegel_angle(cf, 41)
    stable = abs(float(s41.value - s40.value)) < 1e-9
    s6 = siegel_angle(cf, 6)
    partial = s6.value == Fr(2734375, 10**7)
    q, inside = 2 * 200, None
    while inside is None and q <= 3200:
        try:
            inside = siegel_orbit_in_window(siegel_angle(cf, q), 200)
        except ValueError:
            q *= 2
    ok = stable and partial and inside is True
    report(
        10,
        ok,
        f"s = {float(s40.value):.12f}, stable {stable}; partial sum q<=6 = {float(s6.value)} "
        f"(want 0.2734375) {partial}; orbit in [s, s+1/2] for 200 steps {inside} (q<={q})",
    )
    assert ok


# 11 -----------------------------------------------------------------------------------


def test_criterion_11_fatou_boundary(report):
    samples = 2000
    vals = {
        "basilica": tree.fatou_boundary_measure(FIXTURES["basilica"], samples, 40, SEED).value,
        "rabbit": tree.fatou_boundary_measure(FIXTURES["rabbit"], samples, 40, SEED).value,
        "c=0": tree.fatou_boundary_measure(Parameter(0, Kind.REAL_WINDOW), samples, 40, SEED).value,
    }
    ok = vals["basilica"] <= 0.05 and vals["rabbit"] <= 0.05 and vals["c=0"] >= 0.95
    report(11, ok, ", ".join(f"{k} {v:.4f}" for k, v in vals.items()) + f" ({samples} samples, depth 40)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
