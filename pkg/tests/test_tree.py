import math

import pytest

from biaccess import tree
from biaccess.angles import Angle
from biaccess.plane import FIXTURES, Kind, Parameter, fixed_points
from biaccess.tree import (
    ThreeCase,
    TreeError,
    F_action,
    arc_measures,
    build_tree,
    classify_3case,
    fatou_boundary_measure,
    joint,
    off_spine,
    project,
    three_case_flags,
    verify_F,
    verify_landing,
    verify_measures,
    verify_order,
    verify_symmetry,
    verify_three_case,
)

REAL_WINDOW = Parameter(-1.75, Kind.REAL_WINDOW, "3/7")


@pytest.fixture(scope="module")
def trees():
    return {
        "chebyshev": build_tree(FIXTURES["chebyshev"]),
        "basilica": build_tree(FIXTURES["basilica"]),
        "window": build_tree(REAL_WINDOW),
        "rabbit": build_tree(FIXTURES["rabbit"]),
    }


def pos(t, name):
    return t.point(name).position


def test_unsupported_parameters():
    with pytest.raises(TreeError):
        build_tree(FIXTURES["golden-siegel"])
    with pytest.raises(TreeError):
        build_tree(Parameter.from_c(0.2j))


def test_chebyshev_spine(trees):
    t = trees["chebyshev"]
    assert pos(t, "beta") == pytest.approx(2) and pos(t, "alpha") == pytest.approx(-1)
    assert t.canon("c") == t.canon("minus_beta")
    xs = [pos(t, s).real for s in t.spine_order]
    assert xs == sorted(xs)


def test_basilica_geometry(trees):
    t = trees["basilica"]
    assert project("c", t).id == t.canon("c")
    assert pos(t, "c") == pytest.approx(-1)
    a = fixed_points(-1).alpha
    assert pos(t, "alpha") == pytest.approx(a)
    # omega maps to 0 under f
    assert pos(t, "omega") ** 2 - 1 == pytest.approx(0, abs=1e-9)
    assert set(t.angles_at("alpha")) == {Angle("1/3"), Angle("2/3")}


def test_rabbit_critical_value_off_spine(trees):
    t = trees["rabbit"]
    assert not t.on_spine("c")
    assert project("c", t).id == t.canon("pi_c") != t.canon("c")
    assert len(t.path("c", "pi_c")) >= 2


def test_joint(trees):
    t = trees["rabbit"]
    assert joint("minus_beta", "beta", "zero", t).id == "zero"
    assert joint("minus_beta", "beta", "c", t).id == project("c", t).id
    for x, y, z in [("minus_beta", "c", "xi"), ("c", "minus_c", "beta"), ("omega", "xi", "minus_xi")]:
        j = joint(x, y, z, t)
        jn = joint(t.negate(x), t.negate(y), t.negate(z), t)
        assert jn.id == t.negate(j.id)
    with pytest.raises(TreeError):
        joint("beta", "beta", "zero", t)


def test_project(trees):
    for t in trees.values():
        assert project("zero", t).id == t.canon("zero")
        for x in t.sites:
            assert project(t.negate(x), t).id == t.negate(project(x, t).id)
    r = trees["rabbit"]
    p = project("xi", r).id
    assert p in r.path("minus_alpha", "alpha")


def test_F_action(trees):
    for t in trees.values():
        assert F_action("omega", t).id == t.canon("zero")
        assert F_action("beta", t).id == t.canon("beta")
        assert F_action("pi_xi", t).id == t.canon("pi_c")
        fixed = {x for x in t.sites if tree._try_F(x, t) == x}
        assert fixed == {t.canon("alpha"), t.canon("beta")}


def test_three_case(trees):
    r = trees["rabbit"]
    assert classify_3case("c", r) in (ThreeCase.A, ThreeCase.C)
    assert classify_3case("xi", r) is ThreeCase.A
    for x in off_spine(r):
        a, b = three_case_flags(x, r)
        assert isinstance(classify_3case(x, r), ThreeCase)


def test_three_case_needs_off_spine_point(trees):
    with pytest.raises(TreeError):
        classify_3case("zero", trees["basilica"])


@pytest.mark.parametrize("name", ["chebyshev", "basilica", "window", "rabbit"])
def test_structural_verifiers(trees, name):
    t = trees[name]
    for rep in (verify_order(t), verify_three_case(t), verify_F(t), verify_symmetry(t)):
        assert rep.passed, rep.to_text()


def test_window_order_from_closed_forms(trees):
    t = trees["window"]
    xs = [pos(t, s).real for s in t.spine_order]
    assert xs == sorted(xs)
    assert pos(t, "beta") == pytest.approx((1 + math.sqrt(8)) / 2)


@pytest.mark.parametrize("name", ["basilica", "rabbit"])
def test_landing_verifier(trees, name):
    assert verify_landing(trees[name]).passed


def test_chebyshev_branch_noted(trees):
    rep = verify_order(trees["chebyshev"])
    assert any("Chebyshev" in ch.detail for ch in rep.checks)


def test_tree_json(trees):
    js = trees["rabbit"].to_json()
    assert js["spine_order"][0] == "minus_beta" and len(js["points"]) == len(tree.NAMES)


# -- measures -------------------------------------------------------------------------


def test_arc_measures_chebyshev_matches_arccos(trees):
    # Brolin measure on [-2, 2] is the arcsine law: mu[a, b] = (acos(a/2) - acos(b/2)) / pi
    t = trees["chebyshev"]
    tab = arc_measures(t, 2000, 30, 1)
    assert tab.entries["spine"].value >= 0.99
    for name, (x, y) in tab.arcs.items():
        if name == "spine" or x == y or not (t.on_spine(x) and t.on_spine(y)):
            continue
        a, b = sorted((pos(t, x).real, pos(t, y).real))
        exact = (math.acos(a / 2) - math.acos(b / 2)) / math.pi
        e = tab.entries[name]
        assert abs(e.value - exact) <= 4 * max(e.std_error, 1e-3), name


def test_arc_measures_small_for_basilica_and_rabbit(trees):
    for name in ("basilica", "rabbit"):
        tab = arc_measures(trees[name], 1000, 40, 1)
        assert tab.entries["spine"].value <= 0.05
        assert verify_measures(trees[name], tab).passed


def test_rabbit_separation_at_shallow_depth(trees):
    t = trees["rabbit"]
    tab = arc_measures(t, 2000, 10, 1)
    assert tab.method == "separation"
    assert tab.entries["spine"].value > 0
    rep = verify_measures(t, tab)
    assert rep.passed, rep.to_text()


def test_fatou_boundary_measure():
    assert fatou_boundary_measure(FIXTURES["basilica"], 300, 40, 1).value <= 0.05
    assert fatou_boundary_measure(Parameter.from_c(0), 300, 20, 1).value >= 0.95
    with pytest.raises(ValueError):
        fatou_boundary_measure(FIXTURES["chebyshev"], 300, 20, 1)
