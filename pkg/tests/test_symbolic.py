from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biaccess import kernels, symbolic
from biaccess.angles import Angle, CircleArc, double, total_length
from biaccess.symbolic import (
    Biaccessible,
    CriticalPortrait,
    OnSpine,
    Verdict,
    ZeroOne,
    equivalent,
    in_cover,
    is_biaccessible,
    itinerary,
    measure_estimate,
    partner_arcs,
    sample_numerators,
    sampling_modulus,
    spine_arcs,
    spine_preimage_cover,
    spine_test_real,
    verify_zero_one,
)

CHEB = CriticalPortrait(Fr(1, 2))
BASILICA = CriticalPortrait(Fr(1, 3))
RABBIT = CriticalPortrait(Fr(1, 7))


def test_portrait_rejects_zero():
    with pytest.raises(ValueError):
        CriticalPortrait(0)


@pytest.mark.parametrize(
    "t, theta, depth, word",
    [("1/3", "1/3", 4, "A*A*"), ("0", "1/2", 3, "BBB"), ("5/12", "1/2", 5, "ABAAA")],
)
def test_itinerary_examples(t, theta, depth, word):
    assert itinerary(t, CriticalPortrait(theta), depth).word == word


def test_itinerary_str_is_spaced():
    assert str(itinerary("1/3", BASILICA, 4)) == "A * A *"


def test_equivalent_examples():
    assert equivalent("5/12", "7/12", CHEB, 40)
    assert equivalent("3/11", "3/11", RABBIT, 17)
    assert not equivalent("1/9", "2/9", CriticalPortrait("1/9"), 30)


@given(st.integers(1, 10**6), st.integers(2, 10**6))
def test_itinerary_shift(k, m):
    # the itinerary of 2t is the tail of the itinerary of t
    t = Angle(k, m)
    a = itinerary(t, BASILICA, 12).word
    b = itinerary(double(t), BASILICA, 11).word
    assert a[1:] == b


def test_biaccessible_examples():
    assert is_biaccessible("5/12", CHEB, 40) is Verdict.YES
    assert is_biaccessible("0", CHEB, 40) is Verdict.NO
    assert is_biaccessible("1/3", BASILICA, 40) is Verdict.UNDECIDED


def test_biaccessible_random_basilica_mostly_no():
    m = 2**40 - 1
    ks = sample_numerators(400, m, seed=7)
    codes = [is_biaccessible(Angle(k, m), BASILICA, 40) for k in ks]
    assert sum(v is Verdict.NO for v in codes) >= 0.95 * len(codes)


def test_partner_arcs_chebyshev():
    parts = partner_arcs("5/12", CHEB, 10)
    assert any(p.contains("7/12") for p in parts)
    assert not any(p.contains("5/12") for p in parts)


def test_spine_examples():
    assert spine_test_real(0, BASILICA, 17) is Verdict.YES
    assert spine_test_real("5/12", CHEB, 40) is Verdict.YES
    assert spine_test_real("1/5", BASILICA, 40) is Verdict.NO
    with pytest.raises(ValueError):
        spine_test_real(0, RABBIT, 10)


def test_real_symmetric():
    assert CHEB.real_symmetric and BASILICA.real_symmetric
    assert CriticalPortrait("3/7").real_symmetric
    assert not RABBIT.real_symmetric


def test_sampling_modulus_is_prime_and_large():
    for d in (10, 20, 40):
        m = sampling_modulus(d)
        assert m > 2 ** (d + 1) and symbolic._is_prime(m)
        assert not any(symbolic._is_prime(x) for x in range(2 ** (d + 1) + 1, m))


def test_samples_depend_only_on_seed_and_index():
    m = sampling_modulus(20)
    a = sample_numerators(200, m, 3)
    b = sample_numerators(300, m, 3)
    assert a == b[:200]
    assert a != sample_numerators(200, m, 4)


def test_measure_estimate_examples():
    assert measure_estimate(Biaccessible(CHEB), 10000, 40, 1).value >= 0.99
    assert measure_estimate(Biaccessible(BASILICA), 10000, 40, 1).value <= 0.05
    always = measure_estimate(lambda t, d: True, 1000, 10, 1)
    assert always.value == 1.0 and always.std_error == 0


def test_measure_estimate_is_deterministic():
    a = measure_estimate(Biaccessible(RABBIT), 2000, 16, 5)
    b = measure_estimate(Biaccessible(RABBIT), 2000, 16, 5)
    assert a == b


def test_batch_matches_single_calls():
    m = sampling_modulus(16)
    ks = sample_numerators(300, m, 2)
    for pred in (Biaccessible(RABBIT), OnSpine(BASILICA)):
        batch = pred.batch(ks, m, 16)
        single = [symbolic._to_code(pred(Angle(k, m), 16)) for k in ks]
        assert list(batch) == single


def test_undecided_cap():
    def some_undecided(t, depth):
        return Verdict.UNDECIDED if t.numerator % 5 == 0 else Verdict.NO

    with pytest.raises(symbolic.UndecidedCapExceeded) as e:
        measure_estimate(some_undecided, 1000, 10, 1)
    assert 100 < e.value.estimate.undecided < 300
    assert e.value.estimate.value == 0


def test_small_sample_rejected():
    with pytest.raises(ValueError):
        measure_estimate(Biaccessible(CHEB), 10, 10, 1)


def test_spine_cover_examples():
    assert total_length(spine_preimage_cover(CHEB, 0, 20)) >= Fr(99, 100)
    assert total_length(spine_preimage_cover(BASILICA, 3, 30)) <= Fr(1, 10)


def test_spine_cover_grows_with_n():
    a = total_length(spine_preimage_cover(BASILICA, 2, 20))
    b = total_length(spine_preimage_cover(BASILICA, 5, 20))
    assert a <= b


def test_spine_arcs_piece_guard():
    with pytest.raises(ValueError):
        spine_arcs(CriticalPortrait("3/7"), 14, max_pieces=100)


def test_inclusion_in_cover_for_flagged_angles():
    cover = spine_preimage_cover(BASILICA, 10, 40)
    m = sampling_modulus(40)
    for k in sample_numerators(1000, m, 1):
        t = Angle(k, m)
        if is_biaccessible(t, BASILICA, 40) is Verdict.YES:
            assert in_cover(t, cover)


# -- zero-one law -------------------------------------------------------------------


def test_zero_one_examples():
    assert verify_zero_one([CircleArc.circle()]) is ZeroOne.ONE
    assert verify_zero_one([CircleArc(0, 0)]) is ZeroOne.ZERO
    assert verify_zero_one([CircleArc(0, Fr(1, 2))]) is ZeroOne.NOT_INVARIANT


def test_zero_one_periodic_points():
    pts = [CircleArc(Fr(1, 3), Fr(1, 3)), CircleArc(Fr(2, 3), Fr(2, 3))]
    assert verify_zero_one(pts) is ZeroOne.ZERO
    assert verify_zero_one(pts[:1]) is ZeroOne.NOT_INVARIANT


@settings(max_examples=50)
@given(st.integers(0, 63), st.integers(1, 64))
def test_zero_one_never_violated_by_arcs(k, n):
    arcs = [CircleArc.from_length(Fr(k, 64), Fr(n, 64))]
    assert verify_zero_one(arcs) is not ZeroOne.VIOLATION


def test_kernel_labels_match_portrait_label():
    th = BASILICA.theta
    for k in range(1, 40):
        t = Angle(k, 41)
        word = kernels.labels(k, 41, th.numerator, th.denominator, 1)
        assert word == BASILICA.label(t)
