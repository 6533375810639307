import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlwectl.ring import (
    ParameterError,
    Poly,
    RingParams,
    automorphism_pt,
    constant,
    get_context,
    inf_norm,
    monomial,
    monomial_shift,
    negacyclic_mul,
    negacyclic_mul_schoolbook,
    poly_add,
    poly_from_list,
    poly_neg,
    poly_sub,
    zero,
)

from conftest import BENCH_Q, random_poly


def test_params_validation():
    with pytest.raises(ParameterError):
        RingParams(6, 97)
    with pytest.raises(ParameterError):
        RingParams(8, 91)  # 7 * 13
    with pytest.raises(ParameterError):
        RingParams(8, 16)
    assert RingParams(8, 97).ntt_ready
    assert not RingParams(8, 23).ntt_ready  # 23 != 1 (mod 16)


def test_paper_modulus_ntt_eligibility():
    # q - 1 is divisible by 2^12 but not 2^13: N = 2^11 runs the fast
    # path, N = 2^12 must fall back.
    assert RingParams(2**11, BENCH_Q).ntt_ready
    assert not RingParams(2**12, BENCH_Q).ntt_ready


def test_add_identity_and_centering():
    p = RingParams(8, 17)
    a = poly_from_list(p, [3, -5, 0, 2, 1, 0, 0, 7])
    assert poly_add(a, zero(p)) == a
    eight = constant(p, 8)
    s = poly_add(eight, eight)
    assert s.coeffs[0] == -1  # 16 = -1 (mod 17), centered


def test_add_round_trip_random(rng):
    p = RingParams(16, 97)
    for _ in range(50):
        a, b = random_poly(p, rng), random_poly(p, rng)
        assert poly_add(poly_add(a, b), poly_neg(b)) == a


def test_mul_identity(rng):
    p = RingParams(16, 97)
    a = random_poly(p, rng)
    assert negacyclic_mul(a, constant(p, 1)) == a


def test_x_half_squared_is_minus_one():
    p = RingParams(8, 97)
    x4 = monomial(p, 4)
    prod = negacyclic_mul(x4, x4)
    assert prod == constant(p, -1)


def test_mul_matches_schoolbook_small(rng):
    p = RingParams(8, 17)
    assert p.ntt_ready
    for _ in range(200):
        a, b = random_poly(p, rng), random_poly(p, rng)
        assert negacyclic_mul(a, b) == negacyclic_mul_schoolbook(a, b)


@pytest.mark.parametrize("N,q", [(4, 97), (8, 97), (16, 97), (32, 193), (16, BENCH_Q)])
def test_ntt_equals_schoolbook(N, q, rng):
    p = RingParams(N, q)
    assert p.ntt_ready
    for _ in range(100):
        a, b = random_poly(p, rng), random_poly(p, rng)
        assert negacyclic_mul(a, b) == negacyclic_mul_schoolbook(a, b)


def test_fallback_paths_match_schoolbook(rng):
    # 97 = 1 (mod 32) but not (mod 64): N = 32 is the last NTT size.
    small = RingParams(32, 23)  # schoolbook fallback
    big = RingParams(128, 97)  # Kronecker fallback
    assert not small.ntt_ready and not big.ntt_ready
    before = get_context(big).fallback_count
    for _ in range(10):
        a, b = random_poly(small, rng), random_poly(small, rng)
        assert negacyclic_mul(a, b) == negacyclic_mul_schoolbook(a, b)
        a, b = random_poly(big, rng), random_poly(big, rng)
        assert negacyclic_mul(a, b) == negacyclic_mul_schoolbook(a, b)
    assert get_context(big).fallback_count == before + 10


def test_ring_axioms(rng):
    for N in (4, 8, 16, 32):
        p = RingParams(N, 193 if N == 32 else 97)
        for _ in range(25):
            a, b, c = (random_poly(p, rng) for _ in range(3))
            assert negacyclic_mul(negacyclic_mul(a, b), c) == negacyclic_mul(
                a, negacyclic_mul(b, c)
            )
            assert negacyclic_mul(a, poly_add(b, c)) == poly_add(
                negacyclic_mul(a, b), negacyclic_mul(a, c)
            )


def test_monomial_shift_basics():
    p = RingParams(8, 97)
    one = constant(p, 1)
    assert monomial_shift(one, 0) == one
    shifted = monomial_shift(one, -1)
    want = np.zeros(8, dtype=np.int64)
    want[7] = -1  # X^(-1) = -X^(N-1)
    assert np.array_equal(shifted.coeffs, want)


def test_monomial_shift_inverse(rng):
    p = RingParams(16, 97)
    for e in range(-20, 20):
        a = random_poly(p, rng)
        assert monomial_shift(monomial_shift(a, e), -e) == a


def test_monomial_shift_equals_mul(rng):
    p = RingParams(16, 97)
    a = random_poly(p, rng)
    for e in range(p.N):
        assert monomial_shift(a, e) == negacyclic_mul(a, monomial(p, e))


def test_automorphism_identity_and_example(rng):
    p = RingParams(16, 97)
    a = random_poly(p, rng)
    assert automorphism_pt(a, 1) == a
    p4 = RingParams(4, 17)
    x = monomial(p4, 1)
    assert automorphism_pt(x, 5) == poly_neg(x)  # X^5 = -X mod X^4+1


def test_automorphism_composition(rng):
    p = RingParams(16, 97)
    for theta1, theta2 in [(3, 5), (5, 9), (7, 31), (3, 3)]:
        a = random_poly(p, rng)
        lhs = automorphism_pt(automorphism_pt(a, theta2), theta1)
        assert lhs == automorphism_pt(a, (theta1 * theta2) % (2 * p.N))


def test_automorphism_is_ring_homomorphism(rng):
    p = RingParams(16, 97)
    for theta in (3, 5, 15, 31):
        a, b = random_poly(p, rng), random_poly(p, rng)
        assert automorphism_pt(poly_add(a, b), theta) == poly_add(
            automorphism_pt(a, theta), automorphism_pt(b, theta)
        )
        assert automorphism_pt(negacyclic_mul(a, b), theta) == negacyclic_mul(
            automorphism_pt(a, theta), automorphism_pt(b, theta)
        )


def test_automorphism_rejects_even():
    p = RingParams(8, 97)
    with pytest.raises(ParameterError):
        automorphism_pt(constant(p, 1), 2)


def test_inf_norm():
    p = RingParams(8, 17)
    assert inf_norm(zero(p)) == 0
    assert inf_norm(poly_from_list(p, [3, -5])) == 5
    assert inf_norm(poly_from_list(p, [16])) == 1  # 16 = -1 centered


def test_coefficients_stay_centered(rng):
    p = RingParams(16, 97)
    for _ in range(20):
        a, b = random_poly(p, rng), random_poly(p, rng)
        for res in (poly_add(a, b), poly_sub(a, b), negacyclic_mul(a, b)):
            assert res.coeffs.min() >= -(p.q // 2)
            assert res.coeffs.max() <= p.q // 2


def test_mismatched_params_rejected(rng):
    a = random_poly(RingParams(8, 97), rng)
    b = random_poly(RingParams(8, 17), rng)
    with pytest.raises(ParameterError):
        poly_add(a, b)
    with pytest.raises(ParameterError):
        negacyclic_mul(a, b)


@settings(deadline=None, max_examples=30)
@given(st.lists(st.integers(-48, 48), min_size=8, max_size=8), st.integers(-33, 33))
def test_shift_round_trip_property(coeffs, e):
    p = RingParams(8, 97)
    a = poly_from_list(p, coeffs)
    assert monomial_shift(monomial_shift(a, e), -e) == a
