import numpy as np
import pytest

from rlwectl.ring import Poly, constant, inf_norm, poly_add, poly_sub, zero
from rlwectl.rlwe import (
    ErrorDist,
    ct_add,
    ct_neg,
    dec,
    dec_scaled,
    enc,
    enc_scaled,
    enc_traced,
    keygen,
    plain_mul,
    sample_error,
    zero_ct,
)

from conftest import random_poly


def test_error_bound_holds(params64, bench_dist):
    rng = np.random.default_rng(7)
    # 10^4 samples in aggregate; the hard bound is floor(19.2) = 19.
    for _ in range(160):
        e = sample_error(bench_dist, params64, rng)
        assert inf_norm(e) <= 19


def test_error_sampler_deterministic(params64, bench_dist):
    e1 = sample_error(bench_dist, params64, np.random.default_rng(99))
    e2 = sample_error(bench_dist, params64, np.random.default_rng(99))
    assert e1 == e2


def test_error_sampler_std(params64, bench_dist):
    rng = np.random.default_rng(5)
    samples = np.concatenate(
        [sample_error(bench_dist, params64, rng).coeffs for _ in range(1600)]
    )
    assert samples.size >= 10**5
    assert abs(samples.std() - 3.2) < 0.1


def test_error_sampler_granularity(params64, bench_dist):
    rng = np.random.default_rng(6)
    for g in (2, 4):
        e = sample_error(bench_dist, params64, rng, granularity=g)
        assert np.all(e.coeffs % g == 0)
        assert inf_norm(e) <= bench_dist.sigma


def test_dist_validation():
    with pytest.raises(Exception):
        ErrorDist(0.0, 19.2)


def test_enc_dec_error_bound(params64, bench_dist, sk64):
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = random_poly(params64, rng)
        err = poly_sub(dec(enc(m, sk64, rng), sk64), m)
        assert inf_norm(err) <= bench_dist.sigma


def test_enc_zero_decrypts_to_noise(params64, sk64):
    rng = np.random.default_rng(12)
    ct = enc(zero(params64), sk64, rng)
    assert inf_norm(dec(ct, sk64)) <= 19.2


def test_addition_error_is_sum_of_injected(params64, sk64):
    rng = np.random.default_rng(13)
    m1, m2 = random_poly(params64, rng), random_poly(params64, rng)
    c1, _, e1 = enc_traced(m1, sk64, rng)
    c2, _, e2 = enc_traced(m2, sk64, rng)
    got = dec(ct_add(c1, c2), sk64)
    want = poly_add(poly_add(m1, m2), poly_add(e1, e2))
    assert got == want
    assert inf_norm(poly_sub(got, poly_add(m1, m2))) <= 2 * 19.2


def test_oplus_combination_error_exact(params64, sk64):
    # Error of any homomorphic-sum of fresh ciphertexts equals the sum
    # of the injected error polynomials, exactly.
    rng = np.random.default_rng(14)
    msgs, cts, errs = [], [], []
    for _ in range(5):
        m = random_poly(params64, rng)
        ct, _, e = enc_traced(m, sk64, rng)
        msgs.append(m)
        cts.append(ct)
        errs.append(e)
    acc = cts[0]
    for c in cts[1:]:
        acc = ct_add(acc, c)
    total_m = msgs[0]
    total_e = errs[0]
    for m, e in zip(msgs[1:], errs[1:]):
        total_m = poly_add(total_m, m)
        total_e = poly_add(total_e, e)
    assert dec(acc, sk64) == poly_add(total_m, total_e)


def test_ct_add_identity_and_commutativity(params64, sk64):
    rng = np.random.default_rng(15)
    c = enc(random_poly(params64, rng), sk64, rng)
    ident = ct_add(c, zero_ct(params64))
    assert ident.b == c.b and ident.a == c.a
    c2 = enc(random_poly(params64, rng), sk64, rng)
    ab, ba = ct_add(c, c2), ct_add(c2, c)
    assert ab.b == ba.b and ab.a == ba.a


def test_ct_add_homomorphism(params64, sk64):
    rng = np.random.default_rng(16)
    c1 = enc(random_poly(params64, rng), sk64, rng)
    c2 = enc(random_poly(params64, rng), sk64, rng)
    assert dec(ct_add(c1, c2), sk64) == poly_add(dec(c1, sk64), dec(c2, sk64))


def test_plain_mul_properties(params64, sk64):
    rng = np.random.default_rng(17)
    q = params64.q
    c = enc(random_poly(params64, rng), sk64, rng)
    same = plain_mul(1, c)
    assert same.b == c.b and same.a == c.a
    # (q+1)/2 applied twice scales the plaintext by the inverse of four.
    half = (q + 1) // 2
    twice = plain_mul(half, plain_mul(half, c))
    inv4 = pow(4, q - 2, q)
    assert dec(twice, sk64) == dec(plain_mul(inv4, c), sk64)
    # General polynomial factor.
    k = random_poly(params64, rng)
    from rlwectl.ring import negacyclic_mul

    assert dec(plain_mul(k, c), sk64) == negacyclic_mul(k, dec(c, sk64))


def test_ct_neg(params64, sk64):
    rng = np.random.default_rng(18)
    m = random_poly(params64, rng)
    c = enc(m, sk64, rng)
    s = ct_add(c, ct_neg(c))
    assert inf_norm(dec(s, sk64)) == 0


def test_scaled_encode_roundtrip(params64, sk64):
    rng = np.random.default_rng(19)
    l_inv = 64  # 64 > 2 * 19.2
    m = Poly(params64, rng.integers(-1000, 1000, params64.N))
    assert dec_scaled(enc_scaled(m, l_inv, sk64, rng), l_inv, sk64) == m
    z = zero(params64)
    assert dec_scaled(enc_scaled(z, l_inv, sk64, rng), l_inv, sk64) == z


def test_scaled_encode_wraps_at_bound(params64, sk64):
    rng = np.random.default_rng(20)
    l_inv = 64
    # ||m|| >= L q / 2 wraps and recovery fails.
    big = (params64.q // 2) // l_inv + 1
    m = constant(params64, big)
    got = dec_scaled(enc_scaled(m, l_inv, sk64, rng), l_inv, sk64)
    assert got != m
