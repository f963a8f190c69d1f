import mpmath
import numpy as np
import pytest
from hypothesis import given, example
import hypothesis.strategies as st
from sympy import integer_nthroot, primerange

from src.core.errors import OutOfRange, ZeroDenominator
from src.core.ps_core import (RationalExponent, exponent_regime, floor_pow, is_ps_member, make_exponent,
                              ps_count, ps_density_ratio, ps_membership_mask, ps_preimage, ps_prime_table,
                              ps_primes, ps_sequence, sieve_bitset, sieve_primes)

EXPONENTS = [(11, 10), (21, 20), (3, 2), (6, 5), (73, 64)]

exponents = st.sampled_from(EXPONENTS).map(lambda nd: make_exponent(*nd))


def test_make_exponent_reduces():
    assert make_exponent(22, 20) == RationalExponent(11, 10)
    assert str(make_exponent(3, 2)) == "3/2"


@pytest.mark.parametrize("num, den", [(2, 1), (1, 1), (3, 3), (5, 2), (1, 2)])
def test_make_exponent_rejects_outside_unit_interval(num, den):
    with pytest.raises(OutOfRange):
        make_exponent(num, den)


def test_make_exponent_zero_denominator():
    with pytest.raises(ZeroDenominator):
        make_exponent(1, 0)


def test_parse_rejects_decimals():
    assert RationalExponent.parse("11/10") == make_exponent(11, 10)
    with pytest.raises(OutOfRange):
        RationalExponent.parse("1.1")
    with pytest.raises(OutOfRange):
        RationalExponent.parse("2/1")


def test_floor_pow_examples(c_11_10, c_3_2):
    assert floor_pow(2, c_3_2) == 2
    assert floor_pow(4, c_3_2) == 8
    assert floor_pow(10, c_11_10) == 12
    assert floor_pow(1, c_11_10) == 1
    with pytest.raises(OutOfRange):
        floor_pow(0, c_11_10)


@given(st.integers(min_value=1, max_value=10 ** 6), exponents)
@example(10 ** 6, make_exponent(11, 10))
def test_floor_pow_brackets_the_power(n, c):
    k = floor_pow(n, c)
    assert k ** c.den <= n ** c.num < (k + 1) ** c.den


@given(st.integers(min_value=1, max_value=10 ** 30), exponents)
def test_floor_pow_exact_for_huge_n(n, c):
    k = floor_pow(n, c)
    assert k ** c.den <= n ** c.num < (k + 1) ** c.den


def test_ps_sequence_example(c_11_10):
    assert ps_sequence(12, c_11_10) == [1, 2, 3, 4, 5, 7, 8, 9, 11, 12]
    with pytest.raises(OutOfRange):
        ps_sequence(0, c_11_10)


def test_membership_matches_sequence(c_11_10):
    members = set(ps_sequence(500, c_11_10))
    for m in range(1, 501):
        assert is_ps_member(m, c_11_10) == (m in members)
    assert not is_ps_member(6, c_11_10)
    assert not is_ps_member(10, c_11_10)


@given(st.integers(min_value=1, max_value=10 ** 5), exponents)
def test_preimage_round_trip(n, c):
    m = floor_pow(n, c)
    assert is_ps_member(m, c)
    assert ps_preimage(m, c) == n


@given(st.integers(min_value=1, max_value=5000), exponents)
def test_ps_count_is_sequence_length(limit, c):
    assert ps_count(limit, c) == len(ps_sequence(limit, c))


def test_membership_mask(c_3_2):
    mask = ps_membership_mask(30, c_3_2)
    assert np.flatnonzero(mask).tolist() == ps_sequence(30, c_3_2)


def test_sieve_matches_sympy():
    assert sieve_primes(1000).tolist() == list(primerange(2, 1001))


def test_segmented_threaded_sieve_agrees():
    plain = sieve_primes(100_000)
    segmented = sieve_primes(100_000, segment_size=4096, threads=4)
    assert np.array_equal(plain, segmented)


def test_sieve_limit_too_small():
    with pytest.raises(OutOfRange):
        sieve_primes(1)


def test_ps_primes_example(c_11_10):
    primes = ps_primes(12, c_11_10)
    assert [p.p for p in primes] == [2, 3, 5, 7, 11]
    assert [p.preimage for p in primes] == [2, 3, 5, 6, 9]
    mpmath.mp.dps = 30
    for prime in primes:
        weight = mpmath.mpf(11) / 10 * mpmath.power(prime.p, mpmath.mpf(1) / 11)
        assert prime.weight == pytest.approx(float(weight), rel=1e-12)
        assert prime.logp == pytest.approx(float(mpmath.log(prime.p)), rel=1e-12)


def test_ps_primes_are_prime_members(c_3_2):
    table = ps_prime_table(10_000, c_3_2)
    primes = set(primerange(2, 10_001))
    for p, k in zip(table.primes.tolist(), table.preimages.tolist()):
        assert p in primes
        assert floor_pow(k, c_3_2) == p


def test_ps_primes_small_limit(c_11_10):
    assert ps_primes(1, c_11_10) == []


def test_sieve_uses_cache(cache_store):
    first = sieve_bitset(5000, cache=cache_store)
    assert cache_store.prime_path(5000).exists()
    second = sieve_bitset(3000, cache=cache_store)
    assert np.array_equal(second, first[:3001])


def test_density_ratio_near_one(c_11_10):
    assert ps_density_ratio(10 ** 6, c_11_10) == pytest.approx(1.0, abs=0.01)


def test_exponent_regime(c_11_10, c_3_2):
    regime = exponent_regime(c_11_10)
    assert regime['ps_primes_infinite'] is False
    assert regime['power_saving_bf'] is True
    assert regime['ternary_goldbach'] is True
    assert not any(exponent_regime(c_3_2).values())


def _ceil_root(m, c):
    root, exact = integer_nthroot(m ** c.den, c.num)
    return root if exact else root + 1


@pytest.mark.parametrize("num, den", [(11, 10), (21, 20), (3, 2)])
def test_membership_by_ceil_roots(num, den):
    c = make_exponent(num, den)
    for m in range(1, 20_001):
        assert is_ps_member(m, c) == (_ceil_root(m + 1, c) - _ceil_root(m, c) == 1)


@pytest.mark.slow
@pytest.mark.parametrize("num, den", [(11, 10), (21, 20), (3, 2)])
def test_floor_pow_exhaustive_to_a_million(num, den):
    c = make_exponent(num, den)
    for n in range(1, 10 ** 6 + 1):
        k = floor_pow(n, c)
        assert k ** den <= n ** num < (k + 1) ** den


@pytest.mark.slow
def test_membership_by_ceil_roots_to_1e5(c_11_10):
    for m in range(1, 10 ** 5 + 1):
        assert is_ps_member(m, c_11_10) == (_ceil_root(m + 1, c_11_10) - _ceil_root(m, c_11_10) == 1)
