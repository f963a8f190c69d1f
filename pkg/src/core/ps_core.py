"""
Exact Piatetski-Shapiro arithmetic

Floor powers, membership in N^c = {floor(n^c)}, the sequences themselves,
prime sieving and the Piatetski-Shapiro primes with their weights
c * p^(1 - 1/c) and log p. Every membership decision is made with integer
arithmetic; floating point only ever supplies a first guess or a weight.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np
from sympy import integer_nthroot

from .errors import OutOfRange, ZeroDenominator
from ..utils.logging_config import get_logger

logger = get_logger('ps_core')

DEFAULT_SEGMENT_SIZE = 1 << 20


@dataclass(frozen=True)
class RationalExponent:
    """Exponent c = num/den in lowest terms with 1 < c < 2"""

    num: int
    den: int

    def __post_init__(self):
        if self.den == 0:
            raise ZeroDenominator("exponent denominator is zero")
        if math.gcd(self.num, self.den) != 1:
            raise OutOfRange(f"{self.num}/{self.den} is not reduced; use make_exponent")
        if not (self.den < self.num < 2 * self.den):
            raise OutOfRange(f"c = {self.num}/{self.den} is outside (1, 2)")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def value(self) -> float:
        return self.num / self.den

    @property
    def weight_power(self) -> float:
        """1 - 1/c"""
        return (self.num - self.den) / self.num

    def __str__(self):
        return f"{self.num}/{self.den}"

    @classmethod
    def parse(cls, text: str) -> "RationalExponent":
        """Parse "num/den"; decimals are rejected"""
        parts = text.strip().split('/')
        if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
            raise OutOfRange(f"exponent must be written as num/den, got {text!r}")
        return make_exponent(int(parts[0]), int(parts[1]))


@dataclass(frozen=True)
class PsPrime:
    p: int
    weight: float  # c * p^(1 - 1/c)
    logp: float
    preimage: int  # the n with floor(n^c) = p


@dataclass
class PsPrimeTable:
    """Column-oriented PS primes; the form the weight builders consume"""

    c: RationalExponent
    limit: int
    primes: np.ndarray
    preimages: np.ndarray
    weights: np.ndarray
    logs: np.ndarray

    def __len__(self):
        return int(self.primes.size)

    def to_list(self) -> List[PsPrime]:
        return [PsPrime(int(p), float(w), float(lg), int(k))
                for p, w, lg, k in zip(self.primes, self.weights, self.logs, self.preimages)]


def make_exponent(num: int, den: int) -> RationalExponent:
    if den == 0:
        raise ZeroDenominator("exponent denominator is zero")
    if num < 1 or den < 1:
        raise OutOfRange(f"num and den must be positive, got {num}/{den}")
    g = math.gcd(num, den)
    return RationalExponent(num // g, den // g)


def _ceil_root(x: int, k: int) -> int:
    """Smallest r with r**k >= x"""
    root, exact = integer_nthroot(x, k)
    return int(root) if exact else int(root) + 1


def floor_pow(n: int, c: RationalExponent) -> int:
    """floor(n^c), the integer den-th root of n^num"""
    if n < 1:
        raise OutOfRange(f"n must be positive, got {n}")
    return int(integer_nthroot(n ** c.num, c.den)[0])


def is_ps_member(m: int, c: RationalExponent) -> bool:
    if m < 1:
        raise OutOfRange(f"m must be positive, got {m}")
    k = _ceil_root(m ** c.den, c.num)
    return floor_pow(k, c) == m


def ps_preimage(m: int, c: RationalExponent) -> Optional[int]:
    """The n with floor(n^c) = m, or None when m is not in N^c"""
    k = _ceil_root(m ** c.den, c.num)
    return k if floor_pow(k, c) == m else None


def ps_count(limit: int, c: RationalExponent) -> int:
    """|N^c ∩ [1, limit]|: the largest n with n^num < (limit + 1)^den"""
    if limit < 1:
        return 0
    root, exact = integer_nthroot((limit + 1) ** c.den, c.num)
    return int(root) - 1 if exact else int(root)


def _floor_pows(ns: np.ndarray, c: RationalExponent) -> np.ndarray:
    """floor(n^c) for an array of n; float guess, then exact integer correction"""
    guesses = np.floor(ns.astype(np.float64) ** c.value).astype(np.int64)
    out = np.empty_like(guesses)
    num, den = c.num, c.den
    for i, (n, k) in enumerate(zip(ns.tolist(), guesses.tolist())):
        target = n ** num
        while k ** den > target:
            k -= 1
        while (k + 1) ** den <= target:
            k += 1
        out[i] = k
    return out


def ps_sequence_array(limit: int, c: RationalExponent) -> np.ndarray:
    """N^c ∩ [1, limit] as an int64 array"""
    count = ps_count(limit, c)
    if count == 0:
        return np.empty(0, dtype=np.int64)
    return _floor_pows(np.arange(1, count + 1, dtype=np.int64), c)


def ps_sequence(limit: int, c: RationalExponent) -> List[int]:
    if limit < 1:
        raise OutOfRange(f"limit must be positive, got {limit}")
    return ps_sequence_array(limit, c).tolist()


def ps_membership_mask(limit: int, c: RationalExponent, cache=None) -> np.ndarray:
    """Boolean mask over [0, limit] of N^c"""
    if cache is not None:
        mask = cache.load_membership(limit, c.num, c.den)
        if mask is not None:
            return mask

    mask = np.zeros(limit + 1, dtype=bool)
    mask[ps_sequence_array(limit, c)] = True

    if cache is not None:
        cache.store_membership(limit, c.num, c.den, mask)
    return mask


def _base_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime)


def _sieve_segment(low: int, high: int, base: np.ndarray) -> np.ndarray:
    """Primality of [low, high) given every prime up to sqrt(high)"""
    segment = np.ones(high - low, dtype=bool)
    for p in base.tolist():
        p2 = p * p
        if p2 >= high:
            break
        start = max(p2, ((low + p - 1) // p) * p)
        segment[start - low::p] = False
    if low <= 1:
        segment[:2 - low] = False
    return segment


def sieve_bitset(limit: int, segment_size: Optional[int] = None, threads: int = 1, cache=None) -> np.ndarray:
    """Boolean primality mask over [0, limit] from a segmented sieve"""
    if limit < 2:
        raise OutOfRange(f"limit must be at least 2, got {limit}")

    if cache is not None:
        mask = cache.load_primes(limit)
        if mask is not None:
            return mask

    segment_size = segment_size or DEFAULT_SEGMENT_SIZE
    if segment_size < 1:
        raise OutOfRange(f"segment size must be positive, got {segment_size}")

    base = _base_sieve(math.isqrt(limit))
    bounds = [(low, min(low + segment_size, limit + 1)) for low in range(0, limit + 1, segment_size)]

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            segments = list(pool.map(lambda b: _sieve_segment(b[0], b[1], base), bounds))
    else:
        segments = [_sieve_segment(low, high, base) for low, high in bounds]

    mask = np.concatenate(segments)
    logger.debug(f"Sieved [0, {limit}] in {len(bounds)} segments")

    if cache is not None:
        cache.store_primes(limit, mask)
    return mask


def sieve_primes(limit: int, segment_size: Optional[int] = None, threads: int = 1, cache=None) -> np.ndarray:
    return np.flatnonzero(sieve_bitset(limit, segment_size, threads, cache)).astype(np.int64)


def ps_prime_table(limit: int, c: RationalExponent, segment_size: Optional[int] = None,
                   threads: int = 1, cache=None) -> PsPrimeTable:
    if limit < 2:
        empty_int = np.empty(0, dtype=np.int64)
        empty_float = np.empty(0, dtype=np.float64)
        return PsPrimeTable(c, limit, empty_int, empty_int, empty_float, empty_float)

    members = ps_membership_mask(limit, c, cache)
    prime_mask = sieve_bitset(limit, segment_size, threads, cache)

    # N^c is strictly increasing from floor(1^c) = 1, so the rank of m is its preimage
    ranks = np.cumsum(members, dtype=np.int64)
    primes = np.flatnonzero(members & prime_mask).astype(np.int64)
    as_float = primes.astype(np.float64)
    table = PsPrimeTable(
        c=c,
        limit=limit,
        primes=primes,
        preimages=ranks[primes],
        weights=c.value * np.power(as_float, c.weight_power),
        logs=np.log(as_float),
    )
    logger.debug(f"{len(table)} PS primes for c={c} up to {limit}")
    return table


def ps_primes(limit: int, c: RationalExponent, **kwargs) -> List[PsPrime]:
    return ps_prime_table(limit, c, **kwargs).to_list()


def ps_density_ratio(limit: int, c: RationalExponent) -> float:
    """sum over m in N^c ∩ [1, limit] of c * m^(1 - 1/c), divided by limit"""
    members = ps_sequence_array(limit, c).astype(np.float64)
    return float(np.sum(c.value * np.power(members, c.weight_power)) / limit)


# Exponent ranges in which the corresponding statements are known to hold
EXPONENT_REGIMES = {
    'ps_primes_infinite': Fraction(11, 10),
    'ps_primes_infinite_best': Fraction(243, 205),
    'weak_bf_condition': Fraction(9, 8),
    'power_saving_bf': Fraction(73, 64),
    'ternary_goldbach': Fraction(6, 5),
}


def exponent_regime(c: RationalExponent) -> dict:
    return {name: c.fraction < bound for name, bound in EXPONENT_REGIMES.items()}
