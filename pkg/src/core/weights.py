"""
The W-trick weight systems over [1, N] with N = floor(X/W) + 1

lambda_{W,b}(n) = (phi(W)/W) log p            if Wn - b = p is prime, p <= X
nu_{W,b}(n)     = (phi(W)/W) c p^(1-1/c) log p if additionally p is in N^c
tau_{W,b}(n)    = c m^(1-1/c)                  if Wn - b = m is in N^c, m <= X

A prime p contributes at n = (p + b)/W, so p = Wn - b throughout.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Optional, Tuple

import numpy as np
from sympy import primerange, totient

from .errors import NoSolution, OutOfBounds, OutOfRange, WeightOverflow
from .ps_core import (RationalExponent, ps_prime_table, ps_sequence_array,
                      sieve_primes)
from ..utils.logging_config import get_logger

logger = get_logger('weights')

MACHINE_INT_MAX = 2 ** 63 - 1


class SequenceKind(Enum):
    LAMBDA = "lambda"
    NU = "nu"
    TAU = "tau"
    INDICATOR = "indicator"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WtrickContext:
    X: int
    w_threshold: int
    W: int
    b: int
    N: int

    def __post_init__(self):
        if self.X < 1:
            raise OutOfRange(f"X must be positive, got {self.X}")
        if self.W != primorial_w(self.w_threshold):
            raise OutOfRange(f"W = {self.W} is not the primorial of {self.w_threshold}")
        if self.W == 1:
            if self.b != 0:
                raise OutOfRange("b must be 0 when W = 1")
        elif not (1 <= self.b < self.W and math.gcd(self.b, self.W) == 1):
            raise OutOfRange(f"b = {self.b} is not a unit residue modulo W = {self.W}")
        if self.N != self.X // self.W + 1:
            raise OutOfRange(f"N must be floor(X/W) + 1 = {self.X // self.W + 1}, got {self.N}")

    @property
    def phi_ratio(self) -> float:
        """phi(W)/W"""
        return euler_phi(self.W) / self.W


def make_context(X: int, w_threshold: int, b: Optional[int] = None) -> WtrickContext:
    """Build a context; b defaults to 0 for W = 1 and to 1 otherwise"""
    W = primorial_w(w_threshold)
    if b is None:
        b = 0 if W == 1 else 1
    return WtrickContext(X=X, w_threshold=w_threshold, W=W, b=b, N=X // W + 1)


def context_for_modulus(X: int, W: int, b: int) -> WtrickContext:
    """Context from W itself; W must be a primorial"""
    threshold = 1
    for p in primerange(2, W + 1):
        if primorial_w(p) == W:
            threshold = p
            break
        if primorial_w(p) > W:
            break
    return WtrickContext(X=X, w_threshold=threshold, W=W, b=b, N=X // W + 1)


@dataclass
class WeightedSequence:
    """Nonnegative finite values f(1..n_max); values[i] holds f(i + 1)"""

    n_max: int
    values: np.ndarray
    kind: SequenceKind = SequenceKind.CUSTOM
    label: str = field(default="", compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.n_max < 1:
            raise OutOfRange(f"n_max must be positive, got {self.n_max}")
        if self.values.shape != (self.n_max,):
            raise OutOfRange(f"expected {self.n_max} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise OutOfRange("sequence values must be finite")
        if np.any(self.values < 0):
            raise OutOfRange("sequence values must be nonnegative")

    def __call__(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise OutOfBounds(f"n = {n} outside [1, {self.n_max}]")
        return float(self.values[n - 1])

    def support(self) -> np.ndarray:
        """The n (1-based) where f is nonzero"""
        return np.flatnonzero(self.values) + 1

    def total(self) -> float:
        return float(np.sum(self.values))

    def padded(self) -> np.ndarray:
        """Values indexed directly by n, with a zero at index 0"""
        return np.concatenate(([0.0], self.values))


@dataclass(frozen=True)
class Progression:
    """{r, r + q, ..., r + (L - 1) q}"""

    r: int
    q: int
    L: int

    def __post_init__(self):
        if self.r < 1 or self.q < 1 or self.L < 1:
            raise OutOfRange(f"progression needs positive r, q, L, got {self}")

    @property
    def last(self) -> int:
        return self.r + (self.L - 1) * self.q


def primorial_w(w_threshold: int) -> int:
    """Product of the primes <= w_threshold"""
    W = 1
    for p in primerange(2, w_threshold + 1):
        W *= int(p)
        if W > MACHINE_INT_MAX:
            raise WeightOverflow(f"primorial of {w_threshold} exceeds 2^63")
    return W


def euler_phi(W: int) -> int:
    return int(totient(W))


def coprime_residues(W: int) -> list:
    if W == 1:
        return [0]
    return [b for b in range(1, W) if math.gcd(b, W) == 1]


def _scatter(ctx: WtrickContext, points: np.ndarray, weights: np.ndarray, kind: SequenceKind, label: str):
    """Place weights of integers m = Wn - b (m in points) at n = (m + b)/W"""
    keep = (points <= ctx.X) & (points >= 1) & ((points + ctx.b) % ctx.W == 0)
    ns = (points[keep] + ctx.b) // ctx.W
    values = np.zeros(ctx.N, dtype=np.float64)
    values[ns - 1] = weights[keep]
    return WeightedSequence(ctx.N, values, kind, label)


def lambda_seq(ctx: WtrickContext, primes: Optional[np.ndarray] = None) -> WeightedSequence:
    if primes is None:
        primes = sieve_primes(ctx.X) if ctx.X >= 2 else np.empty(0, dtype=np.int64)
    weights = ctx.phi_ratio * np.log(primes.astype(np.float64))
    return _scatter(ctx, primes, weights, SequenceKind.LAMBDA, f"lambda_{ctx.W},{ctx.b}")


def nu_seq(ctx: WtrickContext, c: RationalExponent, table=None) -> WeightedSequence:
    if table is None:
        table = ps_prime_table(ctx.X, c)
    weights = ctx.phi_ratio * table.weights * table.logs
    return _scatter(ctx, table.primes, weights, SequenceKind.NU, f"nu_{ctx.W},{ctx.b}^({c})")


def tau_seq(ctx: WtrickContext, c: RationalExponent) -> WeightedSequence:
    members = ps_sequence_array(ctx.X, c)
    weights = c.value * np.power(members.astype(np.float64), c.weight_power)
    return _scatter(ctx, members, weights, SequenceKind.TAU, f"tau_{ctx.W},{ctx.b}^({c})")


def indicator_seq(N: int) -> WeightedSequence:
    if N < 1:
        raise OutOfRange(f"N must be positive, got {N}")
    return WeightedSequence(N, np.ones(N), SequenceKind.INDICATOR, f"1_[{N}]")


def ps_indicator_seq(X: int, c: RationalExponent, table=None) -> WeightedSequence:
    """1 at every PS prime p <= X, over [1, X]; the counting input of verification"""
    if table is None:
        table = ps_prime_table(X, c)
    values = np.zeros(X, dtype=np.float64)
    values[table.primes - 1] = 1.0
    return WeightedSequence(X, values, SequenceKind.INDICATOR, f"PS primes ({c}) <= {X}")


def _check_progression(f: WeightedSequence, P: Progression):
    if P.last > f.n_max:
        raise OutOfBounds(f"progression ends at {P.last} > n_max = {f.n_max}")


def ap_mean(f: WeightedSequence, P: Progression) -> float:
    _check_progression(f, P)
    return float(np.mean(f.values[P.r - 1:P.last:P.q]))


def ap_twist_sum(f: WeightedSequence, P: Progression) -> complex:
    """sum over P of f, written through additive characters modulo q

    (1/q) sum_k e(-rk/q) sum_{r <= n <= last} f(n) e(nk/q). Equal to the plain
    AP sum; kept to exercise the character expansion used on nu.
    """
    _check_progression(f, P)
    ns = np.arange(P.r, P.last + 1)
    window = f.values[P.r - 1:P.last]
    ks = np.arange(1, P.q + 1)
    phases = np.exp(2j * np.pi * np.outer(ks, ns - P.r) / P.q)
    return complex(np.sum(phases @ window) / P.q)


def rescale_to_tau(f: WeightedSequence, ctx: WtrickContext) -> WeightedSequence:
    """f* = (W/phi(W)) f / (2 log N)"""
    if ctx.N < 2:
        raise OutOfRange("rescaling needs N >= 2")
    scale = 1.0 / (ctx.phi_ratio * 2.0 * math.log(ctx.N))
    return WeightedSequence(f.n_max, f.values * scale, SequenceKind.CUSTOM, f"{f.label}*")


def dominated_by(f: WeightedSequence, g: WeightedSequence, rtol: float = 1e-12) -> bool:
    if f.n_max != g.n_max:
        return False
    return bool(np.all(f.values <= g.values * (1.0 + rtol)))


def residue_select(m: int, W: int, X: Optional[int] = None) -> Tuple[int, int, int, int]:
    """Unit residues b1, b2, b3 with m = -(b1 + b2 + b3) mod W, and n = (m + b1 + b2 + b3)/W

    Triples are tried in lexicographic order. With X given and m in [X/2, X],
    n must land in [floor(N/2), N + 2].
    """
    if m < 1 or m % 2 == 0:
        raise OutOfRange(f"m must be a positive odd integer, got {m}")
    if W < 1:
        raise OutOfRange(f"W must be positive, got {W}")

    if W == 1:
        choice = (0, 0, 0)
    else:
        residues = coprime_residues(W)
        choice = next((t for t in product(residues, repeat=3) if (m + sum(t)) % W == 0), None)
        if choice is None:
            raise NoSolution(f"no unit residues b1, b2, b3 with {m} = -(b1+b2+b3) mod {W}")

    n = (m + sum(choice)) // W
    assert W * n - sum(choice) == m
    if n < 1:
        raise NoSolution(f"residue choice {choice} gives non-positive n for m = {m}")

    if X is not None and X / 2 <= m <= X:
        N = X // W + 1
        if not N // 2 <= n <= N + 2:
            raise OutOfBounds(f"n = {n} outside [{N // 2}, {N + 2}] for m = {m}, X = {X}")
        if n > N:
            logger.debug(f"n = {n} exceeds N = {N} by the residue slack for m = {m}")

    return choice[0], choice[1], choice[2], n
