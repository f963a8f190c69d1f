"""
Ternary representations n = p1 + p2 + p3 with p_i a prime in N^{c_i}

Counting, witness search, range verification by one FFT convolution, the
transference hypothesis checker and the weighted positivity target.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy import fft as sp_fft
from sympy import isprime

from .errors import DominationViolated, LengthMismatch, OutOfRange, PrecisionLoss, RunCancelled
from .ps_core import RationalExponent, exponent_regime, is_ps_member, make_exponent, ps_prime_table
from .spectral import default_grid_size, dft_grid, lq_moment, sup_discrepancy
from .weights import (Progression, WeightedSequence, ap_mean, context_for_modulus, indicator_seq,
                      nu_seq, primorial_w, ps_indicator_seq, residue_select)
from ..utils.logging_config import get_logger

logger = get_logger('goldbach')

DEFAULT_SEED = 0x5053474C
# largest FFT distance from an integer still accepted as that integer
ROUNDING_TOLERANCE = 0.25


@dataclass(frozen=True)
class GoldbachConfig:
    c1: RationalExponent
    c2: RationalExponent
    c3: RationalExponent
    X: int
    W: int = 2
    use_fft: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.X < 1:
            raise OutOfRange(f"X must be positive, got {self.X}")
        if not _is_primorial(self.W):
            raise OutOfRange(f"W = {self.W} is not a primorial")

    @property
    def exponents(self) -> Tuple[RationalExponent, RationalExponent, RationalExponent]:
        return self.c1, self.c2, self.c3

    @classmethod
    def uniform(cls, c: RationalExponent, X: int, **kwargs) -> "GoldbachConfig":
        return cls(c, c, c, X, **kwargs)


def _is_primorial(W: int) -> bool:
    threshold = 1
    while True:
        value = primorial_w(threshold)
        if value >= W:
            return value == W
        threshold += 1


def default_config(X: int) -> GoldbachConfig:
    c = make_exponent(11, 10)
    return GoldbachConfig.uniform(c, X, W=2)


@dataclass
class RepresentationReport:
    n: int
    witness: Optional[Tuple[int, int, int]]
    ordered_count: int
    weighted_value: float

    def to_record(self) -> dict:
        return {"n": self.n, "count": self.ordered_count,
                "witness": list(self.witness) if self.witness else None}


@dataclass
class TransferenceReport:
    eta: float
    epsilon: float
    q_exponent: float
    K: float
    cond_i_pass: bool
    worst_ap_mean: float
    cond_ii_value: float
    cond_ii_pass: bool
    cond_iii_ratio: float
    cond_iii_pass: bool
    aps_tested: int = 0
    worst_by_step: Dict[int, float] = field(default_factory=dict)

    def failing_steps(self) -> List[int]:
        """AP steps whose worst sampled mean is below 1/3 + epsilon"""
        return sorted(q for q, worst in self.worst_by_step.items() if worst < 1.0 / 3.0 + self.epsilon)

    @property
    def passed(self) -> bool:
        return self.cond_i_pass and self.cond_ii_pass and self.cond_iii_pass

    def to_record(self) -> dict:
        return {"eta": self.eta, "epsilon": self.epsilon, "q": self.q_exponent, "K": self.K,
                "cond_i_pass": self.cond_i_pass, "worst_ap_mean": self.worst_ap_mean,
                "cond_ii_value": self.cond_ii_value, "cond_ii_pass": self.cond_ii_pass,
                "cond_iii_ratio": self.cond_iii_ratio, "cond_iii_pass": self.cond_iii_pass,
                "aps_tested": self.aps_tested, "passed": self.passed,
                "worst_by_step": {str(q): w for q, w in sorted(self.worst_by_step.items())}}


@dataclass
class VerificationSummary:
    lo: int
    hi: int
    exponents: Tuple[str, str, str]
    X: int
    checked: int
    exceptions: List[int]
    exception_floor: int
    runtime_ms: float
    validated_upto: int
    spot_checks: int
    proven_range: bool

    @property
    def largest_exception(self) -> Optional[int]:
        return max(self.exceptions) if self.exceptions else None

    @property
    def exceptions_above_floor(self) -> List[int]:
        return [n for n in self.exceptions if n > self.exception_floor]

    @property
    def exit_code(self) -> int:
        return 2 if self.exceptions_above_floor else 0

    def to_record(self, include_runtime: bool = True) -> dict:
        record = {"range": [self.lo, self.hi], "c": list(self.exponents), "X": self.X,
                  "checked": self.checked, "exceptions": self.exceptions,
                  "largest_exception": self.largest_exception,
                  "exception_floor": self.exception_floor,
                  "exceptions_above_floor": len(self.exceptions_above_floor),
                  "validated_upto": self.validated_upto, "spot_checks": self.spot_checks,
                  "proven_range": self.proven_range}
        if include_runtime:
            record["runtime_ms"] = round(self.runtime_ms, 3)
        return record


@dataclass
class VerificationResult:
    """Per-n outcomes of verify_range held as columns; reports() yields them one by one"""

    ns: np.ndarray
    counts: np.ndarray
    weighted: np.ndarray
    witnesses: Optional[np.ndarray]
    summary: VerificationSummary

    def reports(self) -> Iterator[RepresentationReport]:
        for i, n in enumerate(self.ns.tolist()):
            witness = None
            if self.witnesses is not None and self.witnesses[i, 0] > 0:
                witness = tuple(int(p) for p in self.witnesses[i])
            yield RepresentationReport(n=n, witness=witness,
                                       ordered_count=int(self.counts[i]),
                                       weighted_value=float(self.weighted[i]))

    def count_for(self, n: int) -> int:
        idx = np.searchsorted(self.ns, n)
        if idx >= self.ns.size or self.ns[idx] != n:
            raise OutOfRange(f"{n} is not an odd integer of the verified range")
        return int(self.counts[idx])


def triple_convolution(f1: WeightedSequence, f2: WeightedSequence, f3: WeightedSequence,
                       use_fft: bool = True, workers: Optional[int] = None) -> np.ndarray:
    """out[n] = sum over x1 + x2 + x3 = n of f1(x1) f2(x2) f3(x3), for 0 <= n <= 3N

    Entries 0..2 are zero; the meaningful range is [3, 3N].
    """
    if not f1.n_max == f2.n_max == f3.n_max:
        raise LengthMismatch(f"sequence lengths differ: {f1.n_max}, {f2.n_max}, {f3.n_max}")
    N = f1.n_max
    a, b, c = f1.padded(), f2.padded(), f3.padded()
    length = 3 * N + 1

    if not use_fft:
        return np.convolve(np.convolve(a, b), c)

    size = sp_fft.next_fast_len(length, real=True)
    spectrum = (sp_fft.rfft(a, size, workers=workers)
                * sp_fft.rfft(b, size, workers=workers)
                * sp_fft.rfft(c, size, workers=workers))
    out = sp_fft.irfft(spectrum, size, workers=workers)[:length]
    # nonnegative inputs; negative entries are pure rounding noise
    return np.maximum(out, 0.0)


def _pair_convolution(a: np.ndarray, b: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    length = a.size + b.size - 1
    size = sp_fft.next_fast_len(length, real=True)
    out = sp_fft.irfft(sp_fft.rfft(a, size, workers=workers) * sp_fft.rfft(b, size, workers=workers),
                       size, workers=workers)[:length]
    return out


def _round_counts(values: np.ndarray, what: str) -> np.ndarray:
    rounded = np.rint(values)
    drift = float(np.max(np.abs(values - rounded))) if values.size else 0.0
    if drift >= ROUNDING_TOLERANCE:
        raise PrecisionLoss(f"{what}: FFT output is {drift:.3g} away from the integers")
    logger.debug(f"{what}: max rounding drift {drift:.3g}")
    return rounded.astype(np.int64)


class _PrimeSets:
    """PS prime masks and sorted arrays for the three exponents, up to a limit"""

    def __init__(self, cfg: GoldbachConfig, limit: int, W: int = 1,
                 residues: Optional[Tuple[int, int, int]] = None):
        self.limit = limit
        tables: Dict[RationalExponent, object] = {}
        self.tables = []
        self.masks = []
        self.arrays = []
        for i, c in enumerate(cfg.exponents):
            if c not in tables:
                tables[c] = ps_prime_table(limit, c)
            table = tables[c]
            primes = table.primes
            if residues is not None and W > 1:
                primes = primes[(primes + residues[i]) % W == 0]
            mask = np.zeros(limit + 1, dtype=bool)
            mask[primes] = True
            self.tables.append(table)
            self.masks.append(mask)
            self.arrays.append(primes)
        self.first_list = self.arrays[0].tolist()

    def count(self, n: int) -> int:
        S2 = self.arrays[1]
        ind3 = self.masks[2]
        total = 0
        for p1 in self.first_list:
            rest = n - p1
            if rest < 4:
                break
            p2s = S2[S2 <= rest - 2]
            p3s = rest - p2s
            p3s = p3s[p3s <= self.limit]
            total += int(np.count_nonzero(ind3[p3s]))
        return total

    def first_witness(self, n: int, pair_counts: Optional[np.ndarray] = None,
                      block: int = 256) -> Optional[Tuple[int, int, int]]:
        S2 = self.arrays[1]
        ind3 = self.masks[2]
        for p1 in self.first_list:
            rest = n - p1
            if rest < 4:
                break
            if pair_counts is not None and (rest >= pair_counts.size or pair_counts[rest] == 0):
                continue
            upper = int(np.searchsorted(S2, rest - 2, side='right'))
            for start in range(0, upper, block):
                p2s = S2[start:min(start + block, upper)]
                p3s = rest - p2s
                inside = p3s <= self.limit
                hits = np.flatnonzero(inside & ind3[np.minimum(p3s, self.limit)])
                if hits.size:
                    p2 = int(p2s[hits[0]])
                    return int(p1), p2, int(rest - p2)
        return None


def _check_n(n: int):
    if n < 6:
        raise OutOfRange(f"n must be at least 6, got {n}")
    if n % 2 == 0:
        raise OutOfRange(f"n must be odd, got {n}")


def count_representations(n: int, cfg: GoldbachConfig, W: int = 1,
                          residues: Optional[Tuple[int, int, int]] = None) -> int:
    """Ordered (p1, p2, p3) with p_i a prime in N^{c_i} summing to n

    With residues given, only p_i = -b_i (mod W) count.
    """
    _check_n(n)
    return _PrimeSets(cfg, n, W, residues).count(n)


def find_representation(n: int, cfg: GoldbachConfig) -> Optional[Tuple[int, int, int]]:
    """Lexicographically smallest witness, or None"""
    _check_n(n)
    return _PrimeSets(cfg, n).first_witness(n)


def verify_range(lo: int, hi: int, cfg: GoldbachConfig, with_witnesses: bool = True,
                 validate_limit: int = 10_000, spot_checks: int = 32, seed: int = DEFAULT_SEED,
                 exception_floor: int = 10_000,
                 progress: Optional[Callable[[int, int, str], None]] = None,
                 should_stop: Optional[Callable[[], bool]] = None) -> VerificationResult:
    """Every odd n in [lo, hi] from one shared triple convolution"""
    if lo > hi:
        raise OutOfRange(f"empty range [{lo}, {hi}]")
    if lo < 1:
        raise OutOfRange(f"lo must be positive, got {lo}")
    if hi > 3 * cfg.X:
        raise OutOfRange(f"hi = {hi} exceeds 3X = {3 * cfg.X}")

    started = time.perf_counter()
    notify = progress or (lambda current, total, status: None)
    workers = cfg.threads if cfg.threads > 1 else None

    first = lo if lo % 2 == 1 else lo + 1
    ns = np.arange(first, hi + 1, 2, dtype=np.int64)
    # every prime up to hi, so counts match count_representations even when X < hi
    limit = max(2, hi)

    notify(0, 4, "sieving")
    sets = _PrimeSets(cfg, limit)
    indicators = [ps_indicator_seq(limit, c, table) for c, table in zip(cfg.exponents, sets.tables)]

    notify(1, 4, "convolving")
    counts_all = _round_counts(triple_convolution(*indicators, use_fft=cfg.use_fft, workers=workers),
                               "triple convolution")
    weights = []
    for table, mask in zip(sets.tables, sets.masks):
        values = np.zeros(limit, dtype=np.float64)
        values[table.primes - 1] = table.weights * table.logs
        weights.append(WeightedSequence(limit, values))
    weighted_all = triple_convolution(*weights, use_fft=cfg.use_fft, workers=workers)

    def lookup(arr, idx):
        out = np.zeros(idx.size, dtype=arr.dtype)
        inside = idx < arr.size
        out[inside] = arr[idx[inside]]
        return out

    counts = lookup(counts_all, ns)
    weighted = np.where(counts > 0, lookup(weighted_all, ns), 0.0)

    notify(2, 4, "cross-checking")
    validated_upto = _validate_prefix(sets, counts_all, min(hi, validate_limit, limit))
    pair_counts = _round_counts(_pair_convolution(sets.masks[1].astype(np.float64),
                                                  sets.masks[2].astype(np.float64), workers),
                                "pair convolution")
    checked_spots = _spot_check(sets, counts_all, pair_counts, ns[ns > validated_upto], spot_checks, seed)

    witnesses = None
    if with_witnesses:
        notify(3, 4, "searching witnesses")
        witnesses = _collect_witnesses(sets, ns, counts, pair_counts, cfg.threads, should_stop)

    exceptions = ns[counts == 0].tolist()
    runtime_ms = (time.perf_counter() - started) * 1000.0
    summary = VerificationSummary(
        lo=lo, hi=hi, exponents=tuple(str(c) for c in cfg.exponents), X=cfg.X,
        checked=int(ns.size), exceptions=exceptions, exception_floor=exception_floor,
        runtime_ms=runtime_ms, validated_upto=validated_upto, spot_checks=checked_spots,
        proven_range=all(exponent_regime(c)['power_saving_bf'] for c in cfg.exponents),
    )
    if summary.exceptions_above_floor:
        logger.warning(f"{len(summary.exceptions_above_floor)} exceptions above {exception_floor}, "
                       f"largest {summary.largest_exception}")
    logger.info(f"Verified {ns.size} odd n in [{lo}, {hi}] in {runtime_ms:.0f} ms; "
                f"{len(exceptions)} exceptions")
    notify(4, 4, "done")
    return VerificationResult(ns=ns, counts=counts, weighted=weighted, witnesses=witnesses, summary=summary)


def _validate_prefix(sets: _PrimeSets, counts_all: np.ndarray, upto: int) -> int:
    """Exact integer convolution on [0, upto] against the FFT counts"""
    if upto < 3:
        return 0
    parts = [mask[:upto + 1].astype(np.int64) for mask in sets.masks]
    direct = np.convolve(np.convolve(parts[0], parts[1])[:upto + 1], parts[2])[:upto + 1]
    if not np.array_equal(direct, counts_all[:upto + 1]):
        bad = int(np.flatnonzero(direct != counts_all[:upto + 1])[0])
        raise PrecisionLoss(f"FFT count at n = {bad} is {counts_all[bad]}, direct count is {direct[bad]}")
    return upto


def _spot_check(sets: _PrimeSets, counts_all: np.ndarray, pair_counts: np.ndarray,
                candidates: np.ndarray, samples: int, seed: int) -> int:
    """Recount sampled n as sum over p1 of pair counts, in exact integer arithmetic"""
    if samples <= 0 or candidates.size == 0:
        return 0
    rng = np.random.default_rng(seed)
    picks = rng.choice(candidates, size=min(samples, candidates.size), replace=False)
    S1 = sets.arrays[0]
    for n in sorted(int(x) for x in picks):
        rests = n - S1[S1 < n]
        rests = rests[rests < pair_counts.size]
        exact = int(np.sum(pair_counts[rests], dtype=np.int64))
        if exact != int(counts_all[n]):
            raise PrecisionLoss(f"spot check failed at n = {n}: {counts_all[n]} vs {exact}")
    return int(picks.size)


def _collect_witnesses(sets: _PrimeSets, ns: np.ndarray, counts: np.ndarray, pair_counts: np.ndarray,
                       threads: int, should_stop: Optional[Callable[[], bool]]) -> np.ndarray:
    witnesses = np.zeros((ns.size, 3), dtype=np.int64)
    todo = np.flatnonzero(counts > 0)
    chunk = 4096

    def work(block):
        if should_stop is not None and should_stop():
            return block, None
        found = [sets.first_witness(int(ns[i]), pair_counts) for i in block]
        return block, found

    blocks = [todo[i:i + chunk] for i in range(0, todo.size, chunk)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(block) for block in blocks]

    for block, found in results:
        if found is None:
            raise RunCancelled("witness search stopped before completion")
        for i, witness in zip(block, found):
            if witness is None:
                raise PrecisionLoss(f"no witness found for n = {ns[i]} despite count {counts[i]}")
            witnesses[i] = witness
    return witnesses


def check_transference(f: WeightedSequence, nu: WeightedSequence, eta: float, epsilon: float,
                       q_exponent: float, K: float, ap_step_max: int = 8, ap_samples: int = 64,
                       seed: int = DEFAULT_SEED, M: Optional[int] = None) -> TransferenceReport:
    """Measure the three transference hypotheses for f <= nu over [N]"""
    if f.n_max != nu.n_max:
        raise LengthMismatch(f"f has {f.n_max} values, nu has {nu.n_max}")
    violations = np.flatnonzero(f.values > nu.values)
    if violations.size:
        i = int(violations[0])
        raise DominationViolated(i + 1, float(f.values[i]), float(nu.values[i]))
    if not 2 < q_exponent < 3:
        raise OutOfRange(f"q must lie in (2, 3), got {q_exponent}")
    if not 0 <= eta <= 1:
        raise OutOfRange(f"eta must lie in [0, 1], got {eta}")

    N = f.n_max
    rng = np.random.default_rng(seed)
    min_length = max(1, math.ceil(eta * N))
    worst_by_step: Dict[int, float] = {}
    tested = 0
    for q in range(1, ap_step_max + 1):
        max_length = (N - 1) // q + 1
        if min_length > max_length:
            continue
        step_worst = math.inf
        for _ in range(ap_samples):
            L = int(rng.integers(min_length, max_length + 1))
            r = int(rng.integers(1, N - (L - 1) * q + 1))
            step_worst = min(step_worst, ap_mean(f, Progression(r, q, L)))
            tested += 1
        if math.isfinite(step_worst):
            worst_by_step[q] = float(step_worst)
    worst = min(worst_by_step.values()) if worst_by_step else 0.0
    cond_i_pass = tested > 0 and worst >= 1.0 / 3.0 + epsilon

    M = M or default_grid_size(N)
    nu_grid = dft_grid(nu, M)
    cond_ii_value = sup_discrepancy(nu_grid, dft_grid(indicator_seq(N), M)) / N

    moment = lq_moment(dft_grid(f, M), q_exponent, N)
    cond_iii_ratio = moment.integral_estimate ** (1.0 / q_exponent) / N ** (1.0 - 1.0 / q_exponent)

    report = TransferenceReport(
        eta=eta, epsilon=epsilon, q_exponent=q_exponent, K=K,
        cond_i_pass=bool(cond_i_pass), worst_ap_mean=float(worst),
        cond_ii_value=float(cond_ii_value), cond_ii_pass=bool(cond_ii_value <= eta),
        cond_iii_ratio=float(cond_iii_ratio), cond_iii_pass=bool(cond_iii_ratio <= K),
        aps_tested=tested, worst_by_step=worst_by_step,
    )
    logger.info(f"Transference check over N = {N}: i={report.cond_i_pass} "
                f"ii={report.cond_ii_value:.4f} iii={report.cond_iii_ratio:.4f}")
    return report


class _NuTriple:
    """The three nu_{W,b_i}^{(c_i)} sequences for one residue choice"""

    def __init__(self, m: int, cfg: GoldbachConfig, tables: Optional[dict] = None):
        if m < 1 or m % 2 == 0:
            raise OutOfRange(f"m must be a positive odd integer, got {m}")
        if m > cfg.X:
            raise OutOfRange(f"m = {m} exceeds X = {cfg.X}")
        b1, b2, b3, n = residue_select(m, cfg.W, cfg.X)
        self.residues = (b1, b2, b3)
        self.n = n
        self.W = cfg.W
        tables = {} if tables is None else tables
        self.seqs = []
        for b, c in zip(self.residues, cfg.exponents):
            if c not in tables:
                tables[c] = ps_prime_table(cfg.X, c)
            ctx = context_for_modulus(cfg.X, cfg.W, b)
            self.seqs.append(nu_seq(ctx, c, tables[c]))
        self.N = self.seqs[0].n_max

    def value(self) -> float:
        """f1*f2*f3(n) as a sum of nonnegative terms, so an empty sum is exactly 0"""
        f1, f2, f3 = (s.padded() for s in self.seqs)
        supp1 = np.flatnonzero(f1)
        supp2 = np.flatnonzero(f2)
        total = 0.0
        for x1 in supp1.tolist():
            rest = self.n - x1
            if rest < 2:
                break
            x2 = supp2[supp2 <= rest - 1]
            x3 = rest - x2
            x2 = x2[x3 <= self.N]
            x3 = x3[x3 <= self.N]
            total += f1[x1] * float(np.dot(f2[x2], f3[x3]))
        return total

    def witness(self) -> Optional[Tuple[int, int, int]]:
        f1, f2, f3 = (s.padded() for s in self.seqs)
        supp2 = np.flatnonzero(f2)
        for x1 in np.flatnonzero(f1).tolist():
            rest = self.n - x1
            if rest < 2:
                break
            x2 = supp2[supp2 <= rest - 1]
            x3 = rest - x2
            ok = np.flatnonzero((x3 <= self.N) & (f3[np.minimum(x3, self.N)] > 0))
            if ok.size:
                return x1, int(x2[ok[0]]), int(x3[ok[0]])
        return None


def weighted_positivity(m: int, cfg: GoldbachConfig, tables: Optional[dict] = None) -> float:
    """f1*f2*f3(n) with f_i = nu_{W,b_i}^{(c_i)} and (b1, b2, b3, n) = residue_select(m, W)"""
    return _NuTriple(m, cfg, tables).value()


def weighted_witness(m: int, cfg: GoldbachConfig, tables: Optional[dict] = None) -> Optional[Tuple[int, int, int]]:
    """Primes p_i = W x_i - b_i recovered from a positive weighted convolution at n"""
    triple = _NuTriple(m, cfg, tables)
    xs = triple.witness()
    if xs is None:
        return None
    primes = tuple(cfg.W * x - b for x, b in zip(xs, triple.residues))
    assert sum(primes) == m, f"reconstruction {primes} does not sum to {m}"
    for p, c in zip(primes, cfg.exponents):
        assert isprime(p) and is_ps_member(p, c), f"{p} is not a prime in N^{c}"
    return primes
