"""
Fourier side of the weight systems

Convention: e(x) = exp(2 pi i x) and f^(theta) = sum_n f(n) e(n theta).
Suprema and integrals over [0, 1) are taken on the grid theta_j = j/M.
All logarithms are natural.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import fft as sp_fft

from .errors import GridMismatch, GridTooSmall, OutOfRange
from .ps_core import RationalExponent, ps_sequence_array
from .weights import (WeightedSequence, WtrickContext, SequenceKind, indicator_seq,
                      lambda_seq, make_context, nu_seq)
from ..utils.logging_config import get_logger

logger = get_logger('spectral')

TWO_PI = 2.0 * math.pi


@dataclass
class SpectrumGrid:
    """values[j] = f^(j/M)"""

    M: int
    values: np.ndarray
    total_mass: float
    n_max: int

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class Arc:
    a: int
    q: int

    @property
    def center(self) -> float:
        return self.a / self.q


@dataclass
class ArcPartition:
    N: int
    B: float
    q_max: int
    radius: float
    arcs: List[Arc]


@dataclass(frozen=True)
class ArcMembership:
    """Result of classify_theta; a and q are None on the minor arc"""

    is_major: bool
    a: Optional[int] = None
    q: Optional[int] = None


@dataclass
class MomentReport:
    u: float
    integral_estimate: float
    normalized_ratio: float
    M: int
    N: int

    def to_record(self) -> dict:
        return {"u": self.u, "estimate": self.integral_estimate,
                "ratio": self.normalized_ratio, "M": self.M, "N": self.N}


@dataclass
class LargeSpectrumReport:
    delta: float
    measure_estimate: float
    spaced_count: int
    M: int
    N: int
    spaced_indices: np.ndarray = None

    @property
    def covering_bound(self) -> float:
        return 2.0 * self.spaced_count / self.N + 2.0 / self.M

    def to_record(self) -> dict:
        return {"delta": self.delta, "estimate": self.measure_estimate,
                "ratio": self.measure_estimate * self.N, "R": self.spaced_count,
                "M": self.M, "N": self.N}


@dataclass
class EnergyReport:
    """Both sides of R^2 delta^2 N^2 <= (sum nu) * sum_{r,r'} |nu^(theta_r - theta_r')|"""

    R: int
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-9)


def next_power_of_two(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def default_grid_size(N: int, oversample: int = 4) -> int:
    return oversample * next_power_of_two(N)


def dft_grid(f: WeightedSequence, M: Optional[int] = None, workers: Optional[int] = None) -> SpectrumGrid:
    """f^ on j/M by one zero-padded FFT"""
    if M is None:
        M = default_grid_size(f.n_max)
    if M < f.n_max:
        raise GridTooSmall(f"grid size {M} is smaller than n_max = {f.n_max}")

    # e(n j/M) depends on n mod M only, so f(n_max) may share slot 0 when M = n_max
    buffer = np.zeros(M, dtype=np.float64)
    np.add.at(buffer, np.arange(1, f.n_max + 1) % M, f.values)
    # ifft carries e(+nj/M) and a 1/M factor
    values = sp_fft.ifft(buffer, workers=workers) * M
    return SpectrumGrid(M=M, values=values, total_mass=f.total(), n_max=f.n_max)


def weighted_exp_sum(f: WeightedSequence, theta: float) -> complex:
    """Direct sum_n f(n) e(n theta); the oracle for dft_grid"""
    support = f.support()
    if support.size == 0:
        return 0j
    weights = f.values[support - 1]
    phases = np.mod(support.astype(np.float64) * float(theta), 1.0)
    return complex(np.sum(weights * np.exp(1j * TWO_PI * phases)))


def sup_discrepancy(g1: SpectrumGrid, g2: SpectrumGrid) -> float:
    if g1.M != g2.M:
        raise GridMismatch(f"grid sizes differ: {g1.M} vs {g2.M}")
    return float(np.max(np.abs(g1.values - g2.values)))


def _twist_pair(ctx: WtrickContext, c: RationalExponent, kind: str):
    untwisted_ctx = make_context(ctx.X, 1)
    if kind == "nu":
        return nu_seq(ctx, c), nu_seq(untwisted_ctx, c)
    elif kind == "lambda":
        return lambda_seq(ctx), lambda_seq(untwisted_ctx)
    raise OutOfRange(f"kind must be 'nu' or 'lambda', got {kind!r}")


def _twist_residual(ctx: WtrickContext, twisted, untwisted, theta: float) -> float:
    lhs = weighted_exp_sum(twisted, theta)
    W, b = ctx.W, ctx.b
    rhs = 0j
    for k in range(1, W + 1):
        shifted = (theta + k) / W
        rhs += np.exp(1j * TWO_PI * shifted * b) * weighted_exp_sum(untwisted, shifted)
    rhs *= ctx.phi_ratio / W
    return float(abs(lhs - rhs))


def twist_identity_residual(ctx: WtrickContext, c: RationalExponent, theta: float, kind: str = "nu") -> float:
    """|f^_{W,b}(theta) - (phi(W)/W^2) sum_k e((theta+k) b/W) f^_{1,0}((theta+k)/W)|"""
    twisted, untwisted = _twist_pair(ctx, c, kind)
    return _twist_residual(ctx, twisted, untwisted, theta)


def twist_identity_residuals(ctx: WtrickContext, c: RationalExponent, thetas: Sequence[float],
                             kind: str = "nu") -> np.ndarray:
    """twist_identity_residual at many theta, building both sequences once"""
    twisted, untwisted = _twist_pair(ctx, c, kind)
    return np.array([_twist_residual(ctx, twisted, untwisted, t) for t in thetas])


def natural_ps_weight_seq(N: int, c: RationalExponent) -> WeightedSequence:
    """c n^(1 - 1/c) at n in N^c ∩ [1, N]"""
    members = ps_sequence_array(N, c)
    values = np.zeros(N, dtype=np.float64)
    values[members - 1] = c.value * np.power(members.astype(np.float64), c.weight_power)
    return WeightedSequence(N, values, SequenceKind.TAU, f"tau_1,0^({c})")


def natural_ps_discrepancy(N: int, c: RationalExponent, M: Optional[int] = None) -> float:
    """max_j |sum_{n in N^c, n <= N} c n^(1-1/c) e(n j/M) - sum_{n <= N} e(n j/M)|"""
    if M is None:
        M = default_grid_size(N)
    if M < N:
        raise GridTooSmall(f"grid size {M} is smaller than N = {N}")
    weighted = dft_grid(natural_ps_weight_seq(N, c), M)
    flat = dft_grid(indicator_seq(N), M)
    return sup_discrepancy(weighted, flat)


def psi(t: float) -> float:
    """Sawtooth {t} - 1/2"""
    return t - math.floor(t) - 0.5


def psi_truncation(t, H: int):
    """-(1/2 pi i) sum_{0<|h|<=H} e(ht)/h = -(1/pi) sum_{h<=H} sin(2 pi h t)/h"""
    t = np.asarray(t, dtype=np.float64)
    hs = np.arange(1, H + 1, dtype=np.float64)
    frac = np.mod(t, 1.0)
    terms = np.sin(TWO_PI * np.multiply.outer(frac, hs)) / hs
    return -terms.sum(axis=-1) / math.pi


def psi_fourier_error(t: float, H: int) -> float:
    if H < 2:
        raise OutOfRange(f"H must be at least 2, got {H}")
    return float(abs(psi(t) - psi_truncation(t, H)))


def psi_error_bound(t, H: int):
    """min{1, 1/(H ||t||)}"""
    t = np.asarray(t, dtype=np.float64)
    frac = np.mod(t, 1.0)
    dist = np.minimum(frac, 1.0 - frac)
    with np.errstate(divide='ignore'):
        return np.minimum(1.0, np.where(dist > 0, 1.0 / (H * dist), np.inf))


def psi_error_ratios(ts: np.ndarray, H: int) -> np.ndarray:
    ts = np.asarray(ts, dtype=np.float64)
    frac = np.mod(ts, 1.0)
    errors = np.abs((frac - 0.5) - psi_truncation(ts, H))
    return errors / psi_error_bound(ts, H)


def psi_error_constant(ts: np.ndarray, Hs: Sequence[int]) -> float:
    """Largest error/bound ratio over the scan; the frozen C_psi"""
    return float(max(np.max(psi_error_ratios(ts, H)) for H in Hs))


def vdc_ratio(phase: Callable, X0: float, Y: int, Delta: float) -> float:
    """|sum of e(f(n)) over the Y integers from ceil(X0)| / (Y Delta^(1/2) + Delta^(-1/2))

    The caller certifies Delta/kappa <= |f''| <= kappa Delta on the range.
    """
    if Delta <= 0:
        raise OutOfRange(f"Delta must be positive, got {Delta}")
    if Y < 1:
        raise OutOfRange(f"Y must be positive, got {Y}")
    ns = math.ceil(X0) + np.arange(Y, dtype=np.float64)
    total = np.sum(np.exp(1j * TWO_PI * np.mod(phase(ns), 1.0)))
    return float(abs(total) / (Y * math.sqrt(Delta) + 1.0 / math.sqrt(Delta)))


def ps_phase(theta: float, h: float, u: float, c: RationalExponent) -> Callable:
    """x -> theta x - h (x + u)^(1/c)"""
    inverse = c.den / c.num
    return lambda x: theta * x - h * np.power(x + u, inverse)


def ps_phase_delta(h: float, c: RationalExponent, X0: float) -> float:
    """(c-1)/c^2 * h / X0^(2 - 1/c), the size of the phase's second derivative"""
    cv = c.value
    return (cv - 1.0) / cv ** 2 * h / X0 ** (2.0 - 1.0 / cv)


def arc_partition(N: int, B: float = 1.0) -> ArcPartition:
    if N < 16:
        raise OutOfRange(f"N must be at least 16, got {N}")
    if B <= 0:
        raise OutOfRange(f"B must be positive, got {B}")
    scale = math.log(N) ** B
    q_max = int(math.floor(scale))
    arcs = [Arc(a, q) for q in range(1, q_max + 1) for a in range(1, q + 1) if math.gcd(a, q) == 1]
    return ArcPartition(N=N, B=B, q_max=q_max, radius=scale / N, arcs=arcs)


def _circle_distance(theta, center):
    d = np.mod(np.asarray(theta) - center, 1.0)
    return np.minimum(d, 1.0 - d)


def classify_theta(part: ArcPartition, theta: float) -> ArcMembership:
    """First containing arc by smallest q, then smallest a; otherwise minor"""
    for arc in part.arcs:
        if _circle_distance(theta, arc.center) <= part.radius:
            return ArcMembership(True, arc.a, arc.q)
    return ArcMembership(False)


def arc_sups(g: SpectrumGrid, part: ArcPartition) -> dict:
    """Per-arc sup of |f^| on grid points the arc owns, and the minor-arc sup"""
    moduli = g.moduli
    thetas = g.thetas
    owner = np.full(g.M, -1, dtype=np.int64)
    for idx, arc in enumerate(part.arcs):
        inside = (_circle_distance(thetas, arc.center) <= part.radius) & (owner < 0)
        owner[inside] = idx

    per_arc = []
    for idx, arc in enumerate(part.arcs):
        owned = moduli[owner == idx]
        per_arc.append({"a": arc.a, "q": arc.q,
                        "points": int(owned.size),
                        "sup": float(owned.max()) if owned.size else 0.0})
    minor = moduli[owner < 0]
    return {"arcs": per_arc,
            "minor_points": int(minor.size),
            "minor_sup": float(minor.max()) if minor.size else 0.0}


def lq_moment(g: SpectrumGrid, u: float, N: Optional[int] = None) -> MomentReport:
    """Left Riemann sum of |f^|^u on the grid, normalised by N^(u-1)"""
    if u < 2:
        raise OutOfRange(f"u must be at least 2, got {u}")
    N = N or g.n_max
    integral = float(np.mean(np.power(g.moduli, u)))
    return MomentReport(u=u, integral_estimate=integral,
                        normalized_ratio=integral / float(N) ** (u - 1), M=g.M, N=N)


def v0_threshold_exact(c: RationalExponent) -> Fraction:
    cf = c.fraction
    return 2 + 4 * (cf - 1) / (2 - cf)


def v0_threshold(c: RationalExponent) -> float:
    return float(v0_threshold_exact(c))


def _spaced_subset(indices: np.ndarray, M: int, N: int) -> np.ndarray:
    """Greedy scan keeping points more than 1/N apart on the circle"""
    if indices.size == 0:
        return indices
    gap = M / N
    chosen = [int(indices[0])]
    for j in indices[1:].tolist():
        if j - chosen[-1] > gap:
            chosen.append(j)
    # the last pick may sit within 1/N of the first across theta = 1
    if len(chosen) > 1 and (chosen[0] + M) - chosen[-1] <= gap:
        chosen.pop()
    return np.array(chosen, dtype=np.int64)


def large_spectrum(g: SpectrumGrid, delta: float, N: Optional[int] = None) -> LargeSpectrumReport:
    if not 0 < delta < 1:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    N = N or g.n_max
    large = np.flatnonzero(g.moduli > delta * N)
    spaced = _spaced_subset(large, g.M, N)
    return LargeSpectrumReport(delta=delta, measure_estimate=large.size / g.M,
                               spaced_count=int(spaced.size), M=g.M, N=N,
                               spaced_indices=spaced)


def large_spectrum_energy(report: LargeSpectrumReport, nu_grid: SpectrumGrid,
                          nu_mass: float, max_points: int = 2000) -> EnergyReport:
    """Check the Cauchy-Schwarz step at the spaced points of a large-spectrum report

    Needs f <= nu pointwise and the same grid for f and nu.
    """
    if report.M != nu_grid.M:
        raise GridMismatch(f"grid sizes differ: {report.M} vs {nu_grid.M}")
    idx = report.spaced_indices[:max_points]
    R = int(idx.size)
    lhs = float(R) ** 2 * (report.delta * report.N) ** 2
    if R == 0:
        return EnergyReport(R=0, lhs=0.0, rhs=0.0)
    diffs = np.mod(idx[:, None] - idx[None, :], nu_grid.M)
    rhs = nu_mass * float(np.sum(np.abs(nu_grid.values[diffs])))
    return EnergyReport(R=R, lhs=lhs, rhs=rhs)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x"""
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=np.float64)),
                          np.log(np.asarray(ys, dtype=np.float64)), 1)
    return float(slope)


def spectrum_csv_rows(g: SpectrumGrid):
    for j, (theta, value) in enumerate(zip(g.thetas, g.values)):
        yield j, float(theta), float(value.real), float(value.imag), float(abs(value))
