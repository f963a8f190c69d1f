"""
Command-line driver: `psg <subcommand> [flags]`

Every subcommand delegates to one library operation and streams its rows to
stdout as CSV or JSON lines. Diagnostics go to stderr through the logger.
"""

import argparse
import csv
import math
import re
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, Dict, IO, Iterable, List, Optional

import numpy as np

from ..core.config import PsgSettings, config_manager
from ..core.database import open_results
from ..core.errors import PsgError, UsageError
from ..core.goldbach import GoldbachConfig, check_transference, weighted_positivity
from ..core.ps_core import RationalExponent, is_ps_member, ps_prime_table, ps_primes, sieve_primes
from ..core.spectral import (arc_partition, arc_sups, default_grid_size, dft_grid, large_spectrum,
                             lq_moment, loglog_slope, natural_ps_discrepancy, ps_phase, ps_phase_delta,
                             psi_error_constant, psi_error_ratios, psi_fourier_error, sup_discrepancy,
                             v0_threshold, vdc_ratio, weighted_exp_sum)
from ..core.verification_engine import VerificationEngine, VerificationJob
from ..core.weights import (indicator_seq, lambda_seq, make_context, nu_seq, primorial_w,
                            tau_seq)
from ..storage.cache_store import CacheStore
from ..storage.sequence_io import write_json_lines, write_spectrum_csv
from ..utils.logging_config import configure_logging, get_logger

logger = get_logger('cli')

@dataclass
class CliConfig:
    subcommand: str
    cache_dir: Optional[str] = None
    output_format: str = "csv"
    threads: int = 0
    seed: int = 0x5053474C
    no_timestamp: bool = False
    config_file: Optional[str] = None
    log_level: Optional[str] = None
    options: Dict[str, object] = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message):
        match = re.search(r'(--[\w-]+)', message)
        raise UsageError(f"{self.prog}: {message}", match.group(1) if match else None)


def _exponent(text: str) -> RationalExponent:
    try:
        return RationalExponent.parse(text)
    except PsgError as e:
        raise argparse.ArgumentTypeError(str(e))


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _log2_range(text: str) -> List[int]:
    """"a:b" -> [2^a, ..., 2^b]"""
    parts = text.split(':')
    try:
        lo, hi = (int(parts[0]), int(parts[-1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}")
    if len(parts) > 2 or lo > hi or lo < 4 or hi > 40:
        raise argparse.ArgumentTypeError(f"expected a:b with 4 <= a <= b <= 40, got {text!r}")
    return [1 << k for k in range(lo, hi + 1)]


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument('--cache-dir', dest='cache_dir', help="cache directory (PSG_CACHE_DIR wins)")
    common.add_argument('--format', dest='output_format', choices=('csv', 'json'))
    common.add_argument('--threads', type=int)
    common.add_argument('--seed', type=_seed)
    common.add_argument('--no-timestamp', action='store_true')
    common.add_argument('--config', dest='config_file', help="settings file for this run")
    common.add_argument('--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))

    parser = _Parser(prog='psg', description="Ternary Goldbach computations for Piatetski-Shapiro primes")
    sub = parser.add_subparsers(dest='subcommand', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('primes', parents=[common], help="PS primes with weights")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--limit', type=_positive, required=True)

    p = sub.add_parser('members', parents=[common], help="membership in N^c")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--values', type=_int_list)
    p.add_argument('--from', dest='lo', type=_positive)
    p.add_argument('--to', dest='hi', type=_positive)

    p = sub.add_parser('expsum', parents=[common], help="exponential sums of a weight system")
    p.add_argument('--kind', choices=('nu', 'lambda', 'tau', 'indicator'), default='nu')
    p.add_argument('--c', type=_exponent)
    p.add_argument('--X', type=_positive, required=True)
    p.add_argument('--w', dest='w_threshold', type=int)
    p.add_argument('--b', type=int)
    p.add_argument('--M', type=_positive)
    p.add_argument('--theta', type=_float_list, help="direct sums at these theta instead of the grid")

    p = sub.add_parser('discrepancy', parents=[common], help="sup discrepancies per N")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--log2n', type=_log2_range, required=True)

    p = sub.add_parser('moments', parents=[common], help="L^u moment sweep")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--u', type=_float_list, required=True)
    p.add_argument('--log2n', type=_log2_range, required=True)
    p.add_argument('--w', dest='w_threshold', type=int)

    p = sub.add_parser('spectrum', parents=[common], help="large spectrum sweep over delta")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--log2n', type=_log2_range, required=True)
    p.add_argument('--delta', type=_float_list, default=[0.05, 0.1, 0.2, 0.4])
    p.add_argument('--w', dest='w_threshold', type=int)

    p = sub.add_parser('arcs', parents=[common], help="major/minor arc sups of the prime sum")
    p.add_argument('--X', type=_positive, required=True)
    p.add_argument('--B', type=float)

    p = sub.add_parser('psi-check', parents=[common], help="sawtooth truncation error ratios")
    p.add_argument('--H', type=_int_list, default=[2, 8, 64, 256])
    p.add_argument('--grid', type=_positive, default=10_000)

    p = sub.add_parser('vdc-check', parents=[common], help="second-derivative test ratios")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--X0', type=_float_list, default=[1e3, 1e4, 1e5])
    p.add_argument('--Y', type=_int_list, default=[100, 1000])
    p.add_argument('--h', type=_float_list, default=[1.0, 4.0, 16.0])
    p.add_argument('--theta', type=float, default=0.0)

    p = sub.add_parser('verify', parents=[common], help="verify odd n are sums of three PS primes")
    p.add_argument('--c', type=_exponent)
    p.add_argument('--c1', type=_exponent)
    p.add_argument('--c2', type=_exponent)
    p.add_argument('--c3', type=_exponent)
    p.add_argument('--from', dest='lo', type=_positive, required=True)
    p.add_argument('--to', dest='hi', type=_positive, required=True)
    p.add_argument('--X', type=_positive)
    p.add_argument('--floor', type=int)
    p.add_argument('--reports', action='store_true', help="one JSON line per n before the summary")
    p.add_argument('--no-witnesses', action='store_true')
    p.add_argument('--direct', action='store_true', help="direct convolution instead of FFT")

    p = sub.add_parser('transference', parents=[common], help="measure the transference hypotheses")
    p.add_argument('--c', type=_exponent, required=True)
    p.add_argument('--X', type=_positive, required=True)
    p.add_argument('--w', dest='w_threshold', type=int)
    p.add_argument('--eta', type=float, default=0.3)
    p.add_argument('--epsilon', type=float, default=0.1)
    p.add_argument('--q', dest='q_exponent', type=float, default=2.6)
    p.add_argument('--K', type=float, default=50.0)
    p.add_argument('--ap-step-max', type=_positive, default=8)
    p.add_argument('--ap-samples', type=_positive, default=64)
    p.add_argument('--positivity-samples', type=int, default=0)

    p = sub.add_parser('history', parents=[common], help="recent verification runs")
    p.add_argument('--limit', type=_positive, default=20)
    p.add_argument('--cleanup', action='store_true', help="prune runs past the retention period")

    return parser


_GLOBAL_FLAGS = ('cache_dir', 'output_format', 'threads', 'seed', 'no_timestamp', 'config_file', 'log_level')


def parse_args(argv: List[str]) -> CliConfig:
    """Validated CliConfig, or UsageError naming the offending flag"""
    namespace = _build_parser().parse_args(argv)
    values = vars(namespace)
    options = {k: v for k, v in values.items() if k not in _GLOBAL_FLAGS and k != 'subcommand'}
    cfg = CliConfig(subcommand=values['subcommand'],
                    cache_dir=values.get('cache_dir'),
                    no_timestamp=bool(values.get('no_timestamp')),
                    config_file=values.get('config_file'),
                    log_level=values.get('log_level'),
                    options=options)
    # None means "not given": settings fill these in run()
    cfg.output_format = values.get('output_format')
    cfg.threads = values.get('threads')
    cfg.seed = values.get('seed')
    _validate(cfg)
    return cfg


def _validate(cfg: CliConfig):
    opts = cfg.options
    if cfg.threads is not None and cfg.threads < 0:
        raise UsageError("--threads must be nonnegative", '--threads')
    if cfg.subcommand == 'members':
        if opts.get('values') is None and (opts.get('lo') is None or opts.get('hi') is None):
            raise UsageError("members needs --values or both --from and --to", '--values')
    if cfg.subcommand in ('verify', 'members') and opts.get('lo') is not None and opts.get('hi') is not None:
        if opts['lo'] > opts['hi']:
            raise UsageError(f"--from {opts['lo']} exceeds --to {opts['hi']}", '--from')
    if cfg.subcommand == 'verify':
        exps = [opts.get('c1'), opts.get('c2'), opts.get('c3')]
        if opts.get('c') is None and None in exps:
            raise UsageError("verify needs --c or all of --c1, --c2, --c3", '--c')
        X = opts.get('X')
        if X is not None and opts['hi'] > 3 * X:
            raise UsageError(f"--to {opts['hi']} exceeds 3X = {3 * X}", '--to')
    if cfg.subcommand == 'expsum' and opts.get('kind') != 'indicator' and opts.get('c') is None \
            and opts.get('kind') != 'lambda':
        raise UsageError(f"--kind {opts.get('kind')} needs --c", '--c')
    if cfg.subcommand == 'spectrum' and any(not 0 < d < 1 for d in opts['delta']):
        raise UsageError("--delta values must lie in (0, 1)", '--delta')
    if cfg.subcommand == 'moments' and any(u < 2 for u in opts['u']):
        raise UsageError("--u values must be at least 2", '--u')
    if cfg.subcommand == 'psi-check' and any(H < 2 for H in opts['H']):
        raise UsageError("--H values must be at least 2", '--H')
    if cfg.subcommand == 'transference' and not 2 < opts['q_exponent'] < 3:
        raise UsageError("--q must lie in (2, 3)", '--q')


class _Output:
    """Rows to stdout as CSV with a header, or as JSON lines"""

    def __init__(self, stream: IO[str], fmt: str):
        self.stream = stream
        self.fmt = fmt
        self._writer = csv.writer(stream, lineterminator='\n') if fmt == 'csv' else None
        self._header_done = False

    @staticmethod
    def _cell(value):
        if isinstance(value, float):
            return repr(value)
        if value is None:
            return ""
        return value

    def row(self, record: dict):
        if self.fmt == 'json':
            write_json_lines([record], self.stream)
            return
        if not self._header_done:
            self._writer.writerow(list(record))
            self._header_done = True
        self._writer.writerow([self._cell(v) for v in record.values()])

    def rows(self, records: Iterable[dict]):
        for record in records:
            self.row(record)


@dataclass
class _Context:
    cfg: CliConfig
    settings: PsgSettings
    out: _Output
    stream: IO[str]
    cache: Optional[CacheStore]
    threads: int

    def stamp(self, record: dict) -> dict:
        if not self.cfg.no_timestamp:
            record["timestamp"] = datetime.now(timezone.utc).isoformat(timespec='seconds')
        return record


def _resolve_settings(cfg: CliConfig) -> PsgSettings:
    """Defaults < --config file < explicit flags"""
    if cfg.config_file:
        try:
            settings = config_manager.read_settings_file(cfg.config_file)
        except ValueError as e:
            raise UsageError(str(e), '--config')
    else:
        settings = replace(config_manager.settings)
    if cfg.threads is not None:
        settings.threads = cfg.threads
    if cfg.seed is not None:
        settings.seed = cfg.seed
    if cfg.output_format is not None:
        settings.output_format = cfg.output_format
    if cfg.log_level is not None:
        settings.log_level = cfg.log_level
    return settings


def _cmd_primes(ctx: _Context) -> int:
    opts = ctx.cfg.options
    if opts['limit'] < 2:
        return 0
    for prime in ps_primes(opts['limit'], opts['c'], threads=ctx.threads, cache=ctx.cache):
        ctx.out.row({"p": prime.p, "weight": prime.weight, "logp": prime.logp, "preimage": prime.preimage})
    return 0


def _cmd_members(ctx: _Context) -> int:
    opts = ctx.cfg.options
    values = opts.get('values')
    if values is None:
        values = range(opts['lo'], opts['hi'] + 1)
    c = opts['c']
    for m in values:
        if m < 1:
            raise UsageError(f"--values must be positive, got {m}", '--values')
        ctx.out.row({"m": m, "member": int(is_ps_member(m, c))})
    return 0


def _weight_system(kind: str, X: int, w_threshold: int, b: Optional[int], c: Optional[RationalExponent]):
    wctx = make_context(X, w_threshold, b)
    if kind == 'nu':
        return nu_seq(wctx, c)
    if kind == 'lambda':
        return lambda_seq(wctx)
    if kind == 'tau':
        return tau_seq(wctx, c)
    return indicator_seq(wctx.N)


def _cmd_expsum(ctx: _Context) -> int:
    opts = ctx.cfg.options
    w = opts['w_threshold'] if opts['w_threshold'] is not None else ctx.settings.w_threshold
    f = _weight_system(opts['kind'], opts['X'], w, opts['b'], opts['c'])
    if opts['theta']:
        for theta in opts['theta']:
            value = weighted_exp_sum(f, theta)
            ctx.out.row({"theta": theta, "re": value.real, "im": value.imag, "modulus": abs(value)})
        return 0
    M = opts['M'] or default_grid_size(f.n_max, ctx.settings.grid_oversample)
    grid = dft_grid(f, M, workers=ctx.threads)
    if ctx.out.fmt == 'csv':
        write_spectrum_csv(grid, ctx.stream)
    else:
        ctx.out.rows({"j": j, "theta": float(t), "re": float(v.real), "im": float(v.imag),
                      "modulus": float(abs(v))} for j, (t, v) in enumerate(zip(grid.thetas, grid.values)))
    return 0


def _cmd_discrepancy(ctx: _Context) -> int:
    opts = ctx.cfg.options
    c = opts['c']
    exponent = 1.5 - 1.0 / c.value
    sups = {"nu_lambda": [], "natural": []}
    for N in opts['log2n']:
        M = default_grid_size(N, ctx.settings.grid_oversample)
        wctx = make_context(N - 1, 1)
        table = ps_prime_table(wctx.X, c, threads=ctx.threads, cache=ctx.cache)
        nu_grid = dft_grid(nu_seq(wctx, c, table), M, workers=ctx.threads)
        lambda_grid = dft_grid(lambda_seq(wctx, _all_primes(wctx.X, ctx)), M, workers=ctx.threads)
        one_grid = dft_grid(indicator_seq(N), M, workers=ctx.threads)
        natural = natural_ps_discrepancy(N, c, M)
        nu_lambda = sup_discrepancy(nu_grid, lambda_grid)
        sups["nu_lambda"].append(nu_lambda)
        sups["natural"].append(natural)
        ctx.out.row({
            "N": N,
            "nu_lambda": nu_lambda / N,
            "nu_one": sup_discrepancy(nu_grid, one_grid) / N,
            "natural": natural,
            "natural_ratio": natural / (N ** exponent * math.log(N)),
        })
    if len(opts['log2n']) > 1:
        for name, values in sups.items():
            if min(values) > 0:
                logger.info(f"{name}: log-log slope {loglog_slope(opts['log2n'], values):.4f} "
                            f"(power-saving reference {exponent:.4f})")
    return 0


def _all_primes(X: int, ctx: _Context) -> np.ndarray:
    """All primes up to X through the shared sieve cache"""
    if X < 2:
        return np.empty(0, dtype=np.int64)
    return sieve_primes(X, ctx.settings.segment_size, ctx.threads, ctx.cache)


def _nu_for_length(N: int, c: RationalExponent, w_threshold: int, ctx: _Context):
    """nu_{W,1} with exactly N points: X = W (N - 1)"""
    W = primorial_w(w_threshold)
    wctx = make_context(W * (N - 1), w_threshold)
    table = ps_prime_table(wctx.X, c, threads=ctx.threads, cache=ctx.cache)
    return nu_seq(wctx, c, table)


def _cmd_moments(ctx: _Context) -> int:
    opts = ctx.cfg.options
    w = opts['w_threshold'] if opts['w_threshold'] is not None else ctx.settings.w_threshold
    logger.info(f"v0({opts['c']}) = {v0_threshold(opts['c']):.6f}")
    for N in opts['log2n']:
        f = _nu_for_length(N, opts['c'], w, ctx)
        grid = dft_grid(f, default_grid_size(N, ctx.settings.grid_oversample), workers=ctx.threads)
        for u in opts['u']:
            report = lq_moment(grid, u, N)
            ctx.out.row({"N": N, "u": u, "ratio": report.normalized_ratio})
    return 0


def _cmd_spectrum(ctx: _Context) -> int:
    opts = ctx.cfg.options
    w = opts['w_threshold'] if opts['w_threshold'] is not None else ctx.settings.w_threshold
    v0 = v0_threshold(opts['c'])
    for N in opts['log2n']:
        f = _nu_for_length(N, opts['c'], w, ctx)
        grid = dft_grid(f, default_grid_size(N, ctx.settings.grid_oversample), workers=ctx.threads)
        for delta in opts['delta']:
            report = large_spectrum(grid, delta, N)
            ctx.out.row({"N": N, "delta": delta, "measure": report.measure_estimate,
                         "R": report.spaced_count,
                         "scaled": report.measure_estimate * N * delta ** (v0 + 0.2)})
    return 0


def _cmd_arcs(ctx: _Context) -> int:
    opts = ctx.cfg.options
    B = opts['B'] if opts['B'] is not None else ctx.settings.arc_B
    wctx = make_context(opts['X'], 1)
    f = lambda_seq(wctx, _all_primes(wctx.X, ctx))
    grid = dft_grid(f, default_grid_size(f.n_max, ctx.settings.grid_oversample), workers=ctx.threads)
    part = arc_partition(wctx.N, B)
    sups = arc_sups(grid, part)
    for arc in sups["arcs"]:
        ctx.out.row({"a": arc["a"], "q": arc["q"], "points": arc["points"], "sup": arc["sup"]})
    ctx.out.row({"a": None, "q": None, "points": sups["minor_points"], "sup": sups["minor_sup"]})
    return 0


def _cmd_psi_check(ctx: _Context) -> int:
    opts = ctx.cfg.options
    ts = np.arange(opts['grid'], dtype=np.float64) / opts['grid']
    constant = psi_error_constant(ts, opts['H'])
    for H in opts['H']:
        ratios = psi_error_ratios(ts, H)
        ctx.out.row({"H": H, "max_ratio": float(np.max(ratios)), "C_psi": constant,
                     "error_at_half": psi_fourier_error(0.5, H), "error_at_zero": psi_fourier_error(0.0, H)})
    return 0


def _cmd_vdc_check(ctx: _Context) -> int:
    opts = ctx.cfg.options
    c = opts['c']
    for X0 in opts['X0']:
        for Y in opts['Y']:
            for h in opts['h']:
                phase = ps_phase(opts['theta'], h, 0.0, c)
                # |f''| is smallest at the far end of [X0, X0 + Y]
                delta = ps_phase_delta(h, c, X0 + Y)
                ctx.out.row({"X0": X0, "Y": Y, "h": h, "Delta": delta,
                             "ratio": vdc_ratio(phase, X0, Y, delta)})
    return 0


def _cmd_verify(ctx: _Context) -> int:
    opts = ctx.cfg.options
    c1 = opts['c1'] or opts['c']
    c2 = opts['c2'] or opts['c']
    c3 = opts['c3'] or opts['c']
    X = opts['X'] or opts['hi']
    goldbach_cfg = GoldbachConfig(c1, c2, c3, X, W=primorial_w(ctx.settings.w_threshold),
                                  use_fft=not opts['direct'], threads=ctx.threads)
    floor = opts['floor'] if opts['floor'] is not None else ctx.settings.exception_floor
    job = VerificationJob(lo=opts['lo'], hi=opts['hi'], config=goldbach_cfg,
                          with_witnesses=not opts['no_witnesses'] or opts['reports'],
                          validate_limit=ctx.settings.validate_limit,
                          spot_checks=ctx.settings.spot_checks,
                          seed=ctx.settings.seed, exception_floor=floor)

    engine = VerificationEngine(cache_dir=config_manager.get_cache_dir(ctx.cfg.cache_dir))
    engine.set_progress_callback(lambda cur, total, status: logger.debug(f"[{cur}/{total}] {status}"))
    try:
        result = engine.run(job)
        engine.cleanup_old_runs(ctx.settings.run_retention_days)
    finally:
        engine.close()

    if opts['reports']:
        write_json_lines((r.to_record() for r in result.reports()), ctx.stream)
    record = result.summary.to_record(include_runtime=not ctx.cfg.no_timestamp)
    write_json_lines([ctx.stamp(record)], ctx.stream)
    return result.summary.exit_code


def _cmd_transference(ctx: _Context) -> int:
    opts = ctx.cfg.options
    c = opts['c']
    w = opts['w_threshold'] if opts['w_threshold'] is not None else ctx.settings.w_threshold
    wctx = make_context(opts['X'], w)
    table = ps_prime_table(opts['X'], c, threads=ctx.threads, cache=ctx.cache)
    nu = nu_seq(wctx, c, table)
    report = check_transference(nu, nu, opts['eta'], opts['epsilon'], opts['q_exponent'], opts['K'],
                                ap_step_max=opts['ap_step_max'], ap_samples=opts['ap_samples'],
                                seed=ctx.settings.seed,
                                M=default_grid_size(nu.n_max, ctx.settings.grid_oversample))
    record = report.to_record()

    samples = opts['positivity_samples']
    if samples > 0:
        goldbach_cfg = GoldbachConfig.uniform(c, opts['X'], W=wctx.W)
        rng = np.random.default_rng(ctx.settings.seed)
        lo = (opts['X'] + 1) // 2
        odd = np.arange(lo + (lo % 2 == 0), opts['X'] + 1, 2)
        picks = rng.choice(odd, size=min(samples, odd.size), replace=False) if odd.size else []
        tables = {c: table}
        positive = sum(1 for m in picks if weighted_positivity(int(m), goldbach_cfg, tables) > 0)
        record["positivity_samples"] = int(len(picks))
        record["positivity_positive"] = positive

    write_json_lines([ctx.stamp(record)], ctx.stream)
    return 0


def _cmd_history(ctx: _Context) -> int:
    results = open_results(config_manager.get_cache_dir(ctx.cfg.cache_dir))
    try:
        if ctx.cfg.options['cleanup']:
            results.cleanup_old_runs(ctx.settings.run_retention_days)
        write_json_lines((run.to_record() for run in results.recent_runs(ctx.cfg.options['limit'])),
                         ctx.stream)
    finally:
        results.close()
    return 0


_COMMANDS: Dict[str, Callable[[_Context], int]] = {
    'primes': _cmd_primes,
    'members': _cmd_members,
    'expsum': _cmd_expsum,
    'discrepancy': _cmd_discrepancy,
    'moments': _cmd_moments,
    'spectrum': _cmd_spectrum,
    'arcs': _cmd_arcs,
    'psi-check': _cmd_psi_check,
    'vdc-check': _cmd_vdc_check,
    'verify': _cmd_verify,
    'transference': _cmd_transference,
    'history': _cmd_history,
}


def run(cfg: CliConfig, stream: Optional[IO[str]] = None) -> int:
    """Execute a parsed command; returns the process exit code"""
    stream = stream or sys.stdout
    try:
        settings = _resolve_settings(cfg)
        configure_logging(settings.log_level, settings.log_to_file)
        cache = None
        if settings.cache_enabled:
            cache = CacheStore(config_manager.get_cache_dir(cfg.cache_dir))
        ctx = _Context(cfg=cfg, settings=settings, out=_Output(stream, settings.output_format),
                       stream=stream, cache=cache, threads=settings.resolved_threads())
        return _COMMANDS[cfg.subcommand](ctx)
    except UsageError as e:
        print(f"psg: {e}", file=sys.stderr)
        return UsageError.exit_code
    except Exception as e:
        logger.debug("Internal error", exc_info=True)
        print(f"psg: error: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as e:
        print(f"psg: {e}", file=sys.stderr)
        return UsageError.exit_code
    return run(cfg)
