from itertools import product

import numpy as np
import pytest
from sympy import isprime

from src.core.errors import DominationViolated, LengthMismatch, OutOfRange, RunCancelled
from src.core.goldbach import (GoldbachConfig, check_transference, count_representations, default_config,
                               find_representation, triple_convolution, verify_range, weighted_positivity,
                               weighted_witness)
from src.core.ps_core import is_ps_member, make_exponent, ps_primes
from src.core.weights import Progression, WeightedSequence, ap_mean, indicator_seq, make_context, nu_seq


def brute_count(n, exponents):
    sets = [{p.p for p in ps_primes(n, c)} for c in exponents]
    return sum(1 for p1, p2 in product(sorted(sets[0]), sorted(sets[1])) if (n - p1 - p2) in sets[2])


def test_triple_convolution_of_indicators():
    f = indicator_seq(4)
    out = triple_convolution(f, f, f)
    assert out.size == 13
    assert round(out[3]) == 1
    assert round(out[6]) == 10
    assert round(out[12]) == 1
    assert np.allclose(out, triple_convolution(f, f, f, use_fft=False), atol=1e-9)


def test_triple_convolution_length_mismatch():
    with pytest.raises(LengthMismatch):
        triple_convolution(indicator_seq(4), indicator_seq(4), indicator_seq(5))


def test_count_examples(c_11_10, c_3_2):
    assert count_representations(9, GoldbachConfig.uniform(c_11_10, 9)) == 4
    assert count_representations(7, GoldbachConfig.uniform(c_3_2, 7)) == 0
    assert count_representations(9, GoldbachConfig.uniform(c_3_2, 9)) == 3


def test_count_rejects_bad_n(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 100)
    with pytest.raises(OutOfRange):
        count_representations(10, cfg)
    with pytest.raises(OutOfRange):
        count_representations(5, cfg)


def test_find_representation(c_11_10, c_3_2):
    assert find_representation(9, GoldbachConfig.uniform(c_11_10, 9)) == (2, 2, 5)
    assert find_representation(7, GoldbachConfig.uniform(c_3_2, 7)) is None


def test_count_is_symmetric(c_11_10, c_3_2):
    n = 301
    counts = {count_representations(n, GoldbachConfig(*cs, X=n))
              for cs in [(c_11_10, c_3_2, c_11_10), (c_3_2, c_11_10, c_11_10), (c_11_10, c_11_10, c_3_2)]}
    assert len(counts) == 1


def test_count_restricted_to_residues(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 101)
    restricted = count_representations(101, cfg, W=2, residues=(1, 1, 1))
    assert 0 < restricted <= count_representations(101, cfg)


def test_config_validation(c_11_10):
    with pytest.raises(OutOfRange):
        GoldbachConfig.uniform(c_11_10, 100, W=4)
    with pytest.raises(OutOfRange):
        GoldbachConfig.uniform(c_11_10, 0)
    assert default_config(50).W == 2


@pytest.mark.parametrize("exponents", [(11, 10, 11, 10, 11, 10), (3, 2, 3, 2, 3, 2), (11, 10, 3, 2, 11, 10)])
def test_verify_matches_brute_force(exponents):
    cs = [make_exponent(exponents[i], exponents[i + 1]) for i in (0, 2, 4)]
    hi = 301
    cfg = GoldbachConfig(*cs, X=hi)
    result = verify_range(7, hi, cfg, validate_limit=50, spot_checks=16)
    for report in result.reports():
        assert report.ordered_count == brute_count(report.n, cs)
        if report.ordered_count:
            p1, p2, p3 = report.witness
            assert p1 + p2 + p3 == report.n
            assert all(isprime(p) and is_ps_member(p, c) for p, c in zip((p1, p2, p3), cs))
            assert report.weighted_value > 0
        else:
            assert report.witness is None
            assert report.weighted_value == 0.0


def test_verify_witness_is_smallest(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 201)
    result = verify_range(9, 201, cfg)
    for report in result.reports():
        if report.witness is not None:
            assert report.witness == find_representation(report.n, cfg)


def test_verify_small_range(c_11_10):
    result = verify_range(101, 999, default_config(999))
    summary = result.summary
    assert summary.checked == 450
    assert summary.exceptions == []
    assert summary.exit_code == 0
    assert summary.proven_range
    assert result.count_for(101) == count_representations(101, default_config(101))


def test_verify_reports_exceptions(c_3_2):
    cfg = GoldbachConfig.uniform(c_3_2, 99)
    result = verify_range(7, 99, cfg, exception_floor=10)
    summary = result.summary
    assert 7 in summary.exceptions
    assert summary.largest_exception == max(summary.exceptions)
    assert summary.exit_code == (2 if any(n > 10 for n in summary.exceptions) else 0)
    assert not summary.proven_range


def test_verify_direct_and_fft_agree(c_11_10):
    fft = verify_range(7, 401, GoldbachConfig.uniform(c_11_10, 401), with_witnesses=False)
    direct = verify_range(7, 401, GoldbachConfig.uniform(c_11_10, 401, use_fft=False), with_witnesses=False)
    assert np.array_equal(fft.counts, direct.counts)


def test_verify_range_checks_bounds(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 100)
    with pytest.raises(OutOfRange):
        verify_range(101, 99, cfg)
    with pytest.raises(OutOfRange):
        verify_range(7, 301, cfg)


def test_verify_can_be_stopped(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 301)
    with pytest.raises(RunCancelled):
        verify_range(7, 301, cfg, should_stop=lambda: True)


def test_summary_record_without_runtime(c_11_10):
    summary = verify_range(101, 199, default_config(199)).summary
    record = summary.to_record(include_runtime=False)
    assert "runtime_ms" not in record
    assert record["range"] == [101, 199]
    assert record["c"] == ["11/10"] * 3


def test_transference_on_indicator():
    f = indicator_seq(256)
    report = check_transference(f, f, eta=0.3, epsilon=0.1, q_exponent=2.6, K=50)
    assert report.cond_i_pass
    assert report.cond_ii_value == pytest.approx(0.0, abs=1e-12)
    assert report.cond_iii_pass
    assert report.passed
    assert report.aps_tested > 0


def test_transference_rejects_undominated_f():
    nu = indicator_seq(16)
    f = WeightedSequence(16, np.full(16, 2.0))
    with pytest.raises(DominationViolated):
        check_transference(f, nu, 0.3, 0.1, 2.6, 50)


def test_transference_parameter_checks():
    f = indicator_seq(16)
    with pytest.raises(OutOfRange):
        check_transference(f, f, 0.3, 0.1, 3.5, 50)
    with pytest.raises(LengthMismatch):
        check_transference(f, indicator_seq(17), 0.3, 0.1, 2.6, 50)


def test_transference_is_seeded(c_11_10):
    nu = nu_seq(make_context(1 << 12, 2), c_11_10)
    first = check_transference(nu, nu, 0.3, 0.1, 2.6, 50, seed=11)
    second = check_transference(nu, nu, 0.3, 0.1, 2.6, 50, seed=11)
    assert first.to_record() == second.to_record()


def test_weighted_positivity_examples(c_11_10, c_3_2):
    assert weighted_positivity(9, GoldbachConfig.uniform(c_11_10, 9, W=1)) > 0
    assert weighted_positivity(7, GoldbachConfig.uniform(c_3_2, 7, W=1)) == 0.0
    assert weighted_positivity(101, GoldbachConfig.uniform(c_11_10, 101, W=2)) > 0


def test_weighted_witness_reconstructs_primes(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 1001, W=2)
    for m in (501, 777, 1001):
        primes = weighted_witness(m, cfg)
        assert primes is not None
        assert sum(primes) == m
        assert all(p % 2 == 1 for p in primes)


def test_weighted_witness_absent(c_3_2):
    assert weighted_witness(7, GoldbachConfig.uniform(c_3_2, 7, W=1)) is None


def test_verify_counts_all_primes_when_x_is_below_hi(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 50)
    result = verify_range(101, 149, cfg)
    for report in result.reports():
        assert report.ordered_count == count_representations(report.n, cfg)
    assert result.summary.exceptions == []


def test_enlarging_x_keeps_witnesses(c_11_10, c_3_2):
    for c in (c_11_10, c_3_2):
        previous = None
        for X in (301, 401, 601):
            exceptions = set(verify_range(7, 301, GoldbachConfig.uniform(c, X)).summary.exceptions)
            if previous is not None:
                assert exceptions <= previous
            previous = exceptions


def test_transference_reports_each_step(c_11_10):
    ctx = make_context(1 << 14, 2)
    nu = nu_seq(ctx, c_11_10)
    assert ap_mean(nu, Progression(2, 3, ctx.N // 3 - 1)) < 0.01
    report = check_transference(nu, nu, eta=0.3, epsilon=0.1, q_exponent=2.6, K=50, ap_step_max=4)
    assert sorted(report.worst_by_step) == [1, 2, 3, 4]
    assert report.worst_ap_mean == min(report.worst_by_step.values())
    assert report.failing_steps() == [3]
    assert not report.cond_i_pass
    assert report.to_record()["worst_by_step"]["3"] == report.worst_by_step[3]


@pytest.mark.slow
def test_verify_matches_brute_force_to_2000(c_11_10, c_3_2):
    for cs in [(c_11_10,) * 3, (c_3_2,) * 3]:
        cfg = GoldbachConfig(*cs, X=2001)
        result = verify_range(7, 2001, cfg)
        for report in result.reports():
            assert report.ordered_count == brute_count(report.n, cs)


@pytest.mark.slow
def test_desk_scale_verification(c_11_10):
    cfg = GoldbachConfig.uniform(c_11_10, 2 * 10 ** 6, threads=4)
    result = verify_range(10 ** 5 + 1, 2 * 10 ** 6, cfg)
    assert result.summary.exceptions_above_floor == []
    assert result.summary.runtime_ms < 600_000


@pytest.mark.slow
def test_transference_and_positivity_at_scale(c_11_10):
    X = 1 << 18
    ctx = make_context(X, 2)
    nu = nu_seq(ctx, c_11_10)
    report = check_transference(nu, nu, eta=0.3, epsilon=0.1, q_exponent=2.6, K=50)
    assert report.cond_iii_pass
    # W = 2 leaves 3, 5 and 7 unsieved: nu vanishes on n = 2 (mod 3), and its transform peaks near 1/3
    assert not report.cond_i_pass
    assert set(report.failing_steps()) <= {3, 5, 6, 7}
    assert report.worst_by_step[1] >= 1 / 3 + 0.1
    assert report.cond_ii_value == pytest.approx(0.5, abs=0.05)
    cfg = GoldbachConfig.uniform(c_11_10, X, W=2)
    rng = np.random.default_rng(0x5053474C)
    tables = {}
    for m in rng.choice(np.arange(X // 2 + 1, X, 2), size=100, replace=False):
        assert weighted_positivity(int(m), cfg, tables) > 0
