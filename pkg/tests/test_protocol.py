"""Tests for the bucketing compression protocol."""

import math
from fractions import Fraction

import numpy as np
import pytest

from blind_bounds.core.distributions import Distribution, staircase, uniform
from blind_bounds.core.errors import (
    DimensionMismatchError,
    InvalidInputError,
    ParameterRangeError,
    ProtocolError,
)
from blind_bounds.core.info_measures import trace_distance
from blind_bounds.core.models import ProtocolReport
from blind_bounds.core.protocol import (
    BucketProtocol,
    build_protocol,
    decode,
    encode,
    induced_output,
    ki_error_functions,
    ki_rate_lower_bound,
    ki_sensitivity,
    level_count,
    monte_carlo_error,
    protocol_rate_bound,
    protocol_report,
)

THIRDS = Distribution([Fraction(1, 3), Fraction(2, 3)])


def test_level_count():
    assert level_count(1024, 0.1, 0.1) == 88
    assert level_count(2, Fraction(1, 4), Fraction(1, 2)) == 5
    assert level_count(4, Fraction(1, 4), Fraction(1, 2)) == 8
    for d in (2, 17, 1000):
        u = level_count(d, 0.2, 0.3)
        assert 0.8 ** u <= 0.3 / d < 0.8 ** (u - 1)


@pytest.mark.parametrize("delta, gamma", [(0, 0.1), (0.5, 0.1), (0.1, 0), (0.1, 1)])
def test_parameter_ranges(delta, gamma):
    with pytest.raises(ParameterRangeError):
        level_count(8, delta, gamma)
    with pytest.raises(ParameterRangeError):
        build_protocol(uniform(8), staircase(8), delta, gamma)


def test_exact_binary_protocol_buckets():
    p = build_protocol(uniform(2), THIRDS, Fraction(1, 4), Fraction(1, 2))
    assert p.u == 5
    # 1/2 lies in level 3, 1/3 in level 4 and 2/3 in level 2
    assert encode(p, 0) == (3, 4)
    assert encode(p, 1) == (3, 2)
    assert decode(p, (3, 4), seed=123) == 0
    assert induced_output(p, THIRDS).equals(THIRDS)


def test_staircase_tail_is_truncated():
    p = build_protocol(uniform(4), staircase(4), Fraction(1, 4), Fraction(1, 2))
    assert p.u == 8
    assert [encode(p, a) for a in range(4)] == [(5, 4), (5, 5), (5, 6), (5, 9)]


def test_encode_decode_errors():
    p = build_protocol(uniform(4), staircase(4), 0.25, 0.5)
    with pytest.raises(InvalidInputError):
        encode(p, 4)
    with pytest.raises(InvalidInputError):
        encode(p, -1)
    with pytest.raises(ProtocolError):
        decode(p, (1, 1), seed=0)
    with pytest.raises(DimensionMismatchError):
        build_protocol(uniform(3), staircase(4), 0.25, 0.5)


def test_decode_stays_in_bucket_and_is_deterministic():
    p = build_protocol(uniform(64, exact=False), staircase(64, exact=False), 0.3, 0.2)
    for a in range(64):
        ij = encode(p, a)
        out = decode(p, ij, seed=a)
        assert encode(p, out) == ij
        assert decode(p, ij, seed=a) == out


def test_induced_output_error_within_delta_plus_gamma():
    rho = uniform(1024, exact=False)
    sigma = staircase(1024, exact=False)
    p = build_protocol(rho, sigma, 0.1, 0.1)
    assert trace_distance(rho, induced_output(p, rho)) <= 0.2 + 1e-12
    assert trace_distance(sigma, induced_output(p, sigma)) <= 0.2 + 1e-12


def test_exact_induced_output_preserves_bucket_masses():
    p = build_protocol(uniform(6), staircase(6), Fraction(1, 3), Fraction(1, 4))
    out = induced_output(p, staircase(6))
    assert out.exact
    for symbols in p.buckets.values():
        assert sum(out.probs[a] for a in symbols) == sum(staircase(6).probs[a] for a in symbols)


def test_monte_carlo_matches_exact_error():
    rho = staircase(200, exact=False)
    p = build_protocol(uniform(200, exact=False), rho, 0.2, 0.1)
    exact = trace_distance(rho, induced_output(p, rho))
    estimate, sigma = monte_carlo_error(p, rho, seed=5, n=50_000)
    assert abs(estimate - exact) <= 3 * sigma + 1e-12
    assert monte_carlo_error(p, rho, seed=5, n=50_000) == (estimate, sigma)
    with pytest.raises(ParameterRangeError):
        monte_carlo_error(p, rho, seed=5, n=0)


def test_protocol_report_reference_run():
    report = protocol_report(uniform(1024, exact=False), staircase(1024, exact=False),
                             0.1, 0.1, seed=0, samples=100_000)
    assert report.u == 88
    assert report.bits_sent == pytest.approx(2 * math.log2(89))
    assert report.bits_sent_code == 13
    assert report.rate_bound_applies
    assert report.bits_sent <= report.rate_bound
    assert max(report.local_error_rho, report.local_error_sigma) <= 0.2
    assert report.mc_error_rho is not None and report.mc_sigma_sigma is not None
    assert report.nonempty_buckets <= report.bucket_count_bound == 89 ** 2
    assert report.max_spread_error <= report.spread_error_bound + 1e-12
    assert report.induced("rho").d == 1024


def test_protocol_report_without_simulation():
    report = protocol_report(uniform(16, exact=False), staircase(16, exact=False),
                             0.2, 0.2, seed=None)
    assert report.samples == 0
    assert report.mc_error_rho is None
    assert ProtocolReport.from_dict(report.to_dict()) == report


def test_protocol_report_reuses_a_built_table():
    rho, sigma = uniform(16, exact=False), staircase(16, exact=False)
    table = build_protocol(rho, sigma, 0.2, 0.2)
    reused = protocol_report(rho, sigma, 0.2, 0.2, seed=None, protocol=table)
    assert reused == protocol_report(rho, sigma, 0.2, 0.2, seed=None)
    with pytest.raises(DimensionMismatchError):
        protocol_report(rho, sigma, 0.1, 0.2, seed=None, protocol=table)


def test_rate_bound_formula():
    expected = 2 * math.log2(math.log2(10240)) + 2 * math.log2(10) + 3
    assert protocol_rate_bound(1024, 0.1, 0.1) == pytest.approx(expected)


def test_bucket_protocol_dict_round_trip():
    p = build_protocol(uniform(8), staircase(8), Fraction(1, 5), Fraction(1, 3))
    back = BucketProtocol.from_dict(p.to_dict())
    assert back.buckets == p.buckets
    assert back.symbol_to_bucket == p.symbol_to_bucket
    assert back.delta == Fraction(1, 5)

    data = p.to_dict()
    data["buckets"] = data["buckets"][1:]
    with pytest.raises(InvalidInputError):
        BucketProtocol.from_dict(data)


def test_ki_error_functions():
    rho = uniform(256, exact=False)
    sigma = staircase(256, exact=False)
    p = build_protocol(rho, sigma, 0.2, 0.2)
    report = ki_error_functions(rho, sigma, p)
    assert 0.0 <= report.f <= report.f_bound
    assert 0.0 <= report.lam <= 1.0
    assert report.one_minus_lambda <= report.leakage_bound + 1e-12
    assert report.g is not None and not report.degenerate
    assert ki_rate_lower_bound(rho, sigma, p) == pytest.approx(report.rate_lower_bound)


def test_ki_sensitivity_clamps_large_parameter():
    report = ki_sensitivity(4096)
    assert report.raw_parameter == pytest.approx(2.25)
    assert report.clamped
    assert 0 < report.delta < 0.5 and 0 < report.gamma < 1
    assert report.f <= report.f_target
    assert report.g is not None and report.g >= report.g_target


@pytest.mark.slow
def test_ki_sensitivity_unclamped():
    d = 2 ** 20
    report = ki_sensitivity(d)
    assert report.raw_parameter == pytest.approx(400 / 1024)
    assert not report.clamped
    assert report.f <= report.f_target
    assert report.g_target == pytest.approx(math.log2(d - 1) - 1.0)
    assert report.g is not None and report.g >= report.g_target
    assert np.isfinite(report.rate_lower_bound)
