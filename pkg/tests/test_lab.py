import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sturmspec import make_grid_function, spectral_map
from sturmspec.direct import eigenvalues
from sturmspec.funcspace import sobolev_norm
from sturmspec.lab import (
    EPS_FILTER,
    SmoothingReport,
    StabilityReport,
    degradation_trend,
    expected_tau,
    remainder_sequence,
    run_smoothing,
    run_stability,
    sample_gamma,
    smoothing_single,
    stability_ratio,
    tail_slope,
)
from sturmspec.seqspace import check_omega

# -- sampler ---------------------------------------------------------------------------

def test_sample_gamma_deterministic():
    a = sample_gamma(1.0, 1.0, 1)
    b = sample_gamma(1.0, 1.0, 1)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, sample_gamma(1.0, 1.0, 2).samples)
    assert check_omega(spectral_map(a, 16)).in_omega


def test_sample_gamma_small_radius():
    s = sample_gamma(1.0, 1e-9, 3)
    assert np.max(np.abs(s.samples)) < 1e-8
    assert abs(eigenvalues(s, 1)[0] - 1.0) < 1e-7


def test_sample_gamma_floor_batch():
    lam1 = [eigenvalues(sample_gamma(1.0, 2.0, i), 1)[0] for i in range(50)]
    assert min(lam1) >= 0.5


def test_sample_gamma_radius_before_shift():
    # without a shift the sample lies in the ball of radius R
    for seed in range(5):
        s = sample_gamma(0.5, 0.3, seed)
        assert sobolev_norm(s, 0.5) <= 0.3 * (1 + 1e-6)


def test_sample_gamma_rejects_bad_radius():
    with pytest.raises(ValueError):
        sample_gamma(1.0, 0.0, 0)


# -- stability -------------------------------------------------------------------------

def test_identical_pair_is_filtered():
    s = make_grid_function("0.3*cos(2t)", 512)
    assert math.isnan(stability_ratio(s, s, 1.0))


def test_near_linear_pair_ratio():
    r = stability_ratio(make_grid_function("zero", 512), make_grid_function("0.1*cos(2t)", 512), 1.0)
    assert 0.2 <= r <= 5


@pytest.fixture(scope="module")
def small_run():
    return run_stability(1.0, 1.0, 0.3, 8, seed=2)


def test_stability_two_sided(small_run):
    rep = small_run
    assert len(rep.samples) >= 8
    assert {d for d, *_ in rep.samples} == {"forward", "reverse"}
    for _, ds, dd, ratio in rep.samples:
        assert ds > EPS_FILTER and dd > EPS_FILTER
        assert 0 < ratio < math.inf
    assert 0 < rep.C1_emp <= rep.C2_emp < math.inf
    assert rep.R_observed > 0


def test_stability_deterministic(small_run):
    again = run_stability(1.0, 1.0, 0.3, 8, seed=2)
    assert again.to_json() == small_run.to_json()


def test_stability_report_formats(small_run):
    d = json.loads(small_run.to_json())
    assert d["C1_emp"] == small_run.C1_emp and len(d["samples"]) == len(small_run.samples)
    rows = small_run.to_csv().strip().splitlines()
    assert rows[0] == "pair_id,d_sigma,d_data,ratio,direction"
    assert len(rows) == len(small_run.samples) + 1
    first = rows[1].split(",")
    assert float(first[3]) == small_run.samples[0][3]


def test_stability_needs_two_pairs():
    with pytest.raises(ValueError):
        run_stability(1.0, 1.0, 0.3, 1)


def test_empty_region_gives_empty_report():
    rep = run_stability(1.0, 1e-6, 0.3, 4, seed=0, reverse=False, R=2.0)
    assert rep.samples == [] and math.isnan(rep.C1_emp)


def test_degradation_trend_strict_at_larger_radius():
    # at r = 1 the gap constraint rarely binds; at r = 3 it does
    rows = degradation_trend(theta=1.0, r=3.0, seeds=range(5), n_pairs=10)
    assert sum(lo >= hi for _, lo, hi, _ in rows) >= 3
    assert sum(lo > hi for _, lo, hi, _ in rows) >= 3


# -- smoothing -------------------------------------------------------------------------

@pytest.mark.parametrize("theta,tau", [(0.25, 0.5), (0.5, 1.0), (1.0, 2.0), (1.5, 2.5), (3.0, 4.0)])
def test_expected_tau(theta, tau):
    assert expected_tau(theta) == tau


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.1, 10.0))
def test_tail_slope_of_power_law(p, amp):
    k = np.arange(1, 257, dtype=float)
    assert abs(tail_slope(amp * k ** -p) + p) < 0.05


def test_tail_slope_of_zero():
    assert tail_slope(np.zeros(64)) == -math.inf


def test_smoothing_zero_potential():
    z = make_grid_function("zero", 512)
    assert np.all(remainder_sequence(z, 32, 1.0) == 0)
    assert smoothing_single(z, 1.0) <= -(expected_tau(1.0) + 0.4)


def test_smoothing_smooth_potential():
    assert smoothing_single(make_grid_function("0.5*cos(2t)", 1024), 1.0) <= -2.4


def test_smoothing_report():
    rep = run_smoothing(0.5, n_samples=2, seed=0, N=32, M=512)
    assert isinstance(rep, SmoothingReport)
    assert rep.tau_expected == 1.0 and rep.threshold == pytest.approx(-1.4)
    assert len(rep.slopes) == 2 and rep.slope == max(rep.slopes)
    assert json.loads(rep.to_json())["slope"] == rep.slope
    with pytest.raises(ValueError):
        run_smoothing(0.0)


def test_stability_report_spread():
    rep = StabilityReport(1.0, 1.0, 0.3, 1.0, samples=[("forward", 1.0, 2.0, 0.5),
                                                        ("reverse", 3.0, 1.0, 3.0)]).finalize()
    assert rep.C1_emp == 0.5 and rep.C2_emp == 3.0 and rep.spread == 6.0
