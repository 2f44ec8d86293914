"""Acceptance criteria 1-11, each at its stated tolerance.

A pass/fail line per criterion is printed in the terminal summary.
"""
import time

import numpy as np
import pytest
from oracles import (
    darboux_closed_form,
    fem_eigenvalues_extrapolated,
    ode_eigenvalue,
    ode_norming,
)

from sturmspec import (
    eigensystem,
    eigenvalues,
    integrate,
    lab,
    make_grid_function,
    norming_constants,
    spectral_map,
)
from sturmspec.inverse import (
    AdmissibilityError,
    darboux_eigenvalue,
    darboux_norming,
    glm_reconstruct,
    reconstruct,
    roundtrip_error,
)
from sturmspec.linearize import (
    T_apply,
    basis,
    frechet_forward,
    frechet_inverse,
    taylor_remainders,
)
from sturmspec.seqspace import SpectralData, check_omega_hat


def l2_mod_const(a, b):
    """L2 distance of two sample arrays on [0, pi] modulo constants."""
    a = getattr(a, "samples", a)
    b = getattr(b, "samples", b)
    d = np.asarray(a) - np.asarray(b)
    d = d - integrate(d) / np.pi
    return float(np.sqrt(integrate(d * d)))


# -- 1 -------------------------------------------------------------------------------

@pytest.mark.criterion(1, "free operator: sqrt(lam_k) = k, alpha_k = pi/2, N = 32")
def test_c01_free_operator(criterion):
    sigma = make_grid_function("zero", 512)
    eigenvalues(sigma, 1)  # JIT warm-up outside the timed region
    t0 = time.perf_counter()
    lam = eigenvalues(sigma, 32)
    alpha = norming_constants(sigma, lam)
    elapsed = time.perf_counter() - t0
    k = np.arange(1, 33)
    err_l = np.max(np.abs(np.sqrt(lam) - k))
    err_a = np.max(np.abs(alpha - np.pi / 2))
    criterion(f"max err {max(err_l, err_a):.1e}, {elapsed:.2f}s")
    assert err_l < 1e-9
    assert err_a < 1e-9
    assert elapsed < 5.0


# -- 2 -------------------------------------------------------------------------------

@pytest.mark.criterion(2, "constant potential sigma = c x, c in {1, 3}, k <= 16")
def test_c02_constant_potential(criterion):
    t0 = time.perf_counter()
    k = np.arange(1, 17)
    worst = 0.0
    for c in (1.0, 3.0):
        sigma = make_grid_function(f"{c}*x", 512)
        lam = eigenvalues(sigma, 16)
        alpha = norming_constants(sigma, lam)
        worst = max(worst, np.max(np.abs(lam - (k ** 2 + c))),
                    np.max(np.abs(alpha - (1 + c / k ** 2) * np.pi / 2)))
    elapsed = time.perf_counter() - t0
    criterion(f"max err {worst:.1e}, {elapsed:.2f}s")
    assert worst < 1e-8
    assert elapsed < 10.0


# -- 3 -------------------------------------------------------------------------------

def _random_piecewise(rng):
    kind = rng.choice(["steps", "pwlin"])
    pieces = int(rng.choice([2, 4, 8]))
    n_vals = pieces if kind == "steps" else pieces + 1
    vals = rng.uniform(-2.0, 2.0, n_vals).round(3).tolist()
    return f"{kind}:{vals}"


@pytest.mark.criterion(3, "first 8 eigenvalues vs finite-element oracle, 5 piecewise potentials")
def test_c03_matrix_oracle(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(5):
        spec = _random_piecewise(rng)
        sigma = make_grid_function(spec, 512)
        ours = eigenvalues(sigma, 8)
        ref = fem_eigenvalues_extrapolated(sigma.func, 8, n_el=4096)
        worst = max(worst, float(np.max(np.abs(ours - ref))))
    criterion(f"max err {worst:.1e}")
    assert worst < 1e-6


# -- 4 -------------------------------------------------------------------------------

def _darboux_cases():
    rng = np.random.default_rng(4)
    cases = []
    for i in range(10):
        coeffs = (rng.standard_normal(3) * 0.3).round(4).tolist()
        n = int(rng.integers(1, 4))
        kind = "eig" if i % 2 == 0 else "norm"
        frac = float(rng.uniform(0.2, 0.7) * rng.choice([-1, 1]))
        cases.append((f"coeffs:{coeffs}", n, kind, frac))
    return cases


@pytest.mark.criterion(4, "single-datum surgery, 10 random cases")
def test_c04_darboux_surgery(criterion):
    worst = 0.0
    N = 10
    for spec, n, kind, frac in _darboux_cases():
        sigma = make_grid_function(spec, 512)
        before = spectral_map(sigma, N)
        lam, alpha = before.lambdas.copy(), before.alphas.copy()
        if kind == "eig":
            bound = (lam[n] - lam[n - 1]) if frac > 0 else (
                (lam[n - 1] - lam[n - 2]) if n > 1 else lam[0] + 1.0)
            xi = frac * bound
            out = darboux_eigenvalue(sigma, n, xi).sigma_out
            lam[n - 1] += xi
        else:
            xi = frac * alpha[n - 1]
            out = darboux_norming(sigma, n, xi).sigma_out
            alpha[n - 1] += xi
        after = spectral_map(out, N)
        worst = max(worst, float(np.max(np.abs(after.lambdas - lam))),
                    float(np.max(np.abs(after.alphas - alpha))))
    criterion(f"max err {worst:.1e}")
    assert worst < 1e-6


# -- 5 -------------------------------------------------------------------------------

@pytest.mark.criterion(5, "GLM vs closed-form surgery (1e-7) and vs sequential, N = 6 (1e-5)")
def test_c05_glm_single_vs_closed_form(criterion):
    worst = 0.0
    for spec, n, xi, kind in [("0.3*cos(2t)+0.1*x", 2, 0.7, "eig"),
                              ("0.2*cos(t)-0.1*cos(3t)", 1, -0.5, "norm"),
                              ("zero", 3, -2.0, "eig"),
                              ("x/4", 2, 0.6, "norm")]:
        sigma = make_grid_function(spec, 512)
        lam_k = eigenvalues(sigma, n + 1)
        lam_n = ode_eigenvalue(sigma.func, lam_k[n - 1] - 0.5, lam_k[n - 1] + 0.5)
        alpha_n = ode_norming(sigma.func, lam_n)
        data = spectral_map(sigma, n + 2)
        lams, alphas = data.lambdas.copy(), data.alphas.copy()
        if kind == "eig":
            lams[n - 1] += xi
            ref, _ = darboux_closed_form(sigma.func, [lam_n + xi, lam_n],
                                         [(lam_n + xi) / alpha_n, -lam_n / alpha_n], sigma.x)
        else:
            alphas[n - 1] += xi
            ref, _ = darboux_closed_form(sigma.func, [lam_n],
                                         [lam_n * (1 / (alpha_n + xi) - 1 / alpha_n)], sigma.x)
        glm = glm_reconstruct(sigma, SpectralData.from_pairs(lams, alphas))
        worst = max(worst, l2_mod_const(glm, ref))
    criterion(f"single-datum max L2 {worst:.1e}")
    assert worst < 1e-7


def _perturbed_free_data(N, seed, scale=0.3):
    rng = np.random.default_rng(seed)
    k = np.arange(1, N + 1)
    lam = k ** 2 + rng.uniform(-scale, scale, N) * (2 * k - 1) / 2
    alpha = np.pi / 2 + rng.uniform(-scale, scale, N)
    return SpectralData.from_pairs(lam, alpha)


@pytest.mark.criterion(5, "GLM vs closed-form surgery (1e-7) and vs sequential, N = 6 (1e-5)")
def test_c05_glm_multi_vs_sequential(criterion):
    worst = 0.0
    for seed in range(3):
        target = _perturbed_free_data(6, seed)
        a = reconstruct(target, "glm")
        b = reconstruct(target, "seq")
        worst = max(worst, l2_mod_const(a, b))
    criterion(f"N = 6 GLM vs sequential L2 {worst:.1e}")
    assert worst < 1e-5


# -- 6 -------------------------------------------------------------------------------

@pytest.mark.criterion(6, "round trip F(F^-1(s)) = s for admissible data; rejections")
def test_c06_roundtrip(criterion):
    worst = 0.0
    for seed in range(4):
        target = _perturbed_free_data(6, 100 + seed)
        assert check_omega_hat(target).admissible
        for method in ("glm", "seq"):
            worst = max(worst, roundtrip_error(target, reconstruct(target, method)))
    criterion(f"max l2 {worst:.1e}")
    assert worst < 1e-5


@pytest.mark.criterion(6, "round trip F(F^-1(s)) = s for admissible data; rejections")
def test_c06_rejects_inadmissible(criterion):
    lam = np.array([1.0, 4.0, 9.0, 16.0])
    bad_alpha = SpectralData.from_pairs(lam, [np.pi / 2, -0.1, np.pi / 2, np.pi / 2])
    zero_alpha = SpectralData.from_pairs(lam, [np.pi / 2, 0.0, np.pi / 2, np.pi / 2])
    bad_order = SpectralData.from_pairs([1.0, 9.5, 9.0, 16.0], [np.pi / 2] * 4)
    for data in (bad_alpha, zero_alpha, bad_order):
        assert not check_omega_hat(data).admissible
        for method in ("glm", "seq"):
            with pytest.raises(AdmissibilityError):
                reconstruct(data, method)


# -- 7 -------------------------------------------------------------------------------

_TAYLOR_PAIRS = [("zero", "cos(2t)"), ("0.3*cos(2t)", "cos(4t)-0.5*cos(t)"),
                 ("x/4", "sin(t)"), ("0.2*cos(3t)", "cos(t)+0.3*cos(5t)"),
                 ("pwlin:[0.5,-0.3,0.2,0.4,-0.1]", "0.5*cos(2t)+sin(3t)")]


@pytest.mark.criterion(7, "Frechet derivative: Taylor ratio 100 +- 20%, F'(0) = T")
def test_c07_taylor_ratio(criterion):
    ratios = []
    for s_spec, f_spec in _TAYLOR_PAIRS:
        sigma = make_grid_function(s_spec, 512)
        f = make_grid_function(f_spec, 512)
        r = taylor_remainders(sigma, f, [1e-2, 1e-3], 16)
        ratios.append(r[0] / r[1])
    criterion("ratios " + ", ".join(f"{r:.1f}" for r in ratios))
    assert all(80.0 <= r <= 120.0 for r in ratios)


@pytest.mark.criterion(7, "Frechet derivative: Taylor ratio 100 +- 20%, F'(0) = T")
def test_c07_derivative_at_zero_is_T(criterion):
    sigma = make_grid_function("zero", 512)
    worst = 0.0
    for f_spec in ("cos(2t)", "0.7*cos(t)-cos(6t)", "x", "sin(3t)"):
        f = make_grid_function(f_spec, 512)
        worst = max(worst, float(np.max(np.abs(frechet_forward(sigma, f, 32) - T_apply(f, 32)))))
    criterion(f"|F'(0) - T| {worst:.1e}")
    assert worst < 1e-5


# -- 8 -------------------------------------------------------------------------------

@pytest.mark.criterion(8, "biorthogonality (phi_j, psi_k) = delta_jk, j, k <= 20")
def test_c08_biorthogonality(criterion):
    worst = 0.0
    for spec in ("zero", "x/4", "0.3*cos(2t)"):
        es = eigensystem(make_grid_function(spec, 512), 10)
        g = basis(es, "phi").gram(basis(es, "psi"))
        worst = max(worst, float(np.max(np.abs(g - np.eye(20)))))
    criterion(f"max deviation {worst:.1e}")
    assert worst < 1e-6


# -- 9 -------------------------------------------------------------------------------

@pytest.mark.criterion(9, "inverse derivative returns band-limited f, K = 64")
def test_c09_inverse_derivative(criterion):
    worst = 0.0
    for s_spec in ("zero", "0.3*cos(2t)", "x/4"):
        es = eigensystem(make_grid_function(s_spec, 512), 32)
        for f_spec in ("cos(2t)+0.5*cos(4t)", "cos(6t)-0.3*cos(2t)"):
            f = make_grid_function(f_spec, 512)
            back = frechet_inverse(es, frechet_forward(es, f, 64))
            worst = max(worst, l2_mod_const(back, f))
    criterion(f"max L2 {worst:.1e}")
    assert worst < 1e-3


# -- 10 ------------------------------------------------------------------------------

@pytest.mark.criterion(10, "stability envelopes at theta = 1, r = 1, h = 0.3, 50 pairs; trend")
def test_c10_stability_envelope(criterion):
    t0 = time.perf_counter()
    rep = lab.run_stability(1.0, 1.0, 0.3, 50, seed=7)
    elapsed = time.perf_counter() - t0
    ratios = np.array([s[3] for s in rep.samples])
    criterion(f"C1 {rep.C1_emp:.3g}, C2 {rep.C2_emp:.3g}, {ratios.size} ratios, {elapsed:.0f}s")
    assert ratios.size >= 50
    assert np.all(np.isfinite(ratios)) and np.all(ratios > 0)
    assert 0 < rep.C1_emp <= rep.C2_emp
    assert rep.C2_emp / rep.C1_emp < 1e3
    assert elapsed < 300


@pytest.mark.criterion(10, "stability envelopes at theta = 1, r = 1, h = 0.3, 50 pairs; trend")
def test_c10_degradation_trend(criterion):
    t0 = time.perf_counter()
    rows = lab.degradation_trend(1.0, 1.0, h_small=0.1, h_large=0.4, seeds=range(5), n_pairs=10)
    elapsed = time.perf_counter() - t0
    votes = sum(r[3] for r in rows)
    criterion(f"trend holds on {votes}/5 seeds, {elapsed:.0f}s")
    assert votes >= 3
    assert elapsed < 300


# -- 11 ------------------------------------------------------------------------------

@pytest.mark.criterion(11, "smoothing: tail slope of Phi <= -(tau + 0.4)")
@pytest.mark.parametrize("theta", [0.5, 1.0, 1.5])
def test_c11_smoothing(criterion, theta):
    rep = lab.run_smoothing(theta, n_samples=5, seed=0)
    criterion(f"theta {theta}: worst slope {rep.slope:.2f} vs {rep.threshold:.2f}")
    assert rep.passed
