"""Numerical experiments: random admissible potentials, empirical two-sided
stability envelopes and the decay of the nonlinear part of the spectral map.

All randomness flows from ``numpy.random.default_rng`` seeded per call (and
per pair through ``SeedSequence.spawn``), so equal seeds give equal reports.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import direct
from .direct import eigenvalues, spectral_map
from .funcspace import GridFunction, SobolevParams, from_callable, sobolev_norm
from .inverse import AdmissibilityError, glm_reconstruct
from .linearize import T_apply
from .seqspace import (
    DEFAULT_ETA,
    SpectralData,
    check_omega,
    check_omega_hat,
    in_omega_rh,
    ld_decompose,
    ld_norm,
)

log = logging.getLogger(__name__)

DECAY_OFFSET = 0.55
EPS_FILTER = 1e-8
PHI_FLOOR = 1e-9      # below this Phi is solver round-off, not signal


def _cosine_series(c: np.ndarray):
    j = np.arange(1, c.size + 1)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.cos(np.multiply.outer(x, j)) @ c

    return f


def sample_gamma(theta: float, R: float, seed, *, M: int = 512, n_modes: int = 64,
                 eta: float = DEFAULT_ETA, max_tries: int = 30) -> GridFunction:
    """Random potential in the W_2^theta ball of radius R with lam_1 >= eta.

    Cosine coefficients are Gaussian with envelope j^-(theta + 0.55) and the
    result is scaled to a random radius in (0, R]. If lam_1 falls below eta,
    a multiple of x is added (for theta < 3/2, where x itself lies in the
    space); for smoother classes the amplitude is reduced instead.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(seed)
    j = np.arange(1, n_modes + 1, dtype=float)
    c = rng.standard_normal(n_modes) * j ** (-theta - DECAY_OFFSET)
    norm = math.sqrt(0.5 * math.pi * np.sum(j ** (2 * theta) * c * c))
    c *= R * rng.uniform(0.05, 1.0) / norm
    shift = 0.0
    for _ in range(max_tries):
        base = _cosine_series(c)
        func = (lambda x, b=base, s=shift: b(x) + s * np.asarray(x, dtype=float))
        sigma = from_callable(func, M, gauge=True, label=f"gamma(theta={theta},R={R},seed={seed})")
        lam1 = eigenvalues(sigma, 1)[0]
        if lam1 >= eta:
            return sigma
        if theta < 1.5:
            shift += eta - lam1 + 0.25
        else:
            c *= 0.7
    raise RuntimeError("could not enforce the eigenvalue floor")


# -- stability -------------------------------------------------------------------------

@dataclass
class StabilityReport:
    theta: float
    r: float
    h: float
    R_observed: float
    samples: list = field(default_factory=list)   # (direction, d_sigma, d_data, ratio)
    C1_emp: float = float("nan")
    C2_emp: float = float("nan")
    skipped: int = 0

    def finalize(self):
        ratios = [s[3] for s in self.samples]
        if ratios:
            self.C1_emp = float(min(ratios))
            self.C2_emp = float(max(ratios))
        return self

    @property
    def spread(self) -> float:
        return self.C2_emp / self.C1_emp

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["pair_id", "d_sigma", "d_data", "ratio", "direction"])
        for i, (d, a, b, r) in enumerate(self.samples):
            w.writerow([i, repr(a), repr(b), repr(r), d])
        return buf.getvalue()


def stability_ratio(sigma_a: GridFunction, sigma_b: GridFunction, theta: float, N: int = 16) -> float:
    """|sigma_a - sigma_b|_theta / |F(sigma_a) - F(sigma_b)|_theta for one pair."""
    ds = sobolev_norm(sigma_a - sigma_b, SobolevParams(theta, sigma_a.M))
    dd = ld_norm(spectral_map(sigma_a, N).s - spectral_map(sigma_b, N).s, theta)
    if ds < EPS_FILTER or dd < EPS_FILTER:
        return float("nan")
    return ds / dd


@dataclass
class _Candidate:
    sigma: GridFunction
    data: SpectralData
    ld: float
    h_max: float


def _candidates(theta, R, n, seed, N, M, n_modes):
    seeds = np.random.SeedSequence(seed).spawn(n)
    out = []
    for ss in seeds:
        sigma = sample_gamma(theta, R, ss, M=M, n_modes=n_modes)
        data = spectral_map(sigma, N, theta)
        rep = check_omega(data)
        out.append(_Candidate(sigma, data, ld_norm(data, theta), rep.h_max if rep.in_omega else -1.0))
    return out


def _reach(data: SpectralData, direction, r, h, theta, t_cap: float = 2.0) -> float:
    """Largest step along ``direction`` keeping the data admissible and in Omega(r, h)."""
    def inside(t):
        y = SpectralData(data.s + t * direction, theta)
        return check_omega_hat(y).admissible and in_omega_rh(y, r, h, theta)

    if inside(t_cap):
        return t_cap
    lo, hi = 0.0, t_cap
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if inside(mid) else (lo, mid)
    return lo


def run_stability(theta: float = 1.0, r: float = 1.0, h: float = 0.3, n_pairs: int = 50,
                  seed: int = 0, *, N: int = 16, M: int = 512, n_modes: int = 32,
                  R: float | None = None, reverse: bool = True, n_perturb: int = 4,
                  pool: list | None = None) -> StabilityReport:
    """Empirical constants in C1 |y - y1| <= |sigma - sigma1| <= C2 |y - y1|.

    Forward: pairs from a pool of sampled potentials whose data lie in
    Omega(r, h). Reverse: the data of a pool member are perturbed in the first
    ``n_perturb`` indices (staying in Omega(r, h)), the potential is rebuilt
    by the finite-rank GLM solver, and the same ratio is recorded.
    The ratio is |sigma - sigma1|_theta / |y - y1|_theta.
    """
    if n_pairs < 2:
        raise ValueError("n_pairs must be >= 2")
    R = 2 * r if R is None else R
    if pool is None:
        pool = _candidates(theta, R, max(2 * n_pairs, 8), seed, N, M, n_modes)
    members = [c for c in pool if c.h_max >= h and c.ld <= r]
    report = StabilityReport(theta, r, h, R_observed=max((sobolev_norm(c.sigma, theta)
                                                         for c in members), default=0.0))
    if len(members) < 2:
        log.warning("fewer than two pool members in Omega(r, h)")
        return report.finalize()
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(n_pairs + 1)[-1])
    p = SobolevParams(theta, M)
    for _ in range(n_pairs):
        a, b = rng.choice(len(members), size=2, replace=False)
        A, B = members[a], members[b]
        ds = sobolev_norm(A.sigma - B.sigma, p)
        dd = ld_norm(A.data - B.data, theta)
        if ds < EPS_FILTER or dd < EPS_FILTER:
            report.skipped += 1
            continue
        report.samples.append(("forward", ds, dd, ds / dd))
    if reverse:
        for _ in range(n_pairs):
            A = members[rng.integers(len(members))]
            direction = np.zeros(A.data.K)
            k = np.arange(1, 2 * n_perturb + 1)
            direction[: 2 * n_perturb] = rng.standard_normal(2 * n_perturb) / k ** theta
            direction /= np.linalg.norm(direction)
            t = _reach(A.data, direction, r, h, theta) * rng.uniform(0.05, 1.0)
            target = SpectralData(A.data.s + t * direction, theta)
            try:
                tau = glm_reconstruct(A.sigma, target, n_perturb)
            except (AdmissibilityError, direct.NumericalError) as exc:
                log.info("reverse pair skipped: %s", exc)
                report.skipped += 1
                continue
            ds = sobolev_norm(tau - A.sigma, p)
            dd = ld_norm(target - A.data, theta)
            if ds < EPS_FILTER or dd < EPS_FILTER:
                report.skipped += 1
                continue
            report.samples.append(("reverse", ds, dd, ds / dd))
    return report.finalize()


def degradation_trend(theta=1.0, r=1.0, h_small=0.1, h_large=0.4, seeds=range(5), n_pairs=10,
                      **kw) -> list:
    """C2_emp at a small and a large gap parameter, on a shared pool per seed."""
    rows = []
    N, M, n_modes = kw.get("N", 16), kw.get("M", 512), kw.get("n_modes", 32)
    for s in seeds:
        pool = _candidates(theta, kw.get("R", 2 * r), max(2 * n_pairs, 8), s, N, M, n_modes)
        lo = run_stability(theta, r, h_small, n_pairs, s, pool=pool, **kw)
        hi = run_stability(theta, r, h_large, n_pairs, s, pool=pool, **kw)
        rows.append((s, lo.C2_emp, hi.C2_emp, bool(lo.C2_emp >= hi.C2_emp)))
    return rows


# -- smoothing -------------------------------------------------------------------------

def expected_tau(theta: float) -> float:
    return 2 * theta if theta <= 1 else theta + 1


@dataclass
class SmoothingReport:
    theta: float
    tau_expected: float
    slopes: list = field(default_factory=list)
    slopes_odd: list = field(default_factory=list)
    slopes_even: list = field(default_factory=list)
    threshold: float = float("nan")
    passed: bool = False

    @property
    def slope(self) -> float:
        return max(self.slopes) if self.slopes else float("nan")

    def to_json(self) -> str:
        d = asdict(self)
        d["slope"] = self.slope
        return json.dumps(d, indent=1)


def tail_slope(seq, lo_frac: float = 0.125, n_blocks: int = 6) -> float:
    """Slope of log RMS(seq) over geometric blocks against log k on the tail."""
    x = np.abs(np.asarray(seq, dtype=float))
    K = x.size
    edges = np.unique(np.round(np.geomspace(max(2, lo_frac * K), K, n_blocks + 1)).astype(int))
    logs_k, logs_v = [], []
    for a, b in itertools.pairwise(edges):
        block = x[a - 1:b]
        rms = math.sqrt(float(np.mean(block ** 2)))
        if rms > 0:
            logs_k.append(math.log(math.sqrt(a * b)))
            logs_v.append(math.log(rms))
    if len(logs_k) < 2:
        return -math.inf
    return float(np.polyfit(logs_k, logs_v, 1)[0])


def remainder_sequence(sigma: GridFunction, N: int, theta: float) -> np.ndarray:
    """Phi(sigma) = F(sigma) - T sigma with the e-components allowed at tau removed."""
    phi = spectral_map(sigma, N).s - T_apply(sigma, 2 * N)
    if np.max(np.abs(phi)) < PHI_FLOOR:
        return np.zeros_like(phi)
    return ld_decompose(phi, expected_tau(theta)).remainder if 2 * N >= 16 else phi


def run_smoothing(theta: float, n_samples: int = 5, seed: int = 0, *, N: int = 64,
                  M: int = 1024, n_modes: int | None = None, R: float = 1.0) -> SmoothingReport:
    """Tail decay of the nonlinear part for sampled potentials.

    The sampler uses at least 4N cosine modes, so the roughness of sigma is
    present throughout the fitted tail.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    tau = expected_tau(theta)
    rep = SmoothingReport(theta, tau, threshold=-(tau + 0.4))
    n_modes = n_modes or 4 * N
    for ss in np.random.SeedSequence(seed).spawn(n_samples):
        sigma = sample_gamma(theta, R, ss, M=M, n_modes=n_modes)
        rem = remainder_sequence(sigma, N, theta)
        rep.slopes.append(tail_slope(rem))
        rep.slopes_odd.append(tail_slope(rem[0::2]))
        rep.slopes_even.append(tail_slope(rem[1::2]))
    rep.passed = bool(rep.slopes) and all(s <= rep.threshold for s in rep.slopes)
    return rep


def smoothing_single(sigma: GridFunction, theta: float, N: int = 64) -> float:
    """Tail slope for one given potential."""
    return tail_slope(remainder_sequence(sigma, N, theta))
