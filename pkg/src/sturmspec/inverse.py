"""Reconstruction of sigma from finitely many modified spectral data.

Both routes rest on the same algebra. For a kernel of finite rank
``F(x, t) = sum_i w_i g_i(x) g_i(t)`` built from reference solutions
``g_i = u(., lam_i)`` the transformation kernel is ``k(x, t) = sum_i c_i(x) g_i(t)``
with ``(I + W A(x)) c = -W g(x)``, ``A_ij(x) = int_0^x g_i g_j``, and the new
potential is ``sigma + 2 k(x, x) = sigma - 2 (ln det(I + W A))'``.

Running integrals come straight from the ODE sweep, and the correction is
tabulated on the fine integration mesh so that later solves see it without
resampling loss.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate

from . import direct
from .direct import NumericalError, eigenvalues, norming_constants, spectral_map
from .funcspace import GridFunction, make_grid_function
from .seqspace import DomainError, SpectralData, check_omega_hat

log = logging.getLogger(__name__)

G_FLOOR = 1e-10
_MERGE_TOL = 1e-12
_ALPHA_TOL = 1e-11


class AdmissibilityError(ValueError):
    """Requested data cannot be realised by the requested step."""


@dataclass(frozen=True, eq=False)
class DegenerateKernel:
    """``F(x, t) = sum_i weights[i] * g_i(x) * g_i(t)`` with ``g_i = u(., lams[i])``."""

    sigma_ref: GridFunction
    lams: np.ndarray
    weights: np.ndarray
    min_steps: int = direct.DEFAULT_MIN_STEPS

    @property
    def rank(self) -> int:
        return self.lams.size

    @property
    def gens(self) -> list:
        if self.rank == 0:
            return []
        U, _, _ = direct._batch(self.sigma_ref, self.lams, min_steps=self.min_steps)
        return [GridFunction(u) for u in U]

    def __call__(self, x, t) -> np.ndarray:
        """Kernel values on the sample grid indices' outer product (x, t arrays of samples)."""
        g = np.array([gi(np.atleast_1d(x)) for gi in self.gens]) if self.rank else None
        h = np.array([gi(np.atleast_1d(t)) for gi in self.gens]) if self.rank else None
        if g is None:
            return np.zeros((np.size(x), np.size(t)))
        return np.einsum("i,ix,it->xt", self.weights, g, h)


@dataclass(frozen=True)
class GlmSolution:
    kxx: GridFunction
    det: np.ndarray        # det(I + W A) on the fine mesh
    nodes: np.ndarray
    cond_max: float


def _fine_spline(nodes, values):
    return interpolate.make_interp_spline(nodes, values, k=5)


def glm_solve(kernel: DegenerateKernel) -> GlmSolution:
    """Diagonal k(x, x) of the transformation kernel for a finite-rank F."""
    sigma = kernel.sigma_ref
    mesh = direct._mesh(sigma, kernel.min_steps)
    if kernel.rank == 0:
        z = np.zeros(mesh.nodes.size)
        return GlmSolution(GridFunction(np.zeros(sigma.M + 1), lambda x: 0.0 * np.asarray(x)),
                           np.ones_like(z), mesh.nodes, 1.0)
    U, _, G = direct._batch(sigma, kernel.lams, full_gram=True, min_steps=kernel.min_steps,
                            fine=True)
    W = kernel.weights
    A = np.moveaxis(G, -1, 0)                       # (n, R, R)
    g = U.T                                          # (n, R)
    R = kernel.rank
    mat = np.eye(R)[None] + W[None, :, None] * A
    det = np.linalg.det(mat)
    if np.min(det) < G_FLOOR:
        raise AdmissibilityError(f"det(I + W A) reaches {np.min(det):.3e}; data not admissible")
    cond = float(np.max(np.linalg.cond(mat)))
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"GLM system singular (condition number {cond:.3e})")
    c = np.linalg.solve(mat, -(W[None, :] * g)[..., None])[..., 0]
    kxx_fine = np.einsum("ni,ni->n", c, g)
    spl = _fine_spline(mesh.nodes, kxx_fine)
    kxx = GridFunction(kxx_fine[mesh.out_idx], spl)
    return GlmSolution(kxx, det, mesh.nodes, cond)


def _apply_correction(sigma: GridFunction, kxx: GridFunction) -> GridFunction:
    """sigma + 2 k(x, x), keeping an evaluator that is exact up to the fine spline."""
    base = sigma.func if sigma.func is not None else sigma
    corr = kxx.func
    out = GridFunction(sigma.samples + 2 * kxx.samples,
                       lambda x: base(x) + 2 * corr(x), sigma.breaks)
    return out.gauged()


# -- single-datum surgery -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DarbouxStep:
    kind: str
    n: int
    xi: float
    sigma_in: GridFunction
    sigma_out: GridFunction
    G: GridFunction


def _steps(n: int, n_check: int = 0) -> int:
    return direct._steps_for(max(n, n_check) + 4)


def _finish(kind, n, xi, sigma, kernel) -> DarbouxStep:
    sol = glm_solve(kernel)
    out = _apply_correction(sigma, sol.kxx)
    mesh = direct._mesh(sigma, kernel.min_steps)
    G = GridFunction(sol.det[mesh.out_idx])
    return DarbouxStep(kind, n, float(xi), sigma, out, G)


def _identity(kind, n, xi, sigma) -> DarbouxStep:
    return DarbouxStep(kind, n, float(xi), sigma, sigma,
                       GridFunction(np.ones(sigma.M + 1)))


def darboux_norming(sigma: GridFunction, n: int, xi: float, *, lam_n=None, alpha_n=None,
                    min_steps=None) -> DarbouxStep:
    """Change alpha_n to alpha_n + xi keeping every other datum.

    ``G(x) = 1 + (1/(alpha_n + xi) - 1/alpha_n) lam_n int_0^x u^2`` and the new
    potential is ``sigma - 2 G'/G``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    steps = min_steps or _steps(n)
    if lam_n is None:
        lam_n = eigenvalues(sigma, n, min_steps=steps)[-1]
    if alpha_n is None:
        alpha_n = norming_constants(sigma, [lam_n], min_steps=steps)[0]
    if not xi > -alpha_n:
        raise DomainError(f"xi must exceed -alpha_n = {-alpha_n}")
    if xi == 0:
        return _identity("norming", n, xi, sigma)
    w = lam_n * (1.0 / (alpha_n + xi) - 1.0 / alpha_n)
    kernel = DegenerateKernel(sigma, np.array([lam_n]), np.array([w]), steps)
    return _finish("norming", n, xi, sigma, kernel)


def darboux_eigenvalue(sigma: GridFunction, n: int, xi: float, *, lams=None, alpha_n=None,
                       min_steps=None) -> DarbouxStep:
    """Move lam_n to lam_n + xi keeping the other eigenvalues and all norming constants.

    The new eigenvalue must stay strictly between lam_{n-1} and lam_{n+1}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    steps = min_steps or _steps(n + 1)
    if lams is None:
        lams = eigenvalues(sigma, n + 1, min_steps=steps)
    lam_n = lams[n - 1]
    new = lam_n + xi
    lower = lams[n - 2] if n > 1 else -np.inf
    if not (lower < new < lams[n]):
        raise AdmissibilityError(
            f"lam_{n} + xi = {new} leaves the interval ({lower}, {lams[n]})")
    if xi == 0:
        return _identity("eigenvalue", n, xi, sigma)
    if alpha_n is None:
        alpha_n = norming_constants(sigma, [lam_n], min_steps=steps)[0]
    kernel = DegenerateKernel(sigma, np.array([new, lam_n]),
                              np.array([new / alpha_n, -lam_n / alpha_n]), steps)
    return _finish("eigenvalue", n, xi, sigma, kernel)


# -- multi-datum reconstruction -------------------------------------------------------

def _target_pairs(target: SpectralData):
    rep = check_omega_hat(target)
    if not rep.admissible:
        raise AdmissibilityError(
            f"target data not admissible (monotone={rep.monotone}, positive={rep.positive}, "
            f"first bad index {rep.first_bad})")
    return target.lambdas, target.alphas


@dataclass
class ReconstructionLog:
    steps: list = field(default_factory=list)
    passes: int = 0


def reconstruct_sequential(target: SpectralData, sigma0: GridFunction | None = None, *,
                           M: int = 512, max_passes: int | None = None,
                           log_out: ReconstructionLog | None = None) -> GridFunction:
    """Move the first N data of ``sigma0`` onto ``target`` one datum at a time.

    Indices are visited from N down to 1; at each index the eigenvalue is moved,
    then the norming constant. An eigenvalue whose target lies beyond a
    neighbour that has not moved yet is deferred to a later pass; some index
    can always move, so at most N passes are needed.
    """
    lam_t, alpha_t = _target_pairs(target)
    N = lam_t.size
    sigma = make_grid_function("zero", M) if sigma0 is None else sigma0
    steps = direct._steps_for(N + 4)
    rec = log_out if log_out is not None else ReconstructionLog()
    pending = set(range(1, N + 1))
    max_passes = max_passes or N + 1
    for _ in range(max_passes):
        if not pending:
            break
        rec.passes += 1
        for n in sorted(pending, reverse=True):
            lams = eigenvalues(sigma, N + 1, min_steps=steps)
            xi = lam_t[n - 1] - lams[n - 1]
            lower = lams[n - 2] if n > 1 else -np.inf
            if not (lower < lam_t[n - 1] < lams[n]):
                continue
            if abs(xi) > 1e-13 * max(1.0, abs(lams[n - 1])):
                step = darboux_eigenvalue(sigma, n, xi, lams=lams, min_steps=steps)
                sigma = step.sigma_out
                rec.steps.append(("eigenvalue", n, xi))
            lam_n = lam_t[n - 1]
            alpha = norming_constants(sigma, [lam_n], min_steps=steps)[0]
            zeta = alpha_t[n - 1] - alpha
            if abs(zeta) > 1e-14:
                step = darboux_norming(sigma, n, zeta, lam_n=lam_n, alpha_n=alpha, min_steps=steps)
                sigma = step.sigma_out
                rec.steps.append(("norming", n, zeta))
            pending.discard(n)
    if pending:
        raise AdmissibilityError(f"could not place eigenvalues {sorted(pending)}")
    return sigma


def glm_build_kernel(sigma_ref: GridFunction, target: SpectralData, N: int | None = None,
                     min_steps: int | None = None) -> DegenerateKernel:
    """Finite-rank kernel from the first N target data and the reference data."""
    lam_t, alpha_t = _target_pairs(target)
    N = N or lam_t.size
    lam_t, alpha_t = lam_t[:N], alpha_t[:N]
    steps = min_steps or direct._steps_for(N + 4)
    lam_r = eigenvalues(sigma_ref, N + 1, min_steps=steps)
    alpha_r = norming_constants(sigma_ref, lam_r[:N], min_steps=steps)
    lam_r = lam_r[:N]
    lams, weights = [], []
    for k in range(N):
        if abs(lam_t[k] - lam_r[k]) <= _MERGE_TOL * max(1.0, abs(lam_r[k])):
            # norming constants agreeing to solver accuracy contribute nothing
            if abs(alpha_t[k] - alpha_r[k]) > _ALPHA_TOL * max(1.0, abs(alpha_r[k])):
                lams.append(lam_r[k])
                weights.append(lam_r[k] * (1.0 / alpha_t[k] - 1.0 / alpha_r[k]))
            continue
        close = np.abs(lam_r - lam_t[k]) <= 1e-8 * max(1.0, abs(lam_t[k]))
        close[k] = False
        if np.any(close):
            log.warning("target eigenvalue %d is close to a different reference eigenvalue", k + 1)
        lams += [lam_t[k], lam_r[k]]
        weights += [lam_t[k] / alpha_t[k], -lam_r[k] / alpha_r[k]]
    return DegenerateKernel(sigma_ref, np.array(lams, dtype=float),
                            np.array(weights, dtype=float), steps)


def glm_reconstruct(sigma_ref: GridFunction, target: SpectralData, N: int | None = None) -> GridFunction:
    """tau = sigma_ref + 2 k(x, x), returned in the zero-mean gauge."""
    kernel = glm_build_kernel(sigma_ref, target, N)
    if kernel.rank == 0:
        return sigma_ref.gauged()
    return _apply_correction(sigma_ref, glm_solve(kernel).kxx)


def reconstruct(target: SpectralData, method: str = "glm", sigma0: GridFunction | None = None,
                M: int = 512) -> GridFunction:
    sigma0 = make_grid_function("zero", M) if sigma0 is None else sigma0
    if method == "glm":
        return glm_reconstruct(sigma0, target)
    if method == "seq":
        return reconstruct_sequential(target, sigma0, M=M)
    raise ValueError("method must be 'glm' or 'seq'")


def roundtrip_error(target: SpectralData, sigma: GridFunction) -> float:
    """l2 distance between F(sigma) and the target over the target's length."""
    got = spectral_map(sigma, target.N)
    return float(np.linalg.norm(got.s - target.s))
