"""Direct Dirichlet problem for -y'' + sigma'(x) y = lam*y on [0, pi].

Everything works with the solution ``u(x, lam)`` normalised by ``u(0) = 0``,
``u^[1](0) = 1`` (``u^[1] = u' - sigma*u``). The canonical solution used for
norming constants is ``s = sqrt(lam) * u``.
"""
from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _shoot
from .funcspace import GridFunction
from .seqspace import SpectralData

log = logging.getLogger(__name__)

DEFAULT_MIN_STEPS = 4096
ZERO_LAMBDA = 1e-8


class NumericalError(RuntimeError):
    """Integration or root bracketing failed."""


@dataclass(frozen=True)
class _Mesh:
    nodes: np.ndarray
    hs: np.ndarray
    tab: np.ndarray
    out_idx: np.ndarray  # mesh index of each sample-grid node


_mesh_cache: weakref.WeakKeyDictionary[GridFunction, dict] = weakref.WeakKeyDictionary()


def _build_mesh(sigma: GridFunction, min_steps: int) -> _Mesh:
    M = sigma.M
    r = max(1, -(-min_steps // M))
    n = M * r
    nodes = np.pi * np.arange(n + 1) / n
    out_idx = np.arange(0, n + 1, r)
    if sigma.breaks:
        extra = [b for b in sigma.breaks
                 if 0 < b < np.pi and np.min(np.abs(nodes - b)) > 1e-12]
        if extra:
            nodes = np.union1d(nodes, extra)
            out_idx = np.searchsorted(nodes, np.pi * np.arange(M + 1) / M - 1e-13)
    hs = np.diff(nodes)
    pts = nodes[:-1, None] + _shoot.OFFSETS[None, :] * hs[:, None]
    if sigma.breaks:
        # one-sided limits at step ends so jumps sit exactly on step boundaries
        pts[:, 0] += 1e-10 * hs
        pts[:, -1] -= 1e-10 * hs
    tab = sigma(pts.ravel()).reshape(pts.shape)
    if not np.all(np.isfinite(tab)):
        raise NumericalError("sigma is not finite at integration nodes")
    return _Mesh(nodes, hs, np.ascontiguousarray(tab), out_idx.astype(np.int64))


def _mesh(sigma: GridFunction, min_steps: int = DEFAULT_MIN_STEPS) -> _Mesh:
    per = _mesh_cache.setdefault(sigma, {})
    if min_steps not in per:
        per[min_steps] = _build_mesh(sigma, min_steps)
    return per[min_steps]


def _steps_for(n_eig: int) -> int:
    # keep sqrt(lam)*h below ~0.025 for the largest eigenvalue requested
    return max(DEFAULT_MIN_STEPS, 128 * (n_eig + 2))


def _batch(sigma, lams, *, backward=False, full_gram=False, min_steps=DEFAULT_MIN_STEPS,
           fine=False):
    """Batch solve; results at the sample grid, or at every mesh node if ``fine``."""
    m = _mesh(sigma, min_steps)
    col = _shoot._COL_BWD if backward else _shoot._COL_FWD
    lams = np.ascontiguousarray(np.atleast_1d(np.asarray(lams, dtype=float)))
    out_idx = np.arange(m.nodes.size, dtype=np.int64) if fine else m.out_idx
    return _shoot.shoot_batch(lams, m.tab, m.hs, out_idx, backward, full_gram,
                              _shoot._A, _shoot._B, col)


def _end(sigma, lam, min_steps=DEFAULT_MIN_STEPS):
    m = _mesh(sigma, min_steps)
    scale = math.sqrt(max(lam, 1.0))
    return _shoot.shoot_end(float(lam), m.tab, m.hs, scale, _shoot._A, _shoot._B, _shoot._COL_FWD)


@dataclass(frozen=True)
class ShootingSolution:
    """Forward solution at ``lam``: u, its quasi-derivative u1 and running int of u^2."""

    u: GridFunction
    u1: GridFunction
    lam: float
    q_int: np.ndarray

    @property
    def s(self) -> np.ndarray:
        """Samples of sqrt(lam)*u (complex for negative lam)."""
        return np.emath.sqrt(self.lam) * self.u.samples


def solve_u(sigma: GridFunction, lam: float, min_steps: int = DEFAULT_MIN_STEPS) -> ShootingSolution:
    if not np.isfinite(lam):
        raise ValueError("lambda must be finite")
    U, V, G = _batch(sigma, [lam], min_steps=min_steps)
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
        raise NumericalError(f"integration overflowed at lambda={lam}")
    return ShootingSolution(GridFunction(U[0]), GridFunction(V[0]), float(lam), G[0, 0])


def solve_z(sigma: GridFunction, lam: float, min_steps: int = DEFAULT_MIN_STEPS) -> GridFunction:
    """Solution vanishing at pi, scaled so that ``int_0^pi z^2 = 1/lam``.

    Before scaling ``z^[1](pi) = 1``; scaling is by a positive factor.
    """
    if not lam > 0:
        raise ValueError("solve_z needs lambda > 0")
    Z, _, G = _batch(sigma, [lam], backward=True, min_steps=min_steps)
    total = -G[0, 0, 0]
    if not total > 0:
        raise NumericalError("degenerate backward solution")
    return GridFunction(Z[0] / math.sqrt(lam * total))


def eigenvalues(sigma: GridFunction, N: int, min_steps: int | None = None) -> np.ndarray:
    """The N smallest Dirichlet eigenvalues.

    Brackets come from the Pruefer phase at pi (k*pi exactly at lam_k, and
    increasing in lam), so every index is located without skipping; brentq on
    the phase then converges to the root of u(pi, lam).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    steps = min_steps or _steps_for(N)
    out = np.empty(N)

    def f(lam, k):
        return _end(sigma, lam, steps)[2] - k * math.pi

    lo = -1.0
    for _ in range(60):
        if f(lo, 1) < 0:
            break
        lo = 2 * lo - 1
    else:
        raise NumericalError("could not bracket the first eigenvalue from below")
    for k in range(1, N + 1):
        if k > 1:
            lo = out[k - 2]
        hi = max(lo + 1.0, (k + 0.5) ** 2)
        for _ in range(60):
            if f(hi, k) > 0:
                break
            hi = lo + 2 * (hi - lo)
        else:
            raise NumericalError(f"could not bracket eigenvalue {k}")
        out[k - 1] = optimize.brentq(f, lo, hi, args=(k,), xtol=1e-14, rtol=4 * np.finfo(float).eps,
                                     maxiter=200)
    return out


def norming_constants(sigma: GridFunction, lambdas, min_steps: int | None = None) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float)
    steps = min_steps or _steps_for(lambdas.size)
    _, _, G = _batch(sigma, lambdas, min_steps=steps)
    sq = G[:, 0, -1]
    return np.where(np.abs(lambdas) < ZERO_LAMBDA, sq, lambdas * sq)


def spectral_map(sigma: GridFunction, N: int, theta: float = 0.0) -> SpectralData:
    """Regularised data s_{2k} = sqrt(lam_k) - k, s_{2k-1} = alpha_k - pi/2, k <= N.

    The zero-mean representative of sigma is used, so adding a constant to
    sigma changes the result only through rounding of the samples.
    """
    sigma = sigma.gauged()
    lam = eigenvalues(sigma, N)
    alpha = norming_constants(sigma, lam)
    return SpectralData.from_pairs(lam, alpha, theta)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenpairs with the canonical eigenfunctions ``y_k = sqrt(lam_k) u_k``.

    ``y``/``dy`` and ``z``/``dz`` are sample arrays of shape (N, M+1); ``z``
    is the backward solution at lam_k scaled to ``int z^2 = 1/lam_k``.
    """

    sigma: GridFunction
    lambdas: np.ndarray
    alphas: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    z: np.ndarray | None = None
    dz: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.lambdas.size

    @property
    def min_steps(self) -> int:
        return _steps_for(self.N)

    def eigenfunction(self, k: int) -> GridFunction:
        return GridFunction(self.y[k - 1])


def _derivative(U, V, sigma):
    # u' = u^[1] + sigma*u, exact at the nodes
    return V + sigma.samples[None, :] * U


def eigensystem(sigma: GridFunction, N: int, with_z: bool = True) -> EigenSystem:
    lam = eigenvalues(sigma, N)
    if np.any(lam <= 0):
        raise ValueError("eigensystem requires positive eigenvalues (shift sigma by c*x)")
    steps = _steps_for(N)
    U, V, G = _batch(sigma, lam, min_steps=steps)
    alpha = lam * G[:, 0, -1]
    rl = np.sqrt(lam)[:, None]
    y = rl * U
    dy = rl * _derivative(U, V, sigma)
    z = dz = None
    if with_z:
        Z, W, Gz = _batch(sigma, lam, backward=True, min_steps=steps)
        scale = 1.0 / np.sqrt(lam * -Gz[:, 0, 0])
        z = Z * scale[:, None]
        dz = _derivative(Z, W, sigma) * scale[:, None]
    return EigenSystem(sigma, lam, alpha, y, dy, z, dz)


def residual_check(sigma: GridFunction, lambdas) -> np.ndarray:
    """|u(pi, lam_k)| / max|u(., lam_k)| for each returned eigenvalue."""
    U, _, _ = _batch(sigma, lambdas, min_steps=_steps_for(len(lambdas)))
    return np.abs(U[:, -1]) / np.max(np.abs(U), axis=1)
