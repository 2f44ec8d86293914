"""Linearisation of the spectral map: the model operator T, the derivative
families phi_k / psi_k and the Frechet derivatives of F and its inverse.

Indexing follows the interleaved data: odd positions 2k-1 carry norming
constants, even positions 2k carry eigenvalues. Functions taking an index
use 1-based positions.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import direct
from .direct import EigenSystem, eigensystem
from .funcspace import GridFunction, integrate
from .seqspace import SpectralData

FD_REL_STEP = 1e-5
# fourth-order central difference on offsets (-2, -1, 1, 2) * step
_FD_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _positions(K: int):
    k = np.arange(1, K // 2 + 1)
    return k


def T_apply(sigma: GridFunction, K: int, M_quad: int | None = None) -> np.ndarray:
    """The linear model: odd entries -int (pi-t) sigma cos(2kt), even -(1/pi) int sigma sin(2kt).

    When sigma has an exact evaluator the integrals use a grid with at least
    128 points per period of the fastest kernel (``M_quad`` overrides).
    """
    if K % 2:
        raise ValueError("K must be even")
    if M_quad is None:
        M_quad = max(sigma.M, 64 * K) if sigma.func is not None else sigma.M
    if M_quad == sigma.M:
        x, v = sigma.x, sigma.samples
    else:
        x = np.pi * np.arange(M_quad + 1) / M_quad
        v = sigma(x)
    br = sigma.breaks
    v = v - integrate(v, br) / np.pi
    k = _positions(K)[:, None]
    out = np.empty(K)
    out[0::2] = -integrate((np.pi - x) * v * np.cos(2 * k * x), br)
    out[1::2] = -integrate(v * np.sin(2 * k * x), br) / np.pi
    return out


def free_psi(K: int, M: int) -> np.ndarray:
    """The biorthogonal family at sigma = 0, zero-mean, shape (K, M+1)."""
    x = np.pi * np.arange(M + 1) / M
    k = _positions(K)[:, None]
    out = np.empty((K, M + 1))
    out[0::2] = (8 / np.pi ** 2) * np.sin(k * x) ** 2
    out[1::2] = -(4 / np.pi) * x * np.sin(2 * k * x)
    return out - integrate(out)[:, None] / np.pi


def T_inverse(s, M: int = 512) -> GridFunction:
    """Sum of s_k times the free biorthogonal family (the inverse of T)."""
    x = s.s if isinstance(s, SpectralData) else np.asarray(s, dtype=float)
    if x.size % 2:
        x = np.append(x, 0.0)
    return GridFunction(np.real(x) @ free_psi(x.size, M))


# -- lambda derivatives ------------------------------------------------------------

@dataclass(frozen=True)
class _Derivatives:
    dy2: np.ndarray   # d/dlam of y^2, y = sqrt(lam) u
    dzz: np.ndarray   # d/dlam of z z', z normalised by lam int z^2 = 1


_deriv_cache: weakref.WeakKeyDictionary[EigenSystem, _Derivatives] = weakref.WeakKeyDictionary()


def _lambda_derivatives(es: EigenSystem) -> _Derivatives:
    if es in _deriv_cache:
        return _deriv_cache[es]
    lam = es.lambdas
    step = FD_REL_STEP * np.maximum(1.0, np.abs(lam))
    pts = (lam[:, None] + _FD_OFFSETS[None, :] * step[:, None]).ravel()
    n = lam.size
    sig = es.sigma.samples[None, :]
    U, _, _ = direct._batch(es.sigma, pts, min_steps=es.min_steps)
    y2 = pts[:, None] * U * U
    dy2 = np.einsum("j,kjm->km", _FD_WEIGHTS, y2.reshape(n, 4, -1)) / step[:, None]
    Z, W, G = direct._batch(es.sigma, pts, backward=True, min_steps=es.min_steps)
    norm2 = 1.0 / (pts * -G[:, 0, 0])
    zz = norm2[:, None] * Z * (W + sig * Z)
    dzz = np.einsum("j,kjm->km", _FD_WEIGHTS, zz.reshape(n, 4, -1)) / step[:, None]
    out = _Derivatives(dy2, dzz)
    _deriv_cache[es] = out
    return out


def _check_index(es: EigenSystem, k: int):
    if not 1 <= k <= 2 * es.N:
        raise IndexError(f"index {k} outside 1..{2 * es.N}")


def _phi_rows(es: EigenSystem) -> np.ndarray:
    lam, alpha = es.lambdas, es.alphas
    d = _lambda_derivatives(es)
    out = np.empty((2 * es.N, es.sigma.M + 1))
    out[0::2] = (2 * alpha * lam)[:, None] * d.dzz
    out[1::2] = -es.dy * es.y / (alpha * np.sqrt(lam))[:, None]
    return out


def _psi_rows(es: EigenSystem) -> np.ndarray:
    lam, alpha = es.lambdas, es.alphas
    d = _lambda_derivatives(es)
    out = np.empty((2 * es.N, es.sigma.M + 1))
    out[0::2] = (2 / alpha ** 2)[:, None] * es.y ** 2
    out[1::2] = -(4 * np.sqrt(lam) / alpha)[:, None] * d.dy2
    return out - integrate(out, es.sigma.breaks)[:, None] / np.pi


def phi_basis(es: EigenSystem, k: int) -> GridFunction:
    """Gradient of the k-th datum: F'(sigma) f has entries (phi_k, f)."""
    _check_index(es, k)
    return GridFunction(_phi_rows(es)[k - 1])


def psi_basis(es: EigenSystem, k: int) -> GridFunction:
    """Element of the family biorthogonal to phi, projected to zero mean."""
    _check_index(es, k)
    return GridFunction(_psi_rows(es)[k - 1])


@dataclass(frozen=True, eq=False)
class BasisFamily:
    kind: str
    entries: np.ndarray
    source: EigenSystem

    def __len__(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, k: int) -> GridFunction:
        if not 1 <= k <= len(self):
            raise IndexError(k)
        return GridFunction(self.entries[k - 1])

    def gram(self, other: BasisFamily) -> np.ndarray:
        """Matrix of pairings (self_j, other_k)."""
        return integrate(self.entries[:, None, :] * other.entries[None, :, :],
                         self.source.sigma.breaks)


def basis(es: EigenSystem, kind: str) -> BasisFamily:
    if kind == "phi":
        rows = _phi_rows(es)
    elif kind == "psi":
        rows = _psi_rows(es)
    else:
        raise ValueError("kind must be 'phi' or 'psi'")
    rows.setflags(write=False)
    return BasisFamily(kind, rows, es)


def _eigensystem_for(sigma: GridFunction, K: int) -> EigenSystem:
    if K % 2 or K < 2:
        raise ValueError("K must be a positive even number")
    return eigensystem(sigma, K // 2, with_z=True)


def frechet_forward(sigma, f: GridFunction, K: int) -> np.ndarray:
    """Entries (phi_k, f), k = 1..K. ``sigma`` may also be a prebuilt EigenSystem."""
    es = sigma if isinstance(sigma, EigenSystem) else _eigensystem_for(sigma, K)
    if 2 * es.N < K:
        raise ValueError("eigensystem too short for K")
    rows = _phi_rows(es)[:K]
    return integrate(rows * f.samples[None, :], tuple(es.sigma.breaks) + tuple(f.breaks))


def frechet_inverse(es: EigenSystem, ds) -> GridFunction:
    """Sum of ds_k psi_k, the derivative of the inverse map applied to ds."""
    d = ds.s if isinstance(ds, SpectralData) else np.asarray(ds, dtype=float)
    if d.size > 2 * es.N:
        raise ValueError("ds longer than the available basis")
    rows = _psi_rows(es)[: d.size]
    return GridFunction(np.real(d) @ rows)


def taylor_remainders(sigma: GridFunction, f: GridFunction, ts, K: int):
    """Norms of F(sigma + t f) - F(sigma) - t F'(sigma) f for each t."""
    base = direct.spectral_map(sigma, K // 2).s
    lin = frechet_forward(sigma, f, K)
    out = []
    for t in ts:
        moved = direct.spectral_map(sigma + t * f, K // 2).s
        out.append(float(np.linalg.norm(moved - base - t * lin)))
    return np.array(out)
