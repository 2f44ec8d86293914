"""Regularised spectral-data sequences and the weighted spaces they live in.

Sequences are 1-based in the mathematics and 0-based in arrays: entry
``s[0]`` is s_1 = alpha_1 - pi/2, ``s[1]`` is s_2 = sqrt(lam_1) - 1, and so on.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .funcspace import ParameterError

HALF_PI = 0.5 * math.pi
DEFAULT_ETA = 0.5


class DomainError(ValueError):
    """Spectral parameter outside the admissible range."""


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Interleaved regularised data, truncated to an even length K."""

    s: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s)
        if not np.iscomplexobj(s):
            s = s.astype(float)
        if s.ndim != 1 or s.size % 2:
            raise ValueError("spectral data must be a 1-d sequence of even length")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @classmethod
    def from_pairs(cls, lambdas, alphas, theta: float = 0.0) -> SpectralData:
        lam = np.asarray(lambdas, dtype=float)
        alpha = np.asarray(alphas, dtype=float)
        k = np.arange(1, lam.size + 1)
        root = np.emath.sqrt(lam)
        s = np.empty(2 * lam.size, dtype=root.dtype)
        s[0::2] = alpha - HALF_PI
        s[1::2] = root - k
        return cls(s, theta)

    @property
    def K(self) -> int:
        return self.s.size

    @property
    def N(self) -> int:
        return self.s.size // 2

    @property
    def lambdas(self) -> np.ndarray:
        k = np.arange(1, self.N + 1)
        return np.real((self.s[1::2] + k) ** 2)

    @property
    def alphas(self) -> np.ndarray:
        return np.real(self.s[0::2]) + HALF_PI

    def with_theta(self, theta: float) -> SpectralData:
        return SpectralData(self.s, theta)

    def __sub__(self, other: SpectralData) -> SpectralData:
        if self.K != other.K:
            raise ValueError("length mismatch")
        return SpectralData(self.s - other.s, self.theta)

    def to_dict(self) -> dict:
        if np.iscomplexobj(self.s):
            s = [[float(v.real), float(v.imag)] for v in self.s]
        else:
            s = self.s.tolist()
        return {"theta": self.theta, "K": self.K, "s": s}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> SpectralData:
        raw = d["s"]
        if raw and isinstance(raw[0], (list, tuple)):
            s = np.array([complex(a, b) for a, b in raw])
        else:
            s = np.asarray(raw, dtype=float)
        if "K" in d and int(d["K"]) != s.size:
            raise ValueError("K does not match the sequence length")
        return cls(s, float(d.get("theta", 0.0)))

    def to_csv(self) -> str:
        """Columns k, s_k, value, kind (value is lam_j or alpha_j for j = ceil(k/2))."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "s_k", "value", "kind"])
        lam, alpha = self.lambdas, self.alphas
        for i, v in enumerate(self.s):
            k = i + 1
            j = (k + 1) // 2 - 1
            if k % 2:
                w.writerow([k, repr(float(np.real(v))), repr(float(alpha[j])), "alpha"])
            else:
                w.writerow([k, repr(complex(v) if np.iscomplexobj(self.s) else float(v)),
                            repr(float(lam[j])), "lambda"])
        return buf.getvalue()


def _as_array(s) -> np.ndarray:
    return s.s if isinstance(s, SpectralData) else np.asarray(s)


def e_sequence(p: int, K: int) -> np.ndarray:
    """The slowly decaying sequence e_p, truncated to K entries.

    Odd p = 2q-1 lives on even positions 2j with value (2j)^-(2q-1); even
    p = 2q lives on odd positions 2j-1 with value (2j)^-(2q).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    e = np.zeros(K)
    pos = np.arange(1, K + 1)
    if p % 2:
        mask = pos % 2 == 0
        e[mask] = pos[mask].astype(float) ** -p
    else:
        mask = pos % 2 == 1
        e[mask] = (pos[mask] + 1).astype(float) ** -p
    return e


def n_extensions(theta: float) -> int:
    """The integer m with m - 1/2 <= theta < m + 1/2."""
    if not theta >= 0:
        raise ParameterError(f"theta must be >= 0, got {theta}")
    return math.floor(theta + 0.5)


def weighted_norm(x, theta: float) -> float:
    x = np.asarray(x)
    k = np.arange(1, x.size + 1, dtype=float)
    return float(np.sqrt(np.sum(k ** (2 * theta) * np.abs(x) ** 2)))


@dataclass(frozen=True)
class LdDecomposition:
    m: int
    c: np.ndarray
    remainder: np.ndarray
    norm: float

    def reconstruct(self) -> np.ndarray:
        K = self.remainder.size
        out = np.array(self.remainder, dtype=self.remainder.dtype)
        for p, cp in enumerate(self.c, start=1):
            out = out + cp * e_sequence(p, K)
        return out


def ld_decompose(s, theta: float) -> LdDecomposition:
    """Split s into sum_p c_p e_p plus a weighted-l2 remainder.

    The c_p are fitted by least squares with weights k^(2 theta) on the tail
    window K/2 <= k <= K, where only the asymptotic components are visible.
    """
    x = _as_array(s)
    m = n_extensions(theta)
    K = x.size
    if K < 16:
        raise ValueError("ld_decompose needs K >= 16")
    if m == 0:
        return LdDecomposition(0, np.zeros(0), x.copy(), weighted_norm(x, theta))
    E = np.stack([e_sequence(p, K) for p in range(1, m + 1)], axis=1)
    k = np.arange(1, K + 1, dtype=float)
    win = k >= K / 2
    w = np.sqrt(k[win] ** (2 * theta))
    A = E[win] * w[:, None]
    b = x[win] * w
    c = np.linalg.lstsq(A, b, rcond=None)[0]
    rem = x - E @ c
    norm = math.sqrt(weighted_norm(rem, theta) ** 2 + float(np.sum(np.abs(c) ** 2)))
    return LdDecomposition(m, c, rem, norm)


def ld_norm(s, theta: float) -> float:
    return ld_decompose(s, theta).norm


@dataclass(frozen=True)
class OmegaReport:
    in_omega: bool
    h_max: float
    h_gap: float
    h_alpha: float
    s2_ok: bool


def check_omega(s, eta: float = DEFAULT_ETA) -> OmegaReport:
    """Membership in the data-side admissible set.

    Requires s_2 >= sqrt(eta) - 1 (i.e. lam_1 >= eta), s_{2k} - s_{2k+2} < 1
    and s_{2k-1} > -pi/2. ``h_gap`` and ``h_alpha`` are the largest h with
    gaps <= 1 - h and s_{2k-1} >= -pi/2 + h; ``h_max`` is their minimum.
    """
    x = _as_array(s)
    if x.size < 2:
        raise ValueError("need K >= 2")
    if np.iscomplexobj(x):
        if np.any(np.abs(x.imag) > 0):
            return OmegaReport(False, float("nan"), float("nan"), float("nan"), False)
        x = x.real
    odd = x[0::2]
    even = x[1::2]
    gaps = even[:-1] - even[1:]
    h_gap = 1.0 - float(gaps.max()) if gaps.size else 1.0
    h_alpha = float(odd.min()) + HALF_PI
    s2_ok = bool(even[0] >= math.sqrt(eta) - 1.0)
    ok = s2_ok and bool(np.all(gaps < 1.0)) and bool(np.all(odd > -HALF_PI))
    return OmegaReport(ok, min(h_gap, h_alpha), h_gap, h_alpha, s2_ok)


def in_omega_rh(s, r: float, h: float, theta: float, eta: float = DEFAULT_ETA) -> bool:
    """Membership in the closed ball of radius r intersected with the h-condition."""
    if not (r > 0 and 0 < h < 1):
        raise ParameterError("need r > 0 and 0 < h < 1")
    rep = check_omega(s, eta)
    return rep.s2_ok and rep.h_max >= h and ld_norm(s, theta) <= r


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    monotone: bool
    positive: bool
    first_bad: int | None = None


def check_omega_hat(s) -> AdmissibilityReport:
    """lam_k = (s_{2k} + k)^2 strictly increasing and alpha_k = s_{2k-1} + pi/2 > 0."""
    x = _as_array(s)
    if x.size < 2:
        raise ValueError("need K >= 2")
    k = np.arange(1, x.size // 2 + 1)
    lam = np.real((x[1::2] + k) ** 2)
    alpha = np.real(x[0::2]) + HALF_PI
    inc = np.diff(lam) > 0
    pos = alpha > 0
    bad = None
    if not inc.all():
        bad = int(np.argmin(inc)) + 2
    elif not pos.all():
        bad = int(np.argmin(pos)) + 1
    return AdmissibilityReport(bool(inc.all() and pos.all()), bool(inc.all()), bool(pos.all()), bad)


def shift_data(s, c: float) -> SpectralData:
    """Data of sigma + c*x: eigenvalues move by c, norming constants scale.

    The norming constant of index k is multiplied by (lam_k + c)/lam_k
    (by c when lam_k = 0): the normalised solution u is unchanged by the
    shift while alpha = lam * int u^2.
    """
    theta = s.theta if isinstance(s, SpectralData) else 0.0
    x = _as_array(s)
    K = x.size
    k = np.arange(1, K // 2 + 1)
    lam = np.real((x[1::2] + k) ** 2)
    new = lam + c
    if np.any(new <= 0):
        raise DomainError("lam_k + c must be positive for all retained k")
    alpha = np.real(x[0::2]) + HALF_PI
    zero = np.abs(lam) < 1e-14
    factor = np.where(zero, c, new / np.where(zero, 1.0, lam))
    out = np.empty(K)
    out[1::2] = np.sqrt(new) - k
    out[0::2] = factor * alpha - HALF_PI
    return SpectralData(out, theta)
