"""Real functions on [0, pi]: sampling, cosine analysis, quadrature, Sobolev norms.

A :class:`GridFunction` stores samples on the uniform grid ``x_i = pi*i/M``.
When it was built from a closed-form description it also keeps an exact
evaluator, which the ODE integrators use to query off-grid points; otherwise
values between grid nodes come from a quintic interpolating spline.
"""
from __future__ import annotations

import ast
import itertools
import json
import math
import operator
import re
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cache, cached_property, lru_cache

import numpy as np
from scipy import fft, interpolate
from scipy.special import bernoulli

DEFAULT_M = 512
MIN_M = 16


class InputError(ValueError):
    """Malformed or non-finite function input."""


class ParameterError(ValueError):
    """Out-of-range numerical parameter."""


def grid(M: int) -> np.ndarray:
    return np.pi * np.arange(M + 1) / M


@dataclass(frozen=True)
class SobolevParams:
    theta: float
    M: int = DEFAULT_M
    K_coeff: int | None = None

    def __post_init__(self):
        if not self.theta >= 0:
            raise ParameterError(f"theta must be >= 0, got {self.theta}")
        if self.K_coeff is not None and self.K_coeff > self.M // 2:
            raise ParameterError("K_coeff exceeds the Nyquist limit M/2")

    @property
    def n_modes(self) -> int:
        return self.M // 2 if self.K_coeff is None else self.K_coeff


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a real function on the uniform grid of ``M + 1`` points.

    ``func``, when present, evaluates the same function exactly at arbitrary
    points. ``breaks`` lists interior points where the function (or its
    derivative) jumps; integrators align their steps with them.
    """

    samples: np.ndarray
    func: Callable[[np.ndarray], np.ndarray] | None = None
    breaks: tuple = ()
    label: str = ""

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size < MIN_M + 1:
            raise InputError(f"need a 1-d sample array with at least {MIN_M + 1} points")
        if not np.all(np.isfinite(s)):
            raise InputError("non-finite samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.size - 1

    @property
    def x(self) -> np.ndarray:
        return grid(self.M)

    @cached_property
    def _dct(self) -> np.ndarray:
        return fft.dct(self.samples, type=1) / self.M

    @property
    def mean(self) -> float:
        """Trapezoid mean, i.e. the constant cosine mode."""
        return float(self._dct[0] / 2)

    @property
    def coeffs(self) -> np.ndarray:
        """Cosine coefficients c_1..c_{M-1} of ``sum_j c_j cos(j x)``."""
        return self._dct[1:-1]

    @cached_property
    def _spline(self):
        return interpolate.make_interp_spline(self.x, self.samples, k=5)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape).copy()
        return self._spline(x)

    # arithmetic keeps exact evaluators when both operands have one
    def _combine(self, other, op):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            samples = op(self.samples, other.samples)
            func = None
            if self.func is not None and other.func is not None:
                f, g = self.func, other.func
                func = lambda x: op(f(x), g(x))
            return GridFunction(samples, func, _merge_breaks(self.breaks, other.breaks))
        c = float(other)
        f = self.func
        func = None if f is None else (lambda x: op(f(x), c))
        return GridFunction(op(self.samples, c), func, self.breaks)

    def __add__(self, other):
        return self._combine(other, operator.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, operator.sub)

    def __mul__(self, other):
        return self._combine(other, operator.mul)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def gauged(self) -> GridFunction:
        """Zero-mean representative (the constant mode removed)."""
        m = self.mean
        if m == 0.0:
            return self
        out = self - m
        object.__setattr__(out, "label", self.label)
        return out

    def to_dict(self) -> dict:
        return {"M": self.M, "interval": [0.0, math.pi], "samples": self.samples.tolist(),
                "label": self.label}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> GridFunction:
        samples = np.asarray(d["samples"], dtype=float)
        if "M" in d and int(d["M"]) != samples.size - 1:
            raise InputError("M does not match the number of samples")
        return cls(samples, label=d.get("label", ""))


def _merge_breaks(a, b):
    return tuple(sorted(set(a) | set(b)))


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.M != g.M:
        raise InputError(f"grid mismatch: M={f.M} vs M={g.M}")


def from_callable(func, M: int = DEFAULT_M, gauge: bool = True, breaks=(), label="") -> GridFunction:
    x = grid(M)
    with np.errstate(all="ignore"):   # non-finite values are reported below
        vals = np.asarray(func(x), dtype=float)
    vals = np.broadcast_to(vals, x.shape).copy()
    if not np.all(np.isfinite(vals)):
        raise InputError("function is not finite on [0, pi]")
    gf = GridFunction(vals, func, tuple(breaks), label)
    return gf.gauged() if gauge else gf


# -- function mini-language ---------------------------------------------------

_SAFE_FUNCS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs,
    "tanh": np.tanh, "sinh": np.sinh, "cosh": np.cosh, "log": np.log,
}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_IMPLICIT_MUL = re.compile(r"(?<![\w.])(\d+(?:\.\d*)?|\.\d+)(?=\s*[A-DF-Za-df-z_(])")


def _compile_expr(text: str):
    src = _IMPLICIT_MUL.sub(r"\1*", text.replace("^", "**"))
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse function spec {text!r}") from exc

    def ev(node, x):
        if isinstance(node, ast.Expression):
            return ev(node.body, x)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in ("x", "t"):
                return x
            if node.id == "pi":
                return np.pi
            raise InputError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _SAFE_FUNCS and len(node.args) == 1 and not node.keywords):
            return _SAFE_FUNCS[node.func.id](ev(node.args[0], x))
        raise InputError(f"unsupported construct in {text!r}")

    with np.errstate(all="ignore"):
        ev(tree, np.linspace(0.0, np.pi, 5))  # fail early on bad names
    return lambda x: np.asarray(ev(tree, np.asarray(x, dtype=float)), dtype=float) + 0.0 * x


def _steps_func(values: Sequence[float]):
    v = np.asarray(values, dtype=float)
    edges = np.pi * np.arange(1, v.size) / v.size

    def f(x):
        return v[np.searchsorted(edges, np.asarray(x, dtype=float), side="right")]

    return f, tuple(edges)


def _pwlin_func(values: Sequence[float]):
    v = np.asarray(values, dtype=float)
    nodes = np.linspace(0.0, np.pi, v.size)
    return (lambda x: np.interp(x, nodes, v)), tuple(nodes[1:-1])


def _coeffs_func(coeffs: Sequence[float]):
    c = np.asarray(coeffs, dtype=float)
    j = np.arange(1, c.size + 1)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.cos(np.multiply.outer(x, j)) @ c

    return f


def parse_spec(spec: str):
    """Return ``(func, breaks)`` for a textual function description.

    Forms: ``zero``, ``x``, expressions in ``x``/``t`` such as ``0.3*cos(2t)``,
    ``steps:[v1,...,vm]`` (piecewise constant on m equal pieces),
    ``pwlin:[v0,...,vm]`` (piecewise linear through equally spaced nodes) and
    ``coeffs:[c1,...]`` (cosine series without constant term).
    """
    s = spec.strip()
    if s == "zero":
        return (lambda x: np.zeros_like(np.asarray(x, dtype=float))), ()
    head, sep, body = s.partition(":")
    if sep and head in ("steps", "pwlin", "coeffs"):
        try:
            vals = json.loads(body)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad list in {spec!r}") from exc
        if not vals or not np.all(np.isfinite(np.asarray(vals, dtype=float))):
            raise InputError(f"empty or non-finite list in {spec!r}")
        if head == "steps":
            return _steps_func(vals)
        if head == "pwlin":
            if len(vals) < 2:
                raise InputError("pwlin needs at least two values")
            return _pwlin_func(vals)
        return _coeffs_func(vals), ()
    return _compile_expr(s), ()


def make_grid_function(spec, M: int = DEFAULT_M, gauge: bool = True) -> GridFunction:
    """Build a GridFunction from a spec string, a callable or a sample array.

    By default the zero-mean representative is returned, which is the
    convention for primitives of potentials. Pass ``gauge=False`` for
    ordinary functions such as eigenfunctions or test integrands.
    """
    if M < MIN_M:
        raise ParameterError(f"M must be >= {MIN_M}")
    if isinstance(spec, GridFunction):
        return spec.gauged() if gauge else spec
    if isinstance(spec, str):
        func, breaks = parse_spec(spec)
        return from_callable(func, M, gauge, breaks, label=spec)
    if callable(spec):
        return from_callable(spec, M, gauge)
    arr = np.asarray(spec, dtype=float)
    if arr.ndim != 1:
        raise InputError("sample array must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InputError("non-finite samples")
    gf = GridFunction(arr)
    return gf.gauged() if gauge else gf


# -- quadrature -----------------------------------------------------------------

_GREGORY_ORDER = 8


@cache
def _gregory_end_correction(r: int = _GREGORY_ORDER) -> np.ndarray:
    # left-end corrections to the trapezoid rule, exact for degree < r
    B = bernoulli(r + 1)
    nodes = np.arange(r, dtype=float)
    V = np.vander(nodes, r, increasing=True).T
    rhs = np.array([B[p + 1] / (p + 1) if p % 2 == 1 else 0.0 for p in range(r)])
    return np.linalg.solve(V, rhs)


@lru_cache(maxsize=64)
def quadrature_weights(M: int) -> np.ndarray:
    """Weights on the M+1 point grid over [0, pi] (corrected trapezoid, order 8)."""
    w = np.ones(M + 1)
    w[0] = w[-1] = 0.5
    r = _GREGORY_ORDER
    if M >= 2 * r:
        c = _gregory_end_correction(r)
        w[:r] += c
        w[-r:] += c[::-1]
    w *= np.pi / M
    w.setflags(write=False)
    return w


def _break_nodes(M: int, breaks) -> tuple:
    # grid indices of breakpoints that sit on grid nodes
    idx = []
    for b in breaks:
        j = round(b * M / np.pi)
        if 0 < j < M and abs(j * np.pi / M - b) < 1e-12:
            idx.append(j)
    return tuple(sorted(set(idx)))


@lru_cache(maxsize=64)
def _segment_weights(M: int, nodes: tuple) -> np.ndarray:
    edges = (0,) + nodes + (M,)
    w = np.zeros(M + 1)
    for a, b in itertools.pairwise(edges):
        m = b - a
        w[a:b + 1] += quadrature_weights(m) * (m / M) if m >= 1 else 0.0
    w.setflags(write=False)
    return w


def integrate(values: np.ndarray, breaks=()) -> float | np.ndarray:
    """Integral over [0, pi] of samples along the last axis.

    Breakpoints lying on grid nodes split the rule into separate corrected
    pieces, so integrands with kinks or jumps there keep full order.
    """
    values = np.asarray(values)
    M = values.shape[-1] - 1
    nodes = _break_nodes(M, breaks) if breaks else ()
    w = _segment_weights(M, nodes) if nodes else quadrature_weights(M)
    return values @ w


def l2_inner(f: GridFunction, g: GridFunction) -> float:
    _check_same_grid(f, g)
    return float(integrate(f.samples * g.samples, _merge_breaks(f.breaks, g.breaks)))


def sobolev_norm(f: GridFunction, p: SobolevParams | float) -> float:
    """Weighted cosine-coefficient norm ``(pi/2 * sum_j j^(2 theta) c_j^2)^(1/2)``.

    The constant mode is ignored, so this is a norm on functions modulo
    constants; at theta = 0 it is the L2 norm of the zero-mean part.
    """
    if not isinstance(p, SobolevParams):
        p = SobolevParams(float(p), f.M)
    n = min(p.n_modes, f.coeffs.size)
    c = f.coeffs[:n]
    j = np.arange(1, n + 1, dtype=float)
    return float(np.sqrt(0.5 * np.pi * np.sum(j ** (2 * p.theta) * c * c)))


# -- differentiation ------------------------------------------------------------

_FD_WIDTH = 7   # sixth-order accurate first derivative


@cache
def _fd_weights(offset: int, width: int = _FD_WIDTH) -> np.ndarray:
    # first-derivative weights on nodes 0..width-1 evaluated at node ``offset``
    nodes = np.arange(width, dtype=float) - offset
    V = np.vander(nodes, width, increasing=True).T
    rhs = np.zeros(width)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def ddx_samples(y: np.ndarray, h: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    n, w = y.size, _FD_WIDTH
    half = w // 2
    d = np.empty_like(y)
    c = _fd_weights(half)
    d[half:n - half] = sum(c[j] * y[j:n - w + 1 + j] for j in range(w))
    for i in range(half):
        d[i] = _fd_weights(i) @ y[:w]
        d[n - 1 - i] = -(_fd_weights(i) @ y[::-1][:w])
    return d / h


def ddx(f: GridFunction) -> GridFunction:
    """Sixth-order finite-difference derivative on the sample grid."""
    return GridFunction(ddx_samples(f.samples, np.pi / f.M))


def antiderivative(f: GridFunction) -> GridFunction:
    """Running integral from 0, via the antiderivative of the quintic spline."""
    F = f._spline.antiderivative()
    return GridFunction(F(f.x) - F(0.0))
