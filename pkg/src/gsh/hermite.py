"""Hermite functions, Gauss-Hermite quadrature, analysis/synthesis and ladder algebra.

H_n is the orthonormal Hermite function

    H_n(x) = (-1)^n (2^n n! sqrt(pi))^{-1/2} e^{x^2/2} (d/dx)^n e^{-x^2},

evaluated by the normalized three-term recurrence with the Gaussian factor
carried as a separate exponent.  The number operator is
N = (-d^2/dx^2 + x^2 - 1)/2, so that N H_n = n H_n.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import BoxError, NumericalError, ValidationError
from .fields import CoefficientField, SampledFunction

HERMITE_CAP = 10_000
QUAD_GUARD = 16
LOG_PI_QUARTER = 0.25 * math.log(math.pi)
_RESCALE = 1e150


def _check_order(n: int) -> None:
    if n < 0:
        raise ValidationError("Hermite order must be nonnegative")
    if n > HERMITE_CAP:
        raise ValidationError(f"Hermite order {n} exceeds the cap {HERMITE_CAP}")


def hermite_functions(nmax: int, x) -> np.ndarray:
    """H_0..H_nmax at x, shape ``(nmax + 1,) + x.shape``.

    The recurrence runs on the polynomial part; whenever it exceeds 1e150 it
    is rescaled and the factor moved into a per-point log scale, which also
    absorbs -x^2/2.  Values are recombined as sign * exp(log|h| + scale), so
    nothing underflows before the true result does.
    """
    _check_order(nmax)
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    scale = -0.5 * x * x - LOG_PI_QUARTER
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(scale)
    with np.errstate(divide="ignore", under="ignore"):
        for k in range(nmax):
            nxt = math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE
            if np.any(big):
                cur = np.where(big, cur / _RESCALE, cur)
                prev = np.where(big, prev / _RESCALE, prev)
                scale = np.where(big, scale + math.log(_RESCALE), scale)
            out[k + 1] = np.sign(cur) * np.exp(np.log(np.abs(cur)) + scale)
    return out


def hermite_eval(n: int, x):
    """Orthonormal Hermite function H_n(x); x may be a scalar or an array."""
    _check_order(n)
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim == 0:
        return _hermite_scalar(n, float(x_arr))
    return hermite_functions(n, x_arr)[n]


def _hermite_scalar(n: int, x: float) -> float:
    scale = -0.5 * x * x - LOG_PI_QUARTER
    prev, cur = 0.0, 1.0
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        if abs(cur) > _RESCALE:
            cur /= _RESCALE
            prev /= _RESCALE
            scale += math.log(_RESCALE)
    if cur == 0.0:
        return 0.0
    return math.copysign(math.exp(math.log(abs(cur)) + scale), cur)


def hermite_eval_multi(n: Sequence[int], x: Sequence[float]) -> float:
    if len(n) != len(x):
        raise ValidationError("multi-index and point dimensions differ")
    out = 1.0
    for nk, xk in zip(n, x):
        out *= _hermite_scalar(int(nk), float(xk)) if nk <= HERMITE_CAP else hermite_eval(nk, xk)
    return out


# -- quadrature --------------------------------------------------------------


class GaussHermiteRule(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray
    scaled_weights: np.ndarray  # w_i * exp(x_i^2), the weights for integrating against dx


@lru_cache(maxsize=64)
def gauss_hermite_rule(order: int) -> GaussHermiteRule:
    """Gauss rule for the weight e^{-x^2}, exact up to degree 2*order - 1.

    Nodes are eigenvalues of the Jacobi matrix (off-diagonal sqrt(k/2)),
    polished by one Newton step on H_order.  Weights come from the
    Christoffel formula 1/w_i = e^{x_i^2} sum_{k<order} H_k(x_i)^2, which
    keeps tiny outer weights accurate in relative terms; eigenvector
    components would not.
    """
    if order < 1:
        raise ValidationError("quadrature order must be at least 1")
    if order == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, order) / 2.0)
        try:
            nodes = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
        except LinAlgError as exc:
            raise NumericalError(f"tridiagonal eigensolver failed for order {order}: {exc}") from None
        h = hermite_functions(order, nodes)
        deriv = math.sqrt(2.0 * order) * h[order - 1] - nodes * h[order]
        nodes = nodes - h[order] / deriv
        nodes = 0.5 * (nodes - nodes[::-1])
    h = hermite_functions(order - 1, nodes)
    ssq = np.sum(h * h, axis=0)
    scaled = 1.0 / ssq
    log_w = -nodes * nodes - np.log(ssq)
    weights = np.exp(log_w)
    for arr in (nodes, weights, log_w, scaled):
        arr.setflags(write=False)
    return GaussHermiteRule(nodes, weights, log_w, scaled)


# -- analysis and synthesis --------------------------------------------------


def _apply_axes(mats: Sequence[np.ndarray], t: np.ndarray) -> np.ndarray:
    """Contract mats[k] (rows x t.shape[k]) against axis k of t."""
    for k, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [k])), 0, k)
    return t


def _normalize_box(box, dim: int | None = None) -> tuple[int, ...]:
    box = (int(box),) if np.isscalar(box) else tuple(int(b) for b in box)
    if not 1 <= len(box) <= 3 or any(b < 1 for b in box):
        raise ValidationError(f"bad box {box}")
    if dim is not None and len(box) != dim:
        raise ValidationError(f"box {box} does not match dimension {dim}")
    return box


def _samples_on(f, nodes: np.ndarray, dim: int) -> np.ndarray:
    if isinstance(f, SampledFunction):
        if f.dim != dim:
            raise ValidationError("sample dimension does not match the box")
        if all(g.shape == nodes.shape and np.allclose(g, nodes, rtol=0, atol=1e-14) for g in f.grids):
            vals = f.values
        else:
            interp = RegularGridInterpolator(
                f.grids, f.values, method="cubic" if min(g.size for g in f.grids) >= 4 else "linear",
                bounds_error=False, fill_value=0.0,
            )
            mesh = np.stack(np.meshgrid(*([nodes] * dim), indexing="ij"), axis=-1)
            vals = interp(mesh)
    else:
        mesh = np.meshgrid(*([nodes] * dim), indexing="ij")
        vals = np.asarray(f(*mesh))
        if vals.shape != mesh[0].shape:
            vals = np.broadcast_to(vals, mesh[0].shape)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("function samples must be finite")
    return vals


def analyze(
    f: Callable | SampledFunction, box, quad_order: int | None = None, kind: str = "test"
) -> CoefficientField:
    """Fourier-Hermite coefficients a_n = int f H_n dx on a box.

    ``f`` is a callable taking one meshgrid array per axis, or a
    SampledFunction (used directly when sampled on the quadrature nodes,
    interpolated otherwise).  The rule's e^{x^2} de-weighting is folded into
    the scaled weights, so the integrand never leaves double range.
    """
    dim = f.dim if isinstance(f, SampledFunction) else None
    box = _normalize_box(box, dim)
    if quad_order is None:
        quad_order = max(box) + QUAD_GUARD
    if quad_order < max(box):
        raise ValidationError(f"quad_order {quad_order} is below the box order {max(box)}")
    rule = gauss_hermite_rule(int(quad_order))
    vals = _samples_on(f, rule.nodes, len(box))
    basis = hermite_functions(max(box) - 1, rule.nodes) * rule.scaled_weights
    mats = [basis[:n] for n in box]
    return CoefficientField(_apply_axes(mats, vals.astype(complex)), kind)


def clenshaw(coeffs, x) -> np.ndarray:
    """sum_n c_n H_n(x) by backward recurrence, with the same exponent carry."""
    c = np.asarray(coeffs, dtype=complex)
    x = np.asarray(x, dtype=float)
    n = c.size
    b1 = np.zeros(x.shape, dtype=complex)
    b2 = np.zeros(x.shape, dtype=complex)
    scale = np.zeros(x.shape)
    with np.errstate(under="ignore"):
        for k in range(n - 1, -1, -1):
            beta_next = -math.sqrt((k + 1) / (k + 2))
            b0 = c[k] * np.exp(-scale) + math.sqrt(2.0 / (k + 1)) * x * b1 + beta_next * b2
            b1, b2 = b0, b1
            big = np.abs(b1) > _RESCALE
            if np.any(big):
                b1 = np.where(big, b1 / _RESCALE, b1)
                b2 = np.where(big, b2 / _RESCALE, b2)
                scale = np.where(big, scale + math.log(_RESCALE), scale)
        return b1 * np.exp(scale - 0.5 * x * x - LOG_PI_QUARTER)


def synthesize(a: CoefficientField, x):
    """sum_n a_n H_n over the box.

    ``x`` may be a single point (scalar in 1-d, length-d tuple otherwise),
    giving a complex value, or a grid: a 1-d array in 1-d or a sequence of d
    axis arrays, giving a SampledFunction.
    """
    if a.dim == 1:
        if np.ndim(x) == 0:
            return complex(clenshaw(a.data, float(x)))
        grid = np.asarray(x, dtype=float)
        if grid.ndim == 1 and grid.size > 1 and np.all(np.diff(grid) > 0):
            return SampledFunction((grid,), clenshaw(a.data, grid))
        if grid.ndim == 1 and grid.size == 1:
            return SampledFunction((grid,), clenshaw(a.data, grid))
        return clenshaw(a.data, grid)
    if all(np.ndim(xk) == 0 for xk in x):
        if len(x) != a.dim:
            raise ValidationError("point dimension does not match the field")
        mats = [hermite_functions(n - 1, np.array([float(xk)])).T for n, xk in zip(a.box, x)]
        return complex(_apply_axes(mats, a.data).ravel()[0])
    grids = [np.asarray(g, dtype=float) for g in x]
    if len(grids) != a.dim:
        raise ValidationError("grid dimension does not match the field")
    mats = [hermite_functions(n - 1, g).T for n, g in zip(a.box, grids)]
    return SampledFunction(tuple(grids), _apply_axes(mats, a.data))


# -- ladder algebra ----------------------------------------------------------

LADDER_OPS = ("position", "derivative", "number")


def ladder_apply(a: CoefficientField, op: str, axis: int = 0) -> CoefficientField:
    """Apply x_axis, d/dx_axis or N_axis in coefficient space.

    position:   (x a)_n = sqrt(n/2) a_{n-1} + sqrt((n+1)/2) a_{n+1}
    derivative: (a')_n  = sqrt((n+1)/2) a_{n+1} - sqrt(n/2) a_{n-1}
    number:     (N a)_n = n_axis a_n

    position and derivative grow the box by one along ``axis`` so no
    coefficient is lost.
    """
    if op not in LADDER_OPS:
        raise ValidationError(f"unknown ladder operator {op!r}")
    if not 0 <= axis < a.dim:
        raise ValidationError(f"axis {axis} out of range for a {a.dim}-d field")
    if op == "number":
        shape = [1] * a.dim
        shape[axis] = a.box[axis]
        n = np.arange(a.box[axis]).reshape(shape)
        return a.with_data(a.data * n)
    m = a.box[axis]
    src = np.moveaxis(a.data, axis, 0)
    padded = np.zeros((m + 2,) + src.shape[1:], dtype=complex)
    padded[:m] = src
    n = np.arange(m + 1).reshape((m + 1,) + (1,) * (a.dim - 1)).astype(float)
    lower = np.zeros_like(padded[: m + 1])
    lower[1:] = padded[:m]  # a_{n-1}
    upper = padded[1 : m + 2]  # a_{n+1}
    if op == "position":
        out = np.sqrt(n / 2) * lower + np.sqrt((n + 1) / 2) * upper
    else:
        out = np.sqrt((n + 1) / 2) * upper - np.sqrt(n / 2) * lower
    return a.with_data(np.moveaxis(out, 0, axis))


def number_power(a: CoefficientField, beta: int) -> CoefficientField:
    """(N_total)^beta with N_total = sum over axes; multiplies a_n by nu(n)^beta."""
    if beta < 0:
        raise ValidationError("beta must be nonnegative")
    nu = a.total_order().astype(float)
    return a.with_data(a.data * nu**beta)  # 0**0 == 1 keeps beta = 0 the identity


# -- sup norms ---------------------------------------------------------------


def _hermite_pair_scalar(n: int, x: float) -> tuple[float, float]:
    """(H_{n-1}(x), H_n(x)) for n >= 1, pure-Python recurrence."""
    scale = -0.5 * x * x - LOG_PI_QUARTER
    prev, cur = 0.0, 1.0
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        if abs(cur) > _RESCALE:
            cur /= _RESCALE
            prev /= _RESCALE
            scale += math.log(_RESCALE)
    return prev * math.exp(scale), cur * math.exp(scale)


def _polish_max(n: int, xs: np.ndarray, vals: np.ndarray) -> float:
    """Newton on H_n' = 0 from the three best grid maxima (H_n'' = (x^2 - 2n - 1) H_n)."""
    interior = np.nonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    if interior.size == 0:
        interior = np.array([int(np.argmax(vals))])
    best = float(vals.max())
    for i in interior[np.argsort(vals[interior])[-3:]]:
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        x = float(xs[i])
        for _ in range(30):
            hm1, h = _hermite_pair_scalar(n, x)
            d1 = math.sqrt(2.0 * n) * hm1 - x * h
            d2 = (x * x - 2 * n - 1) * h
            if d2 == 0:
                break
            x_new = min(max(x - d1 / d2, lo), hi)
            done = abs(x_new - x) <= 1e-15 * max(1.0, abs(x))
            x = x_new
            if done:
                break
        best = max(best, abs(_hermite_pair_scalar(n, x)[1]))
    return best


def _scan_grid(n: int) -> np.ndarray:
    t = math.sqrt(2 * n + 1)
    step = 0.5 / t
    return np.arange(0.0, t + 2.0 + step, step)


@lru_cache(maxsize=None)
def sup_norm_estimate(n: int) -> float:
    """Numerical ||H_n||_inf.

    Dense scan of x >= 0 (|H_n| is even) up to sqrt(2n+1) + 2 with step at
    most 0.5/sqrt(2n+1), then a Newton polish at the best grid maxima.
    """
    _check_order(n)
    if n == 0:
        return math.exp(-LOG_PI_QUARTER)
    xs = _scan_grid(n)
    return _polish_max(n, xs, np.abs(hermite_functions(n, xs)[n]))


@lru_cache(maxsize=8)
def _sup_norms(nmax: int) -> np.ndarray:
    xs = _scan_grid(nmax)  # finest step and widest range cover every n <= nmax
    table = np.abs(hermite_functions(nmax, xs))
    out = np.empty(nmax + 1)
    out[0] = math.exp(-LOG_PI_QUARTER)
    for n in range(1, nmax + 1):
        out[n] = _polish_max(n, xs, table[n])
    out.setflags(write=False)
    return out


def sup_norms(nmax: int) -> np.ndarray:
    """||H_n||_inf for n = 0..nmax from one shared scan."""
    _check_order(nmax)
    return _sup_norms(nmax)
