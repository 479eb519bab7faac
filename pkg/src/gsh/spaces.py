"""Membership diagnostics for coefficient fields, the Parseval pairing and the seminorm estimate.

A finite box cannot decide an asymptotic property, so every verdict here is
a trend read off the box: a norm that stops changing between box N and N/2,
or a growth gap that stops increasing over the outer half of the box.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from . import hermite
from .errors import BoxError, ValidationError
from .fields import CoefficientField
from .weights import DEFAULT_P_CAP, WeightSequence, table_for

STABILITY_RTOL = 1e-6
TREND_ATOL = 1e-9


def _theta_vector(theta, dim: int) -> tuple[float, ...]:
    th = (float(theta),) * dim if np.isscalar(theta) else tuple(float(t) for t in theta)
    if len(th) != dim:
        raise ValidationError(f"theta has {len(th)} components, field has {dim} axes")
    if any(not t > 0 for t in th):
        raise ValidationError("theta components must be positive")
    return th


def envelope(seq: WeightSequence, theta, box: Sequence[int], p_cap: int = DEFAULT_P_CAP) -> np.ndarray:
    """sum_k M(theta_k sqrt(n_k)) over a box."""
    theta = _theta_vector(theta, len(box))
    tab = table_for(seq, p_cap)
    out = np.zeros(tuple(box))
    for k, (th, n) in enumerate(zip(theta, box)):
        shape = [1] * len(box)
        shape[k] = n
        out = out + tab.axis_weights(th, n).reshape(shape)
    return out


def _log_abs(a: CoefficientField) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(a.data))


def weighted_norm(
    a: CoefficientField, seq: WeightSequence, theta, weight_power: float = 1.0, p_cap: int = DEFAULT_P_CAP
) -> float:
    """Log of (sum_n |a_n|^2 exp[weight_power * sum_k M(theta_k sqrt(n_k))])^{1/2}.

    weight_power = 1 is the falloff norm of the Hermite characterization;
    classify() uses 2, which makes the norm finite exactly when |a_n|
    exp[M(theta sqrt n)] is square-summable.
    """
    la = _log_abs(a)
    mask = np.isfinite(la)
    if not mask.any():
        return -math.inf
    w = envelope(seq, theta, a.box, p_cap)
    return 0.5 * float(logsumexp(2 * la[mask] + weight_power * w[mask]))


class GrowthResult(NamedTuple):
    passes: bool
    C: float


def _shell_tail_nonincreasing(c: np.ndarray) -> bool:
    """Shell maxima of c over nu = sum n_k, outer half of the complete shells, non-increasing?"""
    box = c.shape
    nu_max = min(box) - 1
    nu = np.sum(np.meshgrid(*[np.arange(n) for n in box], indexing="ij"), axis=0)
    shells = np.full(nu_max + 1, -np.inf)
    for v in range(nu_max + 1):
        sel = c[nu == v]
        shells[v] = sel.max() if sel.size else -np.inf
    tail = shells[(nu_max + 1) // 2 :]
    tail = tail[np.isfinite(tail)]
    if tail.size < 2:
        return True
    return bool(np.all(np.diff(tail) <= TREND_ATOL))


def growth_gap(
    b: CoefficientField, seq: WeightSequence, theta, weight_power: float = 1.0, p_cap: int = DEFAULT_P_CAP
) -> np.ndarray:
    """log|b_n| - weight_power * sum_k M(theta_k sqrt(n_k)); -inf where b_n = 0."""
    return _log_abs(b) - weight_power * envelope(seq, theta, b.box, p_cap)


def growth_check(
    b: CoefficientField, seq: WeightSequence, theta, weight_power: float = 1.0, p_cap: int = DEFAULT_P_CAP
) -> GrowthResult:
    """Is |b_n| <= C exp[sum_k M(theta_k sqrt(n_k))] on trend?

    C is the largest gap over the box.  The check passes when the gap,
    maximized over shells of constant nu = sum n_k, does not increase over
    the outer half of the complete shells.
    """
    c = growth_gap(b, seq, theta, weight_power, p_cap)
    finite = c[np.isfinite(c)]
    C = float(finite.max()) if finite.size else -math.inf
    return GrowthResult(_shell_tail_nonincreasing(c), C)


@dataclass(frozen=True)
class MembershipReport:
    kind: str
    theta_grid: tuple[tuple[float, ...], ...]
    log_norms: tuple[float, ...]
    stable: tuple[bool, ...]
    theta_star: tuple[float, ...] | None
    at_boundary: bool
    member: bool
    weight_power: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta_grid": [list(t) for t in self.theta_grid],
            "log_norms": list(self.log_norms),
            "stable": list(self.stable),
            "theta_star": None if self.theta_star is None else list(self.theta_star),
            "at_boundary": self.at_boundary,
            "member": self.member,
            "weight_power": self.weight_power,
        }


def classify(
    a: CoefficientField,
    seq: WeightSequence,
    grid: Sequence,
    kind: str | None = None,
    mode: str = "roumieu",
    weight_power: float = 2.0,
    threads: int = 1,
    p_cap: int = DEFAULT_P_CAP,
) -> MembershipReport:
    """Probe a field over an ascending theta grid.

    Test fields: the weighted norm at box N is compared with box N/2 and a
    relative change below 1e-6 counts as converged; theta_star is the largest
    converged theta.  Dual fields: each theta is a growth_check and
    theta_star is the smallest passing theta.  Roumieu test membership needs
    some stable theta, Beurling every one; for duals the quantifiers swap.
    """
    kind = kind or a.kind
    if kind not in ("test", "dual") or mode not in ("roumieu", "beurling"):
        raise ValidationError("kind must be test|dual and mode roumieu|beurling")
    if len(grid) == 0:
        raise ValidationError("theta grid is empty")
    thetas = tuple(_theta_vector(t, a.dim) for t in grid)

    if kind == "test":
        half = tuple(n // 2 for n in a.box)
        if min(half) < 1:
            raise BoxError(f"box {a.box} is too small to halve")
        a_half = a.truncated(half)

        def probe(th):
            full = weighted_norm(a, seq, th, weight_power, p_cap)
            part = weighted_norm(a_half, seq, th, weight_power, p_cap)
            if full == -math.inf:
                return full, True
            return full, (1.0 - math.exp(part - full)) < STABILITY_RTOL

    else:

        def probe(th):
            res = growth_check(a, seq, th, weight_power=1.0, p_cap=p_cap)
            return res.C, res.passes

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(probe, thetas))
    else:
        results = [probe(th) for th in thetas]
    log_norms = tuple(float(r[0]) for r in results)
    stable = tuple(bool(r[1]) for r in results)
    idx = [i for i, s in enumerate(stable) if s]
    if kind == "test":
        star = idx[-1] if idx else None
        at_boundary = star is None or star == len(thetas) - 1
        member = bool(idx) if mode == "roumieu" else all(stable)
    else:
        star = idx[0] if idx else None
        at_boundary = star is None or star == 0
        member = all(stable) if mode == "roumieu" else bool(idx)
    return MembershipReport(
        kind=f"{kind}_{mode}",
        theta_grid=thetas,
        log_norms=log_norms,
        stable=stable,
        theta_star=None if star is None else thetas[star],
        at_boundary=at_boundary,
        member=member,
        weight_power=weight_power if kind == "test" else 1.0,
    )


def parseval_pair(b: CoefficientField, a: CoefficientField) -> complex:
    """<f, phi> = sum_n b_n a_n over the common box; bilinear, no conjugation."""
    if a.dim != b.dim:
        raise BoxError("pairing needs fields of the same dimension")
    common = tuple(slice(0, min(m, n)) for m, n in zip(a.box, b.box))
    return complex(np.sum(b.data[common] * a.data[common]))


class SeminormResult(NamedTuple):
    value: float
    alpha: int
    beta: int
    table: dict


def _grid_sup(a: CoefficientField, grid: np.ndarray, refine: bool) -> float:
    vals = np.abs(hermite.clenshaw(a.data, grid))
    i = int(np.argmax(vals))
    best = float(vals[i])
    if refine and 0 < i < len(grid) - 1:
        res = minimize_scalar(
            lambda x: -abs(complex(hermite.clenshaw(a.data, np.array([x]))[0])),
            bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def seminorm_estimate(
    a: CoefficientField,
    m: float,
    seq: WeightSequence,
    alpha_max: int,
    beta_max: int,
    grid,
    refine: bool = True,
    max_box: int = 4096,
) -> SeminormResult:
    """sup over alpha <= alpha_max, even beta <= beta_max of
    m^{alpha+beta} / (M_alpha M_beta) * ||(1 + x^2)^{beta/2} phi^{(alpha)}||_inf.

    Derivatives and the factor (1 + x^2) = 1 + x.x are applied with ladder
    operators, so each term is exact in coefficient space; the sup is taken
    on ``grid`` and, with ``refine``, polished around the grid maximum.
    One-dimensional fields only.
    """
    if a.dim != 1:
        raise ValidationError("seminorm_estimate supports 1-d fields")
    if not m > 0 or alpha_max < 0 or beta_max < 0 or beta_max % 2:
        raise ValidationError("need m > 0, alpha_max >= 0 and an even beta_max >= 0")
    if a.box[0] + alpha_max + beta_max > max_box:
        raise BoxError(f"ladder shifts would grow the box past {max_box}")
    grid = np.asarray(grid, dtype=float)
    log_m = seq.log_m_at(np.arange(max(alpha_max, beta_max) + 1))
    table: dict[tuple[int, int], float] = {}
    best = (-1.0, 0, 0)
    deriv = a
    for alpha in range(alpha_max + 1):
        if alpha:
            deriv = hermite.ladder_apply(deriv, "derivative")
        term = deriv
        for beta in range(0, beta_max + 1, 2):
            if beta:
                xx = hermite.ladder_apply(hermite.ladder_apply(term, "position"), "position")
                term = xx + term.padded(xx.box)
            sup = _grid_sup(term, grid, refine)
            scale = math.exp((alpha + beta) * math.log(m) - log_m[alpha] - log_m[beta])
            value = scale * sup
            table[(alpha, beta)] = value
            if value > best[0]:
                best = (value, alpha, beta)
    return SeminormResult(best[0], best[1], best[2], {f"{k[0]},{k[1]}": v for k, v in table.items()})
