"""Regularization of dual coefficients and the oscillator-power series.

Given dual coefficients b_n, dividing by

    D_mu(nu) = sum_alpha mu^{2 alpha} nu^alpha / M_{2 alpha},   nu = n_1 + ... + n_d,

gives the coefficients a_n of a bounded continuous f, and

    sum_beta mu^{2 beta} / M_{2 beta} * N^beta f

pairs with any test field exactly like b does, because N^beta acts on a_n as
nu^beta and the beta-sum of the weights rebuilds D_mu(nu).  With the
half-oscillator N = (-d^2/dx^2 + x^2 - 1)/2 the factor 1/2^beta is already
absorbed.  In d > 1 the total number operator is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import hermite
from .errors import BoxError, PrefixExhaustedError, ValidationError
from .fields import CoefficientField, SampledFunction
from .spaces import envelope
from .weights import WeightSequence, check_m2

DIVISOR_RTOL = 1e-18
SERIES_RTOL = 1e-12
CONSECUTIVE = 3


class DivisorEntry(NamedTuple):
    log_value: float
    terms_used: int
    tail_flag: bool


def _divisor_terms(seq: WeightSequence, mu: float, nu: int) -> np.ndarray:
    """log of mu^{2 alpha} nu^alpha / M_{2 alpha} for 2 alpha <= p_max."""
    alpha = np.arange(seq.p_max // 2 + 1)
    with np.errstate(divide="ignore"):
        log_nu = math.log(nu) if nu > 0 else -math.inf
        t = 2 * alpha * math.log(mu) - seq.log_m[2 * alpha]
        t = t + np.where(alpha > 0, alpha * log_nu, 0.0)
    return t


def _first_run(flags: np.ndarray, length: int) -> int | None:
    run = 0
    for k, f in enumerate(flags):
        run = run + 1 if f else 0
        if run >= length:
            return k
    return None


def divisor(seq: WeightSequence, mu: float, n: Sequence[int] | int) -> DivisorEntry:
    """D_mu(nu(n)) in log form with the number of series terms used.

    Summation stops once a term is below 1e-18 of the running sum and the
    terms have been decreasing, three times in a row.  Running out of prefix
    after the terms started decreasing sets ``tail_flag``; running out before
    that raises.
    """
    if not mu > 0:
        raise ValidationError("mu must be positive")
    nu = int(n) if np.isscalar(n) else int(sum(n))
    if nu < 0:
        raise ValidationError("multi-index entries must be nonnegative")
    if nu == 0:
        return DivisorEntry(0.0, 1, False)
    t = _divisor_terms(seq, mu, nu)
    run = np.logaddexp.accumulate(t)
    small = np.zeros(len(t), dtype=bool)
    small[1:] = (t[1:] - run[1:] < math.log(DIVISOR_RTOL)) & (t[1:] < t[:-1])
    k = _first_run(small, CONSECUTIVE)
    if k is not None:
        return DivisorEntry(float(run[k]), k + 1, False)
    if len(t) >= 2 and t[-1] < t[-2]:
        return DivisorEntry(float(run[-1]), len(t), True)
    raise PrefixExhaustedError(
        f"divisor series for mu={mu}, nu={nu} still growing at 2*alpha={2 * (len(t) - 1)}; extend the sequence"
    )


def divisor_partial(seq: WeightSequence, mu: float, nu: int, terms: int) -> float:
    """log of the first ``terms`` terms of the divisor series."""
    t = _divisor_terms(seq, mu, nu)[:terms]
    if nu == 0:
        t = t[:1]
    return float(np.logaddexp.reduce(t))


@dataclass(frozen=True)
class DivisorEvaluation:
    mu: float
    seq: WeightSequence
    log_value: np.ndarray
    terms_used: np.ndarray
    tail_flag: np.ndarray


def divisor_field(seq: WeightSequence, mu: float, box: Sequence[int]) -> DivisorEvaluation:
    box = tuple(box)
    nu = np.sum(np.meshgrid(*[np.arange(n) for n in box], indexing="ij"), axis=0)
    entries = {v: divisor(seq, mu, int(v)) for v in np.unique(nu)}
    log_value = np.vectorize(lambda v: entries[v].log_value, otypes=[float])(nu)
    terms = np.vectorize(lambda v: entries[v].terms_used, otypes=[int])(nu)
    tail = np.vectorize(lambda v: entries[v].tail_flag, otypes=[bool])(nu)
    return DivisorEvaluation(mu, seq, log_value, terms, tail)


def regularize(b: CoefficientField, seq: WeightSequence, mu: float) -> CoefficientField:
    """a_n = b_n / D_mu(nu(n)), divided in log magnitude with the phase carried along."""
    div = divisor_field(seq, mu, b.box)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(b.data)) - div.log_value
    phase = np.exp(1j * np.angle(b.data))
    data = np.where(np.isfinite(log_abs), np.exp(log_abs) * phase, 0.0)
    return CoefficientField(data, "test")


def implied_dual(a_f: CoefficientField, seq: WeightSequence, mu: float) -> CoefficientField:
    """Inverse of regularize: b_n = a_n D_mu(nu(n))."""
    div = divisor_field(seq, mu, a_f.box)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(a_f.data)) + div.log_value
    phase = np.exp(1j * np.angle(a_f.data))
    data = np.where(np.isfinite(log_abs), np.exp(log_abs) * phase, 0.0)
    return CoefficientField(data, "dual")


class BoundTable(NamedTuple):
    sup_value: float
    argmax: int
    n: np.ndarray
    s: np.ndarray


def verify_bound(a: CoefficientField, up_to: int | None = None) -> BoundTable:
    """s_n = n^2 |a_n| ||H_n||_inf for 1 <= n <= up_to; bounded s_n makes sum a_n H_n converge uniformly."""
    if a.dim != 1:
        raise ValidationError("verify_bound is one-dimensional")
    up_to = a.box[0] - 1 if up_to is None else int(up_to)
    if up_to < 1:
        raise ValidationError("up_to must be at least 1")
    n = np.arange(1, up_to + 1)
    coeff = np.zeros(up_to + 1)
    m = min(up_to + 1, a.box[0])
    coeff[:m] = np.abs(a.data[:m])
    s = n.astype(float) ** 2 * coeff[1:] * hermite.sup_norms(up_to)[1:]
    i = int(np.argmax(s))
    return BoundTable(float(s[i]), int(n[i]), n, s)


class SeriesPair(NamedTuple):
    value: complex
    tail_estimate: float
    terms_used: int
    converged: bool


def _series_logs(a_f: CoefficientField, phi: CoefficientField):
    if a_f.dim != phi.dim:
        raise BoxError("f and phi must have the same dimension")
    common = tuple(min(m, n) for m, n in zip(a_f.box, phi.box))
    z = a_f.truncated(common).data * phi.truncated(common).data
    nu = a_f.truncated(common).total_order().ravel()
    z = z.ravel()
    keep = z != 0
    z, nu = z[keep], nu[keep]
    with np.errstate(divide="ignore"):
        log_z = np.log(np.abs(z))
        log_nu = np.log(nu.astype(float))
    return z / np.abs(z), log_z, nu, log_nu


def oscillator_series_pair(
    a_f: CoefficientField,
    seq: WeightSequence,
    mu: float,
    phi: CoefficientField,
    beta_max: int | None = None,
) -> SeriesPair:
    """sum_beta mu^{2 beta}/M_{2 beta} <N^beta f, phi>, computed spectrally.

    <N^beta f, phi> = sum_n nu^beta a_n phi_n.  Every beta-term is summed
    over n with a shared exponent so huge nu^beta never overflows.  The
    series stops when the absolute beta-term is below 1e-12 of the running
    absolute total and decreasing, three times in a row, or at beta_max.
    """
    if not mu > 0:
        raise ValidationError("mu must be positive")
    limit = seq.p_max // 2
    beta_max = limit if beta_max is None else min(int(beta_max), limit)
    if beta_max < 0:
        raise ValidationError("beta_max must be nonnegative")
    unit, log_z, nu, log_nu = _series_logs(a_f, phi)
    if log_z.size == 0:
        return SeriesPair(0j, 0.0, 1, True)
    re_parts: list[float] = []
    im_parts: list[float] = []
    total_abs = 0.0
    prev_abs = math.inf
    run = 0
    last_abs = 0.0
    used = 0
    converged = False
    for beta in range(beta_max + 1):
        coef = 2 * beta * math.log(mu) - seq.log_m[2 * beta]
        if beta == 0:
            logs = log_z + coef
        else:
            logs = np.where(nu > 0, log_z + coef + beta * log_nu, -np.inf)
        top = float(np.max(logs))
        if top == -math.inf:
            last_abs = 0.0
            used = beta + 1
            converged = True
            break
        weights = np.exp(logs - top)
        s = complex(np.sum(weights * unit)) * math.exp(top)
        mag = float(np.sum(weights)) * math.exp(top)
        re_parts.append(s.real)
        im_parts.append(s.imag)
        total_abs += mag
        used = beta + 1
        last_abs = mag
        run = run + 1 if (mag < SERIES_RTOL * total_abs and mag < prev_abs) else 0
        prev_abs = mag
        if run >= CONSECUTIVE:
            converged = True
            break
    value = complex(math.fsum(re_parts), math.fsum(im_parts))
    return SeriesPair(value, last_abs, used, converged)


def double_sum_orders(
    a_f: CoefficientField, seq: WeightSequence, mu: float, phi: CoefficientField, beta_max: int
) -> tuple[float, float]:
    """sum |mu^{2 beta}/M_{2 beta} a_n nu^beta phi_n| summed beta-outer and n-outer."""
    beta_max = min(int(beta_max), seq.p_max // 2)
    _, log_z, nu, log_nu = _series_logs(a_f, phi)
    beta = np.arange(beta_max + 1)[:, None]
    coef = (2 * beta * math.log(mu) - seq.log_m[2 * beta[:, 0]][:, None])
    with np.errstate(invalid="ignore"):
        nu_pow = np.where(beta == 0, 0.0, beta * log_nu[None, :])
    logs = coef + nu_pow + log_z[None, :]
    logs = np.where((beta > 0) & (nu[None, :] == 0), -np.inf, logs)
    terms = np.exp(logs)
    beta_outer = math.fsum(math.fsum(row) for row in terms)
    n_outer = math.fsum(math.fsum(col) for col in terms.T)
    return beta_outer, n_outer


def synthesize_f(a: CoefficientField, grid) -> SampledFunction:
    """Samples of f = sum a_n H_n on a grid."""
    out = hermite.synthesize(a, grid)
    if not isinstance(out, SampledFunction):
        raise ValidationError("synthesize_f needs a grid, not a point")
    return out


# -- matched growth and divisor ----------------------------------------------


def growth_envelope(seq: WeightSequence, theta, box: Sequence[int]) -> CoefficientField:
    """b_n = exp[sum_k M(theta_k sqrt(n_k))], the extreme admissible dual field."""
    return CoefficientField(np.exp(envelope(seq, theta, box)), "dual")


def matched_theta(seq: WeightSequence, mu: float) -> float:
    """theta = mu / H, H from the separativity fit: envelopes at this rate stay bounded after division by D_mu."""
    return mu / check_m2(seq).witness("H")
