"""Kernel coefficients t_(n,k) of operators from test fields on R^s to dual fields on R^l.

Rows are indexed by the output multi-index n (box over N^l), columns by the
input multi-index k (box over N^s), both in lexicographic order, so a field
on N^{l+s} flattened in C order lines up with the matrix entries.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .errors import BoxError, GSHError, ValidationError
from .fields import CoefficientField, _from_pairs, _pairs
from .spaces import GrowthResult, _shell_tail_nonincreasing, envelope, parseval_pair
from .weights import DEFAULT_P_CAP, WeightSequence


@dataclass(frozen=True, eq=False)
class KernelCoefficients:
    out_box: tuple[int, ...]
    in_box: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        out_box = tuple(int(b) for b in self.out_box)
        in_box = tuple(int(b) for b in self.in_box)
        data = np.array(self.data, dtype=complex)
        if not (1 <= len(out_box) <= 3 and 1 <= len(in_box) <= 3):
            raise ValidationError("kernel dimensions l, s must be 1..3")
        if data.shape != (int(np.prod(out_box)), int(np.prod(in_box))):
            raise ValidationError(f"kernel matrix shape {data.shape} does not match boxes {out_box} x {in_box}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("kernel entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "out_box", out_box)
        object.__setattr__(self, "in_box", in_box)
        object.__setattr__(self, "data", data)

    @property
    def l(self) -> int:
        return len(self.out_box)

    @property
    def s(self) -> int:
        return len(self.in_box)

    def as_field(self) -> CoefficientField:
        """The kernel as a dual field on N^{l+s}."""
        return CoefficientField(self.data.reshape(self.out_box + self.in_box), "dual")

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "s": self.s,
            "out_box": list(self.out_box),
            "in_box": list(self.in_box),
            "data": _pairs(self.data),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "KernelCoefficients":
        try:
            out_box, in_box = tuple(doc["out_box"]), tuple(doc["in_box"])
            data = doc["data"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed kernel file: {exc}") from None
        if doc.get("l", len(out_box)) != len(out_box) or doc.get("s", len(in_box)) != len(in_box):
            raise ValidationError("l/s do not match the boxes")
        shape = (int(np.prod(out_box)), int(np.prod(in_box)))
        return cls(out_box, in_box, _from_pairs(data, shape))


class BilinearEvaluationError(GSHError):
    def __init__(self, n, k, cause):
        super().__init__(f"bilinear form failed at n={n}, k={k}: {cause}")
        self.n, self.k = n, k


def kernel_from_bilinear(
    B: Callable[[CoefficientField, CoefficientField], complex],
    out_box: Sequence[int],
    in_box: Sequence[int],
    threads: int = 1,
) -> KernelCoefficients:
    """t_(n,k) = B(e_n, e_k) with e_n, e_k unit fields.

    Rows run in parallel when ``threads > 1`` unless the evaluator carries
    ``serial = True``.
    """
    out_box, in_box = tuple(out_box), tuple(in_box)
    rows = list(product(*[range(n) for n in out_box]))
    cols = list(product(*[range(n) for n in in_box]))
    units_in = [CoefficientField.unit(in_box, k) for k in cols]

    def row(n):
        e_n = CoefficientField.unit(out_box, n)
        out = np.empty(len(cols), dtype=complex)
        for j, (k, e_k) in enumerate(zip(cols, units_in)):
            try:
                out[j] = B(e_n, e_k)
            except Exception as exc:  # surfaced with the failing entry
                raise BilinearEvaluationError(n, k, exc) from exc
        return out

    if threads > 1 and not getattr(B, "serial", False):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            data = np.array(list(pool.map(row, rows)))
    else:
        data = np.array([row(n) for n in rows])
    return KernelCoefficients(out_box, in_box, data)


def _fit(field: CoefficientField, box: tuple[int, ...], what: str) -> np.ndarray:
    if field.dim != len(box) or any(n > b for n, b in zip(field.box, box)):
        raise BoxError(f"{what} box {field.box} does not fit in {box}")
    return field.padded(box).data


def apply_operator(t: KernelCoefficients, phi: CoefficientField) -> CoefficientField:
    """(K phi)_n = sum_k t_(n,k) phi_k."""
    vec = _fit(phi, t.in_box, "input").ravel()
    return CoefficientField((t.data @ vec).reshape(t.out_box), "dual")


def tensor(a: CoefficientField, b: CoefficientField) -> CoefficientField:
    """c_(n,k) = a_n b_k on the product box."""
    if a.dim + b.dim > 3:
        raise ValidationError("tensor product would exceed three dimensions")
    return CoefficientField(np.multiply.outer(a.data, b.data), a.kind)


def pair_kernel(t: KernelCoefficients, Phi: CoefficientField) -> complex:
    """<K, Phi> = sum_(n,k) t_(n,k) Phi_(n,k)."""
    mat = _fit(Phi, t.out_box + t.in_box, "test").reshape(t.data.shape)
    return complex(np.sum(t.data * mat))


def verify_kernel_identity(
    t: KernelCoefficients, phi: CoefficientField, psi: CoefficientField, relative: bool = False
) -> float:
    """|<K phi, psi> - K(psi (x) phi)|, optionally relative to the larger side."""
    lhs = parseval_pair(apply_operator(t, phi), psi)
    rhs = pair_kernel(t, tensor(psi, phi))
    res = abs(lhs - rhs)
    if relative:
        scale = max(abs(lhs), abs(rhs))
        return res / scale if scale > 0 else res
    return res


def kernel_growth_check(
    t: KernelCoefficients, seq: WeightSequence, theta, nu, p_cap: int = DEFAULT_P_CAP
) -> GrowthResult:
    """|t_(n,k)| <= C exp[2 sum M(theta_i sqrt n_i)] exp[2 sum M(nu_j sqrt k_j)] on trend."""
    theta = (theta,) * t.l if np.isscalar(theta) else tuple(theta)
    nu = (nu,) * t.s if np.isscalar(nu) else tuple(nu)
    if len(theta) != t.l or len(nu) != t.s:
        raise ValidationError("theta must have l components and nu s components")
    env = envelope(seq, tuple(theta) + tuple(nu), t.out_box + t.in_box, p_cap)
    with np.errstate(divide="ignore"):
        c = np.log(np.abs(t.data.reshape(t.out_box + t.in_box))) - 2 * env
    finite = c[np.isfinite(c)]
    C = float(finite.max()) if finite.size else -math.inf
    return GrowthResult(_shell_tail_nonincreasing(c), C)


def kernel_uniqueness_probe(t: KernelCoefficients) -> float:
    """max over (n,k) of |<K, e_n (x) e_k> - t_(n,k)|."""
    worst = 0.0
    for n in product(*[range(m) for m in t.out_box]):
        e_n = CoefficientField.unit(t.out_box, n)
        for k in product(*[range(m) for m in t.in_box]):
            got = pair_kernel(t, tensor(e_n, CoefficientField.unit(t.in_box, k)))
            i = np.ravel_multi_index(n, t.out_box)
            j = np.ravel_multi_index(k, t.in_box)
            worst = max(worst, abs(got - t.data[i, j]))
    return worst


def bilinear_from_kernel(t: KernelCoefficients) -> Callable[[CoefficientField, CoefficientField], complex]:
    """B(psi, phi) = K(psi (x) phi)."""

    def B(psi: CoefficientField, phi: CoefficientField) -> complex:
        return pair_kernel(t, tensor(psi, phi))

    return B


# -- kernel zoo --------------------------------------------------------------


def _diag(box: Sequence[int], values: np.ndarray) -> KernelCoefficients:
    box = tuple(box)
    return KernelCoefficients(box, box, np.diag(values.ravel()))


def _nu(box: Sequence[int]) -> np.ndarray:
    return np.sum(np.meshgrid(*[np.arange(n) for n in box], indexing="ij"), axis=0)


def identity_kernel(box: Sequence[int]) -> KernelCoefficients:
    box = tuple(box)
    return _diag(box, np.ones(int(np.prod(box)), dtype=complex))


def fourier_kernel(box: Sequence[int]) -> KernelCoefficients:
    """diag((-i)^{nu(n)}), the Fourier transform in the Hermite basis."""
    phases = np.array([1, -1j, -1, 1j])
    return _diag(box, phases[_nu(box) % 4])


def heat_kernel(box: Sequence[int], tau: float) -> KernelCoefficients:
    """diag(exp(-tau nu(n))), the semigroup generated by -N."""
    return _diag(box, np.exp(-tau * _nu(box)).astype(complex))


def rank_one_kernel(a: CoefficientField, b: CoefficientField) -> KernelCoefficients:
    """t_(n,k) = a_n b_k."""
    return KernelCoefficients(a.box, b.box, np.outer(a.data.ravel(), b.data.ravel()))


def compose(t2: KernelCoefficients, t1: KernelCoefficients) -> KernelCoefficients:
    """Kernel of K2 after K1 on a shared middle box."""
    if t2.in_box != t1.out_box:
        raise BoxError("middle boxes differ")
    return KernelCoefficients(t2.out_box, t1.in_box, t2.data @ t1.data)
