"""Coefficient and sample containers with their JSON file forms.

Arrays are stored dense in C (lexicographic) order.  JSON floats are written
with Python's shortest round-trip repr, so save/load is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BoxError, ValidationError

MAX_DIM = 3
KINDS = ("test", "dual")


def _pairs(z: np.ndarray) -> list[list[float]]:
    z = np.asarray(z, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in z]


def _from_pairs(pairs, shape) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("data must be a list of [re, im] pairs")
    z = arr[:, 0] + 1j * arr[:, 1]
    if z.size != int(np.prod(shape)):
        raise ValidationError(f"data has {z.size} entries, box {list(shape)} needs {int(np.prod(shape))}")
    return z.reshape(shape)


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Hermite coefficients a_n on the box prod_k [0, N_k)."""

    data: np.ndarray
    kind: str = "test"

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim < 1 or data.ndim > MAX_DIM:
            raise ValidationError(f"dimension must be 1..{MAX_DIM}, got {data.ndim}")
        if data.size == 0:
            raise ValidationError("box must be nonempty")
        if not np.all(np.isfinite(data)):
            raise ValidationError("coefficients must be finite")
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.ndim

    @property
    def box(self) -> tuple[int, ...]:
        return self.data.shape

    @classmethod
    def zeros(cls, box: Sequence[int], kind: str = "test") -> "CoefficientField":
        return cls(np.zeros(tuple(box), dtype=complex), kind)

    @classmethod
    def unit(cls, box: Sequence[int], index: Sequence[int] | int, kind: str = "test") -> "CoefficientField":
        box = tuple(box)
        index = (index,) if np.isscalar(index) else tuple(index)
        data = np.zeros(box, dtype=complex)
        data[index] = 1.0
        return cls(data, kind)

    def with_data(self, data: np.ndarray, kind: str | None = None) -> "CoefficientField":
        return CoefficientField(data, self.kind if kind is None else kind)

    def padded(self, box: Sequence[int]) -> "CoefficientField":
        """Zero-extend to a larger box."""
        box = tuple(box)
        if len(box) != self.dim or any(b < n for b, n in zip(box, self.box)):
            raise BoxError(f"cannot pad box {self.box} to {box}")
        out = np.zeros(box, dtype=complex)
        out[tuple(slice(0, n) for n in self.box)] = self.data
        return CoefficientField(out, self.kind)

    def truncated(self, box: Sequence[int]) -> "CoefficientField":
        box = tuple(box)
        if len(box) != self.dim:
            raise BoxError("dimension mismatch")
        return CoefficientField(self.data[tuple(slice(0, n) for n in box)], self.kind)

    def total_order(self) -> np.ndarray:
        """nu(n) = n_1 + ... + n_d over the box."""
        grids = np.meshgrid(*[np.arange(n) for n in self.box], indexing="ij")
        return np.sum(grids, axis=0)

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        box = tuple(max(a, b) for a, b in zip(self.box, other.box))
        return CoefficientField(self.padded(box).data + other.padded(box).data, self.kind)

    def __mul__(self, c: complex) -> "CoefficientField":
        return CoefficientField(self.data * c, self.kind)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"dim": self.dim, "box": list(self.box), "kind": self.kind, "data": _pairs(self.data)}

    @classmethod
    def from_json(cls, doc: dict) -> "CoefficientField":
        try:
            box = tuple(int(b) for b in doc["box"])
            dim = int(doc.get("dim", len(box)))
            kind = doc.get("kind", "test")
            data = doc["data"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed coefficient file: {exc}") from None
        if dim != len(box):
            raise ValidationError("dim does not match box")
        return cls(_from_pairs(data, box), kind)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values on a tensor grid; ``grids[k]`` is strictly increasing."""

    grids: tuple[np.ndarray, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        grids = tuple(np.asarray(g, dtype=float) for g in self.grids)
        values = np.asarray(self.values)
        if not np.iscomplexobj(values):
            values = values.astype(float)
        if len(grids) < 1 or len(grids) > MAX_DIM:
            raise ValidationError("grid dimension must be 1..3")
        for g in grids:
            if g.ndim != 1 or g.size < 1 or np.any(np.diff(g) <= 0):
                raise ValidationError("grids must be strictly increasing 1-d arrays")
        if values.shape != tuple(g.size for g in grids):
            raise ValidationError(f"values shape {values.shape} does not match grids")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.grids)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "grids": [g.tolist() for g in self.grids],
            "values": _pairs(self.values),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SampledFunction":
        try:
            grids = [np.asarray(g, dtype=float) for g in doc["grids"]]
            values = doc["values"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed sample file: {exc}") from None
        shape = tuple(g.size for g in grids)
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 2 and arr.shape[0] == int(np.prod(shape)):
            vals = _from_pairs(values, shape)
        else:
            vals = arr.reshape(shape)
        return cls(tuple(grids), vals)


def dump_json(doc: dict, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def save_field(a: CoefficientField, path: str | Path) -> None:
    dump_json(a.to_json(), path)


def load_field(path: str | Path) -> CoefficientField:
    return CoefficientField.from_json(load_json(path))
