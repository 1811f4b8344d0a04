"""Material coefficient fields as finite sample sets.

Essential infima and suprema over the domain are replaced by minima and
maxima over the samples; every certificate built on top of a field is
therefore a statement about its samples.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping, Sequence, Union

import numpy as np

from .tensorlin import as_tensor, operator_norm, split_hermitian

DEFAULT_NODES = 257


class FieldError(ValueError):
    """Malformed field definition or parameters outside a model's domain."""


@dataclass(frozen=True)
class SamplePoint:
    id: str
    coords: tuple[float, float, float] | None = None
    weight: float | None = None  # reserved


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int = DEFAULT_NODES

    def __post_init__(self):
        if self.lo == self.hi:
            if self.count != 1:
                object.__setattr__(self, "count", 1)
        else:
            if self.count < 2:
                raise FieldError(f"axis {self.name!r}: a varying axis needs at least 2 nodes")
            if not self.lo < self.hi:
                raise FieldError(f"axis {self.name!r}: range [{self.lo}, {self.hi}] is degenerate")

    def nodes(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.lo)])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SamplingSpec:
    axes: tuple[Axis, ...] = ()

    @classmethod
    def of(cls, **ranges) -> SamplingSpec:
        """``SamplingSpec.of(r=(1.0, 2.0, 257))``; the count is optional."""
        axes = []
        for name, spec in ranges.items():
            if len(spec) == 2:
                axes.append(Axis(name, float(spec[0]), float(spec[1])))
            else:
                axes.append(Axis(name, float(spec[0]), float(spec[1]), int(spec[2])))
        return cls(tuple(axes))

    def axis(self, name: str) -> Axis | None:
        for a in self.axes:
            if a.name == name:
                return a
        return None

    def grid(self) -> list[dict[str, float]]:
        """Cartesian product of axis nodes, last axis varying fastest."""
        if not self.axes:
            return [{}]
        names = [a.name for a in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(a.nodes() for a in self.axes))]

    @property
    def resolution(self) -> dict[str, int]:
        return {a.name: a.count for a in self.axes}


@dataclass(frozen=True, eq=False)
class ExplicitSamples:
    samples: tuple[tuple[SamplePoint, np.ndarray], ...]


@dataclass(frozen=True, eq=False)
class Parametric:
    model: str
    params: Mapping[str, Any] = field(default_factory=dict)
    sampling: SamplingSpec = SamplingSpec()


Source = Union[ExplicitSamples, Parametric]


@dataclass(frozen=True, eq=False)
class MaterialField:
    name: str
    dim: int
    source: Source

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise FieldError(f"field {self.name!r}: dim must be 1, 2 or 3")

    @cached_property
    def samples(self) -> list[tuple[SamplePoint, np.ndarray]]:
        return materialize(self)

    @cached_property
    def tensors(self) -> np.ndarray:
        """Stacked sample tensors, shape (n_samples, dim, dim)."""
        return np.stack([t for _, t in self.samples])

    @cached_property
    def points(self) -> list[SamplePoint]:
        return [p for p, _ in self.samples]

    @cached_property
    def hermitian_split(self) -> tuple[np.ndarray, np.ndarray]:
        return split_hermitian(self.tensors)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def resolution(self) -> dict[str, int]:
        if isinstance(self.source, Parametric):
            return self.source.sampling.resolution
        return {"samples": len(self.source.samples)}


def materialize(f: MaterialField) -> list[tuple[SamplePoint, np.ndarray]]:
    """Evaluate a field into its deterministic list of (point, tensor) samples."""
    if isinstance(f.source, ExplicitSamples):
        out = [(p, as_tensor(t)) for p, t in f.source.samples]
    else:
        from .media import evaluate_model

        out = evaluate_model(f.source.model, f.source.params, f.source.sampling)
    if not out:
        raise FieldError(f"field {f.name!r} has no samples")
    seen = set()
    for p, t in out:
        if p.id in seen:
            raise FieldError(f"field {f.name!r}: duplicate sample id {p.id!r}")
        seen.add(p.id)
        if t.shape != (f.dim, f.dim):
            raise FieldError(f"field {f.name!r}: sample {p.id!r} has shape {t.shape}, expected dim {f.dim}")
    return out


def sup_norm(f: MaterialField) -> float:
    """xi_+ : largest spectral norm over the samples."""
    return float(np.max(operator_norm(f.tensors)))


def inf_modulus(f: MaterialField) -> float:
    if f.dim != 1:
        raise FieldError("inf_modulus is defined for scalar (dim 1) fields only")
    return float(np.min(np.abs(f.tensors[:, 0, 0])))


# -- constructors and transforms ----------------------------------------------


def field_from_tensors(name: str, tensors, ids: Sequence[str] | None = None, coords=None) -> MaterialField:
    arr = as_tensor(tensors)
    if arr.ndim == 2:
        arr = arr[None]
    if ids is None:
        ids = [f"x{k}" for k in range(arr.shape[0])]
    if coords is None:
        coords = [None] * arr.shape[0]
    samples = tuple((SamplePoint(str(i), c), t) for i, c, t in zip(ids, coords, arr))
    return MaterialField(name, arr.shape[-1], ExplicitSamples(samples))


def constant_field(name: str, tensor) -> MaterialField:
    return field_from_tensors(name, as_tensor(tensor)[None])


def scalar_field(name: str, values, dim: int = 1, ids=None) -> MaterialField:
    """Field whose samples are ``value * I_dim``."""
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    return field_from_tensors(name, vals[:, None, None] * np.eye(dim), ids=ids)


def map_field(f: MaterialField, fn: Callable[[np.ndarray], np.ndarray], name: str) -> MaterialField:
    """Apply ``fn`` to the stacked tensors and keep the sample points."""
    new = as_tensor(fn(f.tensors))
    samples = tuple((p, t) for p, t in zip(f.points, new))
    return MaterialField(name, f.dim, ExplicitSamples(samples))


def inverse_field(f: MaterialField) -> MaterialField:
    return map_field(f, np.linalg.inv, f"inv({f.name})")


def scaled_field(f: MaterialField, alpha: complex) -> MaterialField:
    return map_field(f, lambda t: complex(alpha) * t, f"({alpha})*{f.name}")


def negated_inverse_field(f: MaterialField) -> MaterialField:
    return map_field(f, lambda t: -np.linalg.inv(t), f"-inv({f.name})")


# -- JSON --------------------------------------------------------------------


def _parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise FieldError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    return complex(float(v))


def _parse_tensor(data, dim: int) -> np.ndarray:
    if dim == 1 and not isinstance(data, list):
        return np.array([[_parse_complex(data)]])
    if dim == 1 and len(data) == 2 and not isinstance(data[0], list):
        return np.array([[_parse_complex(data)]])
    rows = [[_parse_complex(x) for x in row] for row in data]
    arr = np.array(rows, dtype=complex)
    if arr.shape != (dim, dim):
        raise FieldError(f"tensor has shape {arr.shape}, expected ({dim}, {dim})")
    return arr


def field_from_dict(data: Mapping[str, Any]) -> MaterialField:
    try:
        name = str(data["name"])
        dim = int(data["dim"])
        src = data["source"]
        kind = src["type"]
    except (KeyError, TypeError) as exc:
        raise FieldError(f"field definition missing key: {exc}") from None
    if kind == "explicit":
        samples = []
        for k, s in enumerate(src.get("samples", [])):
            coords = s.get("coords")
            point = SamplePoint(
                str(s.get("id", f"x{k}")),
                tuple(float(c) for c in coords) if coords is not None else None,
                float(s["weight"]) if s.get("weight") is not None else None,
            )
            samples.append((point, _parse_tensor(s["tensor"], dim)))
        if not samples:
            raise FieldError(f"field {name!r} has no samples")
        return MaterialField(name, dim, ExplicitSamples(tuple(samples)))
    if kind == "parametric":
        axes = []
        for axis_name, spec in (src.get("sampling") or {}).items():
            if isinstance(spec, Mapping):
                lo, hi = float(spec["min"]), float(spec["max"])
                count = int(spec.get("count", DEFAULT_NODES if lo != hi else 1))
            else:
                lo, hi = float(spec[0]), float(spec[1])
                count = int(spec[2]) if len(spec) > 2 else DEFAULT_NODES
            axes.append(Axis(axis_name, lo, hi, count))
        return MaterialField(name, dim, Parametric(str(src["model"]), dict(src.get("params", {})), SamplingSpec(tuple(axes))))
    raise FieldError(f"unknown field source type {kind!r}")


def field_to_dict(f: MaterialField) -> dict:
    if isinstance(f.source, Parametric):
        return {
            "name": f.name,
            "dim": f.dim,
            "source": {
                "type": "parametric",
                "model": f.source.model,
                "params": dict(f.source.params),
                "sampling": {a.name: {"min": a.lo, "max": a.hi, "count": a.count} for a in f.source.sampling.axes},
            },
        }
    samples = []
    for p, t in f.samples:
        item: dict[str, Any] = {"id": p.id, "tensor": [[[z.real, z.imag] for z in row] for row in t]}
        if p.coords is not None:
            item["coords"] = list(p.coords)
        if p.weight is not None:
            item["weight"] = p.weight
        samples.append(item)
    return {"name": f.name, "dim": f.dim, "source": {"type": "explicit", "samples": samples}}


def load_field(path) -> MaterialField:
    with open(path) as fh:
        return field_from_dict(json.load(fh))
