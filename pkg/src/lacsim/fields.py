"""Measurement fields: deterministic signals over (sensor, step) plus seeded noise.

A field assigns a bounded value x_i(k) to every sensor index i and time step
k >= 0.  Noise, when configured, is drawn from a counter-based stream keyed by
(seed, i, k), so evaluation order never matters and repeated evaluation of the
same point is bit-identical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import OutOfDomainError, ValidationError

_MASK64 = (1 << 64) - 1
_ROOT3 = math.sqrt(3.0)


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValidationError(f"{name}: non-finite parameter {v!r}")


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        _require_finite("constant", self.value)

    def at(self, i: int, k: int) -> float:
        return self.value

    def sup(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class Impulse:
    """Unit spike at one sensor, constant in time."""

    center: int = 0

    def at(self, i: int, k: int) -> float:
        return 1.0 if i == self.center else 0.0

    def sup(self) -> float:
        return 1.0


@dataclass(frozen=True)
class SpatialCosine:
    amplitude: float
    omega: float  # radians per hop
    phase: float = 0.0

    def __post_init__(self):
        _require_finite("spatial_cosine", self.amplitude, self.omega, self.phase)

    def at(self, i: int, k: int) -> float:
        return self.amplitude * math.cos(self.omega * i + self.phase)

    def sup(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True)
class TemporalCosine:
    amplitude: float
    omega: float  # radians per step
    phase: float = 0.0

    def __post_init__(self):
        _require_finite("temporal_cosine", self.amplitude, self.omega, self.phase)

    def at(self, i: int, k: int) -> float:
        return self.amplitude * math.cos(self.omega * k + self.phase)

    def sup(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True, eq=False)
class TableField:
    """Explicit values: 1-D array (static in time) or 2-D (sensor, step)."""

    values: np.ndarray
    first_sensor: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim not in (1, 2):
            raise ValidationError("table field expects a 1-D or 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("table field contains non-finite values")
        object.__setattr__(self, "values", arr)

    def at(self, i: int, k: int) -> float:
        row = i - self.first_sensor
        if not 0 <= row < self.values.shape[0]:
            raise OutOfDomainError(f"sensor {i} outside table rows "
                                   f"[{self.first_sensor}, {self.first_sensor + self.values.shape[0]})")
        if self.values.ndim == 1:
            return float(self.values[row])
        if not 0 <= k < self.values.shape[1]:
            raise OutOfDomainError(f"step {k} outside table columns [0, {self.values.shape[1]})")
        return float(self.values[row, k])

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class SumField:
    parts: tuple

    def at(self, i: int, k: int) -> float:
        return sum(p.at(i, k) for p in self.parts)

    def sup(self) -> float:
        return sum(p.sup() for p in self.parts)


FieldKind = Union[Constant, Impulse, SpatialCosine, TemporalCosine, TableField, SumField]


@dataclass(frozen=True)
class Noise:
    sigma: float
    distribution: str = "gaussian"  # or "uniform"
    seed: int = 0

    def __post_init__(self):
        _require_finite("noise", self.sigma)
        if self.sigma < 0:
            raise ValidationError("noise sigma must be >= 0")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValidationError(f"unknown noise distribution {self.distribution!r}")


@dataclass(frozen=True)
class MeasurementField:
    """A field kind plus optional additive noise and a declared bound M."""

    kind: FieldKind
    noise: Noise | None = None
    bound: float | None = None

    def bound_m(self) -> float:
        """Bound used for truncation tails.  Gaussian noise is unbounded, so
        the derived value allows 6 sigma; declare `bound` to override."""
        if self.bound is not None:
            return self.bound
        m = self.kind.sup()
        if self.noise is not None and self.noise.sigma > 0:
            m += (6.0 if self.noise.distribution == "gaussian" else _ROOT3) * self.noise.sigma
        return m


def _noise_at(noise: Noise, i: int, k: int) -> float:
    # Philox counter (k, i) under a fixed key: an order-independent stream
    # that is reproducible per (seed, i, k).
    gen = np.random.Generator(np.random.Philox(
        counter=[k & _MASK64, i & _MASK64, 0, 0],
        key=[noise.seed & _MASK64, (noise.seed >> 64) & _MASK64]))
    if noise.distribution == "gaussian":
        return noise.sigma * float(gen.standard_normal())
    return float(gen.uniform(-_ROOT3 * noise.sigma, _ROOT3 * noise.sigma))


def evaluate_field(field: MeasurementField, i: int, k: int) -> float:
    """x_i(k): the deterministic kind plus the seeded noise term, if any."""
    if k < 0:
        raise ValidationError(f"time step must be >= 0, got {k}")
    v = field.kind.at(i, k)
    if field.noise is not None and field.noise.sigma > 0:
        v += _noise_at(field.noise, i, k)
    return v


def random_spatial_table(n: int, seed: int, low: float = -1.0, high: float = 1.0) -> TableField:
    """Time-invariant uniform random values on sensors 0..n-1."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return TableField(rng.uniform(low, high, n))


def random_space_time_table(n: int, steps: int, seed: int,
                            low: float = -1.0, high: float = 1.0) -> TableField:
    """Random values on sensors 0..n-1 for steps 0..steps-1."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return TableField(rng.uniform(low, high, (n, steps)))
