"""Random inter-sensor spacing: laws, normalization constants, and moments.

Gaps between successive sensors are iid draws; a measurement d units away is
attenuated by rho**d, with exponents telescoping over the gaps in between.
The normalization constant K makes a constant field pass through with unit
mean; the output then remains random, and its variance follows from the
moment chain of xi = rho**gap.

Naming note: the mean-1 density e^{-d} is an exponential law; the analysis
refers to the process it generates, so the class name says what is sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NeedsMoreSensorsError, ValidationError
from .fields import MeasurementField, evaluate_field


@dataclass(frozen=True)
class ExpGaps:
    """Gaps with density e^{-d}: the unit-intensity renewal process."""


@dataclass(frozen=True)
class UniformGaps:
    """Gaps uniform on [1 - eta, 1 + eta]."""

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValidationError(f"eta must lie strictly inside (0, 1), got {self.eta!r}")


SpacingLaw = Union[ExpGaps, UniformGaps]


@dataclass(frozen=True)
class SpacingModel:
    law: SpacingLaw
    seed: int = 0


@dataclass(frozen=True, eq=False)
class SpacingDraw:
    """One realization of consecutive gaps d_{g,g+1} for sensors 0..len(gaps)."""

    gaps: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.gaps, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("a draw needs a non-empty 1-D gap array")
        if np.any(arr <= 0):
            raise ValidationError("gaps must be strictly positive")
        object.__setattr__(self, "gaps", arr)

    @property
    def sensors(self) -> int:
        return self.gaps.size + 1

    def distance(self, i: int, j: int) -> float:
        """Cumulative distance between sensors i and j (gap exponents add)."""
        lo, hi = sorted((i, j))
        if lo < 0 or hi > self.gaps.size:
            raise ValidationError(f"sensors {i}, {j} outside draw of {self.sensors} sensors")
        return float(self.gaps[lo:hi].sum())


def _rng(seed: int, replicate: int | None = None) -> np.random.Generator:
    key = np.random.SeedSequence(seed) if replicate is None else \
        np.random.SeedSequence(seed, spawn_key=(replicate,))
    return np.random.Generator(np.random.PCG64(key))


def _draw_gaps(law: SpacingLaw, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(law, ExpGaps):
        return rng.standard_exponential(count)
    return rng.uniform(1.0 - law.eta, 1.0 + law.eta, count)


def sample_spacings(model: SpacingModel, count: int, seed: int | None = None) -> SpacingDraw:
    """Deterministic draw of `count` gaps; same seed, same gaps."""
    if count < 1:
        raise ValidationError(f"need at least one gap, got {count}")
    rng = _rng(model.seed if seed is None else seed)
    return SpacingDraw(_draw_gaps(model.law, count, rng))


def k_poisson(rho: float) -> float:
    """Normalization constant under e^{-d} gaps: (-log rho)/(2 - log rho);
    approximately (1-rho)/2 when 1-rho is small."""
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    s = -math.log(rho)
    return s / (2.0 + s)


def k_uniform(rho: float, eta: float) -> float:
    """Normalization constant under uniform gaps.  Written via sinh for
    stability at small eta; the eta -> 0 limit is (1-rho)/(1+rho), recovering
    the unit-spacing constant."""
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    if not 0.0 < eta < 1.0:
        raise ValidationError(f"eta must lie strictly inside (0, 1), got {eta!r}")
    # E[rho^d] = (rho^{1+eta} - rho^{1-eta}) / (2 eta log rho); K = (1-E)/(1+E)
    t = math.log(rho)
    num = eta * t - rho * math.sinh(eta * t)
    den = eta * t + rho * math.sinh(eta * t)
    return num / den


@dataclass(frozen=True)
class SpacingMoments:
    e_xi: float     # E[rho^gap]
    e_xi2: float    # E[rho^(2 gap)]
    var_xi: float
    var_u: float    # variance of the one-sided attenuation sum
    var_y: float    # variance of the normalized consensus value


def spacing_moments(rho: float) -> SpacingMoments:
    """Moment chain for e^{-d} gaps; the two routes to var_u (closed form and
    the product-variance fixed point) are checked against each other."""
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    s = -math.log(rho)
    e_xi = 1.0 / (1.0 + s)
    e_xi2 = 1.0 / (1.0 + 2.0 * s)
    # cancellation-free form of e_xi2 - e_xi^2; the plain subtraction loses
    # everything as rho -> 1
    var_xi = s * s / ((1.0 + 2.0 * s) * (1.0 + s) ** 2)
    var_u = 1.0 / (2.0 * s)
    e_u = (1.0 + s) / s
    one_minus_e_xi2 = 2.0 * s / (1.0 + 2.0 * s)  # 1 - e_xi2 without cancellation
    fixed_point = var_xi * e_u * e_u / one_minus_e_xi2
    if not math.isclose(fixed_point, var_u, rel_tol=1e-12):
        raise AssertionError(f"moment chain inconsistent: {fixed_point} vs {var_u}")
    var_y = s / (2.0 + s) ** 2
    k = k_poisson(rho)
    if abs(var_y - 2.0 * k * k * var_u) > 1e-14:
        raise AssertionError("var_y identity 2 K^2 var_u violated")
    return SpacingMoments(e_xi=e_xi, e_xi2=e_xi2, var_xi=var_xi, var_u=var_u, var_y=var_y)


def _required_sensors(rho: float, law: SpacingLaw, tail_eps: float) -> int:
    needed = math.log(tail_eps) / math.log(rho)
    if isinstance(law, UniformGaps):
        return math.ceil(needed / (1.0 - law.eta)) + 2
    # mean-1 gaps: the margin makes a short draw astronomically unlikely
    return math.ceil(needed + 10.0 * math.sqrt(needed) + 20.0)


def weighted_target(draw: SpacingDraw, field: MeasurementField, i: int, rho: float,
                    k_norm: float, tail_eps: float = 1e-12) -> float:
    """K [x_i + sum_j rho^{d(i,i+j)} x_{i+j} + sum_j rho^{d(i,i-j)} x_{i-j}],
    truncated once the attenuation drops below tail_eps on each side.

    The draw must be long enough to reach that attenuation on both sides;
    otherwise a NeedsMoreSensorsError reports a sufficient sensor count.
    """
    if not 0 <= i < draw.sensors:
        raise ValidationError(f"sensor {i} outside draw of {draw.sensors} sensors")
    gaps = draw.gaps
    total = evaluate_field(field, i, 0)
    for step, stop in ((1, draw.sensors - 1), (-1, 0)):
        cum = 0.0
        j = i
        while True:
            if j == stop:
                raise NeedsMoreSensorsError(
                    f"attenuation rho^{cum:.3g} has not reached {tail_eps} at sensor {j}",
                    required=_required_sensors(rho, ExpGaps(), tail_eps))
            cum += gaps[j] if step == 1 else gaps[j - 1]
            j += step
            w = rho ** cum
            if w < tail_eps:
                break
            total += w * evaluate_field(field, j, 0)
    return k_norm * total


@dataclass(frozen=True)
class SpacingMCReport:
    rho: float
    law: str
    k_analytic: float
    mean: float
    mean_se: float
    var_analytic: float | None
    var_sampled: float
    var_se: float
    replicates: int

    def to_dict(self) -> dict:
        return {
            "rho": self.rho, "law": self.law, "K_analytic": self.k_analytic,
            "mean": self.mean, "mean_se": self.mean_se,
            "var_analytic": self.var_analytic, "var_sampled": self.var_sampled,
            "var_se": self.var_se, "replicates": self.replicates,
        }


def monte_carlo_spacing(rho: float, model: SpacingModel, replicates: int,
                        seed: int | None = None, tail_eps: float = 1e-12) -> SpacingMCReport:
    """Sample mean and variance of the normalized consensus value on an
    all-ones field over independent spacing draws.

    Each replicate draws both directions from the stream spawned at
    (seed, replicate), so the merge is order-independent.
    """
    if replicates < 1000:
        raise ValidationError(f"need at least 1000 replicates, got {replicates}")
    base_seed = model.seed if seed is None else seed
    law = model.law
    if isinstance(law, ExpGaps):
        k_norm = k_poisson(rho)
        law_name = "exp_density"
        var_analytic = spacing_moments(rho).var_y
    else:
        k_norm = k_uniform(rho, law.eta)
        law_name = f"uniform(eta={law.eta})"
        var_analytic = None
    gap_count = _required_sensors(rho, law, tail_eps)
    values = np.empty(replicates)
    for r in range(replicates):
        rng = _rng(base_seed, r)
        sides = 0.0
        for _ in range(2):
            cum = np.cumsum(_draw_gaps(law, gap_count, rng))
            w = rho ** cum
            sides += float(w[w >= tail_eps].sum())
        values[r] = k_norm * (1.0 + sides)
    mean = float(values.mean())
    var = float(values.var(ddof=1))
    mean_se = math.sqrt(var / replicates)
    m4 = float(((values - mean) ** 4).mean())
    var_se = math.sqrt(max(m4 - var * var, 0.0) / replicates)
    return SpacingMCReport(rho=rho, law=law_name, k_analytic=k_norm, mean=mean,
                           mean_se=mean_se, var_analytic=var_analytic,
                           var_sampled=var, var_se=var_se, replicates=replicates)


def table_from_draw(draw: SpacingDraw, rho: float, radius: int):
    """Banded weights rho^{d(i, i+offset)} for the draw's chain, with unit
    normalization so the distributed rule computes raw weighted sums.  Row
    totals genuinely differ here, so the run-time row check is disabled;
    normalize afterwards by the law's K or by per-row totals."""
    from .arbitrary_weights import WeightTable

    n = draw.sensors
    if n < 2 * radius + 1:
        raise ValidationError(f"draw of {n} sensors cannot host radius {radius}")
    weights = np.empty((n, 2 * radius + 1))
    for s in range(n):
        for off in range(-radius, radius + 1):
            t = s + off
            if 0 <= t < n:
                weights[s, off + radius] = rho ** draw.distance(s, t)
            else:
                # past the chain end: only ever multiplies a zero measurement,
                # but must stay nonzero for the coefficient ratios
                weights[s, off + radius] = rho ** abs(off)
    return WeightTable(weights, 1.0, radius, row_tol=None)
