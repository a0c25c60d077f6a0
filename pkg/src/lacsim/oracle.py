"""Closed-form targets, evaluated directly from their defining sums.

Everything here is computed from the limit/partial-sum formulas alone, never
from the distributed recursions, so trace-versus-oracle agreement is a genuine
two-implementation check.  Static targets read the field at step 0; the
dynamic targets use the lagged time arguments x_{i +- j}(k - j).

Boundary semantics: a Ring wraps indices modulo n; ZeroHalo (or any non-ring
boundary) means the zero-extended line, where indices outside 0..n-1
contribute zero.  Truncated chains have no closed-form target.
"""
from __future__ import annotations

import math

from .arbitrary_weights import WeightTable
from .chain import Ring, Truncated
from .errors import ValidationError
from .fields import MeasurementField, evaluate_field

DEFAULT_TAIL = 1e-12


def _x(field: MeasurementField, idx: int, k: int, boundary, n: int) -> float:
    if isinstance(boundary, Ring):
        return evaluate_field(field, idx % n, k)
    if 0 <= idx < n:
        return evaluate_field(field, idx, k)
    return 0.0


def _check_boundary(boundary):
    if isinstance(boundary, Truncated):
        raise ValidationError("truncated chains have no closed-form target")


def exp_tail_bound(rho: float, k: int, bound_m: float) -> float:
    """Magnitude of everything the k-term partial sum discards."""
    lam = (1.0 - rho) / (1.0 + rho)
    return lam * 2.0 * bound_m * rho ** (k + 1) / (1.0 - rho)


def _tail_hops(decay: float, bound_m: float, eps: float) -> int:
    """Hops needed before the geometric tail drops below eps."""
    if bound_m <= 0.0:
        return 0
    target = eps * (1.0 - decay) / (2.0 * bound_m)
    if target >= 1.0:
        return 0
    return max(1, math.ceil(math.log(target) / math.log(decay)))


def exp_target(field, i, rho, *, n, boundary=Ring(), k=None, eps=None):
    """Symmetric geometric average: lam * (x_i + sum_j rho**j (x_{i-j} + x_{i+j})).

    Truncate at `k` hops, or at tail tolerance `eps` (default 1e-12 * M).
    """
    _check_boundary(boundary)
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    lam = (1.0 - rho) / (1.0 + rho)
    if k is None:
        if eps is None:
            eps = DEFAULT_TAIL * max(field.bound_m(), 1.0)
        k = _tail_hops(rho, lam * field.bound_m(), eps)
    total = _x(field, i, 0, boundary, n)
    power = 1.0
    for j in range(1, k + 1):
        power *= rho
        total += power * (_x(field, i - j, 0, boundary, n) + _x(field, i + j, 0, boundary, n))
    return lam * total


def asym_target(field, i, rho_back, rho_forward, *, n, boundary=Ring(), k=None, eps=None):
    """Direction-dependent geometric average."""
    _check_boundary(boundary)
    rb, rf = rho_back, rho_forward
    if k is None:
        if eps is None:
            eps = DEFAULT_TAIL * max(field.bound_m(), 1.0)
        k = _tail_hops(max(rb, rf), field.bound_m(), eps)
    total = _x(field, i, 0, boundary, n)
    pb = pf = 1.0
    for j in range(1, k + 1):
        pb *= rb
        pf *= rf
        total += pb * _x(field, i - j, 0, boundary, n)
        total += pf * _x(field, i + j, 0, boundary, n)
    return (1.0 - rb) * (1.0 - rf) / (1.0 - rb * rf) * total


def window_target(field, i, half_width, *, n, boundary=Ring(), k=None):
    """Mean of the 2*half_width+1 window; `k` truncates to the growing phase."""
    _check_boundary(boundary)
    if isinstance(boundary, Ring) and n < 2 * half_width + 1:
        raise ValidationError(f"ring of {n} sensors cannot host half-width {half_width}")
    reach = half_width if k is None else min(k, half_width)
    total = _x(field, i, 0, boundary, n)
    for j in range(1, reach + 1):
        total += _x(field, i - j, 0, boundary, n) + _x(field, i + j, 0, boundary, n)
    return total / (2.0 * half_width + 1.0)


def variable_window_target(field, i, half_widths, *, n, boundary=Ring(), k=None):
    """Per-sensor-window final value: each neighbor enters with the weight of
    its own window length, so the coefficients need not sum to one."""
    _check_boundary(boundary)
    widths = list(half_widths)
    if len(widths) != n:
        raise ValidationError(f"need one half-width per sensor: got {len(widths)} for n={n}")
    if isinstance(boundary, Ring) and n < 2 * max(widths) + 1:
        raise ValidationError(f"ring of {n} sensors cannot host half-width {max(widths)}")

    def width_at(idx):
        if isinstance(boundary, Ring):
            return widths[idx % n]
        return widths[min(max(idx, 0), n - 1)]

    li = width_at(i)
    reach = li if k is None else min(k, li)
    total = _x(field, i, 0, boundary, n) / (2.0 * li + 1.0)
    for j in range(1, reach + 1):
        for idx in (i - j, i + j):
            total += _x(field, idx, 0, boundary, n) / (2.0 * width_at(idx) + 1.0)
    return total


def arbitrary_target(field, i, table: WeightTable, k, *, n, boundary=Ring()):
    """Partial sum of the banded weighted average after k rounds."""
    _check_boundary(boundary)
    if isinstance(boundary, Ring) and n < 2 * table.radius + 1:
        raise ValidationError(f"ring of {n} sensors cannot host radius {table.radius}")

    def row_at(idx):
        if isinstance(boundary, Ring):
            return table.row(idx % n)
        return table.row(min(max(idx, 0), n - 1))

    radius = table.radius
    row = row_at(i)
    total = row[radius] * _x(field, i, 0, boundary, n)
    for j in range(1, min(k, radius) + 1):
        total += row[radius - j] * _x(field, i - j, 0, boundary, n)
        total += row[radius + j] * _x(field, i + j, 0, boundary, n)
    return total / table.row_sum


def dyn_exp_target(field, i, k, rho, *, n, boundary=Ring()):
    """Geometric average with lagged time arguments."""
    _check_boundary(boundary)
    total = _x(field, i, k, boundary, n)
    power = 1.0
    for j in range(1, k + 1):
        power *= rho
        total += power * (_x(field, i - j, k - j, boundary, n)
                          + _x(field, i + j, k - j, boundary, n))
    return (1.0 - rho) / (1.0 + rho) * total


def dyn_window_target(field, i, k, half_width, *, n, boundary=Ring()):
    """Lagged window mean; the reach grows with k until the window is full."""
    _check_boundary(boundary)
    if isinstance(boundary, Ring) and n < 2 * half_width + 1:
        raise ValidationError(f"ring of {n} sensors cannot host half-width {half_width}")
    total = _x(field, i, k, boundary, n)
    for j in range(1, min(k, half_width) + 1):
        total += (_x(field, i - j, k - j, boundary, n)
                  + _x(field, i + j, k - j, boundary, n))
    return total / (2.0 * half_width + 1.0)
