"""Per-sensor update rules for time-invariant measurements.

Every transition is a pure function computing the round-k value from explicit
histories, most recent first:

    own   = (y_i(k-1), y_i(k-2), y_i(k-3))   as deep as the stage needs
    left  = (y_{i-1}(k-1), y_{i-1}(k-2))     received messages, depth <= 2
    right = (y_{i+1}(k-1), y_{i+1}(k-2))

k = 0 is the initialization stage and needs only the local measurement.
Stage dispatch is driven by the round index alone; the initialization is never
folded into the generic stage.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import HistoryError, TerminatedError, ValidationError


def _check_rho(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name} must lie strictly inside (0, 1), got {value!r}")


@dataclass(frozen=True)
class ExponentialWeighting:
    """Symmetric geometric weights: hop distance j contributes rho**j."""

    rho: float

    def __post_init__(self):
        _check_rho("rho", self.rho)


@dataclass(frozen=True)
class AsymmetricWeighting:
    """Backward and forward directions weighted with distinct decay rates."""

    rho_back: float
    rho_forward: float

    def __post_init__(self):
        _check_rho("rho_back", self.rho_back)
        _check_rho("rho_forward", self.rho_forward)


@dataclass(frozen=True)
class FiniteWindow:
    """Uniform average over the 2*half_width+1 nearest sensors."""

    half_width: int

    def __post_init__(self):
        if not isinstance(self.half_width, int) or self.half_width < 1:
            raise ValidationError(f"half_width must be an integer >= 1, got {self.half_width!r}")


@dataclass(frozen=True)
class PerSensorWindow:
    """Finite window with an individual half-width per sensor.

    Adjacent half-widths may differ by at most one; the wrap-around pair is
    checked when the rule is run on a ring.
    """

    half_widths: tuple

    def __post_init__(self):
        widths = tuple(int(w) for w in self.half_widths)
        object.__setattr__(self, "half_widths", widths)
        if not widths:
            raise ValidationError("half_widths must be non-empty")
        for w in widths:
            if w < 1:
                raise ValidationError(f"half-widths must be >= 1, got {w}")
        for a, b in zip(widths, widths[1:]):
            if abs(a - b) > 1:
                raise ValidationError(f"adjacent half-widths differ by more than one: {a}, {b}")


def _need(k: int, own, left, right, n_own: int, n_nb: int) -> None:
    if len(own) < n_own or len(left) < n_nb or len(right) < n_nb:
        raise HistoryError(
            f"round {k} needs own depth {n_own} and neighbor depth {n_nb}; "
            f"got {len(own)}/{len(left)}/{len(right)}")


def exp_transition(k, own, left, right, x_i, rho):
    """y_i(k) of the symmetric exponential recursion."""
    if k == 0:
        return (1.0 - rho) / (1.0 + rho) * x_i
    if k == 1:
        _need(k, own, left, right, 1, 1)
        return own[0] + rho * (left[0] + right[0])
    if k == 2:
        _need(k, own, left, right, 2, 2)
        return (own[0] + rho * (left[0] - left[1]) + rho * (right[0] - right[1])
                - 2.0 * rho * rho * own[1])
    _need(k, own, left, right, 3, 2)
    return (own[0] + rho * (left[0] - left[1]) + rho * (right[0] - right[1])
            - rho * rho * (own[1] - own[2]))


def asym_transition(k, own, left, right, x_i, rho_back, rho_forward):
    """y_i(k) with direction-dependent decay; left carries the backward side."""
    rb, rf = rho_back, rho_forward
    if k == 0:
        return (1.0 - rb) * (1.0 - rf) / (1.0 - rb * rf) * x_i
    if k == 1:
        _need(k, own, left, right, 1, 1)
        return own[0] + rb * left[0] + rf * right[0]
    if k == 2:
        _need(k, own, left, right, 2, 2)
        return (own[0] + rb * (left[0] - left[1]) + rf * (right[0] - right[1])
                - 2.0 * rb * rf * own[1])
    _need(k, own, left, right, 3, 2)
    return (own[0] + rb * (left[0] - left[1]) + rf * (right[0] - right[1])
            - rb * rf * (own[1] - own[2]))


def window_transition(k, own, left, right, x_i, half_width):
    """y_i(k) of the uniform finite-window recursion; defined for k <= half_width.

    The recursion terminates once the window is full; stepping past that is an
    error so accidental over-running surfaces instead of silently freezing.
    """
    if k > half_width:
        raise TerminatedError(
            f"window recursion terminates at round {half_width}; asked for round {k}")
    if k == 0:
        return x_i / (2.0 * half_width + 1.0)
    if k == 1:
        _need(k, own, left, right, 1, 1)
        return own[0] + left[0] + right[0]
    if k == 2:
        _need(k, own, left, right, 2, 2)
        return own[0] + (left[0] - left[1]) + (right[0] - right[1]) - 2.0 * own[1]
    _need(k, own, left, right, 3, 2)
    return own[0] + (left[0] - left[1]) + (right[0] - right[1]) - (own[1] - own[2])


def variable_window_transition(k, own, left, right, x_i, half_width,
                               left_half_width=None, right_half_width=None):
    """Per-sensor-window variant: the sensor's own half-width replaces the
    uniform one throughout.  Neighbor half-widths, when supplied, are checked
    against the differ-by-at-most-one constraint."""
    for nb in (left_half_width, right_half_width):
        if nb is not None and abs(nb - half_width) > 1:
            raise ValidationError(
                f"neighboring half-widths differ by more than one: {half_width}, {nb}")
    return window_transition(k, own, left, right, x_i, half_width)
