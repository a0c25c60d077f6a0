"""Chain configuration and the synchronous message-passing harness.

One round = one synchronous exchange: every sensor broadcasts its state, then
every sensor updates from the same round snapshot.  Sensors see only the last
two messages from each immediate neighbor and at most three rounds of their
own history, so locality is enforced by construction and every delivered
message is recorded in an audit log.

Boundary policies:
  Ring       indices wrap modulo n (exact for spatially periodic fields);
  ZeroHalo   ghost sensors running the same rule with x = 0 pad both ends;
             with depth >= rounds nothing beyond the halo can reach a real
             sensor, making the zero-extended-line targets exact;
  Truncated  missing neighbors contribute zero to every difference term,
             which exhibits the boundary end effect.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .arbitrary_weights import BandedWeighting, fb_transition, glue, validate_weights
from .dynamic_rules import (DynamicExponential, DynamicWindow, assemble_y,
                            dyn_exp_transition, z_slot_transition)
from .errors import DivergedError, ValidationError
from .fields import MeasurementField, evaluate_field
from .static_rules import (AsymmetricWeighting, ExponentialWeighting, FiniteWindow,
                           PerSensorWindow, asym_transition, exp_transition,
                           variable_window_transition, window_transition)


@dataclass(frozen=True)
class Ring:
    pass


@dataclass(frozen=True)
class ZeroHalo:
    depth: int | None = None  # None resolves to the round count


@dataclass(frozen=True)
class Truncated:
    pass


Boundary = Union[Ring, ZeroHalo, Truncated]

AlgorithmSpec = Union[ExponentialWeighting, AsymmetricWeighting, FiniteWindow,
                      PerSensorWindow, BandedWeighting, DynamicExponential, DynamicWindow]


@dataclass(frozen=True)
class ChainConfig:
    n: int
    boundary: Boundary = Ring()
    rounds: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 3:
            raise ValidationError(f"chain needs n >= 3 sensors, got {self.n!r}")
        if not isinstance(self.rounds, int) or self.rounds < 0:
            raise ValidationError(f"rounds must be an integer >= 0, got {self.rounds!r}")

    def halo_depth(self) -> int:
        """Resolved halo depth; defaults to the horizon so no unmodeled
        information can reach a real sensor (one hop per round)."""
        if not isinstance(self.boundary, ZeroHalo):
            return 0
        d = self.boundary.depth
        if d is None:
            return self.rounds
        if d < self.rounds:
            raise ValidationError(
                f"zero-halo depth {d} is shallower than the {self.rounds}-round horizon")
        return d


class MessageRecord(NamedTuple):
    round: int
    receiver: int
    sender: int
    size: int


@dataclass
class ConsensusTrace:
    y: np.ndarray                       # (n, rounds + 1)
    z: np.ndarray | None                # (n, rounds + 1, slots) for the dynamic window
    audit: list
    config: ChainConfig
    algo: AlgorithmSpec
    own_history_depth: int = 3
    metadata: dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return self.y.shape[1] - 1


def _half_width_demand(algo: AlgorithmSpec) -> int | None:
    """Largest hop reach whose wrapped window must not self-intersect."""
    if isinstance(algo, (FiniteWindow, DynamicWindow)):
        return algo.half_width
    if isinstance(algo, PerSensorWindow):
        return max(algo.half_widths)
    if isinstance(algo, BandedWeighting):
        return algo.table.radius
    return None


def _validate(config: ChainConfig, algo: AlgorithmSpec) -> None:
    config.halo_depth()
    reach = _half_width_demand(algo)
    if isinstance(config.boundary, Ring) and reach is not None and config.n < 2 * reach + 1:
        raise ValidationError(
            f"ring of n={config.n} sensors cannot host a window of half-width {reach}; "
            f"need n >= {2 * reach + 1}")
    if isinstance(algo, PerSensorWindow):
        if len(algo.half_widths) != config.n:
            raise ValidationError(
                f"need one half-width per sensor: got {len(algo.half_widths)} for n={config.n}")
        if isinstance(config.boundary, Ring):
            a, b = algo.half_widths[-1], algo.half_widths[0]
            if abs(a - b) > 1:
                raise ValidationError(
                    f"ring wrap pair of half-widths differs by more than one: {a}, {b}")
    if isinstance(algo, BandedWeighting):
        table = algo.table
        if table.n != config.n:
            raise ValidationError(
                f"weight table has {table.n} rows for a chain of {config.n} sensors")
        if np.any(table.weights == 0.0):
            raise ValidationError("weight table contains zero entries")
        if table.row_tol is not None:
            report = validate_weights(table, table.row_tol)
            if not report.ok:
                raise ValidationError(
                    f"weight rows deviate from the common total beyond {table.row_tol}: "
                    f"{report.bad_rows[:4]}")


class _Layout:
    """Maps engine indices onto sensor labels, neighbors, and measurements."""

    def __init__(self, config: ChainConfig, field_: MeasurementField, time_varying: bool):
        self.config = config
        n, rounds = config.n, config.rounds
        if isinstance(config.boundary, Ring):
            self.size = n
            self.offset = 0
            self.ring = True
        else:
            self.offset = config.halo_depth()
            self.size = n + 2 * self.offset
            self.ring = False
        cols = rounds + 1 if time_varying else 1
        x = [[0.0] * cols for _ in range(self.size)]  # plain floats: ghosts stay zero
        for e in range(self.size):
            label = e - self.offset
            if 0 <= label < n:
                for k in range(cols):
                    x[e][k] = evaluate_field(field_, label, k)
        self.x = x

    def label(self, e: int) -> int:
        return e - self.offset

    def left(self, e: int) -> int | None:
        if self.ring:
            return (e - 1) % self.size
        return e - 1 if e > 0 else None

    def right(self, e: int) -> int | None:
        if self.ring:
            return (e + 1) % self.size
        return e + 1 if e < self.size - 1 else None


class _ScalarRunner:
    """Adapter for rules whose state and message are a single y value."""

    payload_len = 1

    def __init__(self, algo, layout: _Layout):
        self.layout = layout
        self.algo = algo
        x0 = [row[0] for row in layout.x]
        a = algo
        if isinstance(a, ExponentialWeighting):
            self._step = lambda t, e, own, lh, rh: exp_transition(t, own, lh, rh, x0[e], a.rho)
            self._stop = None
        elif isinstance(a, AsymmetricWeighting):
            self._step = lambda t, e, own, lh, rh: asym_transition(
                t, own, lh, rh, x0[e], a.rho_back, a.rho_forward)
            self._stop = None
        elif isinstance(a, FiniteWindow):
            self._step = lambda t, e, own, lh, rh: window_transition(
                t, own, lh, rh, x0[e], a.half_width)
            self._stop = [a.half_width] * layout.size
        else:  # PerSensorWindow
            widths = self._extend_widths(a.half_widths)
            self._step = lambda t, e, own, lh, rh: variable_window_transition(
                t, own, lh, rh, x0[e], widths[e])
            self._stop = widths
        self._zero = (0.0, 0.0)

    def _extend_widths(self, widths):
        lay = self.layout
        if lay.ring:
            return list(widths)
        # constant extension keeps the differ-by-one constraint across the halo
        return ([widths[0]] * lay.offset + list(widths) + [widths[-1]] * lay.offset)

    def stop_round(self, e):
        return None if self._stop is None else self._stop[e]

    def init(self, e):
        return self._step(0, e, (), (), ())

    def step(self, t, e, own, lh, rh):
        return self._step(t, e, own, lh or self._zero, rh or self._zero)

    def finite(self, state):
        return math.isfinite(state)

    def y_value(self, states, prev_states, e, t):
        return states[e]

    def z_value(self, states, e):
        return None


class _BandedRunner:
    payload_len = 2

    def __init__(self, algo: BandedWeighting, layout: _Layout):
        self.layout = layout
        self.table = algo.table
        self.x0 = [row[0] for row in layout.x]
        n = layout.config.n

        def row_of(e):
            label = layout.label(e)
            if layout.ring:
                return self.table.row(label % n)
            return self.table.row(min(max(label, 0), n - 1))  # ghosts reuse edge rows

        self._rows = [tuple(map(float, row_of(e))) for e in range(layout.size)]
        self._stop = self.table.radius

    def stop_round(self, e):
        return self._stop

    def init(self, e):
        return fb_transition(0, (), None, None, self.x0[e], self._rows[e], None, None,
                             self.table.row_sum)

    def step(self, t, e, own, lh, rh):
        le = self.layout.left(e)
        ri = self.layout.right(e)
        fwd_row = self._rows[ri] if ri is not None else None
        bwd_row = self._rows[le] if le is not None else None
        return fb_transition(t, own, rh, lh, self.x0[e], self._rows[e],
                             fwd_row, bwd_row, self.table.row_sum)

    def finite(self, state):
        return math.isfinite(state.forward) and math.isfinite(state.backward)

    def y_value(self, states, prev_states, e, t):
        row = self._rows[e]
        return glue(states[e], self.x0[e], row[self.table.radius], self.table.row_sum)

    def z_value(self, states, e):
        return None


class _DynExpRunner:
    payload_len = 1

    def __init__(self, algo: DynamicExponential, layout: _Layout):
        self.layout = layout
        self.rho = algo.rho
        self.x = layout.x

    def stop_round(self, e):
        return None

    def _x_recent(self, e, t):
        lo = max(t - 3, 0)
        return tuple(self.x[e][k] for k in range(t, lo - 1, -1))

    def init(self, e):
        return dyn_exp_transition(0, (), (), (), self._x_recent(e, 0), self.rho)

    def step(self, t, e, own, lh, rh):
        zero = (0.0, 0.0)
        return dyn_exp_transition(t, own, lh or zero, rh or zero,
                                  self._x_recent(e, t), self.rho)

    def finite(self, state):
        return math.isfinite(state)

    def y_value(self, states, prev_states, e, t):
        return states[e]

    def z_value(self, states, e):
        return None


class _DynWindowRunner:
    def __init__(self, algo: DynamicWindow, layout: _Layout):
        self.layout = layout
        self.half_width = algo.half_width
        self.slots = algo.half_width + 1
        self.payload_len = self.slots  # the full slot vector travels each round
        self.x = layout.x
        self._zero = (0.0,) * self.slots

    def stop_round(self, e):
        return None

    def init(self, e):
        L = self.half_width
        return tuple(z_slot_transition(0, j, (), (), (), self.x[e][0], L)
                     for j in range(self.slots))

    def step(self, t, e, own, lh, rh):
        L = self.half_width
        lh = lh or (self._zero, self._zero)
        rh = rh or (self._zero, self._zero)
        x_t = self.x[e][t]
        out = []
        for j in range(self.slots):
            own_j = tuple(v[j] for v in own)
            left_j = tuple(v[j] for v in lh)
            right_j = tuple(v[j] for v in rh)
            out.append(z_slot_transition(t, j, own_j, left_j, right_j, x_t, L))
        return tuple(out)

    def finite(self, state):
        return all(math.isfinite(v) for v in state)

    def y_value(self, states, prev_states, e, t):
        prev = prev_states[e] if prev_states is not None else self._zero
        return assemble_y(states[e], prev, t, self.half_width)

    def z_value(self, states, e):
        return states[e]


def _make_runner(algo: AlgorithmSpec, layout: _Layout):
    if isinstance(algo, BandedWeighting):
        return _BandedRunner(algo, layout)
    if isinstance(algo, DynamicExponential):
        return _DynExpRunner(algo, layout)
    if isinstance(algo, DynamicWindow):
        return _DynWindowRunner(algo, layout)
    return _ScalarRunner(algo, layout)


def _variable_window_weight_sums(algo: PerSensorWindow, config: ChainConfig):
    """Final-value coefficient totals per sensor; they need not equal one, so
    they are surfaced in the trace metadata rather than silently trusted."""
    widths = list(algo.half_widths)
    n = config.n
    sums = []
    for i in range(n):
        total = 1.0 / (2 * widths[i] + 1)
        for j in range(1, widths[i] + 1):
            for nb in (i - j, i + j):
                if isinstance(config.boundary, Ring):
                    total += 1.0 / (2 * widths[nb % n] + 1)
                elif 0 <= nb < n:
                    total += 1.0 / (2 * widths[nb] + 1)
                # beyond a halo the measurement is zero; its weight is moot
        sums.append(total)
    return tuple(sums)


def run(config: ChainConfig, field_: MeasurementField, algo: AlgorithmSpec) -> ConsensusTrace:
    """Execute `rounds` synchronous rounds and return the full trace.

    Deterministic in (config, field_, algo) including the noise seed; raises
    ValidationError up front and DivergedError if a value leaves float range.
    """
    _validate(config, algo)
    time_varying = isinstance(algo, (DynamicExponential, DynamicWindow))
    layout = _Layout(config, field_, time_varying)
    runner = _make_runner(algo, layout)
    n, rounds = config.n, config.rounds
    size = layout.size
    off = layout.offset

    states = [runner.init(e) for e in range(size)]
    for e in range(size):
        if not runner.finite(states[e]):
            raise DivergedError(layout.label(e), 0)

    slots = getattr(runner, "slots", None)
    y = np.empty((n, rounds + 1))
    z = np.empty((n, rounds + 1, slots)) if slots else None
    for i in range(n):
        y[i, 0] = runner.y_value(states, None, i + off, 0)
        if z is not None:
            z[i, 0] = runner.z_value(states, i + off)

    audit: list[MessageRecord] = []
    prev2: list | None = None
    prev3: list | None = None
    payload = runner.payload_len

    for t in range(1, rounds + 1):
        prev1 = states
        new = list(prev1)
        for e in range(size):
            stop = runner.stop_round(e)
            if stop is not None and t > stop:
                continue  # frozen: keeps broadcasting its last state
            if t == 1:
                own = (prev1[e],)
            elif t == 2:
                own = (prev1[e], prev2[e])
            else:
                own = (prev1[e], prev2[e], prev3[e])
            le = layout.left(e)
            ri = layout.right(e)
            lh = rh = None
            lbl = layout.label(e)
            if le is not None:
                lh = (prev1[le],) if t == 1 else (prev1[le], prev2[le])
                audit.append(MessageRecord(t, lbl, layout.label(le), payload))
            if ri is not None:
                rh = (prev1[ri],) if t == 1 else (prev1[ri], prev2[ri])
                audit.append(MessageRecord(t, lbl, layout.label(ri), payload))
            state = runner.step(t, e, own, lh, rh)
            if not runner.finite(state):
                raise DivergedError(lbl, t)
            new[e] = state
        prev3 = prev2
        prev2 = prev1
        states = new
        for i in range(n):
            y[i, t] = runner.y_value(states, prev2, i + off, t)
            if z is not None:
                z[i, t] = runner.z_value(states, i + off)

    metadata = {}
    if isinstance(algo, PerSensorWindow):
        metadata["weight_sums"] = _variable_window_weight_sums(algo, config)
    return ConsensusTrace(y=y, z=z, audit=audit, config=config, algo=algo,
                          own_history_depth=3, metadata=metadata)


def audit_locality(trace: ConsensusTrace) -> int:
    """Number of audit records whose sender is not an immediate neighbor of
    the receiver under the trace's boundary arithmetic.  A transition history
    deeper than three rounds also counts as one violation."""
    bad = 0
    if isinstance(trace.config.boundary, Ring):
        n = trace.config.n
        for rec in trace.audit:
            if (rec.receiver - rec.sender) % n not in (1, n - 1):
                bad += 1
    else:
        for rec in trace.audit:
            if abs(rec.receiver - rec.sender) != 1:
                bad += 1
    if trace.own_history_depth > 3:
        bad += 1
    return bad


def trace_to_csv(trace: ConsensusTrace) -> str:
    """Rows `round,sensor,y` (plus z0..zL columns for the dynamic window),
    full float precision so values survive a round-trip."""
    out = io.StringIO()
    slots = trace.z.shape[2] if trace.z is not None else 0
    header = "round,sensor,y"
    if slots:
        header += "," + ",".join(f"z{j}" for j in range(slots))
    out.write(header + "\n")
    n, cols = trace.y.shape
    for t in range(cols):
        for i in range(n):
            row = f"{t},{i},{format(trace.y[i, t], '.17g')}"
            if slots:
                row += "," + ",".join(format(trace.z[i, t, j], ".17g") for j in range(slots))
            out.write(row + "\n")
    return out.getvalue()
