"""Virtual-instrument interpreter with a simulated clock."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    InvalidArgs,
    SimBudgetExceeded,
    SimDivisionByZero,
    SimNameError,
)
from .parser import (
    Assign,
    AugAssign,
    BinOp,
    Call,
    Compare,
    Const,
    ExprStmt,
    For,
    If,
    Import,
    ListLit,
    Name,
    Num,
    Pass,
    Program,
    SIGNATURES,
    Str,
    UnaryNeg,
    While,
)
from .trace import Trace, TraceEvent


@dataclass
class InstrumentState:
    sample_name: str = "sample"
    x: float = 0.0
    y: float = 0.0
    th: float = 0.0
    phi: float = 0.0
    origin: dict = field(default_factory=lambda: {"x": 0.0, "y": 0.0, "th": 0.0, "phi": 0.0})
    temperature: float = 20.0
    ramp_rate: float = 30.0
    temperature_setpoint: float = 20.0
    aligned: bool = False
    detector: str = "pilatus800"
    sim_time: float = 0.0

    def copy(self) -> "InstrumentState":
        new = dataclasses.replace(self)
        new.origin = dict(self.origin)
        return new


@dataclass
class SimLimits:
    max_sim_time: float = 86_400.0
    max_events: int = 100_000
    measure_overhead: float = 0.0
    poll_interval: float = 0.1
    max_stalled_iterations: int = 10_000


class ExecutionHalted(Exception):
    """Raised internally when RE.abort() or beam.off() stops the program."""


class _Interpreter:
    def __init__(self, state: InstrumentState, limits: SimLimits, extra_functions=()):
        self.state = state
        self.limits = limits
        self.extra = frozenset(extra_functions)
        self.events: list[TraceEvent] = []
        self.env: dict = {}
        self.clock_read = False
        self.stalled = 0

    # --- clock and temperature model ---

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise InvalidArgs("cannot advance the clock by a negative amount")
        s = self.state
        if s.ramp_rate > 0 and s.temperature != s.temperature_setpoint:
            step = s.ramp_rate * dt / 60.0
            delta = s.temperature_setpoint - s.temperature
            if abs(delta) <= step:
                s.temperature = s.temperature_setpoint
            else:
                s.temperature += math.copysign(step, delta)
        s.sim_time += dt
        if s.sim_time > self.limits.max_sim_time:
            raise SimBudgetExceeded(
                f"simulated time exceeded {self.limits.max_sim_time} s"
            )

    def emit(self, kind: str, **args) -> None:
        s = self.state
        self.events.append(
            TraceEvent(
                t_start=s.sim_time,
                kind=kind,
                args=args,
                snapshot=(s.x, s.y, s.th, s.phi, s.temperature),
            )
        )
        if len(self.events) > self.limits.max_events:
            raise SimBudgetExceeded(f"more than {self.limits.max_events} events")

    # --- expression evaluation ---

    def eval(self, node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, (Str, Const)):
            return node.value
        if isinstance(node, Name):
            if node.id not in self.env:
                raise SimNameError(f"name '{node.id}' used before assignment")
            return self.env[node.id]
        if isinstance(node, ListLit):
            return [self.eval(item) for item in node.items]
        if isinstance(node, UnaryNeg):
            return -self.eval(node.operand)
        if isinstance(node, BinOp):
            left, right = self.eval(node.left), self.eval(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if right == 0:
                raise SimDivisionByZero(f"division by zero at t={self.state.sim_time}")
            return left / right
        if isinstance(node, Compare):
            left, right = self.eval(node.left), self.eval(node.right)
            return {
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
                "==": left == right,
            }[node.op]
        if isinstance(node, Call):
            return self.call(node)
        raise TypeError(f"cannot evaluate {node!r}")

    def bind(self, call: Call) -> dict:
        params, defaults = SIGNATURES[call.func]
        if len(call.args) > len(params):
            raise InvalidArgs(f"{call.func} takes at most {len(params)} arguments")
        bound = dict(defaults)
        for name, arg in zip(params, call.args):
            bound[name] = self.eval(arg)
        for name, arg in call.kwargs:
            if name not in params:
                raise InvalidArgs(f"{call.func} has no parameter {name!r}")
            bound[name] = self.eval(arg)
        missing = [p for p in params if p not in bound]
        if missing:
            raise InvalidArgs(f"{call.func} missing arguments: {', '.join(missing)}")
        return bound

    # --- whitelisted call semantics ---

    def call(self, call: Call):
        if call.func in self.extra and call.func not in SIGNATURES:
            args = [self.eval(a) for a in call.args]
            self.emit("ToolCall", name=call.func, args=args)
            return None
        b = self.bind(call)
        s = self.state
        fn = call.func

        if fn == "time.time":
            self.clock_read = True
            return s.sim_time
        if fn == "time.sleep":
            self.advance(float(b["seconds"]))
            return None
        if fn == "sam.measure":
            return self._measure(float(b["exposure_time"]), saved=True)
        if fn == "sam.snap":
            return self._measure(float(b["exposure_time"]), saved=False, kind="Snap")
        if fn == "sam.measureTimeSeries":
            exposure = float(b["exposure_time"])
            for _ in range(int(b["num_frames"])):
                self._measure(exposure, saved=True)
                self.advance(float(b["wait_time"]))
            return None
        if fn == "sam.series_measure":
            exposure = float(b["exposure_time"])
            period = float(b["exposure_period"])
            if period < exposure + 0.05:
                raise InvalidArgs(
                    "exposure_period must be at least 0.05 s longer than exposure_time"
                )
            for i in range(int(b["num_frames"])):
                self.emit("SeriesFrame", exposure_s=exposure, period_s=period, index=i)
                self.advance(period)
            if b["wait_time"] is not None:
                self.advance(float(b["wait_time"]))
            return None
        if fn == "sam.measureSpots":
            axis = b["axis"]
            if axis not in ("x", "y", "th"):
                raise InvalidArgs(f"unknown axis {axis!r}")
            for _ in range(int(b["num_spots"])):
                self._move_rel(axis, float(b["translation_amount"]))
                self._measure(float(b["exposure_time"]), saved=True)
            return None
        if fn == "sam.measureIncidentAngle":
            self._move_abs("th", float(b["angle"]))
            exposure = b["exposure_time"]
            self._measure(1.0 if exposure is None else float(exposure), saved=True)
            return None
        if fn == "sam.measureIncidentAngles":
            angles = b["angles"] or []
            exposure = b["exposure_time"]
            for angle in angles:
                self._move_abs("th", float(angle))
                self._measure(1.0 if exposure is None else float(exposure), saved=True)
            return None
        if fn == "sam.align":
            s.th = 0.0
            s.aligned = True
            self.emit("Align")
            return None
        if fn == "sam.setOrigin":
            axes = b["axes"]
            positions = b["positions"]
            if not axes:
                raise InvalidArgs("setOrigin requires a non-empty axes list")
            if positions is not None and len(positions) != len(axes):
                raise InvalidArgs("positions must match axes in length")
            for i, axis in enumerate(axes):
                if axis not in ("x", "y", "th"):
                    raise InvalidArgs(f"unknown axis {axis!r}")
                shift = getattr(s, axis) if positions is None else float(positions[i])
                s.origin[axis] += shift
                setattr(s, axis, getattr(s, axis) - shift)
            self.emit("OriginSet", axes=list(axes))
            return None
        if fn in ("sam.xabs", "sam.yabs", "sam.thabs", "sam.phiabs"):
            axis = {"sam.xabs": "x", "sam.yabs": "y", "sam.thabs": "th", "sam.phiabs": "phi"}[fn]
            self._move_abs(axis, float(b[("position" if axis in ("x", "y") else "angle")]))
            return None
        if fn in ("sam.xr", "sam.yr", "sam.thr"):
            axis = {"sam.xr": "x", "sam.yr": "y", "sam.thr": "th"}[fn]
            self._move_rel(axis, float(b["offset"]))
            return None
        if fn == "sam.setLinkamRate":
            rate = float(b["rate"])
            if rate <= 0:
                raise InvalidArgs("ramp rate must be positive")
            s.ramp_rate = rate
            self.emit("RateSet", rate=rate)
            return None
        if fn == "sam.setLinkamTemperature":
            target = float(b["temperature"])
            s.temperature_setpoint = target
            self.emit("TempSet", temperature=target)
            return None
        if fn == "sam.linkamTemperature":
            self.clock_read = True
            return s.temperature
        if fn in ("RE.abort", "beam.off"):
            self.emit("ToolCall", name=fn, args=[])
            raise ExecutionHalted(fn)
        if fn == "Sample":
            s.sample_name = str(b["name"])
            return _SAMPLE_HANDLE
        if fn == "wsam":
            text = f"smx = {s.x}\nsmy = {s.y}\nsth = {s.th}"
            self.emit("Output", text=text)
            return text
        if fn == "detselect":
            s.detector = str(b["detector"])
            self.emit("ToolCall", name="detselect", args=[s.detector])
            return None
        if fn == "wbs":
            self.emit("ToolCall", name="wbs", args=[])
            return None
        if fn == "np.arange":
            return _arange(b["start"], b["stop"], b["step"])
        if fn == "range":
            raise InvalidArgs("range() is only valid as a loop iterable")
        raise InvalidArgs(f"no semantics for {fn}")

    def _measure(self, exposure: float, saved: bool, kind: str = "Measure"):
        if exposure < 0:
            raise InvalidArgs("exposure time must be non-negative")
        self.emit(kind, exposure_s=exposure, saved=saved)
        self.advance(exposure + self.limits.measure_overhead)
        return None

    def _move_abs(self, axis: str, value: float) -> None:
        setattr(self.state, axis, value)
        self.emit("MotorMove", axis=axis, position=value)

    def _move_rel(self, axis: str, offset: float) -> None:
        value = getattr(self.state, axis) + offset
        setattr(self.state, axis, value)
        self.emit("MotorMove", axis=axis, position=value)

    # --- statements ---

    def run(self, statements) -> None:
        for stmt in statements:
            self.stmt(stmt)

    def stmt(self, node) -> None:
        if isinstance(node, ExprStmt):
            self.eval(node.value)
        elif isinstance(node, Assign):
            value = self.eval(node.value)
            if node.target == "sam.name":
                self.state.sample_name = str(value)
            else:
                self.env[node.target] = value
        elif isinstance(node, AugAssign):
            if node.target not in self.env:
                raise SimNameError(f"name '{node.target}' used before assignment")
            self.env[node.target] = self.eval(
                BinOp(node.op, Name(node.target), node.value)
            )
        elif isinstance(node, For):
            for value in self._iterable(node.iterable):
                self.env[node.var] = value
                self.run(node.body)
        elif isinstance(node, While):
            while True:
                t_before = self.state.sim_time
                self.clock_read = False
                if not self.eval(node.cond):
                    break
                self.run(node.body)
                if self.state.sim_time == t_before:
                    if self.clock_read:
                        # busy-wait on the clock-coupled state: advance by the
                        # poll interval so temperature waits can terminate
                        self.advance(self.limits.poll_interval)
                    else:
                        self.stalled += 1
                        if self.stalled > self.limits.max_stalled_iterations:
                            raise SimBudgetExceeded(
                                "loop makes no progress on the simulated clock"
                            )
        elif isinstance(node, If):
            if self.eval(node.cond):
                self.run(node.body)
            else:
                self.run(node.orelse)
        elif isinstance(node, (Import, Pass)):
            pass
        else:
            raise TypeError(f"cannot execute {node!r}")

    def _iterable(self, node):
        if isinstance(node, Call) and node.func == "range":
            args = [int(self.eval(a)) for a in node.args]
            if not 1 <= len(args) <= 3:
                raise InvalidArgs("range() takes 1 to 3 arguments")
            return range(*args)
        value = self.eval(node)
        if isinstance(value, (list, range, np.ndarray)):
            return value
        raise InvalidArgs("for-loop iterable must be range, np.arange, or a list")


class _SampleHandle:
    """Marker value returned by Sample(); assignments to `sam` keep it valid."""


_SAMPLE_HANDLE = _SampleHandle()


def _arange(start, stop, step):
    # accumulate by index to avoid float drift changing the iteration count
    if step == 0:
        raise InvalidArgs("np.arange step must be non-zero")
    start, stop, step = float(start), float(stop), float(step)
    n = max(0, math.ceil((stop - start) / step - 1e-12))
    return [start + k * step for k in range(n)]


# range() participates in loop iterables only; register it for parse whitelist
SIGNATURES.setdefault("range", (("start", "stop", "step"), {}))


def execute(
    program: Program,
    state: InstrumentState | None = None,
    limits: SimLimits | None = None,
    extra_functions=(),
) -> tuple[InstrumentState, Trace]:
    """Run a parsed program against a copy of the given instrument state.

    Returns the final state and the canonical event trace.  Execution is a
    pure function of (program, state, limits).
    """
    state = InstrumentState() if state is None else state.copy()
    limits = limits or SimLimits()
    interp = _Interpreter(state, limits, extra_functions)
    interp.env["sam"] = _SAMPLE_HANDLE
    try:
        interp.run(program.statements)
    except ExecutionHalted:
        pass
    return state, Trace(events=interp.events, final_time=state.sim_time)
