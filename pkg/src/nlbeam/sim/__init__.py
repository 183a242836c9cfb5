from .parser import parse_program, Program, SIGNATURES
from .interpreter import execute, InstrumentState, SimLimits, ExecutionHalted
from .trace import Trace, TraceEvent, trace_equivalent, EquivalenceTolerance

__all__ = [
    "parse_program",
    "Program",
    "SIGNATURES",
    "execute",
    "InstrumentState",
    "SimLimits",
    "ExecutionHalted",
    "Trace",
    "TraceEvent",
    "trace_equivalent",
    "EquivalenceTolerance",
]
