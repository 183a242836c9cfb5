"""Parser for the beamline command language.

The command language is a strict subset of Python syntax, so source text is
parsed with the stdlib ``ast`` module and then validated and converted into
the small node set the interpreter understands.  Anything outside the subset
is rejected at parse time: unknown call targets raise ``UnknownFunction`` and
unsupported syntax raises ``UnsupportedConstruct``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import CommandSyntaxError, UnknownFunction, UnsupportedConstruct

# Canonical signatures for every whitelisted call.  Keys are the dotted call
# names; values are (positional parameter names, defaults).  The interpreter
# binds positional and keyword arguments against these, which is what makes
# `sam.measure(0.5)` and `sam.measure(exposure_time=0.5)` trace-identical.
SIGNATURES: dict[str, tuple[tuple[str, ...], dict[str, Any]]] = {
    "sam.measure": (("exposure_time",), {}),
    "sam.snap": (("exposure_time",), {}),
    "sam.measureTimeSeries": (("exposure_time", "num_frames", "wait_time"), {}),
    "sam.series_measure": (
        ("num_frames", "exposure_time", "exposure_period", "wait_time"),
        {"wait_time": None},
    ),
    "sam.measureSpots": (
        ("num_spots", "translation_amount", "axis", "exposure_time"),
        {},
    ),
    "sam.measureIncidentAngle": (("angle", "exposure_time"), {"exposure_time": None}),
    "sam.measureIncidentAngles": (
        ("angles", "exposure_time"),
        {"angles": None, "exposure_time": None},
    ),
    "sam.align": ((), {}),
    "sam.setOrigin": (("axes", "positions"), {"positions": None}),
    "sam.xabs": (("position",), {}),
    "sam.yabs": (("position",), {}),
    "sam.thabs": (("angle",), {}),
    "sam.phiabs": (("angle",), {}),
    "sam.xr": (("offset",), {}),
    "sam.yr": (("offset",), {}),
    "sam.thr": (("offset",), {}),
    "sam.setLinkamRate": (("rate",), {}),
    "sam.setLinkamTemperature": (("temperature",), {}),
    "sam.linkamTemperature": ((), {}),
    "time.time": ((), {}),
    "time.sleep": (("seconds",), {}),
    "np.arange": (("start", "stop", "step"), {"step": 1.0}),
    "RE.abort": ((), {}),
    "beam.off": ((), {}),
    "Sample": (("name",), {}),
    "wsam": ((), {}),
    "detselect": (("detector",), {}),
    "wbs": ((), {}),
}

RECEIVERS = ("sam", "time", "np", "RE", "beam")

_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/"}
_CMPOPS = {ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">=", ast.Eq: "=="}


# --- node set ---

@dataclass
class Node:
    pass


@dataclass
class Num(Node):
    value: float


@dataclass
class Str(Node):
    value: str


@dataclass
class Const(Node):
    value: Any  # None, True, False


@dataclass
class Name(Node):
    id: str


@dataclass
class ListLit(Node):
    items: list


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass
class UnaryNeg(Node):
    operand: Node


@dataclass
class Compare(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Call(Node):
    func: str  # dotted whitelist name, e.g. "sam.measure"
    args: list
    kwargs: list  # (name, Node) pairs


@dataclass
class Assign(Node):
    target: str  # plain name, or "sam.name" for the sample-name attribute
    value: Node


@dataclass
class AugAssign(Node):
    target: str
    op: str
    value: Node


@dataclass
class ExprStmt(Node):
    value: Node


@dataclass
class For(Node):
    var: str
    iterable: Node
    body: list


@dataclass
class While(Node):
    cond: Node
    body: list


@dataclass
class If(Node):
    cond: Node
    body: list
    orelse: list


@dataclass
class Import(Node):
    module: str


@dataclass
class Pass(Node):
    pass


@dataclass
class Program:
    statements: list
    source: str
    py_ast: ast.Module = field(repr=False, default=None)


class _Converter:
    def __init__(self, extra_functions: frozenset[str]):
        self.extra = extra_functions

    def fail(self, node: ast.AST, msg: str, exc=UnsupportedConstruct):
        raise exc(
            f"{msg} (line {getattr(node, 'lineno', '?')})",
            line=getattr(node, "lineno", None),
            col=getattr(node, "col_offset", None),
        )

    # expressions -------------------------------------------------------

    def expr(self, node: ast.expr) -> Node:
        if isinstance(node, ast.Constant):
            v = node.value
            if isinstance(v, bool) or v is None:
                return Const(v)
            if isinstance(v, (int, float)):
                return Num(float(v))
            if isinstance(v, str):
                return Str(v)
            self.fail(node, f"unsupported literal {v!r}")
        if isinstance(node, ast.Name):
            return Name(node.id)
        if isinstance(node, ast.List):
            return ListLit([self.expr(e) for e in node.elts])
        if isinstance(node, ast.BinOp):
            op = _BINOPS.get(type(node.op))
            if op is None:
                self.fail(node, f"unsupported operator {type(node.op).__name__}")
            return BinOp(op, self.expr(node.left), self.expr(node.right))
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return UnaryNeg(self.expr(node.operand))
            self.fail(node, f"unsupported unary {type(node.op).__name__}")
        if isinstance(node, ast.Compare):
            if len(node.ops) != 1:
                self.fail(node, "chained comparisons are not supported")
            op = _CMPOPS.get(type(node.ops[0]))
            if op is None:
                self.fail(node, f"unsupported comparison {type(node.ops[0]).__name__}")
            return Compare(op, self.expr(node.left), self.expr(node.comparators[0]))
        if isinstance(node, ast.Call):
            return self.call(node)
        self.fail(node, f"unsupported expression {type(node).__name__}")

    def call(self, node: ast.Call) -> Call:
        name = self.call_name(node.func)
        if name not in SIGNATURES and name not in self.extra:
            raise UnknownFunction(name)
        args = []
        for a in node.args:
            if isinstance(a, ast.Starred):
                self.fail(a, "star-args are not supported")
            args.append(self.expr(a))
        kwargs = []
        for kw in node.keywords:
            if kw.arg is None:
                self.fail(node, "**kwargs is not supported")
            kwargs.append((kw.arg, self.expr(kw.value)))
        return Call(name, args, kwargs)

    def call_name(self, func: ast.expr) -> str:
        if isinstance(func, ast.Name):
            return func.id
        if isinstance(func, ast.Attribute) and isinstance(func.value, ast.Name):
            if func.value.id not in RECEIVERS:
                raise UnknownFunction(f"{func.value.id}.{func.attr}")
            return f"{func.value.id}.{func.attr}"
        self.fail(func, "call target must be a name or a dotted name")

    # arguments to detselect are bare detector identifiers, not variables
    def detector_call(self, node: ast.Call) -> Call:
        args = []
        for a in node.args:
            if isinstance(a, ast.Name):
                args.append(Str(a.id))
            else:
                args.append(self.expr(a))
        return Call("detselect", args, [])

    # statements --------------------------------------------------------

    def stmt(self, node: ast.stmt) -> Node:
        if isinstance(node, ast.Expr):
            if isinstance(node.value, ast.Call):
                fn = node.value.func
                if isinstance(fn, ast.Name) and fn.id == "detselect":
                    return ExprStmt(self.detector_call(node.value))
            return ExprStmt(self.expr(node.value))
        if isinstance(node, ast.Assign):
            if len(node.targets) != 1:
                self.fail(node, "multiple assignment targets are not supported")
            return Assign(self.target(node.targets[0]), self.expr(node.value))
        if isinstance(node, ast.AugAssign):
            op = _BINOPS.get(type(node.op))
            if op is None:
                self.fail(node, f"unsupported operator {type(node.op).__name__}")
            return AugAssign(self.target(node.target), op, self.expr(node.value))
        if isinstance(node, ast.For):
            if node.orelse:
                self.fail(node, "for/else is not supported")
            if not isinstance(node.target, ast.Name):
                self.fail(node, "loop target must be a plain name")
            return For(
                node.target.id,
                self.expr(node.iter),
                [self.stmt(s) for s in node.body],
            )
        if isinstance(node, ast.While):
            if node.orelse:
                self.fail(node, "while/else is not supported")
            return While(self.expr(node.test), [self.stmt(s) for s in node.body])
        if isinstance(node, ast.If):
            return If(
                self.expr(node.test),
                [self.stmt(s) for s in node.body],
                [self.stmt(s) for s in node.orelse],
            )
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            # recorded, no effect
            if isinstance(node, ast.ImportFrom):
                return Import(node.module or "")
            return Import(", ".join(a.name for a in node.names))
        if isinstance(node, ast.Pass):
            return Pass()
        self.fail(node, f"unsupported statement {type(node).__name__}")

    def target(self, node: ast.expr) -> str:
        if isinstance(node, ast.Name):
            if node.id in RECEIVERS and node.id != "sam":
                self.fail(node, f"cannot assign to reserved name {node.id}")
            return node.id
        if (
            isinstance(node, ast.Attribute)
            and isinstance(node.value, ast.Name)
            and node.value.id == "sam"
            and node.attr == "name"
        ):
            return "sam.name"
        self.fail(node, "assignment target must be a plain name or sam.name")


def parse_program(text: str, extra_functions=()) -> Program:
    """Parse command-language source into a validated Program.

    extra_functions: additional bare call names (registry-added functions)
    accepted besides the built-in whitelist.
    """
    try:
        module = ast.parse(text)
    except SyntaxError as exc:
        raise CommandSyntaxError(
            str(exc.msg), line=exc.lineno, col=exc.offset
        ) from exc
    conv = _Converter(frozenset(extra_functions))
    statements = [conv.stmt(s) for s in module.body]
    return Program(statements=statements, source=text, py_ast=module)
