"""Command-language parsing: whitelist enforcement and node conversion."""

import pytest

from nlbeam.errors import CommandSyntaxError, UnknownFunction, UnsupportedConstruct
from nlbeam.sim import parse_program
from nlbeam.sim.parser import Call, ExprStmt, For, Str, While

from conftest import TIMED_LOOP


def test_simple_call():
    program = parse_program("sam.measure(5)")
    assert len(program.statements) == 1
    stmt = program.statements[0]
    assert isinstance(stmt, ExprStmt)
    assert stmt.value.func == "sam.measure"


def test_keyword_arguments():
    program = parse_program("sam.measure(exposure_time=0.5)")
    call = program.statements[0].value
    assert call.kwargs[0][0] == "exposure_time"


def test_timed_loop_parses():
    program = parse_program(TIMED_LOOP)
    kinds = [type(s).__name__ for s in program.statements]
    assert "While" in kinds
    assert program.py_ast is not None


def test_for_over_arange():
    program = parse_program(
        "for a in np.arange(0.1, 1.0, 0.1):\n    sam.thabs(a)"
    )
    loop = program.statements[0]
    assert isinstance(loop, For)
    assert loop.iterable.func == "np.arange"


def test_unknown_function_sentinel_message():
    with pytest.raises(UnknownFunction) as err:
        parse_program("sam.setHumidity(60)")
    assert "UNKNOWN FUNCTION:" in str(err.value)
    assert err.value.name == "sam.setHumidity"


def test_unknown_receiver():
    with pytest.raises(UnknownFunction):
        parse_program("robot.move(1)")


def test_extra_functions_whitelist():
    with pytest.raises(UnknownFunction):
        parse_program("mytool()")
    program = parse_program("mytool()", extra_functions=("mytool",))
    assert program.statements[0].value.func == "mytool"


def test_detselect_bare_identifier_becomes_string():
    program = parse_program("detselect(pilatus800)")
    call = program.statements[0].value
    assert isinstance(call, Call)
    assert isinstance(call.args[0], Str)
    assert call.args[0].value == "pilatus800"


def test_syntax_error_carries_location():
    with pytest.raises(CommandSyntaxError) as err:
        parse_program("for x in:\n    pass")
    assert err.value.line is not None


@pytest.mark.parametrize(
    "source",
    [
        "with open('f') as fh:\n    pass",  # context managers
        "def f():\n    pass",  # function definitions
        "x = [i for i in range(3)]",  # comprehensions
        "import os\nos.remove('x')",  # non-whitelisted receiver call
        "x, y = 1, 2",  # tuple unpacking
        "x = 1 if True else 2",  # conditional expressions
        "time = 5",  # reserved receiver name
    ],
)
def test_rejected_constructs(source):
    with pytest.raises((UnsupportedConstruct, UnknownFunction)):
        parse_program(source)


def test_sample_assignment_and_rename():
    program = parse_program("sam = Sample('perovskite')\nsam.name = 'film2'")
    assert program.statements[1].target == "sam.name"


def test_while_with_comparison():
    program = parse_program("while sam.linkamTemperature() < 50:\n    pass")
    assert isinstance(program.statements[0], While)
