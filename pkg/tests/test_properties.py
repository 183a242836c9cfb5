"""Property-based invariants across metrics, label parsing, and the simulator."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from nlbeam.cogs import COMMAND_CLASSES, parse_class_label
from nlbeam.metrics import codebleu, levenshtein, normalized_levenshtein, wer
from nlbeam.registry import PromptStyle
from nlbeam.sim import execute, parse_program

TEXT = st.text(max_size=60)


@given(TEXT, TEXT, TEXT)
@settings(max_examples=200, deadline=None)
def test_levenshtein_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


@given(TEXT, TEXT)
@settings(max_examples=200, deadline=None)
def test_levenshtein_symmetry_and_identity(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, a) == 0


@given(TEXT, TEXT)
@settings(max_examples=200, deadline=None)
def test_nld_bounds(a, b):
    assert 0.0 <= normalized_levenshtein(a, b) <= 1.0


@given(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll")), min_size=1))
@settings(max_examples=100, deadline=None)
def test_wer_identical_is_zero(text):
    assert wer(text, text) == 0.0


@given(TEXT)
@settings(max_examples=200, deadline=None)
def test_label_parsing_is_total(text):
    for style in PromptStyle:
        label = parse_class_label(text, style)
        assert label in COMMAND_CLASSES


# --- random parseable programs -----------------------------------------

_EXPOSURES = st.floats(min_value=0.1, max_value=10.0, allow_nan=False).map(
    lambda x: round(x, 3)
)


@st.composite
def simple_statement(draw):
    kind = draw(st.integers(0, 4))
    t = draw(_EXPOSURES)
    if kind == 0:
        return f"sam.measure({t})"
    if kind == 1:
        return f"sam.thabs({round(t / 10, 4)})"
    if kind == 2:
        return f"sam.snap(exposure_time={t})"
    if kind == 3:
        n = draw(st.integers(1, 4))
        return f"for i in range({n}):\n    sam.measure({t})"
    return f"time.sleep({t})"


@st.composite
def random_program(draw):
    statements = draw(st.lists(simple_statement(), min_size=1, max_size=5))
    return "\n".join(statements)


@given(random_program())
@settings(max_examples=100, deadline=None)
def test_codebleu_self_score_is_one(source):
    score = codebleu(source, source)
    assert math.isclose(score.composite, 1.0)
    assert score.parse_ok


@given(random_program())
@settings(max_examples=50, deadline=None)
def test_trace_times_are_monotone(source):
    _, trace = execute(parse_program(source))
    times = [e.t_start for e in trace.events]
    assert times == sorted(times)
    if times:
        assert trace.final_time >= times[-1]


@given(
    st.floats(min_value=1.0, max_value=200.0, allow_nan=False),
    st.floats(min_value=-50.0, max_value=300.0, allow_nan=False),
    st.floats(min_value=0.0, max_value=600.0, allow_nan=False),
)
@settings(max_examples=100, deadline=None)
def test_temperature_never_overshoots(rate, target, sleep_s):
    source = (
        f"sam.setLinkamRate({rate})\n"
        f"sam.setLinkamTemperature({target})\n"
        f"time.sleep({sleep_s})"
    )
    state, _ = execute(parse_program(source))
    lo, hi = sorted((20.0, target))
    assert lo - 1e-9 <= state.temperature <= hi + 1e-9
