import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillbench.entities import load_builtin_entity
from skillbench.programs import (
    MAX_REPEAT,
    ActionProgram,
    ParseError,
    parse_program,
    serialize_program,
    validate_program,
)

CANONICAL = """```action
{
  "initial_dof_position": {"0": 0.1},
  "speeds": {"0": 2.0, "1": 1.5},
  "state_destination": [{"0": 0.5}, {"0": 0.1, "1": 0.3}],
  "repeat": 2
}
```"""


def test_parse_canonical_block():
    program = parse_program(CANONICAL)
    assert program.initial_positions == {0: 0.1}
    assert program.speeds == {0: 2.0, 1: 1.5}
    assert program.states == [{0: 0.5}, {0: 0.1, 1: 0.3}]
    assert program.repeat == 2


def test_parse_ignores_surrounding_prose():
    text = "Sure? Here {not: it}.\n" + CANONICAL + "\ntrailing words"
    assert parse_program(text).repeat == 2


def test_parse_accepts_python_literal_dict():
    text = "{'state_destination': [{0: 1.0}], 'speeds': {0: 2.0}}"
    program = parse_program(text)
    assert program.states == [{0: 1.0}]
    assert program.speeds == {0: 2.0}


def test_parse_defaults_for_missing_fields():
    program = parse_program('{"state_destination": []}')
    assert program.initial_positions == {}
    assert program.speeds == {}
    assert program.repeat == 1


def test_parse_rejects_text_without_program_object():
    for text in ("", "no block at all", "{\"foo\": 1}", "{{{", None):
        with pytest.raises(ParseError):
            parse_program(text)


def test_parse_error_message_is_feedback_usable():
    with pytest.raises(ParseError) as exc:
        parse_program("nothing here")
    assert "initial_dof_position" in str(exc.value)


def test_serialize_round_trip():
    program = parse_program(CANONICAL)
    again = parse_program(serialize_program(program))
    assert again == program


def test_serialized_form_is_fenced_json():
    text = serialize_program(ActionProgram(states=[{0: 1.0}]))
    assert text.startswith("```action\n")
    body = text.split("```action\n", 1)[1].rsplit("```", 1)[0]
    assert json.loads(body)["state_destination"] == [{"0": 1.0}]


def test_validation_flags_out_of_range_dof():
    cartpole = load_builtin_entity("Cartpole")
    report = validate_program(ActionProgram(states=[{5: 1.0}]), cartpole)
    assert not report.ok
    assert any(i.severity == "Error" and i.dof_index == 5 for i in report.issues)


def test_validation_flags_bad_speed_and_repeat():
    cartpole = load_builtin_entity("Cartpole")
    report = validate_program(
        ActionProgram(speeds={0: -1.0}, states=[{0: 1.0}], repeat=MAX_REPEAT + 1),
        cartpole,
    )
    severities = [i.severity for i in report.issues]
    assert severities.count("Error") >= 2


def test_validation_reports_clamped_targets_as_non_errors():
    cartpole = load_builtin_entity("Cartpole")
    report = validate_program(ActionProgram(states=[{0: 99.0}]), cartpole)
    assert report.ok
    assert any(i.severity == "Clamped" for i in report.issues)


def test_validation_rejects_non_finite():
    cartpole = load_builtin_entity("Cartpole")
    report = validate_program(ActionProgram(states=[{0: float("nan")}]), cartpole)
    assert not report.ok


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_parser_is_total_on_arbitrary_text(text):
    try:
        program = parse_program(text)
    except ParseError:
        return
    assert isinstance(program, ActionProgram)


_index = st.integers(min_value=0, max_value=20)
_value = st.floats(min_value=-10, max_value=10, allow_nan=False)


@given(
    st.dictionaries(_index, _value, max_size=4),
    st.dictionaries(_index, st.floats(min_value=0.01, max_value=10), max_size=4),
    st.lists(st.dictionaries(_index, _value, min_size=1, max_size=3), max_size=3),
    st.integers(min_value=1, max_value=MAX_REPEAT),
)
@settings(max_examples=150, deadline=None)
def test_serialize_parse_round_trip_property(initial, speeds, states, repeat):
    program = ActionProgram(
        initial_positions=initial, speeds=speeds, states=states, repeat=repeat
    )
    assert parse_program(serialize_program(program)) == program
