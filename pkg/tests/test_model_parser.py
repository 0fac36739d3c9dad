import pytest

from activity_sos.components.model_parser import emit_model, parse_model
from activity_sos.constant.semantics import CONTROL_TYPE, DEFAULT_PARAMETER_SET, UNBOUNDED
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import int_token, str_token
from activity_sos.exception.exception import ModelParseError
from support import model_path


def test_fork_shape(fork):
    main = fork.root_activity
    assert main.name == "Main"
    assert len(main.nodes) == 5
    assert len(main.edges) == 4
    assert main.node("Fork").kind is NodeKind.FORK


def test_control_flows_are_desugared_to_control_pins(fork):
    main = fork.root_activity
    assert [e.id for e in main.edges] == [
        "Init.ctl_out-A.ctl_in",
        "A.ctl_out-Fork.ctl_in",
        "Fork.to_B-B.ctl_in",
        "Fork.to_C-C.ctl_in",
    ]
    fork = main.node("Fork")
    assert [p.name for p in fork.outputs] == ["to_B", "to_C"]
    assert all(p.synthetic and p.value_type == CONTROL_TYPE for p in fork.outputs)


def test_pin_defaults(compete):
    a = compete.root_activity.node("A")
    (out,) = a.data_outputs
    assert out.upper_bound == UNBOUNDED
    assert (out.upper, out.lower) == (1, 1)
    e = compete.root_activity.node("E")
    assert e.output("out").upper_bound == 1


def test_behaviours(compete):
    assert compete.behaviors["one"].constant == int_token(1)
    assert compete.behaviors["identity"].builtin == "identity"


def test_default_parameter_set_covers_every_apn():
    with open(model_path("calls")) as f:
        model = parse_model(f.read())
    double = model.activity("Double")
    assert [(ps.name, ps.members) for ps in double.parameter_sets] == [(DEFAULT_PARAMETER_SET, ("x", "y"))]


def test_call_pins_mirror_callee_parameters():
    with open(model_path("exceptions")) as f:
        model = parse_model(f.read())
    risky = model.root_activity.node("Risky")
    # the exception APN gets no pin
    assert [p.name for p in risky.data_outputs] == ["result"]
    assert model.behaviors["boom"].constant == str_token("boom")


def test_syntax_error_reports_position():
    with pytest.raises(ModelParseError) as info:
        parse_model("activities:\n  - name: Main\n    nodes: [\n")
    assert info.value.line is not None


def test_unknown_key_is_rejected():
    text = "activities:\n  - name: Main\n    colour: red\n"
    with pytest.raises(ModelParseError) as info:
        parse_model(text)
    assert "colour" in str(info.value)
    assert info.value.line == 2


def test_unknown_node_kind():
    with pytest.raises(ModelParseError):
        parse_model("activities:\n  - name: Main\n    nodes:\n      - {id: X, kind: Teleport}\n")


def test_duplicate_node_id():
    text = "activities:\n  - name: Main\n    nodes:\n      - {id: X, kind: Action}\n      - {id: X, kind: Merge}\n"
    with pytest.raises(ModelParseError, match="duplicate"):
        parse_model(text)


def test_empty_document():
    with pytest.raises(ModelParseError):
        parse_model("events: []\n")


def test_emit_then_parse_keeps_the_model(compete):
    again = parse_model(emit_model(compete))
    assert again == compete
