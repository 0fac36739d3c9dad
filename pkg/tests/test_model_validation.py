import os

import pytest
import yaml

from activity_sos.components.model_parser import parse_model
from activity_sos.components.model_validation import ModelValidation, require_valid, validate_model
from activity_sos.entity.config_entity import AnalysisPipelineConfig, ModelValidationConfig
from activity_sos.exception.exception import ActivitySemanticsException
from support import model_path


def codes(text: str):
    return validate_model(parse_model(text)).codes()


@pytest.mark.parametrize(
    "name",
    [
        "fork", "compete", "timing", "calls", "exceptions", "uncaught", "events",
        "decision", "decision_flow", "decision_behavior",
    ],
)
def test_fixtures_are_well_formed(name):
    with open(model_path(name)) as f:
        report = validate_model(parse_model(f.read()))
    assert report.is_clean, report.violations


def test_fork_with_two_inputs():
    text = """
activities:
  - name: Main
    nodes:
      - {id: init, kind: InitialNode}
      - {id: f, kind: Fork, inputs: [{name: a, type: ControlToken}, {name: b, type: ControlToken}]}
      - {id: A, kind: Action}
    edges:
      - {source: init, target: f.a}
      - {source: f, target: A}
"""
    assert "fork-single-input" in codes(text)


def test_action_without_input_never_starts():
    text = "activities:\n  - name: Main\n    nodes:\n      - {id: A, kind: Action}\n"
    assert "action-no-input" in codes(text)


def test_edge_type_mismatch():
    text = """
activities:
  - name: Main
    nodes:
      - {id: A, kind: Action, behavior: one, outputs: [{name: out, type: Int}]}
      - {id: B, kind: Action, inputs: [{name: in, type: Bool}]}
    edges:
      - {source: A.out, target: B.in}
behaviors:
  one: "const:1"
"""
    assert "edge-type-mismatch" in codes(text)


def test_dangling_edge_and_missing_behaviour():
    text = """
activities:
  - name: Main
    nodes:
      - {id: A, kind: Action, outputs: [{name: out, type: Int}], inputs: [{name: in, type: Int}]}
    edges:
      - {source: A.out, target: Z.in}
"""
    found = codes(text)
    assert {"edge-missing-target", "behavior-missing"} <= found


def test_else_outside_decision():
    text = """
activities:
  - name: Main
    nodes:
      - {id: init, kind: InitialNode}
      - {id: A, kind: Action}
    edges:
      - {source: init, target: A, guard: else}
"""
    assert "else-placement" in codes(text)


def test_synchronous_recursion():
    text = """
activities:
  - name: Main
    nodes:
      - {id: init, kind: InitialNode}
      - {id: Call, kind: CallBehaviorAction, behavior: Main}
    edges:
      - {source: init, target: Call}
"""
    assert "sync-recursion" in codes(text)


def test_unknown_event_and_handler():
    with open(model_path("events")) as f:
        document = yaml.safe_load(f)
    document["events"] = []
    document["activities"][0]["handlers"] = [{"node": "Ghost", "exception_type": "Any"}]
    found = codes(yaml.safe_dump(document))
    assert {"event-unknown", "handler-unknown-node"} <= found


def test_report_is_sorted_and_written(tmp_path):
    text = "activities:\n  - name: Main\n    nodes:\n      - {id: B, kind: Action}\n      - {id: A, kind: Action}\n"
    model = parse_model(text)
    config = ModelValidationConfig(AnalysisPipelineConfig(artifact_root=str(tmp_path)))
    artifact = ModelValidation(model, config).initiate_model_validation()
    assert [v.element for v in artifact.report.violations] == ["Main.A", "Main.B"]
    assert os.path.exists(artifact.report_file_path)
    with open(artifact.report_file_path) as f:
        assert yaml.safe_load(f)["clean"] is False


def test_require_valid_raises_on_invalid_model():
    with pytest.raises(ActivitySemanticsException, match="action-no-input"):
        require_valid(parse_model("activities:\n  - name: Main\n    nodes:\n      - {id: A, kind: Action}\n"))


def _decision_guard(name: str, guard: str) -> set:
    with open(model_path(name)) as f:
        document = yaml.safe_load(f)
    for edge in document["activities"][0]["edges"]:
        if edge.get("guard") not in (None, "else"):
            edge["guard"] = guard
    return codes(yaml.safe_dump(document))


@pytest.mark.parametrize("name", ["decision", "decision_flow", "decision_behavior"])
def test_decision_guards_typed_by_the_routed_value(name):
    # every routed value here is an Int, whatever the passed token is
    assert "guard-type" not in _decision_guard(name, "x >= 0")
    assert "guard-type" in _decision_guard(name, "x == 'big'")


def test_control_decision_cannot_test_values():
    text = """
activities:
  - name: Main
    nodes:
      - {id: init, kind: InitialNode}
      - {id: d, kind: Decision}
      - {id: A, kind: Action}
    edges:
      - {source: init, target: d}
      - {source: d, target: A, guard: "x > 3"}
"""
    assert "guard-type" in codes(text)
