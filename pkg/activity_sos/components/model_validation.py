# ============================ #
#   Model Validation Component #
# ============================ #

import sys
from typing import Dict, Iterator, List, Optional, Set

from activity_sos.components.guard import names_in, uses_token
from activity_sos.constant.semantics import BUILTIN_TYPES, CONTROL_TYPE, MAX_CALL_DEPTH
from activity_sos.entity.artifact_entity import ValidationArtifact, ValidationReport, Violation
from activity_sos.entity.config_entity import ModelValidationConfig
from activity_sos.entity.model_entity import Activity, Model, Node, NodeKind
from activity_sos.exception.exception import ActivitySemanticsException
from activity_sos.logging.logger import logging
from activity_sos.utils.main_utils.utils import write_yaml_file

# nodes that can only start from tokens on their input pins
_NEEDS_INPUT = (
    NodeKind.ACTION,
    NodeKind.CALL_BEHAVIOR,
    NodeKind.SEND_SIGNAL,
    NodeKind.FLOW_FINAL,
    NodeKind.ACTIVITY_FINAL,
)


def _resolve(model: Model, type_name: str) -> str:
    return model.data_types.get(type_name, type_name)


def _compatible(model: Model, a: str, b: str) -> bool:
    a, b = _resolve(model, a), _resolve(model, b)
    return a == b or "Any" in (a, b)


def _guard_constants(expr) -> Iterator:
    if expr[0] == "cmp":
        for side in expr[2:]:
            if side[0] == "const":
                yield side[1]
    for child in expr[1:]:
        if isinstance(child, tuple):
            yield from _guard_constants(child)


def _routed_type(model: Model, decision: Node) -> Optional[str]:
    """Type of the value a Decision routes on: behaviour result, else decision-input flow, else its input."""
    if decision.d_behavior is not None:
        behavior = model.activity(decision.d_behavior)
        return behavior.output_apns[0].value_type if behavior is not None and behavior.output_apns else None
    if decision.d_flow is not None:
        pin = decision.input(decision.d_flow)
        return pin.value_type if pin is not None else None
    primary = [p for p in decision.inputs if p.name != decision.d_flow]
    return primary[0].value_type if len(primary) == 1 else None


def _const_type(value) -> str:
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    return "Str"


# ================================
# 🔎 Per-element checks
# ================================
def _check_model(model: Model) -> Iterator[Violation]:
    names = [a.name for a in model.activities]
    if model.activity(model.root) is None:
        yield Violation("root-missing", model.root, f"root activity '{model.root}' is not declared")
    known_types = set(BUILTIN_TYPES) | set(model.data_types) | set(model.event_names)
    for alias, base in model.data_types.items():
        if base not in BUILTIN_TYPES:
            yield Violation("type-unknown", alias, f"datatype '{alias}' aliases unknown base type '{base}'")
    for activity in model.activities:
        yield from _check_activity(model, activity, known_types)
    for key, binding in model.behaviors.items():
        if not binding.builtin and not binding.rows:
            yield Violation("behavior-empty", key, "behaviour table has no rows")
    yield from _check_calls(model, names)


def _check_calls(model: Model, names: List[str]) -> Iterator[Violation]:
    sync_graph: Dict[str, Set[str]] = {name: set() for name in names}
    any_graph: Dict[str, Set[str]] = {name: set() for name in names}
    for activity in model.activities:
        for node in activity.nodes:
            callee = node.behavior if node.kind is NodeKind.CALL_BEHAVIOR else node.d_behavior
            if callee is None or model.activity(callee) is None:
                continue
            any_graph[activity.name].add(callee)
            if node.kind is NodeKind.DECISION or node.synchronous:
                sync_graph[activity.name].add(callee)

    # synchronous cycles
    state: Dict[str, int] = {}
    reported: Set[str] = set()

    def visit(name: str, stack: List[str]) -> Iterator[Violation]:
        state[name] = 1
        for callee in sorted(sync_graph[name]):
            if state.get(callee) == 1:
                cycle = stack[stack.index(callee):] + [callee]
                if callee not in reported:
                    reported.add(callee)
                    yield Violation("sync-recursion", callee, "synchronous call cycle " + " -> ".join(cycle))
            elif state.get(callee) is None:
                yield from visit(callee, stack + [callee])
        state[name] = 2

    for name in names:
        if state.get(name) is None:
            yield from visit(name, [name])

    # instance depth reachable from the root (async recursion included)
    if model.activity(model.root) is not None and not reported:
        frontier, depth = {model.root}, 0
        while frontier and depth <= MAX_CALL_DEPTH:
            frontier = {callee for name in frontier for callee in any_graph[name]}
            depth += 1
        if frontier:
            yield Violation("call-depth", model.root, f"call nesting exceeds {MAX_CALL_DEPTH} levels")


def _check_activity(model: Model, activity: Activity, known_types: Set[str]) -> Iterator[Violation]:
    apn_names = {a.name for a in activity.apns}
    for node in activity.nodes:
        yield from _check_node(model, activity, node, known_types)

    for apn in activity.apns:
        element = f"{activity.name}.{apn.name}"
        if apn.exception and apn.direction != "out":
            yield Violation("apn-exception-input", element, "exception APNs must be outputs")
        if apn.exception and apn.streaming:
            yield Violation("apn-streaming-exception", element, "an APN cannot be both streaming and exception")
        if apn.lower > apn.upper:
            yield Violation("lower-exceeds-upper", element, f"lower {apn.lower} > upper {apn.upper}")
        if apn.upper < 1 or apn.upper_bound < 1:
            yield Violation("bound-not-positive", element, "upper and upper_bound must be positive")
        if apn.value_type not in known_types:
            yield Violation("type-unknown", element, f"unknown type '{apn.value_type}'")

    covered: Set[str] = set()
    for ps in activity.parameter_sets:
        covered.update(ps.members)
        for member in ps.members:
            if member not in apn_names:
                yield Violation("parameter-set-unknown-apn", f"{activity.name}.{ps.name}", f"'{member}' is not an APN")
    for apn in activity.apns:
        if apn.name not in covered:
            yield Violation("apn-no-parameter-set", f"{activity.name}.{apn.name}", "APN belongs to no parameter set")

    else_counts: Dict[str, int] = {}
    for edge in activity.edges:
        element = f"{activity.name}:{edge.id}"
        source, target = activity.holder(edge.source), activity.holder(edge.target)
        if source is None:
            yield Violation("edge-missing-source", element, f"no pin or APN '{edge.source}'")
        if target is None:
            yield Violation("edge-missing-target", element, f"no pin or APN '{edge.target}'")
        if source is not None and source.direction != ("in" if edge.source in apn_names else "out"):
            yield Violation("edge-direction", element, "an edge must leave an output pin or an input APN")
        if target is not None and target.direction != ("out" if edge.target in apn_names else "in"):
            yield Violation("edge-direction", element, "an edge must enter an input pin or an output APN")
        if source is not None and target is not None and not _compatible(model, source.value_type, target.value_type):
            yield Violation("edge-type-mismatch", element, f"{source.value_type} flows into {target.value_type}")
        if not edge.weight >= 1:
            yield Violation("edge-weight", element, "weight must be a positive integer or '*'")
        source_node = activity.node(edge.source.split(".", 1)[0]) if edge.source not in apn_names else None
        if edge.guard.is_else:
            if source_node is None or source_node.kind is not NodeKind.DECISION:
                yield Violation("else-placement", element, "'else' is only allowed on Decision outgoing edges")
            else:
                else_counts[source_node.id] = else_counts.get(source_node.id, 0) + 1
        elif source is not None:
            # a Decision's guards test the value it routes on, not the token it passes on
            tested = source.value_type
            if source_node is not None and source_node.kind is NodeKind.DECISION:
                tested = _routed_type(model, source_node)
            source_type = _resolve(model, tested) if tested is not None else None
            if uses_token(edge.guard) and source_type == CONTROL_TYPE:
                yield Violation("guard-type", element, "guard tests the value of a control flow")
            elif source_type in ("Int", "Bool", "Str"):
                for constant in _guard_constants(edge.guard.expr):
                    if _const_type(constant) != source_type:
                        yield Violation("guard-type", element, f"guard compares {source_type} with {constant!r}")
        if names_in(edge.guard):
            yield Violation("guard-type", element, f"unknown name(s) {sorted(names_in(edge.guard))} in guard")
    for node_id, count in sorted(else_counts.items()):
        if count > 1:
            yield Violation("decision-multiple-else", f"{activity.name}.{node_id}", "at most one 'else' edge per decision")

    node_ids = {n.id for n in activity.nodes}
    for handler in activity.handlers:
        element = f"{activity.name}.{handler.node}"
        node = activity.node(handler.node)
        if node is None:
            yield Violation("handler-unknown-node", element, "handler node does not exist")
        elif len(node.data_inputs) != 1:
            yield Violation("handler-single-input", element, "a handler has exactly one data input pin")
        if handler.protects is not None and handler.protects not in node_ids:
            yield Violation("handler-unknown-node", element, f"protected call '{handler.protects}' does not exist")


def _check_node(model: Model, activity: Activity, node: Node, known_types: Set[str]) -> Iterator[Violation]:
    element = f"{activity.name}.{node.id}"
    for pin in node.inputs + node.outputs:
        pin_element = f"{activity.name}.{pin.key}"
        if pin.lower > pin.upper:
            yield Violation("lower-exceeds-upper", pin_element, f"lower {pin.lower} > upper {pin.upper}")
        if pin.upper < 1 or pin.upper_bound < 1:
            yield Violation("bound-not-positive", pin_element, "upper and upper_bound must be positive")
        if pin.synthetic and pin.value_type != CONTROL_TYPE:
            yield Violation("control-pin-type", pin_element, "control pins carry ControlToken")
        if pin.value_type not in known_types:
            yield Violation("type-unknown", pin_element, f"unknown type '{pin.value_type}'")

    kind = node.kind
    if kind is NodeKind.FORK and len(node.inputs) != 1:
        yield Violation("fork-single-input", element, f"Fork has {len(node.inputs)} inputs")
    if kind is NodeKind.INITIAL and node.inputs:
        yield Violation("initial-has-input", element, "InitialNode cannot have inputs")
    if kind in (NodeKind.FLOW_FINAL, NodeKind.ACTIVITY_FINAL) and node.outputs:
        yield Violation("final-has-output", element, f"{kind.value} cannot have outputs")
    if kind in _NEEDS_INPUT and not node.inputs:
        yield Violation("action-no-input", element, f"{kind.value} has no input and can never start")
    if kind in (NodeKind.JOIN, NodeKind.MERGE) and len(node.outputs) != 1:
        yield Violation("switch-single-output", element, f"{kind.value} needs exactly one output")
    if kind is NodeKind.JOIN and node.join_spec is not None:
        unknown = names_in(node.join_spec) - {p.name for p in node.inputs}
        if unknown or uses_token(node.join_spec):
            yield Violation("join-spec-unknown-pin", element, f"join specification names {sorted(unknown)}")

    if kind is NodeKind.DECISION:
        if node.d_flow is not None and node.input(node.d_flow) is None:
            yield Violation("decision-dflow-missing", element, f"d_flow '{node.d_flow}' is not an input pin")
        primary = [p for p in node.inputs if p.name != node.d_flow]
        if len(primary) != 1:
            yield Violation("decision-inputs", element, "Decision needs exactly one input besides d_flow")
        if node.d_behavior is not None:
            behavior = model.activity(node.d_behavior)
            if behavior is None:
                yield Violation("decision-dbehavior-unknown", element, f"no activity '{node.d_behavior}'")
            elif not behavior.input_apns or not behavior.output_apns:
                yield Violation("decision-dbehavior-signature", element, "decision behaviour needs an input and an output APN")
    if kind is NodeKind.CALL_BEHAVIOR:
        callee = model.activity(node.behavior) if node.behavior else None
        if callee is None:
            yield Violation("call-unknown-behavior", element, f"no activity '{node.behavior}'")
        else:
            inputs = [p for p in node.inputs if not p.synthetic]
            outputs = [p for p in node.outputs if not p.synthetic]
            if len(inputs) != len(callee.input_apns) or len(outputs) != len(callee.output_apns):
                yield Violation("call-pin-mismatch", element, f"pins do not match the parameters of '{callee.name}'")
    if kind is NodeKind.ACTION:
        if node.behavior is not None and node.behavior not in model.behaviors:
            yield Violation("behavior-unknown", element, f"no behaviour '{node.behavior}'")
        if node.behavior is None and node.data_outputs:
            yield Violation("behavior-missing", element, "an Action with data outputs needs a behaviour")
    if kind in (NodeKind.ACCEPT_EVENT, NodeKind.SEND_SIGNAL):
        if node.event not in model.event_names:
            yield Violation("event-unknown", element, f"event '{node.event}' is not declared")
        if node.pool not in model.event_pools:
            yield Violation("pool-unknown", element, f"event pool '{node.pool}' is not declared")
    if kind is NodeKind.ACCEPT_EVENT and node.output(node.result or "") is None:
        yield Violation("accept-result-missing", element, f"result pin '{node.result}' is not an output")
    if node.execution_time is not None and node.execution_time < 0:
        yield Violation("execution-time-negative", element, "execution time must be non-negative")


def validate_model(model: Model) -> ValidationReport:
    """Every violated invariant with its element; pure and deterministic."""
    violations = sorted(set(_check_model(model)), key=lambda v: (v.code, v.element, v.message))
    return ValidationReport(violations=violations)


# ================================
# 🧱 Component
# ================================
class ModelValidation:
    """
    Validates a parsed model and stores the report.
    """

    def __init__(self, model: Model, model_validation_config: ModelValidationConfig):
        try:
            self.model = model
            self.model_validation_config = model_validation_config
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def initiate_model_validation(self, write_report: bool = True) -> ValidationArtifact:
        try:
            report = validate_model(self.model)
            if report.is_clean:
                logging.info("Model validation passed")
            else:
                logging.error(f"Model validation found {len(report.violations)} violation(s): {sorted(report.codes())}")
            if write_report:
                write_yaml_file(self.model_validation_config.report_file_path, report.to_dict(), replace=True)
            return ValidationArtifact(report=report, report_file_path=self.model_validation_config.report_file_path)
        except Exception as e:
            raise ActivitySemanticsException(e, sys)


def require_valid(model: Model) -> Optional[ValidationReport]:
    """Raises when the model is not well-formed; used by operations with a validity precondition."""
    report = validate_model(model)
    if not report.is_clean:
        raise ActivitySemanticsException(f"invalid model: {sorted(report.codes())}", sys)
    return report
