"""Initial state, fingerprints, macro projection and the visible-state conditions."""
import hashlib
import json
from typing import List, Optional

from activity_sos.components.instances import InstanceIndex
from activity_sos.entity.model_entity import Model, NodeKind
from activity_sos.entity.state_entity import (
    ActivityPhase,
    ActivityStatus,
    ExecState,
    MacroView,
    NodeStatus,
    Phase,
)


def initial_state(model: Model, index: Optional[InstanceIndex] = None, timed: bool = False) -> ExecState:
    """
    Root activity Executing over all of its APNs, with its non-streaming
    outputs pending; InitialNodes and parameterless AcceptEventActions of
    the root Executing; holders and pools empty.
    """
    index = index or InstanceIndex.build(model)
    root = model.root_activity
    pending = tuple(sorted(a.name for a in root.output_apns if not a.streaming))
    activities = {
        index.root_key: ActivityStatus(
            ActivityPhase.EXECUTING,
            parameter_set=tuple(sorted(a.name for a in root.apns)),
            pending=pending,
        )
    }
    nodes = {}
    for node in root.nodes:
        if node.kind is NodeKind.INITIAL or (node.kind is NodeKind.ACCEPT_EVENT and not node.inputs):
            nodes[node.id] = NodeStatus(Phase.EXECUTING)
    return ExecState.build(nodes, activities, {}, {}, {} if timed else None)


def canonical_json(state: ExecState) -> str:
    return json.dumps(state.to_json(), sort_keys=False, separators=(",", ":"), ensure_ascii=True)


def fingerprint(state: ExecState) -> str:
    return hashlib.sha256(canonical_json(state).encode("utf-8")).hexdigest()


def macro_view(state: ExecState, index: InstanceIndex) -> MacroView:
    """Statuses and pools kept; tokens sitting on switch-node pins dropped."""
    return MacroView(
        nodes=state.nodes,
        activities=state.activities,
        holders=tuple((k, v) for k, v in state.holders if not index.is_switch_holder(k)),
        events=state.events,
    )


def _waits_for_behavior(state: ExecState, index: InstanceIndex, node_key: str) -> bool:
    callee = index.callee.get(node_key)
    if callee is None:
        return False
    return state.activity(callee).is_executing or bool(state.node(node_key).f_in)


def switch_condition_violations(state: ExecState, index: InstanceIndex) -> List[str]:
    """
    Conditions every visible state satisfies:
    switch-node input pins are empty, non-Fork switch-node output pins are
    empty, every Fork keeps at least one output pin empty, and no switch
    node is executing. A Decision waiting on its decision behaviour may
    keep executing and keep its inputs.
    """
    problems = []
    for key, instance in index.nodes.items():
        node = instance.node
        if not node.is_switch:
            continue
        if node.kind is NodeKind.DECISION and _waits_for_behavior(state, index, key):
            pass
        else:
            if state.node(key).is_running:
                problems.append(f"switch node {key} is executing")
            problems.extend(f"input {p} of {key} holds tokens" for p in instance.input_keys if state.tokens(p))
        outputs = instance.output_keys
        if node.kind is NodeKind.FORK:
            if outputs and all(state.tokens(q) for q in outputs):
                problems.append(f"every output of fork {key} holds tokens")
        else:
            problems.extend(f"output {q} of {key} holds tokens" for q in outputs if state.tokens(q))
    return problems


def is_visible(state: ExecState, index: InstanceIndex) -> bool:
    return not switch_condition_violations(state, index)
