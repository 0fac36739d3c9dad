"""AcceptEventAction and SendSignalAction rules."""
from typing import Dict, Optional

from activity_sos.components.rules.base import (
    Rule,
    RuleContext,
    control_outputs,
    in_running_activity,
    make,
    node_feeds,
    nodes_of,
)
from activity_sos.components.instances import NodeInstance
from activity_sos.components.ordering import remove_tokens
from activity_sos.components.transfer import consume, consumed_inputs, fits, offer
from activity_sos.constant.semantics import (
    ACCEPT_INVOKE,
    ACCEPT_RECEIVE_PERSISTENT,
    ACCEPT_RECEIVE_TERMINATE,
    SEND_INVOKE,
    SEND_TERMINATE,
)
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    IDLE,
    ExecState,
    LabelKind,
    NodeStatus,
    Phase,
    RuleInstance,
    StateBuilder,
    StepKind,
    TokenKind,
    TokenValue,
    invoke,
    terminate,
)


def _invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    consume(builder, inst.binding)
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=consumed_inputs(ctx.index, inst.binding)))
    return builder


# ================================
# 📥 AcceptEventAction
# ================================
def find_accept_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.ACCEPT_EVENT):
        if instance.node.inputs and state.node(instance.key).is_idle and in_running_activity(ctx, state, instance):
            for assignment in node_feeds(ctx, state, instance):
                yield make(ACCEPT_INVOKE, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def _receipt(ctx: RuleContext, state: ExecState, instance: NodeInstance, event: TokenValue) -> Optional[Dict[str, tuple]]:
    offers = {}
    for pin in instance.node.outputs:
        key = instance.pin_key(pin.name)
        offers[key] = (event,) if pin.name == instance.node.result else (CONTROL_TOKEN,)
        if not fits(state, ctx.index, key, offers[key]):
            return None
    return offers


def _receptions(ctx: RuleContext, state: ExecState, with_inputs: bool, rule_id: str):
    for instance in nodes_of(ctx, NodeKind.ACCEPT_EVENT):
        if bool(instance.node.inputs) != with_inputs:
            continue
        if not state.node(instance.key).is_running or not in_running_activity(ctx, state, instance):
            continue
        payloads = sorted(
            {t for t in state.pool(instance.node.pool) if t.kind is TokenKind.EVENT and t.event == instance.node.event},
            key=TokenValue.sort_key,
        )
        for event in payloads:
            if _receipt(ctx, state, instance, event) is not None:
                yield make(rule_id, instance.key, (event,), terminate(instance.key), StepKind.MACRO)


def find_accept_receive_terminate(ctx: RuleContext, state: ExecState):
    return _receptions(ctx, state, True, ACCEPT_RECEIVE_TERMINATE)


def find_accept_receive_persistent(ctx: RuleContext, state: ExecState):
    return _receptions(ctx, state, False, ACCEPT_RECEIVE_PERSISTENT)


def apply_accept_receive(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Removes one occurrence of the event from the pool and offers it on the result pin."""
    event = inst.binding[0]
    instance = ctx.index.nodes[inst.subject]
    builder = StateBuilder.of(state)
    pool = instance.node.pool
    builder.events[pool] = remove_tokens(state.pool(pool), (event,))
    for key, tokens in _receipt(ctx, state, instance, event).items():
        offer(builder, ctx.index, key, tokens)
    if inst.rule_id == ACCEPT_RECEIVE_TERMINATE:
        builder.set_node(inst.subject, IDLE)
    return builder


# ================================
# 📤 SendSignalAction
# ================================
def find_send_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.SEND_SIGNAL):
        if state.node(instance.key).is_idle and in_running_activity(ctx, state, instance):
            for assignment in node_feeds(ctx, state, instance):
                yield make(SEND_INVOKE, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def apply_send_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """The signal carries the consumed data sequences in pin order."""
    builder = _invoke(ctx, state, inst)
    instance = ctx.index.nodes[inst.subject]
    consumed = dict(consumed_inputs(ctx.index, inst.binding))
    payload = tuple(consumed.get(pin.name, ()) for pin in instance.node.data_inputs)
    pool = instance.node.pool
    builder.events[pool] = state.pool(pool) + (TokenValue(TokenKind.EVENT, payload, instance.node.event),)
    return builder


def find_send_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.SEND_SIGNAL):
        if state.node(instance.key).is_running and in_running_activity(ctx, state, instance):
            if control_outputs(ctx, state, instance) is not None:
                yield make(SEND_TERMINATE, instance.key, (), terminate(instance.key), StepKind.MACRO)


def apply_send_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    for key, tokens in control_outputs(ctx, state, ctx.index.nodes[inst.subject]).items():
        offer(builder, ctx.index, key, tokens)
    builder.set_node(inst.subject, IDLE)
    return builder


EVENT_RULES = (
    Rule(ACCEPT_INVOKE, "accept-invoke", StepKind.MACRO, LabelKind.INVOKE, find_accept_invoke, _invoke),
    Rule(ACCEPT_RECEIVE_TERMINATE, "accept-receive-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_accept_receive_terminate, apply_accept_receive),
    Rule(ACCEPT_RECEIVE_PERSISTENT, "accept-receive-persistent", StepKind.MACRO, LabelKind.TERMINATE, find_accept_receive_persistent, apply_accept_receive),
    Rule(SEND_INVOKE, "send-invoke", StepKind.MACRO, LabelKind.INVOKE, find_send_invoke, apply_send_invoke),
    Rule(SEND_TERMINATE, "send-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_send_terminate, apply_send_terminate),
)
