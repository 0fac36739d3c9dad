"""Raising, handling and propagating exceptions across call levels."""
from typing import Dict, Optional

from activity_sos.components.instances import ActivityInstance, NodeInstance
from activity_sos.components.rules.base import Rule, RuleContext, make, reset_activity
from activity_sos.components.transfer import fits, offer, transfer
from activity_sos.constant.semantics import (
    EXCEPTION_ASYNC_DROP,
    EXCEPTION_PROPAGATE,
    EXCEPTION_THROW,
    HANDLER_INVOKE,
    HANDLER_RESULT,
)
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    IDLE,
    TAU,
    ActivityPhase,
    ActivityStatus,
    ExecState,
    LabelKind,
    RuleInstance,
    StateBuilder,
    StepKind,
)

ANY_EXCEPTION = "Any"


def _raised(state: ExecState, activation: ActivityInstance) -> bool:
    return activation.caller is not None and state.activity(activation.key).phase is ActivityPhase.EXCEPTION


def _kind_at(ctx: RuleContext, activity_key: str) -> StepKind:
    """Exceptions reaching the root end the run and must stay visible."""
    return StepKind.MACRO if activity_key == ctx.index.root_key else StepKind.MICRO


def handler_for(ctx: RuleContext, activation: ActivityInstance, exception_type: Optional[str]) -> Optional[NodeInstance]:
    """First handler of the caller's activity protecting this call and accepting the type."""
    index = ctx.index
    caller = index.nodes[activation.caller]
    owner = index.activities[caller.activity_key].activity
    for binding in owner.handlers:
        if binding.protects not in (None, caller.node.id):
            continue
        if binding.exception_type not in (ANY_EXCEPTION, exception_type):
            continue
        handler = index.nodes.get(f"{caller.path}{binding.node}")
        if handler is not None:
            return handler
    return None


def _synchronous_caller(activation: ActivityInstance) -> bool:
    return activation.synchronous or activation.decision


# ================================
# ⚡ X1: throwing
# ================================
def find_exception_throw(ctx: RuleContext, state: ExecState):
    index = ctx.index
    for edge in index.edges:
        target = index.holders[edge.target]
        if not target.is_apn or not target.holder.exception:
            continue
        if not state.activity(edge.activity_key).is_executing:
            continue
        values = []
        for choice in transfer(state, edge, index):
            if choice.tokens[0] not in values:
                values.append(choice.tokens[0])
        for value in values:
            yield make(EXCEPTION_THROW, edge.activity_key, (edge.target, value), TAU, _kind_at(ctx, edge.activity_key))


def apply_exception_throw(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    apn_key, value = inst.binding
    builder = StateBuilder.of(state)
    reset_activity(ctx, builder, inst.subject)
    builder.set_activity(
        inst.subject,
        ActivityStatus(ActivityPhase.EXCEPTION, exception=value, exception_type=ctx.index.holder(apn_key).value_type),
    )
    return builder


# ================================
# 🛟 X2 / X5: handlers
# ================================
def _handler_free(ctx: RuleContext, state: ExecState, handler: NodeInstance) -> bool:
    keys = handler.input_keys + handler.output_keys
    return state.node(handler.key).is_idle and not any(state.tokens(k) for k in keys)


def find_handler_invoke(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if not _raised(state, activation) or not activation.synchronous or activation.decision:
            continue
        status = state.activity(key)
        handler = handler_for(ctx, activation, status.exception_type)
        if handler is None or not _handler_free(ctx, state, handler) or not handler.node.data_inputs:
            continue
        yield make(HANDLER_INVOKE, key, (handler.key,), TAU, StepKind.MICRO)


def apply_handler_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """The raised value lands on the handler's input; the callee stays raised until the handler answers."""
    handler = ctx.index.nodes[inst.binding[0]]
    builder = StateBuilder.of(state)
    pin = handler.node.data_inputs[0]
    offer(builder, ctx.index, handler.pin_key(pin.name), (state.activity(inst.subject).exception,))
    return builder


def _handler_results(ctx: RuleContext, state: ExecState, handler: NodeInstance, call_key: str) -> Optional[Dict[str, tuple]]:
    caller = ctx.index.nodes[call_key]
    produced = [state.tokens(handler.pin_key(p.name)) for p in handler.node.data_outputs]
    offers = {}
    data_outputs = caller.node.data_outputs
    for position, pin in enumerate(data_outputs):
        tokens = produced[position] if position < len(produced) else ()
        offers[caller.pin_key(pin.name)] = tokens or (CONTROL_TOKEN,)
    for pin in caller.node.outputs:
        offers.setdefault(caller.pin_key(pin.name), (CONTROL_TOKEN,))
    if all(fits(state, ctx.index, k, v) for k, v in offers.items()):
        return offers
    return None


def find_handler_result(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if not _raised(state, activation) or not activation.synchronous or activation.decision:
            continue
        handler = handler_for(ctx, activation, state.activity(key).exception_type)
        if handler is None or not state.node(handler.key).is_idle:
            continue
        if not any(state.tokens(k) for k in handler.output_keys):
            continue
        if _handler_results(ctx, state, handler, activation.caller) is not None:
            yield make(HANDLER_RESULT, key, (handler.key,), TAU, StepKind.MICRO)


def apply_handler_result(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Handler outputs replace the call's outputs positionally; the call completes."""
    index = ctx.index
    handler = index.nodes[inst.binding[0]]
    caller = index.activities[inst.subject].caller
    offers = _handler_results(ctx, state, handler, caller)
    builder = StateBuilder.of(state)
    for key in handler.output_keys:
        builder.set_tokens(key, ())
    reset_activity(ctx, builder, inst.subject)
    builder.set_activity(inst.subject, ActivityStatus())
    for key, tokens in offers.items():
        offer(builder, index, key, tokens)
    builder.set_node(caller, IDLE)
    return builder


# ================================
# 📡 X3 / X4: propagation and asynchronous drop
# ================================
def find_exception_propagate(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if not _raised(state, activation) or not _synchronous_caller(activation):
            continue
        if not activation.decision and handler_for(ctx, activation, state.activity(key).exception_type) is not None:
            continue
        outer = ctx.index.nodes[activation.caller].activity_key
        if not state.activity(outer).is_executing:
            continue
        yield make(EXCEPTION_PROPAGATE, key, (outer,), TAU, _kind_at(ctx, outer))


def apply_exception_propagate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """The calling activity is reset and raises the same value one level up."""
    (outer,) = inst.binding
    status = state.activity(inst.subject)
    builder = StateBuilder.of(state)
    reset_activity(ctx, builder, outer)
    builder.set_activity(inst.subject, ActivityStatus())
    builder.set_activity(outer, ActivityStatus(ActivityPhase.EXCEPTION, exception=status.exception, exception_type=status.exception_type))
    return builder


def find_exception_async_drop(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if _raised(state, activation) and not _synchronous_caller(activation):
            yield make(EXCEPTION_ASYNC_DROP, key, (), TAU, StepKind.MICRO)


def apply_exception_async_drop(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    reset_activity(ctx, builder, inst.subject)
    builder.set_activity(inst.subject, ActivityStatus())
    return builder


EXCEPTION_RULES = (
    Rule(EXCEPTION_THROW, "exception-throw", StepKind.MICRO, LabelKind.TAU, find_exception_throw, apply_exception_throw),
    Rule(HANDLER_INVOKE, "handler-invoke", StepKind.MICRO, LabelKind.TAU, find_handler_invoke, apply_handler_invoke),
    Rule(EXCEPTION_PROPAGATE, "exception-propagate", StepKind.MICRO, LabelKind.TAU, find_exception_propagate, apply_exception_propagate),
    Rule(EXCEPTION_ASYNC_DROP, "exception-async-drop", StepKind.MICRO, LabelKind.TAU, find_exception_async_drop, apply_exception_async_drop),
    Rule(HANDLER_RESULT, "handler-result", StepKind.MICRO, LabelKind.TAU, find_handler_result, apply_handler_result),
)
