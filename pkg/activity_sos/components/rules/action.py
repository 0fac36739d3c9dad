"""Action and InitialNode rules."""
from activity_sos.components.behaviors import evaluate
from activity_sos.components.ordering import order_tokens
from activity_sos.components.rules.base import (
    Rule,
    RuleContext,
    control_outputs,
    in_running_activity,
    make,
    node_feeds,
    nodes_of,
)
from activity_sos.components.transfer import consume, consumed_inputs, fits, offer
from activity_sos.constant.semantics import ACTION_INVOKE, ACTION_TERMINATE, INITIAL_TERMINATE
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import (
    IDLE,
    ExecState,
    LabelKind,
    NodeStatus,
    Phase,
    RuleInstance,
    StateBuilder,
    StepKind,
    invoke,
    terminate,
)


# ================================
# A1: token consumption and invocation
# ================================
def find_action_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.ACTION):
        if not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance):
            continue
        for assignment in node_feeds(ctx, state, instance):
            yield make(ACTION_INVOKE, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def apply_action_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    consume(builder, inst.binding)
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=consumed_inputs(ctx.index, inst.binding)))
    return builder


# ================================
# A2: termination and token offering
# ================================
def action_results(ctx: RuleContext, state: ExecState, node_key: str):
    """Output pin key → ordered tokens, or None when a multiplicity premise fails."""
    instance = ctx.index.nodes[node_key]
    produced = evaluate(ctx.model, instance.node, state.node(node_key).f_in)
    offers = {}
    for pin in instance.node.outputs:
        tokens = order_tokens(pin.ordering, produced.get(pin.name, ()))
        key = instance.pin_key(pin.name)
        if len(tokens) < pin.lower or not fits(state, ctx.index, key, tokens):
            return None
        offers[key] = tokens
    return offers


def _find_terminating(ctx: RuleContext, state: ExecState, phase: Phase, rule_id: str):
    for instance in nodes_of(ctx, NodeKind.ACTION):
        if state.node(instance.key).phase is not phase or not in_running_activity(ctx, state, instance):
            continue
        if action_results(ctx, state, instance.key) is not None:
            yield make(rule_id, instance.key, (), terminate(instance.key), StepKind.MACRO)


def find_action_terminate(ctx: RuleContext, state: ExecState):
    return _find_terminating(ctx, state, Phase.EXECUTING, ACTION_TERMINATE)


def find_ready_action_terminate(ctx: RuleContext, state: ExecState):
    return _find_terminating(ctx, state, Phase.READY, ACTION_TERMINATE)


def apply_action_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    for key, tokens in action_results(ctx, state, inst.subject).items():
        offer(builder, ctx.index, key, tokens)
    builder.set_node(inst.subject, IDLE)
    builder.stop_clock(inst.subject)
    return builder


# ================================
# I1: InitialNode termination
# ================================
def find_initial_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.INITIAL):
        if state.node(instance.key).is_running and in_running_activity(ctx, state, instance):
            if control_outputs(ctx, state, instance) is not None:
                yield make(INITIAL_TERMINATE, instance.key, (), terminate(instance.key), StepKind.MACRO)


def apply_initial_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    for key, tokens in control_outputs(ctx, state, ctx.index.nodes[inst.subject]).items():
        offer(builder, ctx.index, key, tokens)
    builder.set_node(inst.subject, IDLE)
    return builder


ACTION_RULES = (
    Rule(ACTION_INVOKE, "action-invoke", StepKind.MACRO, LabelKind.INVOKE, find_action_invoke, apply_action_invoke),
    Rule(ACTION_TERMINATE, "action-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_action_terminate, apply_action_terminate),
    Rule(INITIAL_TERMINATE, "initial-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_initial_terminate, apply_initial_terminate),
)
