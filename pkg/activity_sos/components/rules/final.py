"""FlowFinalNode and ActivityFinalNode rules."""
from activity_sos.components.rules.base import (
    Rule,
    RuleContext,
    call_outputs,
    in_running_activity,
    make,
    node_feeds,
    nodes_of,
    reset_activity,
)
from activity_sos.components.transfer import consume, consumed_inputs, offer
from activity_sos.constant.semantics import FINAL_ASYNC, FINAL_SYNC, FLOWFINAL_INVOKE, FLOWFINAL_TERMINATE
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import (
    IDLE,
    ActivityPhase,
    ActivityStatus,
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


def find_flowfinal_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.FLOW_FINAL):
        if state.node(instance.key).is_idle and in_running_activity(ctx, state, instance):
            for assignment in node_feeds(ctx, state, instance):
                yield make(FLOWFINAL_INVOKE, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def apply_flowfinal_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    consume(builder, inst.binding)
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=consumed_inputs(ctx.index, inst.binding)))
    return builder


def find_flowfinal_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.FLOW_FINAL):
        if state.node(instance.key).is_running and in_running_activity(ctx, state, instance):
            yield make(FLOWFINAL_TERMINATE, instance.key, (), terminate(instance.key), StepKind.MACRO)


def apply_flowfinal_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    builder.set_node(inst.subject, IDLE)
    return builder


# ================================
# 🛑 ActivityFinalNode
# ================================
def _final_candidates(ctx: RuleContext, state: ExecState, synchronous: bool):
    index = ctx.index
    for instance in nodes_of(ctx, NodeKind.ACTIVITY_FINAL):
        if not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance):
            continue
        activation = index.activities[instance.activity_key]
        called_sync = activation.caller is not None and activation.synchronous
        if called_sync != synchronous:
            continue
        for assignment in node_feeds(ctx, state, instance):
            yield instance, activation, assignment


def find_final_async(ctx: RuleContext, state: ExecState):
    for instance, _, assignment in _final_candidates(ctx, state, synchronous=False):
        yield make(FINAL_ASYNC, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def apply_final_async(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Ends an asynchronously called activation; at the root, ends the whole run."""
    index = ctx.index
    activity_key = index.nodes[inst.subject].activity_key
    builder = StateBuilder.of(state)
    consume(builder, inst.binding)
    if activity_key == index.root_key:
        builder.nodes.clear()
        builder.holders.clear()
        builder.activities.clear()
        if builder.clocks is not None:
            builder.clocks.clear()
    else:
        reset_activity(ctx, builder, activity_key)
        builder.set_activity(activity_key, ActivityStatus())
    return builder


def find_final_sync(ctx: RuleContext, state: ExecState):
    for instance, activation, assignment in _final_candidates(ctx, state, synchronous=True):
        if activation.decision:
            yield make(FINAL_SYNC, instance.key, assignment, invoke(instance.key), StepKind.MACRO)
            continue
        if not state.node(activation.caller).is_running:
            continue
        if call_outputs(ctx, state, activation.caller, activation.key) is not None:
            yield make(FINAL_SYNC, instance.key, assignment, invoke(instance.key), StepKind.MACRO)


def apply_final_sync(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """
    Ends a synchronously called activation and hands its outputs to the
    caller. A decision behaviour keeps its outputs for the decision instead.
    """
    index = ctx.index
    activation = index.activities[index.nodes[inst.subject].activity_key]
    builder = StateBuilder.of(state)
    consume(builder, inst.binding)
    if activation.decision:
        reset_activity(ctx, builder, activation.key, keep_outputs=True)
        status = state.activity(activation.key)
        builder.set_activity(activation.key, ActivityStatus(ActivityPhase.EXECUTING, status.parameter_set, ()))
        return builder
    offers = call_outputs(ctx, builder, activation.caller, activation.key)
    reset_activity(ctx, builder, activation.key)
    builder.set_activity(activation.key, ActivityStatus())
    for key, tokens in offers.items():
        offer(builder, index, key, tokens)
    builder.set_node(activation.caller, IDLE)
    return builder


FINAL_RULES = (
    Rule(FLOWFINAL_INVOKE, "flowfinal-invoke", StepKind.MACRO, LabelKind.INVOKE, find_flowfinal_invoke, apply_flowfinal_invoke),
    Rule(FLOWFINAL_TERMINATE, "flowfinal-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_flowfinal_terminate, apply_flowfinal_terminate),
    Rule(FINAL_ASYNC, "final-async", StepKind.MACRO, LabelKind.INVOKE, find_final_async, apply_final_async),
    Rule(FINAL_SYNC, "final-sync", StepKind.MACRO, LabelKind.INVOKE, find_final_sync, apply_final_sync),
)
