# ============================ #
#   CallBehaviorAction & Activity Rules
# ============================ #

"""
Invocation of called activities, streaming in both directions, and the
return of results to the calling node.

A call hands tokens to the callee's input APNs (C1/C2); a separate step
(V1) starts the activation once its inputs are occupied. A synchronous
caller stays Executing until the callee terminates (V2).
"""
from typing import Dict, List, Optional, Sequence, Tuple

from activity_sos.components.instances import NodeInstance
from activity_sos.components.rules.base import (
    Rule,
    RuleContext,
    activity_finished,
    activity_quiescent,
    call_outputs,
    in_running_activity,
    make,
    node_feeds,
    nodes_of,
    reset_activity,
    start_activity,
)
from activity_sos.components.transfer import Assignment, consume, fed_pins, fits, move, offer, transfer
from activity_sos.constant.semantics import (
    ACTIVITY_INVOKE,
    ACTIVITY_TERMINATE,
    CALL_INVOKE_MIXED,
    CALL_INVOKE_STREAMING,
    CALL_STREAM_IN,
    CALL_STREAM_OUT,
    OUT_PARAM_TRANSFER,
)
from activity_sos.entity.model_entity import Activity, NodeKind, ParameterSet
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    IDLE,
    TAU,
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
    transfer_label,
)


def _candidate_sets(activity: Activity) -> List[ParameterSet]:
    """Parameter sets an invocation may choose: those with an input, else any."""
    with_inputs = [
        ps for ps in activity.parameter_sets if any(activity.apn(m).direction == "in" for m in ps.members)
    ]
    return with_inputs or list(activity.parameter_sets) or [ParameterSet("", ())]


def _async_outputs(ctx: RuleContext, state: ExecState, instance: NodeInstance) -> Optional[Dict[str, tuple]]:
    """An asynchronous call completes at invocation: ControlTokens on its control outputs."""
    offers = {instance.pin_key(p.name): (CONTROL_TOKEN,) for p in instance.node.outputs if p.synthetic}
    if all(fits(state, ctx.index, k, v) for k, v in offers.items()):
        return offers
    return None


def _apn_targets(ctx: RuleContext, call_key: str, members: Sequence[str]) -> Dict[str, str]:
    """Caller input pin key → callee APN key, for the pins mapped into `members`."""
    index = ctx.index
    callee = index.callee[call_key]
    caller = index.nodes[call_key]
    return {
        caller.pin_key(pin.name): index.apn_key(callee, apn.name)
        for pin, apn in index.call_parameters(call_key)
        if apn.direction == "in" and apn.name in members
    }


def _apns_fit(ctx: RuleContext, state: ExecState, targets: Dict[str, str], assignment: Assignment) -> bool:
    return all(fits(state, ctx.index, targets[pin], tokens) for pin, tokens in fed_pins(assignment).items() if pin in targets)


# ================================
# 📞 C1 / C2: invocation
# ================================
def _find_call_invoke(ctx: RuleContext, state: ExecState, rule_id: str):
    index = ctx.index
    for instance in nodes_of(ctx, NodeKind.CALL_BEHAVIOR):
        callee = index.callee.get(instance.key)
        if callee is None or not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance):
            continue
        if not activity_quiescent(ctx, state, callee):
            continue
        if not instance.node.synchronous and _async_outputs(ctx, state, instance) is None:
            continue
        activity = index.activities[callee].activity
        pairs = index.call_parameters(instance.key)
        control = [instance.pin_key(p.name) for p in instance.node.inputs if p.synthetic]
        for ps in _candidate_sets(activity):
            inputs = [activity.apn(m) for m in ps.members if activity.apn(m).direction == "in"]
            mixed = any(not a.streaming for a in inputs)
            if mixed != (rule_id == CALL_INVOKE_MIXED):
                continue
            required = [instance.pin_key(pin.name) for pin, apn in pairs if apn in inputs and not apn.streaming]
            streaming = [instance.pin_key(pin.name) for pin, apn in pairs if apn in inputs and apn.streaming]
            targets = _apn_targets(ctx, instance.key, ps.members)
            for assignment in node_feeds(ctx, state, instance, required + control + streaming, greedy=streaming):
                if _apns_fit(ctx, state, targets, assignment):
                    yield make(rule_id, instance.key, (ps.members, assignment), invoke(instance.key), StepKind.MACRO)


def find_call_invoke_mixed(ctx: RuleContext, state: ExecState):
    return _find_call_invoke(ctx, state, CALL_INVOKE_MIXED)


def find_call_invoke_streaming(ctx: RuleContext, state: ExecState):
    return _find_call_invoke(ctx, state, CALL_INVOKE_STREAMING)


def apply_call_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    members, assignment = inst.binding
    index = ctx.index
    instance = index.nodes[inst.subject]
    callee = index.callee[inst.subject]
    targets = _apn_targets(ctx, inst.subject, members)

    builder = StateBuilder.of(state)
    consume(builder, assignment)
    reached = False
    for pin_key, tokens in fed_pins(assignment).items():
        if pin_key in targets:
            offer(builder, index, targets[pin_key], tokens)
            reached = True

    if instance.node.synchronous:
        builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING))
    else:
        for key, tokens in _async_outputs(ctx, state, instance).items():
            offer(builder, index, key, tokens)
    if not reached:
        start_activity(ctx, builder, callee, members, ())
    return builder


# ================================
# 🌊 C3 / C4: streaming during execution
# ================================
def _streaming_inputs(ctx: RuleContext, state: ExecState, instance: NodeInstance, callee: str) -> List[str]:
    chosen = state.activity(callee).parameter_set
    return [
        instance.pin_key(pin.name)
        for pin, apn in ctx.index.call_parameters(instance.key)
        if apn.direction == "in" and apn.streaming and apn.name in chosen
    ]


def find_call_stream_in(ctx: RuleContext, state: ExecState):
    index = ctx.index
    for instance in nodes_of(ctx, NodeKind.CALL_BEHAVIOR):
        callee = index.callee.get(instance.key)
        if callee is None or not state.activity(callee).is_executing or not in_running_activity(ctx, state, instance):
            continue
        if instance.node.synchronous and not state.node(instance.key).is_running:
            continue
        pins = _streaming_inputs(ctx, state, instance, callee)
        if not pins:
            continue
        targets = _apn_targets(ctx, instance.key, state.activity(callee).parameter_set)
        for assignment in node_feeds(ctx, state, instance, pins, greedy=pins):
            if _apns_fit(ctx, state, targets, assignment):
                yield make(CALL_STREAM_IN, instance.key, (assignment,), invoke(instance.key), StepKind.MACRO)


def apply_call_stream_in(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Streamed tokens reach the callee's APNs; those APNs are no longer pending."""
    (assignment,) = inst.binding
    index = ctx.index
    callee = index.callee[inst.subject]
    status = state.activity(callee)
    targets = _apn_targets(ctx, inst.subject, status.parameter_set)

    builder = StateBuilder.of(state)
    consume(builder, assignment)
    fed = set()
    for pin_key, tokens in fed_pins(assignment).items():
        offer(builder, index, targets[pin_key], tokens)
        fed.add(index.holder(targets[pin_key]).name)
    builder.set_activity(
        callee,
        ActivityStatus(status.phase, status.parameter_set, tuple(p for p in status.pending if p not in fed)),
    )
    return builder


def _stream_out_moves(ctx: RuleContext, state: ExecState, instance: NodeInstance, callee: str) -> List[Tuple[str, str, tuple]]:
    moves = []
    for pin, apn in ctx.index.call_parameters(instance.key):
        if apn.direction != "out" or not apn.streaming:
            continue
        source = ctx.index.apn_key(callee, apn.name)
        target = instance.pin_key(pin.name)
        tokens = state.tokens(source)
        room = pin.upper_bound - len(state.tokens(target))
        take = int(min(len(tokens), room))
        if take >= 1:
            moves.append((source, target, tokens[:take]))
    return moves


def find_call_stream_out(ctx: RuleContext, state: ExecState):
    index = ctx.index
    for instance in nodes_of(ctx, NodeKind.CALL_BEHAVIOR):
        callee = index.callee.get(instance.key)
        if callee is None or not state.activity(callee).is_executing:
            continue
        for source, target, tokens in _stream_out_moves(ctx, state, instance, callee):
            yield make(CALL_STREAM_OUT, instance.key, (source, target, tokens), transfer_label(f"{source}-{target}"), StepKind.MICRO)


def apply_call_stream_out(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    source, target, tokens = inst.binding
    builder = StateBuilder.of(state)
    move(builder, ctx.index, source, target, tokens)
    return builder


# ================================
# 🎬 V1 / V2 / V3: activity start, end and outputs
# ================================
def _occupied_inputs(ctx: RuleContext, state: ExecState, activity_key: str) -> Tuple[str, ...]:
    activity = ctx.index.activities[activity_key].activity
    return tuple(a.name for a in activity.input_apns if state.tokens(ctx.index.apn_key(activity_key, a.name)))


def find_activity_invoke(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if activation.caller is None or state.activity(key).phase is not ActivityPhase.IDLE:
            continue
        occupied = _occupied_inputs(ctx, state, key)
        if not occupied:
            continue
        sets = activation.activity.parameter_sets
        covering = [ps for ps in sets if set(occupied) <= set(ps.members)]
        for ps in covering or [ps for ps in sets if set(occupied) & set(ps.members)]:
            yield make(ACTIVITY_INVOKE, key, (ps.members, occupied), TAU, StepKind.MACRO)


def apply_activity_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    members, occupied = inst.binding
    builder = StateBuilder.of(state)
    start_activity(ctx, builder, inst.subject, members, occupied)
    return builder


def find_activity_terminate(ctx: RuleContext, state: ExecState):
    for key in sorted(ctx.index.activities):
        activation = ctx.index.activities[key]
        if activation.caller is None or not activation.synchronous or activation.decision:
            continue
        if not state.node(activation.caller).is_running or not activity_finished(ctx, state, key):
            continue
        if call_outputs(ctx, state, activation.caller, key) is not None:
            yield make(ACTIVITY_TERMINATE, key, (), terminate(activation.caller), StepKind.MACRO)


def apply_activity_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Outputs go to the caller's pins, Null for an output never set; callee and caller end."""
    caller = ctx.index.activities[inst.subject].caller
    offers = call_outputs(ctx, state, caller, inst.subject)
    builder = StateBuilder.of(state)
    reset_activity(ctx, builder, inst.subject)
    builder.set_activity(inst.subject, ActivityStatus())
    for key, tokens in offers.items():
        offer(builder, ctx.index, key, tokens)
    builder.set_node(caller, IDLE)
    return builder


def find_out_param_transfer(ctx: RuleContext, state: ExecState):
    index = ctx.index
    for edge in index.edges:
        target = index.holders[edge.target]
        if not target.is_apn or target.holder.direction != "out" or target.holder.exception:
            continue
        if not state.activity(edge.activity_key).is_executing:
            continue
        for choice in transfer(state, edge, index):
            yield make(OUT_PARAM_TRANSFER, edge.activity_key, (choice,), transfer_label(choice.edge), StepKind.MICRO)


def apply_out_param_transfer(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    (choice,) = inst.binding
    builder = StateBuilder.of(state)
    move(builder, ctx.index, choice.source, choice.target, choice.tokens)
    status = state.activity(inst.subject)
    name = ctx.index.holder(choice.target).name
    builder.set_activity(inst.subject, ActivityStatus(status.phase, status.parameter_set, tuple(p for p in status.pending if p != name)))
    return builder


CALL_RULES = (
    Rule(CALL_INVOKE_MIXED, "call-invoke-mixed", StepKind.MACRO, LabelKind.INVOKE, find_call_invoke_mixed, apply_call_invoke),
    Rule(CALL_INVOKE_STREAMING, "call-invoke-streaming-only", StepKind.MACRO, LabelKind.INVOKE, find_call_invoke_streaming, apply_call_invoke),
    Rule(CALL_STREAM_IN, "call-stream-in", StepKind.MACRO, LabelKind.INVOKE, find_call_stream_in, apply_call_stream_in),
    Rule(CALL_STREAM_OUT, "call-stream-out", StepKind.MICRO, LabelKind.TRANSFER, find_call_stream_out, apply_call_stream_out),
)

ACTIVITY_RULES = (
    Rule(ACTIVITY_INVOKE, "activity-invoke", StepKind.MACRO, LabelKind.TAU, find_activity_invoke, apply_activity_invoke),
    Rule(ACTIVITY_TERMINATE, "activity-terminate-sync", StepKind.MACRO, LabelKind.TERMINATE, find_activity_terminate, apply_activity_terminate),
    Rule(OUT_PARAM_TRANSFER, "out-param-transfer", StepKind.MICRO, LabelKind.TRANSFER, find_out_param_transfer, apply_out_param_transfer),
)
