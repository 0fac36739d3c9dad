# ============================ #
#   Switch Node Rules
# ============================ #

"""
Fork, Join, Merge and Decision. Apart from the Join bookkeeping steps and
the end of a decision behaviour these are micro-steps: they route tokens
without being visible on their own.
"""
import itertools
from typing import Dict, List, Optional, Tuple

from activity_sos.components.guard import eval_guard, eval_join_spec
from activity_sos.components.instances import NodeInstance
from activity_sos.components.ordering import collapse_control, combine, order_tokens, remove_tokens
from activity_sos.components.rules.base import (
    Rule,
    RuleContext,
    activity_finished,
    activity_quiescent,
    in_running_activity,
    make,
    nodes_of,
    reset_activity,
)
from activity_sos.components.transfer import TransferChoice, fits, move, offer, transfer
from activity_sos.constant.semantics import (
    DECISION_DBEHAVIOR_TERMINATE,
    DECISION_EVAL_DBEHAVIOR,
    DECISION_EVAL_DFLOW,
    DECISION_EVAL_INPUT,
    DECISION_INVOKE,
    DECISION_INVOKE_DBEHAVIOR,
    DECISION_TERMINATE,
    FORK_CONSUME,
    FORK_OFFER,
    JOIN_INVOKE,
    JOIN_ORDER_ADD,
    JOIN_ORDER_REMOVE,
    JOIN_TERMINATE,
    MERGE_TRANSFER,
)
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import (
    IDLE,
    NULL_TOKEN,
    TAU,
    ActivityStatus,
    ExecState,
    LabelKind,
    NodeStatus,
    Phase,
    RuleInstance,
    StateBuilder,
    StepKind,
    TokenValue,
    terminate,
    transfer_label,
)

RESULT_KEY = "result"


def _choices(ctx: RuleContext, state: ExecState, pin_key: str) -> List[TransferChoice]:
    return [c for edge in ctx.index.incoming.get(pin_key, []) for c in transfer(state, edge, ctx.index)]


def _accepts_any(ctx: RuleContext, pin_key: str, token: TokenValue) -> bool:
    return any(eval_guard(e.edge.guard, token, otherwise=True) for e in ctx.index.outgoing.get(pin_key, []))


# ================================
# 🍴 Fork
# ================================
def find_fork_consume(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.FORK):
        if not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance):
            continue
        for pin_key in instance.input_keys:
            for choice in _choices(ctx, state, pin_key):
                yield make(FORK_CONSUME, instance.key, (pin_key, choice), transfer_label(choice.edge), StepKind.MICRO)


def apply_fork_consume(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    pin_key, choice = inst.binding
    builder = StateBuilder.of(state)
    builder.set_tokens(choice.source, remove_tokens(state.tokens(choice.source), choice.tokens))
    pin = ctx.index.holder(pin_key)
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=((pin.name, order_tokens(pin.ordering, choice.tokens)),)))
    return builder


def _fork_offers(ctx: RuleContext, state: ExecState, instance: NodeInstance) -> Optional[Dict[str, tuple]]:
    tokens = tuple(t for _, seq in state.node(instance.key).f_in for t in seq)
    offers = {}
    for key in instance.output_keys:
        passing = tuple(t for t in tokens if _accepts_any(ctx, key, t))
        if not fits(state, ctx.index, key, passing):
            return None
        offers[key] = passing
    return offers


def find_fork_offer(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.FORK):
        if state.node(instance.key).is_running and _fork_offers(ctx, state, instance) is not None:
            yield make(FORK_OFFER, instance.key, (), TAU, StepKind.MICRO)


def apply_fork_offer(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    for key, tokens in _fork_offers(ctx, state, ctx.index.nodes[inst.subject]).items():
        offer(builder, ctx.index, key, tokens)
    builder.set_node(inst.subject, IDLE)
    return builder


# ================================
# 🔗 Join
# ================================
def _data_pins(ctx: RuleContext, instance: NodeInstance) -> List[str]:
    return [instance.pin_key(p.name) for p in instance.node.inputs if not p.is_control]


def _offering(ctx: RuleContext, state: ExecState, pin_key: str) -> bool:
    return bool(_choices(ctx, state, pin_key))


def _join_waiting(ctx: RuleContext, state: ExecState, instance: NodeInstance) -> bool:
    return state.node(instance.key).phase is Phase.IDLE and in_running_activity(ctx, state, instance)


def find_join_order_add(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.JOIN):
        if not _join_waiting(ctx, state, instance):
            continue
        order = state.node(instance.key).order
        for pin_key in _data_pins(ctx, instance):
            name = ctx.index.holder(pin_key).name
            if name not in order and _offering(ctx, state, pin_key):
                yield make(JOIN_ORDER_ADD, instance.key, (name,), TAU, StepKind.MACRO)


def apply_join_order_add(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    status = state.node(inst.subject)
    builder.set_node(inst.subject, NodeStatus(Phase.IDLE, order=status.order + inst.binding))
    return builder


def find_join_order_remove(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.JOIN):
        if not _join_waiting(ctx, state, instance):
            continue
        for name in state.node(instance.key).order:
            if not _offering(ctx, state, instance.pin_key(name)):
                yield make(JOIN_ORDER_REMOVE, instance.key, (name,), TAU, StepKind.MACRO)


def apply_join_order_remove(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    status = state.node(inst.subject)
    builder.set_node(inst.subject, NodeStatus(Phase.IDLE, order=tuple(n for n in status.order if n not in inst.binding)))
    return builder


def find_join_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.JOIN):
        if not _join_waiting(ctx, state, instance):
            continue
        order = state.node(instance.key).order
        pins = []
        for pin in instance.node.inputs:
            key = instance.pin_key(pin.name)
            if not pin.is_control and pin.name not in order:
                continue
            if _offering(ctx, state, key):
                pins.append(key)
        if not pins:
            continue
        names = {ctx.index.holder(k).name for k in pins}
        if instance.node.join_spec is None:
            if len(names) != len(instance.node.inputs):
                continue
        elif not eval_join_spec(instance.node.join_spec, names):
            continue
        for combo in itertools.product(*(_choices(ctx, state, k) for k in pins)):
            sources = [c.source for c in combo]
            if len(sources) != len(set(sources)):
                continue
            yield make(JOIN_INVOKE, instance.key, tuple(zip(pins, combo)), transfer_label(*(c.edge for c in combo)), StepKind.MICRO)


def apply_join_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    order = state.node(inst.subject).order
    consumed: Dict[str, tuple] = {}
    for pin_key, choice in inst.binding:
        builder.set_tokens(choice.source, remove_tokens(builder.tokens(choice.source), choice.tokens))
        pin = ctx.index.holder(pin_key)
        consumed[pin.name] = order_tokens(pin.ordering, collapse_control(choice.tokens))
    node = ctx.index.nodes[inst.subject].node
    ranked = [n for n in order if n in consumed] + [p.name for p in node.inputs if p.name in consumed and p.name not in order]
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=tuple((n, consumed[n]) for n in ranked), order=order))
    return builder


def _join_output(ctx: RuleContext, state: ExecState, instance: NodeInstance):
    status = state.node(instance.key)
    tokens = combine(seq for _, seq in status.f_in)
    key = instance.output_keys[0]
    return (key, tokens) if fits(state, ctx.index, key, tokens) else None


def find_join_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.JOIN):
        if state.node(instance.key).phase is Phase.EXECUTING and instance.output_keys:
            if _join_output(ctx, state, instance) is not None:
                yield make(JOIN_TERMINATE, instance.key, (), TAU, StepKind.MICRO)


def apply_join_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    instance = ctx.index.nodes[inst.subject]
    key, tokens = _join_output(ctx, state, instance)
    offer(builder, ctx.index, key, tokens)
    status = state.node(inst.subject)
    used = {name for name, _ in status.f_in}
    builder.set_node(inst.subject, NodeStatus(Phase.IDLE, order=tuple(n for n in status.order if n not in used)))
    return builder


# ================================
# 🔀 Merge
# ================================
def find_merge_transfer(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.MERGE):
        if not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance) or not instance.output_keys:
            continue
        out_key = instance.output_keys[0]
        for pin_key in instance.input_keys:
            for choice in _choices(ctx, state, pin_key):
                if fits(state, ctx.index, out_key, choice.tokens):
                    yield make(MERGE_TRANSFER, instance.key, (choice, out_key), transfer_label(choice.edge), StepKind.MICRO)


def apply_merge_transfer(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    choice, out_key = inst.binding
    builder = StateBuilder.of(state)
    move(builder, ctx.index, choice.source, out_key, choice.tokens)
    return builder


# ================================
# 🔶 Decision
# ================================
def _primary(instance: NodeInstance) -> Optional[str]:
    return next((instance.pin_key(p.name) for p in instance.node.inputs if p.name != instance.node.d_flow), None)


def _dflow(instance: NodeInstance) -> Optional[str]:
    return instance.pin_key(instance.node.d_flow) if instance.node.d_flow else None


def _behavior(ctx: RuleContext, instance: NodeInstance) -> Optional[str]:
    return ctx.index.callee.get(instance.key) if instance.node.d_behavior else None


def _stored_result(state: ExecState, key: str) -> Optional[TokenValue]:
    stored = dict(state.node(key).f_in).get(RESULT_KEY)
    return stored[0] if stored else None


def route_targets(ctx: RuleContext, instance: NodeInstance, value: TokenValue) -> List[str]:
    """Output pins whose edge accepts the value; an `else` edge accepts iff no other edge does."""
    plain, fallback = [], []
    for key in instance.output_keys:
        for edge in ctx.index.outgoing.get(key, []):
            if edge.edge.guard.is_else:
                fallback.append(key)
            elif eval_guard(edge.edge.guard, value):
                plain.append(key)
    targets = plain if plain else fallback
    return sorted(set(targets), key=instance.output_keys.index)


def find_decision_invoke(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        if not state.node(instance.key).is_idle or not in_running_activity(ctx, state, instance):
            continue
        behavior = _behavior(ctx, instance)
        if behavior is not None and not activity_quiescent(ctx, state, behavior):
            continue
        primary, dflow = _primary(instance), _dflow(instance)
        if primary is None:
            continue
        for main in _choices(ctx, state, primary):
            if dflow is None:
                yield make(DECISION_INVOKE, instance.key, ((primary, main),), transfer_label(main.edge), StepKind.MICRO)
                continue
            for side in _choices(ctx, state, dflow):
                if len(side.tokens) == len(main.tokens) and side.source != main.source:
                    binding = ((primary, main), (dflow, side))
                    yield make(DECISION_INVOKE, instance.key, binding, transfer_label(main.edge, side.edge), StepKind.MICRO)


def apply_decision_invoke(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    for pin_key, choice in inst.binding:
        move(builder, ctx.index, choice.source, pin_key, choice.tokens)
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING))
    return builder


def _routes(ctx: RuleContext, state: ExecState, instance: NodeInstance, value: TokenValue, rule_id: str):
    head = state.tokens(_primary(instance))[0]
    for target in route_targets(ctx, instance, value):
        if fits(state, ctx.index, target, (head,)):
            yield make(rule_id, instance.key, (target,), TAU, StepKind.MICRO)


def find_decision_eval_input(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        if instance.node.d_flow or instance.node.d_behavior or not state.node(instance.key).is_running:
            continue
        held = state.tokens(_primary(instance))
        if held:
            yield from _routes(ctx, state, instance, held[0], DECISION_EVAL_INPUT)


def find_decision_eval_dflow(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        if not instance.node.d_flow or instance.node.d_behavior or not state.node(instance.key).is_running:
            continue
        held, side = state.tokens(_primary(instance)), state.tokens(_dflow(instance))
        if held and side:
            yield from _routes(ctx, state, instance, side[0], DECISION_EVAL_DFLOW)


def apply_decision_route(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    instance = ctx.index.nodes[inst.subject]
    builder = StateBuilder.of(state)
    primary = _primary(instance)
    move(builder, ctx.index, primary, inst.binding[0], state.tokens(primary)[:1])
    dflow = _dflow(instance)
    if dflow is not None:
        builder.set_tokens(dflow, state.tokens(dflow)[1:])
    if inst.rule_id == DECISION_EVAL_DBEHAVIOR:
        builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING))
    return builder


def find_decision_eval_dbehavior(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        if not instance.node.d_behavior or not state.node(instance.key).is_running:
            continue
        result = _stored_result(state, instance.key)
        if result is not None and state.tokens(_primary(instance)):
            yield from _routes(ctx, state, instance, result, DECISION_EVAL_DBEHAVIOR)


def find_decision_invoke_dbehavior(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        behavior = _behavior(ctx, instance)
        if behavior is None or not state.node(instance.key).is_running:
            continue
        if _stored_result(state, instance.key) is not None or not activity_quiescent(ctx, state, behavior):
            continue
        source = _dflow(instance) or _primary(instance)
        if state.tokens(_primary(instance)) and state.tokens(source):
            yield make(DECISION_INVOKE_DBEHAVIOR, instance.key, (behavior,), TAU, StepKind.MICRO)


def apply_decision_invoke_dbehavior(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    instance = ctx.index.nodes[inst.subject]
    behavior = inst.binding[0]
    builder = StateBuilder.of(state)
    source = _dflow(instance) or _primary(instance)
    first_input = ctx.index.activities[behavior].activity.input_apns[0]
    offer(builder, ctx.index, ctx.index.apn_key(behavior, first_input.name), state.tokens(source)[:1])
    return builder


def find_decision_dbehavior_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        behavior = _behavior(ctx, instance)
        if behavior is None or not state.node(instance.key).is_running:
            continue
        if activity_finished(ctx, state, behavior):
            yield make(DECISION_DBEHAVIOR_TERMINATE, instance.key, (behavior,), terminate(instance.key), StepKind.MACRO)


def apply_decision_dbehavior_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    behavior = inst.binding[0]
    activity = ctx.index.activities[behavior].activity
    outputs = state.tokens(ctx.index.apn_key(behavior, activity.output_apns[0].name))
    result = outputs[0] if outputs else NULL_TOKEN
    builder = StateBuilder.of(state)
    reset_activity(ctx, builder, behavior)
    builder.set_activity(behavior, ActivityStatus())
    builder.set_node(inst.subject, NodeStatus(Phase.EXECUTING, f_in=((RESULT_KEY, (result,)),)))
    return builder


def find_decision_terminate(ctx: RuleContext, state: ExecState):
    for instance in nodes_of(ctx, NodeKind.DECISION):
        if not state.node(instance.key).is_running or _stored_result(state, instance.key) is not None:
            continue
        if any(state.tokens(k) for k in instance.input_keys):
            continue
        behavior = _behavior(ctx, instance)
        if behavior is not None and not activity_quiescent(ctx, state, behavior):
            continue
        yield make(DECISION_TERMINATE, instance.key, (), TAU, StepKind.MICRO)


def apply_decision_terminate(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    builder.set_node(inst.subject, IDLE)
    return builder


CONTROL_RULES: Tuple[Rule, ...] = (
    Rule(FORK_CONSUME, "fork-consume", StepKind.MICRO, LabelKind.TRANSFER, find_fork_consume, apply_fork_consume),
    Rule(FORK_OFFER, "fork-offer", StepKind.MICRO, LabelKind.TAU, find_fork_offer, apply_fork_offer),
    Rule(JOIN_INVOKE, "join-invoke", StepKind.MICRO, LabelKind.TRANSFER, find_join_invoke, apply_join_invoke),
    Rule(JOIN_ORDER_ADD, "join-order-add", StepKind.MACRO, LabelKind.TAU, find_join_order_add, apply_join_order_add),
    Rule(JOIN_ORDER_REMOVE, "join-order-remove", StepKind.MACRO, LabelKind.TAU, find_join_order_remove, apply_join_order_remove),
    Rule(JOIN_TERMINATE, "join-terminate", StepKind.MICRO, LabelKind.TAU, find_join_terminate, apply_join_terminate),
    Rule(MERGE_TRANSFER, "merge-transfer", StepKind.MICRO, LabelKind.TRANSFER, find_merge_transfer, apply_merge_transfer),
    Rule(DECISION_INVOKE, "decision-invoke", StepKind.MICRO, LabelKind.TRANSFER, find_decision_invoke, apply_decision_invoke),
    Rule(DECISION_TERMINATE, "decision-terminate", StepKind.MICRO, LabelKind.TAU, find_decision_terminate, apply_decision_terminate),
    Rule(DECISION_EVAL_INPUT, "decision-eval-input", StepKind.MICRO, LabelKind.TAU, find_decision_eval_input, apply_decision_route),
    Rule(DECISION_EVAL_DFLOW, "decision-eval-dflow", StepKind.MICRO, LabelKind.TAU, find_decision_eval_dflow, apply_decision_route),
    Rule(DECISION_EVAL_DBEHAVIOR, "decision-eval-dbehavior", StepKind.MICRO, LabelKind.TAU, find_decision_eval_dbehavior, apply_decision_route),
    Rule(DECISION_INVOKE_DBEHAVIOR, "decision-invoke-dbehavior", StepKind.MICRO, LabelKind.TAU, find_decision_invoke_dbehavior, apply_decision_invoke_dbehavior),
    Rule(DECISION_DBEHAVIOR_TERMINATE, "decision-dbehavior-terminate", StepKind.MACRO, LabelKind.TERMINATE, find_decision_dbehavior_terminate, apply_decision_dbehavior_terminate),
)
