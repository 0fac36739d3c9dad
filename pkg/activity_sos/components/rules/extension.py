# ============================ #
#   Extension Rules
# ============================ #

"""
Rules and premises contributed by the extension profiles: discrete
execution time, the single-core restriction and the standalone edge
transfer used by the consumption variations.
"""
from activity_sos.components.rules.base import Rule, RuleContext, make
from activity_sos.components.transfer import move, transfer
from activity_sos.constant.semantics import CLOCK_TICK, DEFAULT_EXECUTION_TIME, EDGE_TRANSFER, EXECUTION_TIME
from activity_sos.entity.model_entity import Node, NodeKind
from activity_sos.entity.state_entity import (
    TAU,
    ExecState,
    LabelKind,
    NodeStatus,
    Phase,
    RuleInstance,
    StateBuilder,
    StepKind,
    exe_time,
    transfer_label,
)


# ================================
# 🔀 R1: standalone edge transfer
# ================================
def _edge_transfers(ctx: RuleContext, state: ExecState):
    index = ctx.index
    for edge in index.edges:
        target = index.holders[edge.target]
        if target.is_apn or target.holder.direction != "in" or index.is_switch_holder(edge.target):
            continue
        if not state.activity(edge.activity_key).is_executing:
            continue
        for choice in transfer(state, edge, index):
            yield make(EDGE_TRANSFER, edge.target, (choice,), transfer_label(choice.edge), StepKind.MICRO)


def find_edge_transfer(ctx: RuleContext, state: ExecState):
    return _edge_transfers(ctx, state)


def find_first_edge_transfer(ctx: RuleContext, state: ExecState):
    """Only the first enabled transfer in edge order: tokens move one flow at a time."""
    for inst in _edge_transfers(ctx, state):
        yield inst
        return


def apply_edge_transfer(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    (choice,) = inst.binding
    builder = StateBuilder.of(state)
    move(builder, ctx.index, choice.source, choice.target, choice.tokens)
    return builder


EDGE_TRANSFER_RULE = Rule(EDGE_TRANSFER, "edge-transfer", StepKind.MICRO, LabelKind.TRANSFER, find_edge_transfer, apply_edge_transfer)
SEQUENTIAL_EDGE_TRANSFER_RULE = Rule(
    EDGE_TRANSFER, "edge-transfer-sequential", StepKind.MICRO, LabelKind.TRANSFER, find_first_edge_transfer, apply_edge_transfer
)


# ================================
# ⏱️ EX / TK: execution time
# ================================
def duration(ctx: RuleContext, node: Node) -> int:
    if ctx.timing and node.id in ctx.timing:
        return ctx.timing[node.id]
    return node.execution_time if node.execution_time is not None else DEFAULT_EXECUTION_TIME


def start_clock(ctx: RuleContext, state: ExecState, inst: RuleInstance, builder: StateBuilder) -> None:
    """Effect added to action invocation: the node's clock starts at zero."""
    if builder.clocks is not None:
        builder.clocks[inst.subject] = 0


def _elapsed(ctx: RuleContext, state: ExecState):
    for key, time in state.clock_map.items():
        yield key, time, duration(ctx, ctx.index.nodes[key].node)


def find_execution_time(ctx: RuleContext, state: ExecState):
    if not state.clocks:
        return
    for key, time, limit in _elapsed(ctx, state):
        if time >= limit and state.node(key).phase is Phase.EXECUTING:
            yield make(EXECUTION_TIME, key, (), exe_time(key), StepKind.MACRO)


def apply_execution_time(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    builder = StateBuilder.of(state)
    builder.set_node(inst.subject, NodeStatus(Phase.READY, f_in=state.node(inst.subject).f_in))
    builder.stop_clock(inst.subject)
    return builder


def find_clock_tick(ctx: RuleContext, state: ExecState):
    if state.clocks and any(time < limit for _, time, limit in _elapsed(ctx, state)):
        yield make(CLOCK_TICK, "", (), TAU, StepKind.MICRO)


def apply_clock_tick(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> StateBuilder:
    """Every running clock advances by one unit, none past its node's duration."""
    builder = StateBuilder.of(state)
    for key, time, limit in _elapsed(ctx, state):
        builder.clocks[key] = min(time + 1, limit)
    return builder


EXECUTION_TIME_RULE = Rule(EXECUTION_TIME, "execution-time", StepKind.MACRO, LabelKind.EXE_TIME, find_execution_time, apply_execution_time)
CLOCK_TICK_RULE = Rule(CLOCK_TICK, "clock-tick", StepKind.MICRO, LabelKind.TAU, find_clock_tick, apply_clock_tick)


# ================================
# 🧵 Single core
# ================================
def _occupies_core(node: Node) -> bool:
    if node.is_switch or node.kind in (NodeKind.CALL_BEHAVIOR, NodeKind.INITIAL):
        return False
    return not (node.kind is NodeKind.ACCEPT_EVENT and not node.inputs)


def single_core(ctx: RuleContext, state: ExecState, inst: RuleInstance) -> bool:
    """No invocation while another node is executing."""
    for key, status in state.nodes:
        if key != inst.subject and status.is_running and _occupies_core(ctx.index.nodes[key].node):
            return False
    return True
