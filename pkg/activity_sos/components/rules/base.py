# ============================ #
#   Rule Catalog Building Blocks
# ============================ #

"""
A rule is a finder (which bindings satisfy the premises in a state) and an
applier (the conclusion). Profiles transform catalogs by adding, replacing
or re-premising rules, never by editing them in place.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from activity_sos.components.instances import InstanceIndex, NodeInstance
from activity_sos.components.transfer import Assignment, fits, input_assignments
from activity_sos.entity.model_entity import Model, NodeKind
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    IDLE,
    NULL_TOKEN,
    ActivityPhase,
    ActivityStatus,
    ExecState,
    LabelKind,
    NodeStatus,
    Phase,
    RuleInstance,
    StateBuilder,
    StepKind,
    StepLabel,
    Tokens,
)


@dataclass
class RuleContext:
    """
    Everything a rule reads besides the state.

    Attributes:
        model (Model): static model.
        index (InstanceIndex): instance tables of the model.
        pins_only (bool): invocations consume only tokens already on their input pins.
        timing (dict): node id → execution time, None without the execution-time profile.
    """
    model: Model
    index: InstanceIndex
    pins_only: bool = False
    timing: Optional[Dict[str, int]] = None


Finder = Callable[[RuleContext, ExecState], Iterable[RuleInstance]]
Applier = Callable[[RuleContext, ExecState, RuleInstance], StateBuilder]
Premise = Callable[[RuleContext, ExecState, RuleInstance], bool]
Effect = Callable[[RuleContext, ExecState, RuleInstance, StateBuilder], None]


@dataclass(frozen=True)
class Rule:
    """
    One catalog entry.

    Attributes:
        id (str): catalog id ("A1", "R1", ...).
        name (str): short descriptive name.
        kind (StepKind): micro or macro (instances may override, e.g. exceptions reaching the root).
        label (LabelKind): kind of label its steps carry.
        find (Finder): bindings satisfying the rule's own premises.
        apply (Applier): the conclusion.
        premises (tuple): named extra premises conjoined by profiles.
        effects (tuple): named extra effects run after the conclusion.
    """
    id: str
    name: str
    kind: StepKind
    label: LabelKind
    find: Finder
    apply: Applier
    premises: Tuple[Tuple[str, Premise], ...] = field(default=())
    effects: Tuple[Tuple[str, Effect], ...] = field(default=())

    def with_premise(self, name: str, premise: Premise) -> "Rule":
        if any(existing == name for existing, _ in self.premises):
            return self
        return replace(self, premises=self.premises + ((name, premise),))

    def with_effect(self, name: str, effect: Effect) -> "Rule":
        if any(existing == name for existing, _ in self.effects):
            return self
        return replace(self, effects=self.effects + ((name, effect),))

    def instances(self, ctx: RuleContext, state: ExecState) -> List[RuleInstance]:
        return [
            inst
            for inst in self.find(ctx, state)
            if all(premise(ctx, state, inst) for _, premise in self.premises)
        ]

    def conclude(self, ctx: RuleContext, state: ExecState, inst: RuleInstance) -> ExecState:
        builder = self.apply(ctx, state, inst)
        for _, effect in self.effects:
            effect(ctx, state, inst, builder)
        return builder.build()


# ================================
# 🔧 Shared premises and effects
# ================================
def nodes_of(ctx: RuleContext, *kinds: NodeKind) -> Iterator[NodeInstance]:
    for key in sorted(ctx.index.nodes):
        instance = ctx.index.nodes[key]
        if instance.node.kind in kinds:
            yield instance


def in_running_activity(ctx: RuleContext, state: ExecState, instance: NodeInstance) -> bool:
    return state.activity(instance.activity_key).is_executing


def node_feeds(
    ctx: RuleContext, state: ExecState, instance: NodeInstance, pin_keys: Optional[Sequence[str]] = None, greedy: Sequence[str] = ()
) -> List[Assignment]:
    keys = instance.input_keys if pin_keys is None else pin_keys
    return input_assignments(state, ctx.index, keys, pins_only=ctx.pins_only, greedy=greedy)


def make(rule_id: str, subject: str, binding: Tuple, label: StepLabel, kind: StepKind) -> RuleInstance:
    return RuleInstance(rule_id=rule_id, subject=subject, binding=binding, label=label, kind=kind)


def control_outputs(ctx: RuleContext, state: ExecState, instance: NodeInstance) -> Optional[Dict[str, Tokens]]:
    """One ControlToken on every output pin, or None when a pin is full."""
    offers = {key: (CONTROL_TOKEN,) for key in instance.output_keys}
    if all(fits(state, ctx.index, k, v) for k, v in offers.items()):
        return offers
    return None


def reset_activity(ctx: RuleContext, builder: StateBuilder, activity_key: str, keep_outputs: bool = False) -> None:
    """
    Every node idle and every holder empty in the activation and in its
    synchronously called activations; nested activations become idle.
    Output APNs of the activation itself survive with `keep_outputs`.
    """
    index = ctx.index
    for current in index.sync_subtree(activity_key):
        for node_key in index.activity_nodes[current]:
            builder.set_node(node_key, IDLE)
            builder.stop_clock(node_key)
        for holder_key in index.activity_holders[current]:
            holder = index.holders[holder_key]
            if keep_outputs and current == activity_key and holder.is_apn and holder.holder.direction == "out":
                continue
            builder.set_tokens(holder_key, ())
        if current != activity_key:
            builder.set_activity(current, ActivityStatus())


def pending_after_start(ctx: RuleContext, activity_key: str, members: Sequence[str], occupied: Sequence[str]) -> Tuple[str, ...]:
    activity = ctx.index.activities[activity_key].activity
    pending = []
    for name in members:
        apn = activity.apn(name)
        if name in occupied or apn.exception or (apn.direction == "out" and apn.streaming):
            continue
        pending.append(name)
    return tuple(sorted(pending))


def start_activity(ctx: RuleContext, builder: StateBuilder, activity_key: str, members: Sequence[str], occupied: Sequence[str]) -> None:
    """Executing(P_s, P_n); InitialNodes and parameterless AcceptEventActions start."""
    builder.set_activity(
        activity_key,
        ActivityStatus(
            ActivityPhase.EXECUTING,
            parameter_set=tuple(sorted(members)),
            pending=pending_after_start(ctx, activity_key, members, occupied),
        ),
    )
    for node_key in ctx.index.activity_nodes[activity_key]:
        node = ctx.index.nodes[node_key].node
        if node.kind is NodeKind.INITIAL or (node.kind is NodeKind.ACCEPT_EVENT and not node.inputs):
            builder.set_node(node_key, NodeStatus(Phase.EXECUTING))


def call_outputs(ctx: RuleContext, state, call_key: str, callee_key: str) -> Optional[Dict[str, Tokens]]:
    """
    Tokens handed back to a calling node: each data output gets its APN's
    tokens or a Null token, control outputs a ControlToken. None when a
    pin cannot take them.
    """
    index = ctx.index
    caller = index.nodes[call_key]
    offers: Dict[str, Tokens] = {}
    params = {pin.name: apn for pin, apn in index.call_parameters(call_key)}
    for pin in caller.node.outputs:
        apn = params.get(pin.name)
        if apn is None:
            offers[caller.pin_key(pin.name)] = (CONTROL_TOKEN,)
        else:
            offers[caller.pin_key(pin.name)] = state.tokens(index.apn_key(callee_key, apn.name)) or (NULL_TOKEN,)
    if all(fits(state, index, k, v) for k, v in offers.items()):
        return offers
    return None


def activity_quiescent(ctx: RuleContext, state: ExecState, activity_key: str) -> bool:
    """Idle with every node idle and every holder empty, nested activations included."""
    index = ctx.index
    for current in index.sync_subtree(activity_key):
        if state.activity(current).phase is not ActivityPhase.IDLE:
            return False
        if any(state.node(k).is_running for k in index.activity_nodes[current]):
            return False
        if any(state.tokens(h) for h in index.activity_holders[current]):
            return False
    return True


def _persistent(node) -> bool:
    return node.kind is NodeKind.ACCEPT_EVENT and not node.inputs


def activity_finished(ctx: RuleContext, state: ExecState, activity_key: str) -> bool:
    """
    Executing with nothing pending, no node running and no token left
    outside the activation's own output APNs. Parameterless
    AcceptEventActions never block termination.
    """
    status = state.activity(activity_key)
    if not status.is_executing or status.pending:
        return False
    index = ctx.index
    for current in index.sync_subtree(activity_key):
        for node_key in index.activity_nodes[current]:
            if state.node(node_key).is_running and not _persistent(index.nodes[node_key].node):
                return False
        for holder_key in index.activity_holders[current]:
            holder = index.holders[holder_key]
            keeps = current == activity_key and holder.is_apn and holder.holder.direction == "out"
            if state.tokens(holder_key) and not keeps:
                return False
    return True
