# ============================ #
#   Runtime Instance Index
# ============================ #

"""
Static enumeration of every node, holder and activity instance a model
can create at run time.

Each CallBehaviorAction (and each Decision with a decision behaviour)
owns exactly one activation of its callee, addressed by a call path:

    A                 node A of the root activity
    A.out             pin out of A
    Call1/B           node B inside the activity called by Call1
    Call1/x           APN x of that activity
    @Main             the root activity
    Call1@Sub         the activity Sub activated by Call1
"""
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from activity_sos.constant.semantics import ACTIVITY_SEPARATOR, MAX_CALL_DEPTH, PATH_SEPARATOR, PIN_SEPARATOR
from activity_sos.entity.model_entity import (
    Activity,
    ActivityParameterNode,
    Edge,
    Holder,
    Model,
    Node,
    NodeKind,
    Pin,
)
from activity_sos.exception.exception import ActivitySemanticsException, ExplorationLimitError
from activity_sos.logging.logger import logging


@dataclass(frozen=True)
class ActivityInstance:
    """
    Attributes:
        key (str): "<path>@<name>".
        activity (Activity): static activity.
        path (str): prefix of every key inside this activation ("" or "Call1/").
        caller (str): node instance key of the calling CallBehaviorAction or Decision, None for the root.
        synchronous (bool): the caller waits for termination.
        decision (bool): activated as a decision behaviour.
    """
    key: str
    activity: Activity
    path: str
    caller: Optional[str] = None
    synchronous: bool = True
    decision: bool = False


@dataclass(frozen=True)
class NodeInstance:
    key: str
    node: Node
    activity_key: str
    path: str

    def pin_key(self, name: str) -> str:
        return f"{self.key}{PIN_SEPARATOR}{name}"

    @property
    def input_keys(self) -> Tuple[str, ...]:
        return tuple(self.pin_key(p.name) for p in self.node.inputs)

    @property
    def output_keys(self) -> Tuple[str, ...]:
        return tuple(self.pin_key(p.name) for p in self.node.outputs)


@dataclass(frozen=True)
class HolderInstance:
    """A pin or APN inside one activation; `node_key` is None for APNs."""
    key: str
    holder: Holder
    activity_key: str
    node_key: Optional[str] = None

    @property
    def is_apn(self) -> bool:
        return self.node_key is None


@dataclass(frozen=True)
class EdgeInstance:
    """`routed` marks edges leaving a Decision output pin: the decision has already applied their guards."""
    edge: Edge
    source: str
    target: str
    activity_key: str
    routed: bool = False

    @property
    def id(self) -> str:
        return f"{self.source}-{self.target}"


@dataclass
class InstanceIndex:
    """
    Lookup tables over all instances of a model. Built once per model and
    shared read-only by the rules.
    """
    model: Model
    activities: Dict[str, ActivityInstance] = field(default_factory=dict)
    nodes: Dict[str, NodeInstance] = field(default_factory=dict)
    holders: Dict[str, HolderInstance] = field(default_factory=dict)
    edges: List[EdgeInstance] = field(default_factory=list)
    incoming: Dict[str, List[EdgeInstance]] = field(default_factory=dict)
    outgoing: Dict[str, List[EdgeInstance]] = field(default_factory=dict)
    callee: Dict[str, str] = field(default_factory=dict)
    children: Dict[str, List[str]] = field(default_factory=dict)
    activity_nodes: Dict[str, List[str]] = field(default_factory=dict)
    activity_holders: Dict[str, List[str]] = field(default_factory=dict)

    @staticmethod
    def build(model: Model) -> "InstanceIndex":
        try:
            index = InstanceIndex(model=model)
            index._add_activity(model.root_activity, "", None, True, False, 0)
            logging.info(
                f"Instance index: {len(index.activities)} activities, {len(index.nodes)} nodes, {len(index.holders)} holders"
            )
            return index
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def _add_activity(self, activity: Activity, path: str, caller: Optional[str], synchronous: bool, decision: bool, depth: int) -> str:
        if depth > MAX_CALL_DEPTH:
            raise ExplorationLimitError(f"call nesting deeper than {MAX_CALL_DEPTH} at '{path}'")
        key = f"{path.rstrip(PATH_SEPARATOR)}{ACTIVITY_SEPARATOR}{activity.name}"
        self.activities[key] = ActivityInstance(key, activity, path, caller, synchronous, decision)
        self.children[key] = []
        self.activity_nodes[key] = []
        self.activity_holders[key] = []

        for apn in activity.apns:
            self._add_holder(HolderInstance(f"{path}{apn.name}", apn, key))
        for node in activity.nodes:
            node_key = f"{path}{node.id}"
            self.nodes[node_key] = NodeInstance(node_key, node, key, path)
            self.activity_nodes[key].append(node_key)
            for pin in node.inputs + node.outputs:
                self._add_holder(HolderInstance(f"{node_key}{PIN_SEPARATOR}{pin.name}", pin, key, node_key))
        for edge in activity.edges:
            source = self.holders.get(f"{path}{edge.source}")
            owner = self.nodes.get(source.node_key) if source is not None and source.node_key else None
            routed = owner is not None and owner.node.kind is NodeKind.DECISION
            instance = EdgeInstance(edge, f"{path}{edge.source}", f"{path}{edge.target}", key, routed)
            self.edges.append(instance)
            self.outgoing.setdefault(instance.source, []).append(instance)
            self.incoming.setdefault(instance.target, []).append(instance)

        for node in activity.nodes:
            if node.kind is NodeKind.CALL_BEHAVIOR:
                callee, sync, via_decision = self.model.activity(node.behavior), node.synchronous, False
            elif node.kind is NodeKind.DECISION and node.d_behavior:
                callee, sync, via_decision = self.model.activity(node.d_behavior), True, True
            else:
                continue
            if callee is None:
                continue
            node_key = f"{path}{node.id}"
            child = self._add_activity(callee, f"{node_key}{PATH_SEPARATOR}", node_key, sync, via_decision, depth + 1)
            self.callee[node_key] = child
            self.children[key].append(child)
        return key

    def _add_holder(self, holder: HolderInstance) -> None:
        self.holders[holder.key] = holder
        self.activity_holders[holder.activity_key].append(holder.key)

    # ================================
    # 🔍 Lookups
    # ================================
    @property
    def root_key(self) -> str:
        return self.model.root_activity.root_key

    def holder(self, key: str) -> Holder:
        return self.holders[key].holder

    def apn_key(self, activity_key: str, apn_name: str) -> str:
        return f"{self.activities[activity_key].path}{apn_name}"

    def node_of(self, holder_key: str) -> Optional[NodeInstance]:
        owner = self.holders[holder_key].node_key
        return self.nodes[owner] if owner else None

    def is_switch_holder(self, holder_key: str) -> bool:
        owner = self.node_of(holder_key)
        return owner is not None and owner.node.is_switch

    def apns_of(self, activity_key: str) -> List[str]:
        return [h for h in self.activity_holders[activity_key] if self.holders[h].is_apn]

    def sync_subtree(self, activity_key: str) -> List[str]:
        """The activation and every activation reachable from it through synchronous calls."""
        found, stack = [], [activity_key]
        while stack:
            current = stack.pop()
            found.append(current)
            stack.extend(c for c in self.children[current] if self.activities[c].synchronous)
        return sorted(found)

    def call_parameters(self, node_key: str) -> Tuple[Tuple[Pin, ActivityParameterNode], ...]:
        """
        Positional pin ↔ APN correspondence of a call: data inputs with the
        callee's input APNs, data outputs with its non-exception output APNs.
        """
        node = self.nodes[node_key].node
        callee = self.activities[self.callee[node_key]].activity
        pairs = list(zip(node.data_inputs, callee.input_apns)) + list(zip(node.data_outputs, callee.output_apns))
        return tuple(pairs)
