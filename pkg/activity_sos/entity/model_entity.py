# ============================ #
#   Static Model Entities
# ============================ #

"""
Immutable description of an activity model: activities, nodes, pins,
activity parameter nodes, edges and behaviour bindings.

Values built here are shared read-only by the explorer workers.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

from activity_sos.constant.semantics import (
    ACTIVITY_SEPARATOR,
    CONTROL_TYPE,
    DEFAULT_EVENT_POOL,
    DEFAULT_LOWER,
    DEFAULT_UPPER,
    DEFAULT_UPPER_BOUND,
    DEFAULT_WEIGHT,
    PIN_SEPARATOR,
)

Bound = Union[int, float]


class OrderingDiscipline(str, Enum):
    FIFO = "FIFO"
    LIFO = "LIFO"
    UNORDERED = "unordered"


class NodeKind(str, Enum):
    ACTION = "Action"
    CALL_BEHAVIOR = "CallBehaviorAction"
    FORK = "Fork"
    JOIN = "Join"
    MERGE = "Merge"
    DECISION = "Decision"
    INITIAL = "InitialNode"
    FLOW_FINAL = "FlowFinalNode"
    ACTIVITY_FINAL = "ActivityFinalNode"
    ACCEPT_EVENT = "AcceptEventAction"
    SEND_SIGNAL = "SendSignalAction"


SWITCH_KINDS = frozenset({NodeKind.FORK, NodeKind.JOIN, NodeKind.MERGE, NodeKind.DECISION})


@dataclass(frozen=True)
class Guard:
    """
    Parsed edge guard.

    Attributes:
        text (str): source text as written in the document.
        expr (tuple): expression tree produced by the guard parser.
    """
    text: str
    expr: Tuple

    @property
    def is_else(self) -> bool:
        return self.expr == ("else",)


@dataclass(frozen=True)
class Pin:
    """
    Typed token holder attached to a node.

    Attributes:
        name (str): pin name, unique per node.
        owner (str): id of the owning node.
        direction (str): "in" or "out".
        value_type (str): type name (δ).
        upper_bound (Bound): holder capacity.
        upper (Bound): max tokens consumed per execution.
        lower (int): min tokens required per execution.
        ordering (OrderingDiscipline): storage order of arriving tokens.
        synthetic (bool): created by control-flow desugaring.
    """
    name: str
    owner: str
    direction: str
    value_type: str = CONTROL_TYPE
    upper_bound: Bound = DEFAULT_UPPER_BOUND
    upper: Bound = DEFAULT_UPPER
    lower: int = DEFAULT_LOWER
    ordering: OrderingDiscipline = OrderingDiscipline.FIFO
    synthetic: bool = False

    @property
    def key(self) -> str:
        return f"{self.owner}{PIN_SEPARATOR}{self.name}"

    @property
    def is_control(self) -> bool:
        return self.value_type == CONTROL_TYPE


@dataclass(frozen=True)
class ActivityParameterNode:
    """
    Token holder on an activity's interface.

    Attributes:
        name (str): APN id, unique among the activity's nodes and APNs.
        direction (str): "in" or "out".
        streaming (bool): may exchange tokens while the activity executes.
        exception (bool): output that raises the activity's exception.
    """
    name: str
    direction: str
    value_type: str = CONTROL_TYPE
    upper_bound: Bound = DEFAULT_UPPER_BOUND
    upper: Bound = DEFAULT_UPPER
    lower: int = DEFAULT_LOWER
    ordering: OrderingDiscipline = OrderingDiscipline.FIFO
    streaming: bool = False
    exception: bool = False

    @property
    def key(self) -> str:
        return self.name


Holder = Union[Pin, ActivityParameterNode]


@dataclass(frozen=True)
class Edge:
    """
    Object flow between two holders of the same activity.

    Attributes:
        source (str): holder key ("Node.pin" or APN id).
        target (str): holder key.
        guard (Guard): predicate every crossing token satisfies.
        weight (Bound): minimum number of tokens crossing together; UNBOUNDED means all.
        index (int): declaration position, used by sequential transfer.
    """
    source: str
    target: str
    guard: Guard
    weight: Bound = DEFAULT_WEIGHT
    index: int = 0

    @property
    def id(self) -> str:
        return f"{self.source}-{self.target}"


@dataclass(frozen=True)
class Node:
    """
    Activity node. Kind-specific attributes are None where they do not apply.

    Attributes:
        behavior (str): m_io key for Actions, callee activity for CallBehaviorActions.
        synchronous (bool): CallBehaviorAction waits for the callee.
        join_spec (Guard): boolean expression over input pin names (Join).
        d_flow (str): decision input pin name (Decision).
        d_behavior (str): decision behaviour activity (Decision).
        event (str): event name (AcceptEventAction, SendSignalAction).
        result (str): output pin receiving the event payload (AcceptEventAction).
        pool (str): event pool the node is bound to.
        execution_time (int): default timing for the execution-time profile.
    """
    id: str
    kind: NodeKind
    inputs: Tuple[Pin, ...] = ()
    outputs: Tuple[Pin, ...] = ()
    behavior: Optional[str] = None
    synchronous: bool = True
    join_spec: Optional[Guard] = None
    d_flow: Optional[str] = None
    d_behavior: Optional[str] = None
    event: Optional[str] = None
    result: Optional[str] = None
    pool: str = DEFAULT_EVENT_POOL
    execution_time: Optional[int] = None

    @property
    def is_switch(self) -> bool:
        return self.kind in SWITCH_KINDS

    def input(self, name: str) -> Optional[Pin]:
        return next((p for p in self.inputs if p.name == name), None)

    def output(self, name: str) -> Optional[Pin]:
        return next((p for p in self.outputs if p.name == name), None)

    @property
    def data_inputs(self) -> Tuple[Pin, ...]:
        return tuple(p for p in self.inputs if not p.synthetic)

    @property
    def data_outputs(self) -> Tuple[Pin, ...]:
        return tuple(p for p in self.outputs if not p.synthetic)


@dataclass(frozen=True)
class ParameterSet:
    name: str
    members: Tuple[str, ...]


@dataclass(frozen=True)
class HandlerBinding:
    """
    Exception handler declared in the activity that owns the protected call.

    Attributes:
        node (str): handler node id (single input pin receives the exception value).
        exception_type (str): type matched against the raised exception's type.
        protects (str): CallBehaviorAction id it is restricted to, None for any.
    """
    node: str
    exception_type: str
    protects: Optional[str] = None


@dataclass(frozen=True)
class Activity:
    """⟨N, E, APN, PS⟩ plus handler bindings."""
    name: str
    nodes: Tuple[Node, ...] = ()
    edges: Tuple[Edge, ...] = ()
    apns: Tuple[ActivityParameterNode, ...] = ()
    parameter_sets: Tuple[ParameterSet, ...] = ()
    handlers: Tuple[HandlerBinding, ...] = ()

    @property
    def root_key(self) -> str:
        return f"{ACTIVITY_SEPARATOR}{self.name}"

    def node(self, node_id: str) -> Optional[Node]:
        return next((n for n in self.nodes if n.id == node_id), None)

    def apn(self, name: str) -> Optional[ActivityParameterNode]:
        return next((a for a in self.apns if a.name == name), None)

    @property
    def input_apns(self) -> Tuple[ActivityParameterNode, ...]:
        return tuple(a for a in self.apns if a.direction == "in")

    @property
    def output_apns(self) -> Tuple[ActivityParameterNode, ...]:
        return tuple(a for a in self.apns if a.direction == "out" and not a.exception)

    def holder(self, key: str) -> Optional[Holder]:
        if PIN_SEPARATOR in key:
            owner, name = key.split(PIN_SEPARATOR, 1)
            node = self.node(owner)
            if node is None:
                return None
            return node.input(name) or node.output(name)
        return self.apn(key)


@dataclass(frozen=True)
class BehaviorBinding:
    """
    m_io for one key: a builtin name ("identity", "negate", "add", "const")
    or a table of rows mapping input pin sequences to output pin sequences.
    """
    key: str
    builtin: Optional[str] = None
    constant: Any = None
    rows: Tuple[Tuple[Tuple, Tuple], ...] = ()


@dataclass(frozen=True)
class Model:
    """
    M = ⟨A, Σ, D, P_Σ⟩ with the root activity and behaviour table.

    Attributes:
        activities (tuple): all activities, document order.
        event_names (tuple): Σ.
        data_types (dict): declared alias → base type.
        event_pools (tuple): P_Σ.
        root (str): root activity name.
        behaviors (dict): m_io bindings by key.
    """
    activities: Tuple[Activity, ...]
    event_names: Tuple[str, ...] = ()
    data_types: Dict[str, str] = field(default_factory=dict, hash=False, compare=True)
    event_pools: Tuple[str, ...] = (DEFAULT_EVENT_POOL,)
    root: str = ""
    behaviors: Dict[str, BehaviorBinding] = field(default_factory=dict, hash=False, compare=True)

    def activity(self, name: str) -> Optional[Activity]:
        return next((a for a in self.activities if a.name == name), None)

    @property
    def root_activity(self) -> Activity:
        return self.activity(self.root)
