# ============================ #
#   Execution State Entities
# ============================ #

"""
Runtime values of the semantics: tokens, node and activity statuses,
the execution-state tuple ⟨S_n, S_a, S_th, S_Σ⟩ (plus clocks C when the
execution-time profile is active) and step labels.

ExecState is immutable. Only non-idle statuses and non-empty holders are
stored, sorted by key, so two equal states always have equal fields.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from activity_sos.constant.semantics import CONTROL_TYPE


# ================================
# 🪙 Tokens
# ================================
class TokenKind(str, Enum):
    CONTROL = "CT"
    NULL = "null"
    INT = "Int"
    BOOL = "Bool"
    STR = "Str"
    EVENT = "Event"


_KIND_ORDER = {kind: i for i, kind in enumerate(TokenKind)}


@dataclass(frozen=True)
class TokenValue:
    """
    One token. EVENT tokens carry the event name and a payload made of the
    token sequences consumed by the sending node, in pin order.
    """
    kind: TokenKind
    value: Any = None
    event: Optional[str] = None

    def to_json(self) -> Any:
        if self.kind is TokenKind.CONTROL:
            return "CT"
        if self.kind is TokenKind.NULL:
            return None
        if self.kind is TokenKind.EVENT:
            return {"event": self.event, "payload": [[t.to_json() for t in seq] for seq in self.value]}
        return {self.kind.value: self.value}

    @staticmethod
    def from_json(data: Any) -> "TokenValue":
        if data == "CT":
            return CONTROL_TOKEN
        if data is None:
            return NULL_TOKEN
        if "event" in data:
            payload = tuple(tuple(TokenValue.from_json(t) for t in seq) for seq in data["payload"])
            return TokenValue(TokenKind.EVENT, payload, data["event"])
        (kind, value), = data.items()
        return TokenValue(TokenKind(kind), value)

    def sort_key(self) -> Tuple[int, str]:
        return (_KIND_ORDER[self.kind], json.dumps(self.to_json(), sort_keys=True))

    def type_name(self) -> str:
        if self.kind is TokenKind.CONTROL:
            return CONTROL_TYPE
        if self.kind is TokenKind.EVENT:
            return self.event
        return self.kind.value

    def __str__(self) -> str:
        if self.kind is TokenKind.CONTROL:
            return "CT"
        if self.kind is TokenKind.NULL:
            return "null"
        if self.kind is TokenKind.EVENT:
            return f"<{self.event}>"
        return repr(self.value)


CONTROL_TOKEN = TokenValue(TokenKind.CONTROL)
NULL_TOKEN = TokenValue(TokenKind.NULL)

Tokens = Tuple[TokenValue, ...]


def int_token(value: int) -> TokenValue:
    return TokenValue(TokenKind.INT, int(value))


def bool_token(value: bool) -> TokenValue:
    return TokenValue(TokenKind.BOOL, bool(value))


def str_token(value: str) -> TokenValue:
    return TokenValue(TokenKind.STR, str(value))


def token_of(value: Any) -> TokenValue:
    """Literal document value → token. Booleans are checked before ints."""
    if isinstance(value, TokenValue):
        return value
    if value is None:
        return NULL_TOKEN
    if isinstance(value, bool):
        return bool_token(value)
    if isinstance(value, int):
        return int_token(value)
    if value == "CT":
        return CONTROL_TOKEN
    return str_token(value)


# ================================
# 🚦 Statuses
# ================================
class Phase(str, Enum):
    IDLE = "idle"
    EXECUTING = "executing"
    READY = "ready"


PinSequences = Tuple[Tuple[str, Tokens], ...]


@dataclass(frozen=True)
class NodeStatus:
    """
    Idle | IdleOrdered(order) | Executing(f_in) | Ready(f_in).

    Attributes:
        phase (Phase): idle, executing or ready (execution-time profile only).
        f_in (tuple): consumed token sequences per input pin.
        order (tuple): Join offering order P_order.
    """
    phase: Phase = Phase.IDLE
    f_in: PinSequences = ()
    order: Tuple[str, ...] = ()

    @property
    def is_idle(self) -> bool:
        return self.phase is Phase.IDLE

    @property
    def is_running(self) -> bool:
        return self.phase is not Phase.IDLE

    def inputs(self) -> Dict[str, Tokens]:
        return dict(self.f_in)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"phase": self.phase.value}
        if self.f_in:
            data["f_in"] = {pin: [t.to_json() for t in seq] for pin, seq in self.f_in}
        if self.order:
            data["order"] = list(self.order)
        return data


IDLE = NodeStatus()


class ActivityPhase(str, Enum):
    IDLE = "idle"
    EXECUTING = "executing"
    EXCEPTION = "exception"


@dataclass(frozen=True)
class ActivityStatus:
    """
    Idle | Executing(P_s, P_n) | Exception(v).

    Attributes:
        parameter_set (tuple): APN ids of the chosen parameter set P_s.
        pending (tuple): APN ids still to be set, P_n.
        exception (TokenValue): raised value v.
        exception_type (str): declared type of the exception APN that raised v.
    """
    phase: ActivityPhase = ActivityPhase.IDLE
    parameter_set: Tuple[str, ...] = ()
    pending: Tuple[str, ...] = ()
    exception: Optional[TokenValue] = None
    exception_type: Optional[str] = None

    @property
    def is_executing(self) -> bool:
        return self.phase is ActivityPhase.EXECUTING

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"phase": self.phase.value}
        if self.phase is ActivityPhase.EXECUTING:
            data["parameter_set"] = list(self.parameter_set)
            data["pending"] = list(self.pending)
        if self.phase is ActivityPhase.EXCEPTION:
            data["exception"] = self.exception.to_json() if self.exception else None
            data["exception_type"] = self.exception_type
        return data


ACTIVITY_IDLE = ActivityStatus()


# ================================
# 🧭 Execution State
# ================================
def _sorted_items(mapping: Mapping, keep) -> Tuple:
    return tuple(sorted((k, v) for k, v in mapping.items() if keep(v)))


@dataclass(frozen=True)
class ExecState:
    """
    Attributes:
        nodes (tuple): (node instance, NodeStatus) for every non-idle node.
        activities (tuple): (activity instance, ActivityStatus) for every non-idle activity.
        holders (tuple): (holder instance, tokens) for every non-empty holder.
        events (tuple): (pool id, sorted tokens) for every non-empty pool.
        clocks (tuple): (node instance, time) of running clocks, None without the timing profile.
    """
    nodes: Tuple[Tuple[str, NodeStatus], ...] = ()
    activities: Tuple[Tuple[str, ActivityStatus], ...] = ()
    holders: Tuple[Tuple[str, Tokens], ...] = ()
    events: Tuple[Tuple[str, Tokens], ...] = ()
    clocks: Optional[Tuple[Tuple[str, int], ...]] = None

    @staticmethod
    def build(
        nodes: Mapping[str, NodeStatus],
        activities: Mapping[str, ActivityStatus],
        holders: Mapping[str, Tokens],
        events: Mapping[str, Tokens],
        clocks: Optional[Mapping[str, int]] = None,
    ) -> "ExecState":
        return ExecState(
            nodes=_sorted_items(nodes, lambda s: s != IDLE),
            activities=_sorted_items(activities, lambda s: s != ACTIVITY_IDLE),
            holders=_sorted_items(holders, bool),
            events=tuple(
                sorted((pool, tuple(sorted(tokens, key=TokenValue.sort_key))) for pool, tokens in events.items() if tokens)
            ),
            clocks=None if clocks is None else tuple(sorted(clocks.items())),
        )

    # cached dict views; frozen dataclasses still allow cached_property
    @cached_property
    def node_map(self) -> Dict[str, NodeStatus]:
        return dict(self.nodes)

    @cached_property
    def activity_map(self) -> Dict[str, ActivityStatus]:
        return dict(self.activities)

    @cached_property
    def holder_map(self) -> Dict[str, Tokens]:
        return dict(self.holders)

    @cached_property
    def event_map(self) -> Dict[str, Tokens]:
        return dict(self.events)

    @cached_property
    def clock_map(self) -> Optional[Dict[str, int]]:
        return None if self.clocks is None else dict(self.clocks)

    def node(self, key: str) -> NodeStatus:
        return self.node_map.get(key, IDLE)

    def activity(self, key: str) -> ActivityStatus:
        return self.activity_map.get(key, ACTIVITY_IDLE)

    def tokens(self, key: str) -> Tokens:
        return self.holder_map.get(key, ())

    def pool(self, pool: str) -> Tokens:
        return self.event_map.get(pool, ())

    def to_json(self) -> Dict[str, Any]:
        """Canonical serialisation: fixed key order, sorted entries."""
        data: Dict[str, Any] = {
            "nodes": {k: s.to_json() for k, s in self.nodes},
            "activities": {k: s.to_json() for k, s in self.activities},
            "holders": {k: [t.to_json() for t in v] for k, v in self.holders},
            "events": {k: [t.to_json() for t in v] for k, v in self.events},
        }
        if self.clocks is not None:
            data["clocks"] = {k: v for k, v in self.clocks}
        return data


@dataclass
class StateBuilder:
    """Mutable working copy used while a rule conclusion is applied."""
    nodes: Dict[str, NodeStatus] = field(default_factory=dict)
    activities: Dict[str, ActivityStatus] = field(default_factory=dict)
    holders: Dict[str, Tokens] = field(default_factory=dict)
    events: Dict[str, Tokens] = field(default_factory=dict)
    clocks: Optional[Dict[str, int]] = None

    @staticmethod
    def of(state: ExecState) -> "StateBuilder":
        return StateBuilder(
            nodes=dict(state.node_map),
            activities=dict(state.activity_map),
            holders=dict(state.holder_map),
            events=dict(state.event_map),
            clocks=None if state.clocks is None else dict(state.clocks),
        )

    def node(self, key: str) -> NodeStatus:
        return self.nodes.get(key, IDLE)

    def activity(self, key: str) -> ActivityStatus:
        return self.activities.get(key, ACTIVITY_IDLE)

    def tokens(self, key: str) -> Tokens:
        return self.holders.get(key, ())

    def set_tokens(self, key: str, tokens: Iterable[TokenValue]) -> None:
        tokens = tuple(tokens)
        if tokens:
            self.holders[key] = tokens
        else:
            self.holders.pop(key, None)

    def set_node(self, key: str, status: NodeStatus) -> None:
        if status == IDLE:
            self.nodes.pop(key, None)
        else:
            self.nodes[key] = status

    def set_activity(self, key: str, status: ActivityStatus) -> None:
        if status == ACTIVITY_IDLE:
            self.activities.pop(key, None)
        else:
            self.activities[key] = status

    def stop_clock(self, key: str) -> None:
        if self.clocks is not None:
            self.clocks.pop(key, None)

    def build(self) -> ExecState:
        return ExecState.build(self.nodes, self.activities, self.holders, self.events, self.clocks)


# ================================
# 🏷️ Step Labels
# ================================
class LabelKind(str, Enum):
    INVOKE = "i"
    TERMINATE = "t"
    TAU = "tau"
    TRANSFER = "r"
    EXE_TIME = "exeTime"


class StepKind(str, Enum):
    MICRO = "micro"
    MACRO = "macro"


@dataclass(frozen=True, order=True)
class StepLabel:
    """i(n) | t(n) | τ | r(src-dst) | exeTime(n). Rendered as text in emitted structures."""
    kind: LabelKind
    subject: str = ""

    def __str__(self) -> str:
        if self.kind is LabelKind.TAU:
            return "tau"
        return f"{self.kind.value}({self.subject})"

    @staticmethod
    def parse(text: str) -> "StepLabel":
        if text == "tau":
            return TAU
        kind, rest = text.split("(", 1)
        return StepLabel(LabelKind(kind), rest[:-1])

    @property
    def is_hidden(self) -> bool:
        """τ and exeTime steps are internal under weak matching."""
        return self.kind in (LabelKind.TAU, LabelKind.EXE_TIME)


TAU = StepLabel(LabelKind.TAU)


def invoke(node_key: str) -> StepLabel:
    return StepLabel(LabelKind.INVOKE, node_key)


def terminate(node_key: str) -> StepLabel:
    return StepLabel(LabelKind.TERMINATE, node_key)


def transfer_label(*edge_ids: str) -> StepLabel:
    return StepLabel(LabelKind.TRANSFER, ";".join(edge_ids))


def exe_time(node_key: str) -> StepLabel:
    return StepLabel(LabelKind.EXE_TIME, node_key)


@dataclass(frozen=True)
class RuleInstance:
    """
    One applicable rule with every nondeterministic choice resolved.

    Attributes:
        rule_id (str): catalog id.
        subject (str): node or activity instance the rule fires on.
        binding (tuple): resolved choices (assignments, sizes, parameter set, payload).
        label (StepLabel): step label.
        kind (StepKind): micro or macro.
    """
    rule_id: str
    subject: str
    binding: Tuple
    label: StepLabel
    kind: StepKind


@dataclass(frozen=True)
class Step:
    label: StepLabel
    kind: StepKind
    next: ExecState
    rule_id: str = ""


@dataclass(frozen=True)
class MacroView:
    """Projection used for propositions: statuses, pools and non-switch holders."""
    nodes: Tuple[Tuple[str, NodeStatus], ...]
    activities: Tuple[Tuple[str, ActivityStatus], ...]
    holders: Tuple[Tuple[str, Tokens], ...]
    events: Tuple[Tuple[str, Tokens], ...]
