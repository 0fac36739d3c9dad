# ============================ #
#   Model Document Parser
# ============================ #

"""
YAML model documents → Model, and back.

Parsing is purely syntactic: unknown keys, duplicate ids and unknown node
kinds are errors, dangling references are left for validation. Control
flows written between bare node ids are desugared into object flows
between synthetic ControlToken pins.
"""
import sys
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import yaml

from activity_sos.components.guard import parse_guard
from activity_sos.constant.semantics import (
    CONTROL_IN_PIN,
    CONTROL_OUT_PIN,
    CONTROL_TYPE,
    DEFAULT_PARAMETER_SET,
    FRESH_IN_PREFIX,
    FRESH_OUT_PREFIX,
    PIN_SEPARATOR,
    SCHEMA_FILE_PATH,
    UNBOUNDED,
    UNBOUNDED_TEXT,
)
from activity_sos.entity.model_entity import (
    Activity,
    ActivityParameterNode,
    BehaviorBinding,
    Edge,
    HandlerBinding,
    Model,
    Node,
    NodeKind,
    OrderingDiscipline,
    ParameterSet,
    Pin,
)
from activity_sos.entity.state_entity import TokenValue, token_of
from activity_sos.exception.exception import ActivitySemanticsException, ModelParseError
from activity_sos.logging.logger import logging
from activity_sos.utils.main_utils.utils import read_text_file, read_yaml_file

_LINE_KEY = "__line__"


class _LineLoader(yaml.SafeLoader):
    """SafeLoader that remembers the source line of every mapping."""

    def construct_mapping(self, node, deep=False):
        mapping = super().construct_mapping(node, deep=deep)
        mapping[_LINE_KEY] = node.start_mark.line + 1
        return mapping


@lru_cache(maxsize=1)
def load_schema() -> Dict[str, Any]:
    return read_yaml_file(SCHEMA_FILE_PATH)


# ================================
# 🔧 Small helpers
# ================================
def _line(entry: Any) -> Optional[int]:
    return entry.get(_LINE_KEY) if isinstance(entry, dict) else None


def _check_keys(entry: Any, allowed: List[str], what: str) -> Dict[str, Any]:
    if not isinstance(entry, dict):
        raise ModelParseError(f"{what} must be a mapping, got {entry!r}")
    unknown = sorted(k for k in entry if k != _LINE_KEY and k not in allowed)
    if unknown:
        raise ModelParseError(f"unknown key(s) {unknown} in {what}", line=_line(entry), column=1)
    return entry


def _bound(value: Any) -> Any:
    if value == UNBOUNDED_TEXT or value is None:
        return UNBOUNDED
    return int(value)


def _bound_text(value: Any) -> Any:
    return UNBOUNDED_TEXT if value == UNBOUNDED else int(value)


def _require_id(value: Any, entry: Dict[str, Any], what: str) -> str:
    if not isinstance(value, str) or not value:
        raise ModelParseError(f"{what} needs a non-empty name", line=_line(entry), column=1)
    if PIN_SEPARATOR in value or "/" in value:
        raise ModelParseError(f"{what} id '{value}' may not contain '.' or '/'", line=_line(entry), column=1)
    return value


# ================================
# 📌 Pins, APNs, nodes
# ================================
def _parse_pin(entry: Any, owner: str, direction: str, schema: Dict[str, Any]) -> Pin:
    defaults = schema["defaults"]["pin"]
    if isinstance(entry, str):
        entry = {"name": entry}
    entry = _check_keys(entry, schema["pin_keys"], f"pin of node '{owner}'")
    value_type = str(entry.get("type", defaults["type"]))
    return Pin(
        name=_require_id(entry.get("name"), entry, "pin"),
        owner=owner,
        direction=direction,
        value_type=value_type,
        upper_bound=_bound(entry.get("upper_bound", defaults["upper_bound"])),
        upper=_bound(entry.get("upper", defaults["upper"])),
        lower=int(entry.get("lower", defaults["lower"])),
        ordering=OrderingDiscipline(entry.get("ordering", defaults["ordering"])),
        # declared control pins behave like desugared ones
        synthetic=value_type == CONTROL_TYPE,
    )


def _parse_apn(entry: Any, activity: str, schema: Dict[str, Any]) -> ActivityParameterNode:
    defaults = schema["defaults"]["apn"]
    entry = _check_keys(entry, schema["apn_keys"], f"APN of activity '{activity}'")
    exception = bool(entry.get("exception", defaults["exception"]))
    direction = entry.get("direction", "out" if exception else "in")
    if direction not in ("in", "out"):
        raise ModelParseError(f"APN direction must be 'in' or 'out', got {direction!r}", line=_line(entry), column=1)
    return ActivityParameterNode(
        name=_require_id(entry.get("name"), entry, "APN"),
        direction=direction,
        value_type=str(entry.get("type", defaults["type"])),
        upper_bound=_bound(entry.get("upper_bound", defaults["upper_bound"])),
        upper=_bound(entry.get("upper", defaults["upper"])),
        lower=int(entry.get("lower", defaults["lower"])),
        ordering=OrderingDiscipline(entry.get("ordering", defaults["ordering"])),
        streaming=bool(entry.get("streaming", defaults["streaming"])),
        exception=exception,
    )


def _parse_node(entry: Any, activity: str, schema: Dict[str, Any]) -> Dict[str, Any]:
    if not isinstance(entry, dict):
        raise ModelParseError(f"node of activity '{activity}' must be a mapping")
    kind_text = entry.get("kind")
    if kind_text not in schema["node_kinds"]:
        raise ModelParseError(f"unknown node kind {kind_text!r}", line=_line(entry), column=1)
    allowed = list(schema["node_keys"]["common"]) + list(schema["node_keys"].get(kind_text, []))
    entry = _check_keys(entry, allowed, f"{kind_text} node")
    node_id = _require_id(entry.get("id"), entry, "node")
    join_spec = entry.get("join_spec")
    return {
        "id": node_id,
        "kind": NodeKind(kind_text),
        "inputs": [_parse_pin(p, node_id, "in", schema) for p in entry.get("inputs") or []],
        "outputs": [_parse_pin(p, node_id, "out", schema) for p in entry.get("outputs") or []],
        "explicit_inputs": "inputs" in entry,
        "explicit_outputs": "outputs" in entry,
        "behavior": entry.get("behavior"),
        "synchronous": bool(entry.get("synchronous", True)),
        "join_spec": parse_guard(join_spec) if join_spec is not None else None,
        "d_flow": entry.get("d_flow"),
        "d_behavior": entry.get("d_behavior"),
        "event": entry.get("event"),
        "result": entry.get("result"),
        "pool": entry.get("pool"),
        "execution_time": int(entry["execution_time"]) if entry.get("execution_time") is not None else None,
        "line": _line(entry),
    }


def _fresh_name(node: Dict[str, Any], side: str, base: str) -> str:
    taken = {p.name for p in node[side]}
    name, suffix = base, 2
    while name in taken:
        name, suffix = f"{base}_{suffix}", suffix + 1
    return name


def _control_pin(node: Dict[str, Any], side: str, name: str) -> Pin:
    direction = "in" if side == "inputs" else "out"
    return Pin(name=name, owner=node["id"], direction=direction, value_type=CONTROL_TYPE, upper=1, lower=1, synthetic=True)


def _desugar_endpoint(endpoint: str, other: str, side: str, nodes: Dict[str, Dict[str, Any]]) -> str:
    """Bare node id → key of a (possibly new) synthetic control pin."""
    node = nodes[endpoint]
    other_node = other.split(PIN_SEPARATOR, 1)[0]
    fresh_kinds = (NodeKind.FORK, NodeKind.DECISION) if side == "outputs" else (NodeKind.JOIN, NodeKind.MERGE)
    if node["kind"] in fresh_kinds:
        prefix = FRESH_OUT_PREFIX if side == "outputs" else FRESH_IN_PREFIX
        name = _fresh_name(node, side, f"{prefix}{other_node}")
        node[side].append(_control_pin(node, side, name))
        return f"{endpoint}{PIN_SEPARATOR}{name}"
    shared = CONTROL_OUT_PIN if side == "outputs" else CONTROL_IN_PIN
    if not any(p.name == shared for p in node[side]):
        node[side].append(_control_pin(node, side, shared))
    return f"{endpoint}{PIN_SEPARATOR}{shared}"


def _mirror_call_pins(node: Dict[str, Any], callee: Optional[Dict[str, Any]]) -> None:
    """CallBehaviorAction pins left out of the document mirror the callee's APNs."""
    if callee is None:
        return
    if not node["explicit_inputs"]:
        node["inputs"] = [
            Pin(a.name, node["id"], "in", a.value_type, a.upper_bound, a.upper, a.lower, a.ordering)
            for a in callee["apns"]
            if a.direction == "in"
        ]
    if not node["explicit_outputs"]:
        node["outputs"] = [
            Pin(a.name, node["id"], "out", a.value_type, a.upper_bound, a.upper, 0, a.ordering)
            for a in callee["apns"]
            if a.direction == "out" and not a.exception
        ]


def _parse_activity_header(entry: Any, schema: Dict[str, Any]) -> Dict[str, Any]:
    entry = _check_keys(entry, schema["activity_keys"], "activity")
    name = _require_id(entry.get("name"), entry, "activity")
    nodes: Dict[str, Dict[str, Any]] = {}
    for raw in entry.get("nodes") or []:
        node = _parse_node(raw, name, schema)
        if node["id"] in nodes:
            raise ModelParseError(f"duplicate node id '{node['id']}' in activity '{name}'", line=node["line"], column=1)
        nodes[node["id"]] = node
    apns: List[ActivityParameterNode] = []
    for raw in entry.get("apns") or []:
        apn = _parse_apn(raw, name, schema)
        if apn.name in nodes or any(a.name == apn.name for a in apns):
            raise ModelParseError(f"duplicate id '{apn.name}' in activity '{name}'", line=_line(raw), column=1)
        apns.append(apn)
    return {"name": name, "entry": entry, "nodes": nodes, "apns": apns}


def _finish_activity(raw: Dict[str, Any], headers: Dict[str, Dict[str, Any]], schema: Dict[str, Any]) -> Activity:
    name, entry, nodes, apns = raw["name"], raw["entry"], raw["nodes"], raw["apns"]
    apn_names = {a.name for a in apns}

    for node in nodes.values():
        if node["kind"] is NodeKind.CALL_BEHAVIOR:
            _mirror_call_pins(node, headers.get(node["behavior"]))

    edges: List[Edge] = []
    defaults = schema["defaults"]["edge"]
    for index, edge_entry in enumerate(entry.get("edges") or []):
        edge_entry = _check_keys(edge_entry, schema["edge_keys"], f"edge of activity '{name}'")
        source, target = str(edge_entry.get("source", "")), str(edge_entry.get("target", ""))
        if not source or not target:
            raise ModelParseError("edge needs a source and a target", line=_line(edge_entry), column=1)
        if source in nodes and source not in apn_names:
            source = _desugar_endpoint(source, target, "outputs", nodes)
        if target in nodes and target not in apn_names:
            target = _desugar_endpoint(target, source, "inputs", nodes)
        edges.append(
            Edge(
                source=source,
                target=target,
                guard=parse_guard(edge_entry.get("guard", defaults["guard"])),
                weight=_bound(edge_entry.get("weight", defaults["weight"])),
                index=index,
            )
        )

    parameter_sets: List[ParameterSet] = []
    for ps_entry in entry.get("parameter_sets") or []:
        if isinstance(ps_entry, list):
            ps_entry = {"name": f"ps{len(parameter_sets)}", "members": ps_entry}
        ps_entry = _check_keys(ps_entry, schema["parameter_set_keys"], f"parameter set of activity '{name}'")
        parameter_sets.append(
            ParameterSet(str(ps_entry.get("name", f"ps{len(parameter_sets)}")), tuple(ps_entry.get("members") or ()))
        )
    if not parameter_sets and apns:
        parameter_sets.append(ParameterSet(DEFAULT_PARAMETER_SET, tuple(a.name for a in apns)))
    covered = {m for ps in parameter_sets for m in ps.members}
    for apn in apns:
        if apn.name not in covered:
            parameter_sets.append(ParameterSet(apn.name, (apn.name,)))

    handlers = []
    for h_entry in entry.get("handlers") or []:
        h_entry = _check_keys(h_entry, schema["handler_keys"], f"handler of activity '{name}'")
        handlers.append(HandlerBinding(str(h_entry["node"]), str(h_entry["exception_type"]), h_entry.get("protects")))

    built_nodes = []
    for node in nodes.values():
        kwargs = {k: node[k] for k in ("behavior", "synchronous", "join_spec", "d_flow", "d_behavior", "event", "result", "execution_time")}
        if node["pool"] is not None:
            kwargs["pool"] = node["pool"]
        built_nodes.append(Node(id=node["id"], kind=node["kind"], inputs=tuple(node["inputs"]), outputs=tuple(node["outputs"]), **kwargs))

    return Activity(
        name=name,
        nodes=tuple(built_nodes),
        edges=tuple(edges),
        apns=tuple(apns),
        parameter_sets=tuple(parameter_sets),
        handlers=tuple(handlers),
    )


# ================================
# 🎛️ Behaviours
# ================================
def _literal(text: str) -> TokenValue:
    return token_of(yaml.safe_load(text) if text != "" else "")


def _parse_behavior(key: str, entry: Any, schema: Dict[str, Any]) -> BehaviorBinding:
    if isinstance(entry, str):
        head, _, rest = entry.partition(":")
        if head not in schema["builtin_behaviors"]:
            raise ModelParseError(f"unknown builtin behaviour '{entry}' for '{key}'")
        if head == "const":
            return BehaviorBinding(key=key, builtin="const", constant=_literal(rest.strip()))
        return BehaviorBinding(key=key, builtin=head)
    if isinstance(entry, dict) and "rows" in entry:
        rows = []
        for row in entry["rows"] or []:
            ins = tuple(sorted((pin, tuple(token_of(v) for v in values)) for pin, values in (row.get("in") or {}).items() if pin != _LINE_KEY))
            outs = tuple(sorted((pin, tuple(token_of(v) for v in values)) for pin, values in (row.get("out") or {}).items() if pin != _LINE_KEY))
            rows.append((ins, outs))
        return BehaviorBinding(key=key, rows=tuple(rows))
    raise ModelParseError(f"behaviour '{key}' must be a builtin name or a rows table", line=_line(entry), column=1)


# ================================
# 🚀 Entry points
# ================================
def parse_model(text: str) -> Model:
    """
    Parses a model document.

    Raises:
        ModelParseError: on YAML syntax errors (with line/column), unknown keys
        or kinds, and duplicate identifiers.
    """
    try:
        schema = load_schema()
        try:
            document = yaml.load(text, Loader=_LineLoader)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            raise ModelParseError(f"syntax error: {e.problem}", line=mark.line + 1 if mark else None, column=mark.column + 1 if mark else None)
        document = _check_keys(document, schema["top_level_keys"], "model document")

        headers: Dict[str, Dict[str, Any]] = {}
        for entry in document.get("activities") or []:
            header = _parse_activity_header(entry, schema)
            if header["name"] in headers:
                raise ModelParseError(f"duplicate activity '{header['name']}'", line=_line(entry), column=1)
            headers[header["name"]] = header
        if not headers:
            raise ModelParseError("model document declares no activity")
        activities = tuple(_finish_activity(h, headers, schema) for h in headers.values())

        datatypes = document.get("datatypes") or {}
        if isinstance(datatypes, list):
            datatypes = {str(name): "Any" for name in datatypes}
        datatypes = {str(k): str(v) for k, v in datatypes.items() if k != _LINE_KEY}

        behaviors = {
            str(key): _parse_behavior(str(key), value, schema)
            for key, value in (document.get("behaviors") or {}).items()
            if key != _LINE_KEY
        }

        model = Model(
            activities=activities,
            event_names=tuple(str(e) for e in document.get("events") or ()),
            data_types=datatypes,
            event_pools=tuple(str(p) for p in document.get("event_pools") or ("default",)),
            root=str(document.get("root") or activities[0].name),
            behaviors=behaviors,
        )
        logging.info(f"Parsed model with {len(activities)} activities, root '{model.root}'")
        return model
    except ActivitySemanticsException:
        raise
    except Exception as e:
        raise ModelParseError(str(e)) from e


def load_model(file_path: str) -> Model:
    return parse_model(read_text_file(file_path))


# ================================
# 📝 Emission (parse ∘ emit round trip)
# ================================
def _pin_doc(pin) -> Dict[str, Any]:
    return {
        "name": pin.name,
        "type": pin.value_type,
        "upper_bound": _bound_text(pin.upper_bound),
        "upper": _bound_text(pin.upper),
        "lower": pin.lower,
        "ordering": pin.ordering.value,
    }


def _token_doc(token: TokenValue) -> Any:
    data = token.to_json()
    if isinstance(data, dict) and len(data) == 1 and "event" not in data:
        return next(iter(data.values()))
    return data


def emit_model(model: Model) -> str:
    """Serialises a model; synthetic pins are written explicitly so nothing is desugared twice."""
    try:
        activities = []
        for activity in model.activities:
            nodes = []
            for node in activity.nodes:
                doc: Dict[str, Any] = {
                    "id": node.id,
                    "kind": node.kind.value,
                    "inputs": [_pin_doc(p) for p in node.inputs],
                    "outputs": [_pin_doc(p) for p in node.outputs],
                }
                optional: Tuple[Tuple[str, Any], ...] = (
                    ("behavior", node.behavior),
                    ("join_spec", node.join_spec.text if node.join_spec else None),
                    ("d_flow", node.d_flow),
                    ("d_behavior", node.d_behavior),
                    ("event", node.event),
                    ("result", node.result),
                    ("execution_time", node.execution_time),
                )
                doc.update({k: v for k, v in optional if v is not None})
                if node.kind is NodeKind.CALL_BEHAVIOR:
                    doc["synchronous"] = node.synchronous
                if node.kind in (NodeKind.ACCEPT_EVENT, NodeKind.SEND_SIGNAL):
                    doc["pool"] = node.pool
                nodes.append(doc)
            activities.append(
                {
                    "name": activity.name,
                    "nodes": nodes,
                    "edges": [
                        {"source": e.source, "target": e.target, "guard": e.guard.text, "weight": _bound_text(e.weight)}
                        for e in activity.edges
                    ],
                    "apns": [
                        {
                            **_pin_doc(a),
                            "direction": a.direction,
                            "streaming": a.streaming,
                            "exception": a.exception,
                        }
                        for a in activity.apns
                    ],
                    "parameter_sets": [{"name": ps.name, "members": list(ps.members)} for ps in activity.parameter_sets],
                    "handlers": [
                        {"node": h.node, "exception_type": h.exception_type, **({"protects": h.protects} if h.protects else {})}
                        for h in activity.handlers
                    ],
                }
            )
        behaviors: Dict[str, Any] = {}
        for key, binding in model.behaviors.items():
            if binding.builtin == "const":
                behaviors[key] = f"const:{yaml.safe_dump(_token_doc(binding.constant)).strip().removesuffix('...').strip()}"
            elif binding.builtin:
                behaviors[key] = binding.builtin
            else:
                behaviors[key] = {
                    "rows": [
                        {
                            "in": {pin: [_token_doc(t) for t in seq] for pin, seq in ins},
                            "out": {pin: [_token_doc(t) for t in seq] for pin, seq in outs},
                        }
                        for ins, outs in binding.rows
                    ]
                }
        document = {
            "events": list(model.event_names),
            "datatypes": dict(model.data_types),
            "event_pools": list(model.event_pools),
            "root": model.root,
            "activities": activities,
            "behaviors": behaviors,
        }
        return yaml.safe_dump(document, sort_keys=False, allow_unicode=True)
    except Exception as e:
        raise ActivitySemanticsException(e, sys)
