# ============================ #
#   Kripke Structure Emission
# ============================ #

"""
JSON and DOT renderings of explored structures, and loading the JSON
form back for conformance checks. Output is byte-stable for equal
structures.
"""
import json
import sys
from typing import Any, Dict

from activity_sos.constant.semantics import (
    FORMAT_DOT,
    FORMAT_JSON,
    KEY_DST,
    KEY_FINGERPRINT,
    KEY_ID,
    KEY_INITIAL,
    KEY_LABEL,
    KEY_META,
    KEY_PROPS,
    KEY_SRC,
    KEY_STATE,
    KEY_STATES,
    KEY_TRANSITIONS,
    KEY_TRUNCATED,
)
from activity_sos.entity.artifact_entity import KripkeState, KripkeStructure
from activity_sos.entity.state_entity import StepLabel
from activity_sos.exception.exception import ActivitySemanticsException
from activity_sos.utils.main_utils.utils import dump_json


def to_json_dict(structure: KripkeStructure, dump_states: bool = False) -> Dict[str, Any]:
    states = []
    for s in structure.states:
        entry: Dict[str, Any] = {KEY_ID: s.id, KEY_FINGERPRINT: s.fingerprint, KEY_PROPS: list(s.props)}
        if dump_states and s.state is not None:
            entry[KEY_STATE] = s.state.to_json()
        states.append(entry)
    return {
        KEY_STATES: states,
        KEY_TRANSITIONS: [{KEY_SRC: src, KEY_LABEL: str(label), KEY_DST: dst} for src, label, dst in structure.transitions],
        KEY_INITIAL: structure.initial,
        KEY_TRUNCATED: structure.truncated,
        KEY_META: dict(sorted(structure.meta.items())),
    }


def to_json(structure: KripkeStructure, dump_states: bool = False) -> str:
    return dump_json(to_json_dict(structure, dump_states))


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(structure: KripkeStructure) -> str:
    """One digraph; node label = state id and propositions, edge label = step label."""
    lines = ["digraph kripke {", "  node [shape=box];", "  __start [shape=point];", f"  __start -> s{structure.initial};"]
    for s in structure.states:
        label = "\\n".join([str(s.id)] + list(s.props))
        lines.append(f"  s{s.id} [label={_quote(label)}];")
    for src, step_label, dst in structure.transitions:
        lines.append(f"  s{src} -> s{dst} [label={_quote(str(step_label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit(structure: KripkeStructure, output_format: str = FORMAT_JSON, dump_states: bool = False) -> str:
    if output_format == FORMAT_DOT:
        return to_dot(structure)
    if output_format == FORMAT_JSON:
        return to_json(structure, dump_states)
    raise ActivitySemanticsException(f"unknown output format '{output_format}'", sys)


def load_structure(text: str) -> KripkeStructure:
    """Reads the JSON emission back; full states are not restored."""
    try:
        data = json.loads(text)
        states = [
            KripkeState(id=int(s[KEY_ID]), fingerprint=s[KEY_FINGERPRINT], props=list(s.get(KEY_PROPS, [])))
            for s in data[KEY_STATES]
        ]
        transitions = [
            (int(t[KEY_SRC]), StepLabel.parse(t[KEY_LABEL]), int(t[KEY_DST])) for t in data[KEY_TRANSITIONS]
        ]
        return KripkeStructure(
            states=states,
            initial=int(data[KEY_INITIAL]),
            transitions=transitions,
            truncated=bool(data.get(KEY_TRUNCATED, False)),
            meta=dict(data.get(KEY_META, {})),
        )
    except ActivitySemanticsException:
        raise
    except Exception as e:
        raise ActivitySemanticsException(e, sys)
