import json

import pytest

from activity_sos.components.emitter import emit, load_structure, to_dot, to_json
from activity_sos.exception.exception import ActivitySemanticsException
from support import explored


@pytest.fixture
def structure():
    return explored("fork")


def test_json_layout(structure):
    data = json.loads(to_json(structure))
    assert list(data) == ["states", "transitions", "initial", "truncated", "meta"]
    assert [s["id"] for s in data["states"]] == list(range(12))
    assert set(data["states"][0]) == {"id", "fingerprint", "props"}
    assert data["transitions"][0].keys() == {"src", "label", "dst"}
    assert data["truncated"] is False


def test_json_is_byte_stable(structure):
    assert to_json(structure) == to_json(explored("fork"))


def test_dump_states_includes_canonical_state(structure):
    data = json.loads(to_json(structure, dump_states=True))
    initial = data["states"][data["initial"]]
    assert list(initial["state"]["nodes"]) == ["Init"]
    assert list(initial["state"]["activities"]) == ["@Main"]
    assert initial["state"]["holders"] == {}


def test_dot_output(structure):
    dot = to_dot(structure)
    assert dot.startswith("digraph kripke {")
    assert f"__start -> s{structure.initial};" in dot
    assert dot.count(" -> s") == len(structure.transitions) + 1
    assert '[label="t(Init)"]' in dot


def test_load_structure_reads_json_back(structure):
    loaded = load_structure(to_json(structure))
    assert [s.fingerprint for s in loaded.states] == [s.fingerprint for s in structure.states]
    assert loaded.transitions == structure.transitions
    assert loaded.initial == structure.initial
    assert all(s.state is None for s in loaded.states)
    assert to_json(loaded) == to_json(structure)


def test_unknown_format(structure):
    with pytest.raises(ActivitySemanticsException):
        emit(structure, "svg")


def test_garbage_input_is_an_engine_error():
    with pytest.raises(ActivitySemanticsException):
        load_structure("{not json")
