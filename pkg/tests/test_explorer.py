import os

import pytest

from activity_sos.components.explorer import (
    DEADLOCK,
    EXCEPTION,
    TERMINATED,
    UNEXPLORED,
    Explorer,
    Simulator,
    collapse_tau_loops,
    explore,
    random_trace,
    terminal_partition,
    terminal_states,
    visibility_violations,
)
from activity_sos.components.instances import InstanceIndex
from activity_sos.components.model_parser import parse_model
from activity_sos.components.profiles import parse_profile_spec
from activity_sos.entity.config_entity import AnalysisPipelineConfig, ExploreLimits, ExplorerConfig, SimulationConfig
from activity_sos.entity.model_entity import NodeKind
from activity_sos.entity.state_entity import TAU, LabelKind, Phase
from activity_sos.exception.exception import ActivitySemanticsException
from activity_sos.utils.main_utils.utils import load_object
from corpus import random_models
from oracle import NaiveEnumerator
from support import explored, label_texts, linear_labels, model_path

REFERENCE = parse_profile_spec("reference")


# ---- small fixtures with known graphs ----
def test_fork_reduced():
    structure = explored("fork")
    assert (len(structure.states), len(structure.transitions)) == (12, 15)
    assert {label.kind for label in structure.labels()} == {LabelKind.INVOKE, LabelKind.TERMINATE}
    assert not structure.truncated
    assert structure.meta == {"root": "Main", "profile": "reference", "mode": "reduced"}
    (final,) = terminal_states(structure)
    assert TERMINATED in structure.states[final].props


def test_fork_complete():
    structure = explored("fork", mode="complete")
    assert (len(structure.states), len(structure.transitions)) == (14, 17)
    assert {"r(A.ctl_out-Fork.ctl_in)", "tau"} <= label_texts(structure)


def test_initial_props_name_idle_and_executing_nodes():
    structure = explored("fork")
    props = structure.states[structure.initial].props
    assert "executing(Init)" in props
    assert {"idle(A)", "idle(B)", "idle(C)"} <= set(props)
    assert not any("Fork" in p for p in props)


@pytest.mark.parametrize("profile, terminals", [("reference", 2), ("var1", 1), ("var2", 3)])
def test_compete_terminal_states(profile, terminals):
    assert len(terminal_states(explored("compete", profile))) == terminals


def test_var1_never_lets_c_run():
    assert "i(C)" not in label_texts(explored("compete", "var1"))
    assert "i(C)" in label_texts(explored("compete", "reference"))


def test_execution_time_reduced_and_complete():
    assert linear_labels(explored("timing", "exec-time")) == ["t(init)", "i(A)", "exeTime(A)", "t(A)"]
    complete = explored("timing", "exec-time", mode="complete")
    assert linear_labels(complete) == ["t(init)", "i(A)", "tau", "tau", "exeTime(A)", "t(A)"]


def test_timing_table_overrides_model_durations():
    labels = linear_labels(explored("timing", "reference", mode="complete", timing={"A": 0}))
    assert labels == ["t(init)", "i(A)", "exeTime(A)", "t(A)"]


@pytest.mark.parametrize("name, timing", [("timing", None), ("fork", {"A": 1, "B": 2, "C": 1})])
def test_clocks_run_only_on_executing_nodes(name, timing):
    structure = explored(name, "exec-time", mode="complete", timing=timing)
    assert any(s.state.clock_map for s in structure.states)
    for s in structure.states:
        executing = {k for k, status in s.state.nodes if status.phase is Phase.EXECUTING}
        assert set(s.state.clock_map) <= executing


def _running(state):
    return [k for k, status in state.nodes if status.is_running]


@pytest.mark.parametrize("name", ["fork", "compete"])
def test_single_core_runs_one_node_at_a_time(name):
    single = explored(name, "single-core")
    reference = explored(name)
    assert all(len(_running(s.state)) <= 1 for s in single.states)
    assert any(len(_running(s.state)) > 1 for s in reference.states)
    assert {s.fingerprint for s in single.states} <= {s.fingerprint for s in reference.states}


def test_synchronous_call_runs_callee_in_place():
    structure = explored("calls")
    assert linear_labels(structure) == [
        "t(init)", "i(Src)", "t(Src)", "i(Call)", "tau", "i(Call/Neg)", "t(Call/Neg)",
        "t(Call)", "i(Sink)", "t(Sink)", "i(final)",
    ]
    assert len(structure.states) == 12
    (final,) = terminal_states(structure)
    assert TERMINATED in structure.states[final].props


def test_handled_exception_recovers():
    structure = explored("exceptions")
    parts = terminal_partition(structure)
    assert parts[TERMINATED] and not parts[EXCEPTION]
    assert {"i(Recover)", "t(Recover)", "i(Done)"} <= label_texts(structure)


def test_uncaught_exception_reaches_root():
    structure = explored("uncaught")
    parts = terminal_partition(structure)
    assert parts[EXCEPTION]
    assert all(f"{EXCEPTION}(@Main)" in structure.states[i].props for i in parts[EXCEPTION])


def test_signal_and_persistent_listener():
    structure = explored("events")
    parts = terminal_partition(structure)
    assert len(parts[TERMINATED]) == 1 and len(parts[DEADLOCK]) == 1
    assert {"t(Monitor)", "t(Wait)"} <= label_texts(structure)


def test_decision_routes_each_value_in_turn():
    structure = explored("decision")
    assert (len(structure.states), len(structure.transitions)) == (10, 11)
    assert label_texts(structure) == {"t(init)", "i(Source)", "t(Source)", "i(Small)", "t(Small)", "i(Big)", "t(Big)"}
    # 2 leaves Source first, so Small is always invoked before Big
    (after_source,) = [dst for _, label, dst in structure.transitions if str(label) == "t(Source)"]
    assert [str(label) for label, _ in structure.adjacency()[after_source]] == ["i(Small)"]
    (final,) = terminal_states(structure)
    assert TERMINATED in structure.states[final].props


@pytest.mark.parametrize("value, branch", [("5", "B"), ("1", "C")])
def test_decision_input_flow_picks_the_branch(value, branch):
    with open(model_path("decision_flow")) as f:
        model = parse_model(f.read().replace("const:5", f"const:{value}"))
    structure = explore(model, REFERENCE)
    assert linear_labels(structure) == ["t(init)", "i(A)", "t(A)", f"i({branch})", f"t({branch})"]


@pytest.mark.parametrize("value, branch", [("5", "B"), ("-2", "C")])
def test_decision_behavior_result_picks_the_branch(value, branch):
    with open(model_path("decision_behavior")) as f:
        model = parse_model(f.read().replace("const:5", f"const:{value}"))
    structure = explore(model, REFERENCE)
    assert linear_labels(structure) == [
        "t(init)", "i(A)", "t(A)", "tau", "i(Route/Neg)", "t(Route/Neg)",
        "t(Route)", f"i({branch})", f"t({branch})",
    ]
    (final,) = terminal_states(structure)
    assert TERMINATED in structure.states[final].props


# ---- exploration mechanics ----
def test_parallel_exploration_matches_sequential():
    sequential = explored("compete", "var2")
    parallel = explored("compete", "var2", jobs=2)
    assert [s.fingerprint for s in parallel.states] == [s.fingerprint for s in sequential.states]
    assert [(a, str(l), b) for a, l, b in parallel.transitions] == [(a, str(l), b) for a, l, b in sequential.transitions]


def test_truncation_is_flagged(compete):
    structure = explore(compete, REFERENCE, ExploreLimits(max_states=5))
    assert structure.truncated
    assert len(structure.states) == 5
    cut_off = [s for s in structure.states if UNEXPLORED in s.props]
    assert cut_off
    assert not any(TERMINATED in s.props or DEADLOCK in s.props for s in cut_off)
    assert terminal_partition(structure) == {TERMINATED: [], DEADLOCK: [], EXCEPTION: []}
    assert terminal_states(structure) == []


def test_unknown_mode(fork):
    with pytest.raises(ActivitySemanticsException):
        explore(fork, REFERENCE, mode="partial")


def test_random_trace_is_seeded(compete):
    first = random_trace(compete, REFERENCE, seed=7)
    again = random_trace(compete, REFERENCE, seed=7)
    assert [str(l) for l in first.labels] == [str(l) for l in again.labels]
    assert first.terminal
    assert str(first.labels[0]) == "t(init)"


def test_collapse_tau_loops_drops_only_self_loops():
    structure = explored("fork", mode="complete")
    loop = (0, TAU, 0)
    padded = type(structure)(structure.states, structure.initial, structure.transitions + [loop], False, {})
    assert loop not in collapse_tau_loops(padded).transitions
    assert len(collapse_tau_loops(padded).transitions) == len(structure.transitions)


def test_explorer_component_writes_artifacts(fork):
    pipeline = AnalysisPipelineConfig()
    config = ExplorerConfig(pipeline)
    artifact = Explorer(fork, REFERENCE, config).initiate_exploration()
    assert os.path.exists(artifact.output_file_path)
    assert len(load_object(artifact.object_file_path).states) == 12


@pytest.mark.parametrize("jobs", [0, -3])
def test_explorer_config_rejects_non_positive_jobs(jobs):
    with pytest.raises(ValueError, match="jobs"):
        ExplorerConfig(AnalysisPipelineConfig(), jobs=jobs)


def test_simulator_component_writes_trace(fork):
    config = SimulationConfig(AnalysisPipelineConfig(), seed=3)
    artifact = Simulator(fork, REFERENCE, config).initiate_simulation()
    with open(artifact.trace_file_path) as f:
        assert f.read().splitlines() == [str(l) for l in artifact.trace.labels]


# ---- generated models ----
CORPUS = random_models(100, max_nodes=6, decisions=True)


def test_generated_models_include_decisions():
    routed = [m for m in CORPUS if any(n.kind is NodeKind.DECISION for n in m.root_activity.nodes)]
    assert len(routed) >= 5


@pytest.mark.parametrize("model", CORPUS, ids=[f"seed{i}" for i in range(len(CORPUS))])
def test_reduced_states_are_visible(model):
    structure = explore(model, REFERENCE, ExploreLimits(max_states=2000))
    assert visibility_violations(structure, InstanceIndex.build(model)) == {}


@pytest.mark.parametrize("model", random_models(40, max_nodes=5, first_seed=1000), ids=[f"seed{1000 + i}" for i in range(40)])
def test_engine_agrees_with_naive_enumeration(model):
    expected_states, expected_edges = NaiveEnumerator(model).explore()
    structure = explore(model, REFERENCE)
    prints = [s.fingerprint for s in structure.states]
    assert set(prints) == expected_states
    assert {(prints[a], str(l), prints[b]) for a, l, b in structure.transitions} == expected_edges


def test_naive_enumeration_agrees_on_fork(fork):
    expected_states, expected_edges = NaiveEnumerator(fork).explore()
    structure = explore(fork, REFERENCE)
    prints = [s.fingerprint for s in structure.states]
    assert set(prints) == expected_states
    assert len(expected_edges) == len(structure.transitions)
