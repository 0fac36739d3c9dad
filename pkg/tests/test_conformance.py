import json

import numpy as np
import pytest

from activity_sos.components.conformance import Conformance, accepts, greatest_simulation, reflexive_transitive_closure, simulates
from activity_sos.components.explorer import explore
from activity_sos.components.profiles import parse_profile_spec
from activity_sos.entity.config_entity import AnalysisPipelineConfig, ConformanceConfig, ExploreLimits
from activity_sos.entity.state_entity import StepLabel
from activity_sos.exception.exception import ActivitySemanticsException, AlphabetMismatchError
from corpus import random_models
from support import explored


def labels(*texts):
    return [StepLabel.parse(t) for t in texts]


def test_closure_of_a_chain():
    step = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool)
    closure = reflexive_transitive_closure(step)
    assert closure[0, 2] and closure[1, 1]
    assert not closure[2, 0]


def test_structure_simulates_itself():
    structure = explored("compete")
    relation = greatest_simulation(structure, structure)
    assert relation.diagonal().all()
    assert simulates(structure, structure).holds


def test_var1_conforms_to_reference():
    result = simulates(explored("compete", "reference"), explored("compete", "var1"))
    assert result.holds
    assert not result.weak
    assert result.relation


def test_reference_does_not_conform_to_var1():
    result = simulates(explored("compete", "var1"), explored("compete", "reference"))
    assert not result.holds
    assert str(result.counterexample[-1]) == "i(C)"
    assert "i(C)" in result.summary()


def test_var2_breaks_weak_simulation():
    abstract = explored("compete", "reference")
    concrete = explored("compete", "var2")
    result = simulates(abstract, concrete, hide_tau=True)
    assert not result.holds
    assert result.weak
    assert result.counterexample
    assert accepts(concrete, result.counterexample, hide_tau=True)
    assert accepts(abstract, result.counterexample, hide_tau=True) == result.trace_included


def test_micro_labels_need_hiding():
    reduced = explored("fork")
    complete = explored("fork", mode="complete")
    with pytest.raises(AlphabetMismatchError):
        simulates(reduced, complete)
    assert not simulates(reduced, complete, hide_tau=True).holds


def test_accepts():
    structure = explored("fork")
    assert accepts(structure, labels("t(Init)", "i(A)"))
    assert not accepts(structure, labels("i(A)"))
    timed = explored("timing", "exec-time", mode="complete")
    assert not accepts(timed, labels("t(init)", "i(A)", "t(A)"))
    assert accepts(timed, labels("t(init)", "i(A)", "t(A)"), hide_tau=True)


CORPUS = random_models(30, max_nodes=5, first_seed=500, decisions=True)
PROFILES = ["reference", "var2", "var1"]


@pytest.mark.parametrize("model", CORPUS, ids=[f"seed{500 + i}" for i in range(len(CORPUS))])
def test_weak_simulation_is_a_preorder(model):
    structures = [explore(model, parse_profile_spec(p)) for p in PROFILES]
    for s in structures:
        assert simulates(s, s, hide_tau=True).holds
    for a in structures:
        for b in structures:
            for c in structures:
                if simulates(a, b, hide_tau=True).holds and simulates(b, c, hide_tau=True).holds:
                    assert simulates(a, c, hide_tau=True).holds


def test_conformance_component_writes_verdict(compete):
    config = ConformanceConfig(AnalysisPipelineConfig(), "reference", "var1")
    artifact = Conformance(compete, parse_profile_spec("reference"), parse_profile_spec("var1"), config).initiate_conformance_check()
    assert artifact.result.holds
    with open(artifact.verdict_file_path) as f:
        verdict = json.load(f)
    assert verdict["holds"] is True
    assert verdict["concrete"]["profile"] == "reference,var1"


def test_conformance_refuses_truncated_structures(compete):
    config = ConformanceConfig(AnalysisPipelineConfig())
    reference = parse_profile_spec("reference")
    with pytest.raises(ActivitySemanticsException, match="truncated"):
        Conformance(compete, reference, reference, config, limits=ExploreLimits(max_states=3)).initiate_conformance_check()
