import pytest

from activity_sos.components.profiles import extend_consumption, parse_profile_spec, profile_reference
from activity_sos.constant.semantics import (
    CLOCK_TICK,
    CLOSURE_EAGER_TRANSFER,
    CLOSURE_STANDARD,
    EDGE_TRANSFER,
    EXECUTION_TIME,
    REFERENCE_RULE_IDS,
    SINGLE_CORE_PREMISE,
)
from activity_sos.entity.state_entity import LabelKind
from activity_sos.exception.exception import ProfileError


def test_reference_catalog_has_every_rule_once():
    profile = profile_reference()
    assert profile.rule_ids == REFERENCE_RULE_IDS
    assert len(set(profile.rule_ids)) == 38
    assert not profile.timed and not profile.pins_only


@pytest.mark.parametrize("spec", ["turbo", "reference,var3", "var1,var2"])
def test_bad_profile_specs(spec):
    with pytest.raises(ProfileError):
        parse_profile_spec(spec)


def test_single_core_guards_every_invocation():
    profile = parse_profile_spec("reference,single-core")
    assert profile.name == "reference,single-core"
    for rule in profile.rules:
        premise_names = [name for name, _ in rule.premises]
        assert (SINGLE_CORE_PREMISE in premise_names) == (rule.label is LabelKind.INVOKE)


def test_execution_time_from_model(fork):
    profile = parse_profile_spec("exec-time", model=fork)
    assert profile.timed
    assert profile.timing == ()
    assert {EXECUTION_TIME, CLOCK_TICK} <= set(profile.rule_ids)


def test_timing_table_implies_exec_time(fork):
    profile = parse_profile_spec("reference", {"A": 1, "B": 2, "C": 3}, fork)
    assert profile.name == "reference,exec-time"
    assert profile.timing == (("A", 1), ("B", 2), ("C", 3))


def test_timing_table_must_cover_actions(fork):
    with pytest.raises(ProfileError, match="B"):
        parse_profile_spec("exec-time", {"A": 1}, fork)


def test_negative_execution_time_rejected(fork):
    with pytest.raises(ProfileError):
        parse_profile_spec("exec-time", {"A": -1, "B": 1, "C": 1}, fork)


@pytest.mark.parametrize("variation, closure", [("var1", CLOSURE_EAGER_TRANSFER), ("var2", CLOSURE_STANDARD)])
def test_consumption_variations(variation, closure):
    profile = parse_profile_spec(variation)
    assert profile.closure == closure
    assert profile.pins_only
    assert profile.variation == variation
    assert profile.rule_ids[-1] == EDGE_TRANSFER
    assert extend_consumption(profile, variation) is profile
    with pytest.raises(ProfileError):
        extend_consumption(profile, "var2" if variation == "var1" else "var1")


def test_extensions_stack_left_to_right():
    profile = parse_profile_spec("single-core,var2")
    assert profile.name == "reference,single-core,var2"
    # the transfer rule is added after single-core and is not an invocation
    assert not profile.rule(EDGE_TRANSFER).premises
