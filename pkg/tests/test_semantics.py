import pytest

from activity_sos.components.profiles import parse_profile_spec
from activity_sos.components.semantics import Semantics, build_semantics
from activity_sos.components.state import fingerprint, is_visible, macro_view
from activity_sos.entity.state_entity import ActivityPhase, Phase, StepKind
from activity_sos.exception.exception import StaleInstanceError


@pytest.fixture
def semantics(fork):
    return build_semantics(fork, parse_profile_spec("reference"))


def _texts(transitions):
    return [str(label) for label, _ in transitions]


def _follow(semantics, *labels):
    state = semantics.initial_state()
    for text in labels:
        (state,) = [nxt for label, nxt in semantics.transitions(state) if str(label) == text]
    return state


def test_initial_state(semantics):
    state = semantics.initial_state()
    assert state.node("Init").phase is Phase.EXECUTING
    assert state.activity("@Main").phase is ActivityPhase.EXECUTING
    assert state.holders == ()
    assert state.clocks is None
    assert is_visible(state, semantics.index)


def test_fork_branches_after_a(semantics):
    state = semantics.initial_state()
    assert _texts(semantics.transitions(state)) == ["t(Init)"]
    after_a = _follow(semantics, "t(Init)", "i(A)", "t(A)")
    assert after_a.tokens("A.ctl_out")
    assert _texts(semantics.transitions(after_a)) == ["i(B)", "i(C)"]


def test_complete_successors_expose_micro_steps(semantics):
    after_a = _follow(semantics, "t(Init)", "i(A)", "t(A)")
    (step,) = semantics.steps(after_a)
    assert step.kind is StepKind.MICRO
    assert str(step.label) == "r(A.ctl_out-Fork.ctl_in)"
    assert not is_visible(step.next, semantics.index)
    (offer,) = semantics.steps(step.next)
    assert str(offer.label) == "tau"
    assert offer.next.tokens("Fork.to_B") and offer.next.tokens("Fork.to_C")
    assert _texts(semantics.successors(after_a, complete=True)) == ["r(A.ctl_out-Fork.ctl_in)"]


def test_fire_rejects_stale_instance(semantics):
    start = semantics.initial_state()
    (instance,) = semantics.applicable(start)
    later = semantics.fire(start, instance).next
    with pytest.raises(StaleInstanceError):
        semantics.fire(later, instance)


def test_steps_are_pure(fork):
    semantics = Semantics(fork, parse_profile_spec("reference"))
    state = semantics.initial_state()
    before = fingerprint(state)
    first = [fingerprint(s.next) for s in semantics.steps(state)]
    assert fingerprint(state) == before
    assert [fingerprint(s.next) for s in semantics.steps(state)] == first


def test_single_core_blocks_parallel_invocation(fork):
    semantics = build_semantics(fork, parse_profile_spec("single-core"))
    after_a = _follow(semantics, "t(Init)", "i(A)", "t(A)")
    _, running_b = semantics.transitions(after_a)[0]
    assert _texts(semantics.transitions(running_b)) == ["t(B)"]


def test_macro_view_drops_switch_tokens(semantics):
    after_a = _follow(semantics, "t(Init)", "i(A)", "t(A)")
    (step,) = semantics.steps(after_a)
    assert step.next.tokens("Fork.ctl_in")
    view = macro_view(step.next, semantics.index)
    assert "Fork.ctl_in" not in dict(view.holders)
    assert view.nodes == step.next.nodes
    assert view.events == step.next.events
