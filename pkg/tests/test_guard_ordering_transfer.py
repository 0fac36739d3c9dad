import pytest

from activity_sos.components.guard import eval_guard, eval_join_spec, names_in, parse_guard, uses_token
from activity_sos.components.instances import InstanceIndex
from activity_sos.components.model_parser import load_model, parse_model
from activity_sos.components.ordering import collapse_control, combine, order_tokens, remove_tokens, store_tokens
from activity_sos.components.transfer import input_assignments, transfer
from activity_sos.entity.model_entity import OrderingDiscipline
from activity_sos.entity.state_entity import CONTROL_TOKEN, NULL_TOKEN, ExecState, bool_token, int_token, str_token
from activity_sos.exception.exception import GuardEvaluationError, ModelParseError
from support import model_path

ONE, TWO, THREE = int_token(1), int_token(2), int_token(3)


# ---- guards ----
@pytest.mark.parametrize(
    "text, token, expected",
    [
        ("x > 1", TWO, True),
        ("x > 1", ONE, False),
        ("x == 2 or x == 3", THREE, True),
        ("not (x <= 2) and x != 5", THREE, True),
        ("value == 'go'", str_token("go"), True),
        ("x == true", bool_token(True), True),
        ("x == 1", bool_token(True), False),
        ("x == null", NULL_TOKEN, True),
        (True, CONTROL_TOKEN, True),
        (None, ONE, True),
    ],
)
def test_eval_guard(text, token, expected):
    assert eval_guard(parse_guard(text), token) is expected


def test_else_needs_decision_context():
    guard = parse_guard("else")
    assert guard.is_else
    assert eval_guard(guard, ONE, otherwise=False) is False
    with pytest.raises(GuardEvaluationError):
        eval_guard(guard, ONE)


def test_ordering_comparison_between_kinds_fails():
    with pytest.raises(GuardEvaluationError):
        eval_guard(parse_guard("x < 'a'"), ONE)


def test_non_boolean_guard_fails():
    with pytest.raises(GuardEvaluationError):
        eval_guard(parse_guard("x"), ONE)


@pytest.mark.parametrize("text", ["x >", "(x == 1", "x == 1 1", "x ! 2"])
def test_malformed_guards(text):
    with pytest.raises(ModelParseError):
        parse_guard(text)


def test_join_spec_names():
    spec = parse_guard("a and (b or c)")
    assert names_in(spec) == {"a", "b", "c"}
    assert not uses_token(spec)
    assert eval_join_spec(spec, {"a", "c"})
    assert not eval_join_spec(spec, {"b", "c"})


# ---- ordering ----
def test_order_and_store():
    assert order_tokens(OrderingDiscipline.LIFO, (ONE, TWO)) == (TWO, ONE)
    assert order_tokens(OrderingDiscipline.UNORDERED, (THREE, ONE)) == (ONE, THREE)
    assert store_tokens(OrderingDiscipline.FIFO, (ONE,), (TWO, THREE)) == (ONE, TWO, THREE)
    assert store_tokens(OrderingDiscipline.LIFO, (ONE,), (TWO, THREE)) == (THREE, TWO, ONE)


def test_remove_keeps_order_of_rest():
    assert remove_tokens((ONE, TWO, ONE, THREE), (ONE, THREE)) == (TWO, ONE)


def test_combine_and_collapse():
    assert combine([(CONTROL_TOKEN,), (CONTROL_TOKEN,)]) == (CONTROL_TOKEN,)
    assert combine([(CONTROL_TOKEN,), (TWO,), (ONE,)]) == (TWO, ONE)
    assert collapse_control((CONTROL_TOKEN, CONTROL_TOKEN)) == (CONTROL_TOKEN,)
    assert collapse_control((ONE, ONE)) == (ONE, ONE)


# ---- transfer ----
GUARDED = """
activities:
  - name: Main
    nodes:
      - {id: S, kind: Action, behavior: one, inputs: [{name: in, type: Int}], outputs: [{name: out, type: Int}]}
      - {id: T, kind: Action, inputs: [{name: in, type: Int, upper: 2}]}
      - {id: M, kind: Merge, inputs: [{name: in, type: Int, upper: 3}], outputs: [{name: out, type: Int}]}
      - {id: U, kind: Action, inputs: [{name: in, type: Int}]}
    edges:
      - {source: S.out, target: T.in, guard: "x > 1"}
      - {source: S.out, target: M.in}
      - {source: M.out, target: U.in}
behaviors:
  one: "const:1"
"""


@pytest.fixture
def index():
    return InstanceIndex.build(parse_model(GUARDED))


def _edge(index, target):
    (edge,) = [e for e in index.edges if e.target == target]
    return edge


def test_transfer_respects_guard_and_upper(index):
    state = ExecState.build({}, {}, {"S.out": (ONE, TWO, THREE)}, {})
    (choice,) = transfer(state, _edge(index, "T.in"), index)
    assert choice.edge == "S.out-T.in"
    assert choice.tokens == (TWO, THREE)


def test_transfer_blocked_below_lower(index):
    state = ExecState.build({}, {}, {"S.out": (ONE,)}, {})
    assert transfer(state, _edge(index, "T.in"), index) == []


def test_switch_target_gets_every_size(index):
    edge = _edge(index, "M.in")
    state = ExecState.build({}, {}, {"S.out": (ONE, TWO)}, {})
    sizes = sorted(len(c.tokens) for c in transfer(state, edge, index))
    assert sizes == [1, 2]


def test_assignments_use_one_source_per_pin(index):
    state = ExecState.build({}, {}, {"S.out": (TWO,), "T.in": (THREE,)}, {})
    found = input_assignments(state, index, ["T.in"])
    sources = sorted(feed.source for (feed,) in found)
    assert sources == ["S.out", "T.in"]
    (pins_only,) = input_assignments(state, index, ["T.in"], pins_only=True)
    assert pins_only[0].tokens == (THREE,)


def test_decision_outputs_pass_routed_tokens():
    # Route decides on its df value; the token it passes on is a ControlToken
    flow = InstanceIndex.build(load_model(model_path("decision_flow")))
    edge = _edge(flow, "B.ctl_in")
    assert edge.routed and not _edge(flow, "Route.df").routed
    state = ExecState.build({}, {}, {"Route.to_B": (CONTROL_TOKEN,)}, {})
    (choice,) = transfer(state, edge, flow)
    assert choice.tokens == (CONTROL_TOKEN,)
