"""m_io: output token sequences of an Action from its consumed inputs."""
from typing import Dict, Tuple

from activity_sos.entity.model_entity import Model, Node
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    TokenKind,
    TokenValue,
    Tokens,
    bool_token,
    int_token,
)
from activity_sos.exception.exception import BehaviorError


def _data_tokens(node: Node, f_in: Dict[str, Tokens]) -> Tokens:
    return tuple(t for pin in node.data_inputs for t in f_in.get(pin.name, ()) if t.kind is not TokenKind.CONTROL)


def _negate(token: TokenValue) -> TokenValue:
    if token.kind is TokenKind.INT:
        return int_token(-token.value)
    if token.kind is TokenKind.BOOL:
        return bool_token(not token.value)
    raise BehaviorError(f"cannot negate {token}")


def _builtin(name: str, constant, node: Node, f_in: Dict[str, Tokens]) -> Tokens:
    values = _data_tokens(node, f_in)
    if name == "identity":
        return values
    if name == "negate":
        return tuple(_negate(t) for t in values)
    if name == "add":
        if any(t.kind is not TokenKind.INT for t in values):
            raise BehaviorError(f"'add' on non-integer inputs of '{node.id}'")
        return (int_token(sum(t.value for t in values)),)
    if name == "const":
        return (constant,)
    raise BehaviorError(f"unknown builtin behaviour '{name}'")


def evaluate(model: Model, node: Node, f_in: Tuple[Tuple[str, Tokens], ...]) -> Dict[str, Tokens]:
    """
    Output pin name → tokens. Control out pins always get one ControlToken;
    builtins send their result to every data output; tables are matched on
    the data input sequences.
    """
    consumed = dict(f_in)
    outputs: Dict[str, Tokens] = {p.name: (CONTROL_TOKEN,) for p in node.outputs if p.is_control}
    data_outputs = [p for p in node.outputs if not p.is_control]
    if not data_outputs:
        return outputs
    binding = model.behaviors.get(node.behavior) if node.behavior else None
    if binding is None:
        raise BehaviorError(f"no behaviour bound to '{node.id}'")

    if binding.builtin:
        result = _builtin(binding.builtin, binding.constant, node, consumed)
        outputs.update({p.name: result for p in data_outputs})
        return outputs

    observed = tuple(sorted((p.name, consumed.get(p.name, ())) for p in node.data_inputs))
    for ins, outs in binding.rows:
        if tuple(sorted((pin, seq) for pin, seq in ins)) == observed:
            table = dict(outs)
            outputs.update({p.name: tuple(table.get(p.name, ())) for p in data_outputs})
            return outputs
    raise BehaviorError(f"behaviour '{binding.key}' has no row for inputs {[(k, [str(t) for t in v]) for k, v in observed]}")
