"""Token ordering disciplines and the Join `combine` function."""
from typing import Iterable, Sequence, Tuple

from activity_sos.entity.model_entity import OrderingDiscipline
from activity_sos.entity.state_entity import CONTROL_TOKEN, TokenKind, TokenValue, Tokens


def order_tokens(ordering: OrderingDiscipline, tokens: Sequence[TokenValue]) -> Tokens:
    """FIFO keeps arrival order, LIFO reverses it, unordered sorts canonically."""
    tokens = tuple(tokens)
    if ordering is OrderingDiscipline.LIFO:
        return tuple(reversed(tokens))
    if ordering is OrderingDiscipline.UNORDERED:
        return tuple(sorted(tokens, key=TokenValue.sort_key))
    return tokens


def store_tokens(ordering: OrderingDiscipline, held: Sequence[TokenValue], arriving: Sequence[TokenValue]) -> Tokens:
    """
    V ∪ Vc for a holder. Tokens are always taken from the front, so a LIFO
    holder keeps the most recent arrival first.
    """
    if ordering is OrderingDiscipline.LIFO:
        return tuple(reversed(tuple(arriving))) + tuple(held)
    if ordering is OrderingDiscipline.UNORDERED:
        return tuple(sorted(tuple(held) + tuple(arriving), key=TokenValue.sort_key))
    return tuple(held) + tuple(arriving)


def remove_tokens(held: Sequence[TokenValue], taken: Sequence[TokenValue]) -> Tokens:
    """V ⌉ Vc: removes one occurrence of each taken token, keeping the rest in order."""
    remaining = list(held)
    for token in taken:
        remaining.remove(token)
    return tuple(remaining)


def combine(sequences: Iterable[Sequence[TokenValue]]) -> Tokens:
    """
    Join output: data tokens concatenated in the given (offering) order;
    when only control tokens were consumed they collapse into one.
    """
    data = tuple(t for seq in sequences for t in seq if t.kind is not TokenKind.CONTROL)
    return data if data else (CONTROL_TOKEN,)


def collapse_control(tokens: Sequence[TokenValue]) -> Tuple[TokenValue, ...]:
    """Any number of control tokens offered on one Join input count as one."""
    tokens = tuple(tokens)
    if tokens and all(t.kind is TokenKind.CONTROL for t in tokens):
        return (CONTROL_TOKEN,)
    return tokens
