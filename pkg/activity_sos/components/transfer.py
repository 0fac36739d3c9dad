# ============================ #
#   Token Transfer
# ============================ #

"""
Edge transfer and the choice of token sources for a node's input pins.

`transfer` answers which token sequences may cross an edge in a state;
`input_assignments` combines one source per input pin into the injective
assignments an invocation rule consumes.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from activity_sos.components.guard import eval_guard
from activity_sos.components.instances import EdgeInstance, InstanceIndex
from activity_sos.components.ordering import order_tokens, remove_tokens, store_tokens
from activity_sos.entity.model_entity import Pin
from activity_sos.entity.state_entity import ExecState, StateBuilder, Tokens


@dataclass(frozen=True)
class TransferChoice:
    """
    Attributes:
        edge (str): edge instance id "source-target".
        source (str): holder the tokens leave.
        target (str): holder the tokens are offered to.
        tokens (tuple): the tokens crossing, taken from the front of the source.
    """
    edge: str
    source: str
    target: str
    tokens: Tokens


@dataclass(frozen=True)
class PinFeed:
    """
    Tokens one input pin consumes in an invocation.

    `source` is the holder they are taken from: the far end of an edge, the
    pin itself when tokens already wait on it, or None for an unfed optional pin.
    """
    pin: str
    source: Optional[str]
    tokens: Tokens
    edge: Optional[str] = None


Assignment = Tuple[PinFeed, ...]


def offered(state: ExecState, edge: EdgeInstance) -> Tokens:
    """
    V_o: source tokens passing the edge guard, in holder order. Tokens on a
    Decision output pin were routed by the decision's own value and pass as is.
    """
    tokens = state.tokens(edge.source)
    if edge.routed:
        return tokens
    return tuple(t for t in tokens if eval_guard(edge.edge.guard, t, otherwise=True))


def transfer(state: ExecState, edge: EdgeInstance, index: InstanceIndex) -> List[TransferChoice]:
    """
    Admissible token sequences for an edge.

    Empty when fewer tokens pass the guard than the target's lower bound or
    the edge weight. A non-switch target gets the single maximal sequence;
    a switch-node target gets one choice per admissible size.
    """
    passing = offered(state, edge)
    target = index.holder(edge.target)
    room = target.upper_bound - len(state.tokens(edge.target))
    n = len(passing)
    cap = min(n, target.upper, room)
    floor = max(target.lower, 1)

    if edge.edge.weight == math.inf:
        if n < floor or cap < n:
            return []
        sizes: Iterable[int] = [n]
    else:
        if n < target.lower or n < edge.edge.weight:
            return []
        floor = max(floor, int(edge.edge.weight))
        if index.is_switch_holder(edge.target):
            sizes = range(floor, int(cap) + 1)
        else:
            sizes = [int(cap)] if cap >= floor else []
    return [TransferChoice(edge.id, edge.source, edge.target, passing[:k]) for k in sizes]


def _pin_options(
    state: ExecState, index: InstanceIndex, pin_key: str, pins_only: bool
) -> List[PinFeed]:
    pin: Pin = index.holder(pin_key)
    options: List[PinFeed] = []
    if not pins_only:
        for edge in index.incoming.get(pin_key, []):
            for choice in transfer(state, edge, index):
                options.append(PinFeed(pin_key, choice.source, choice.tokens, choice.edge))
    waiting = state.tokens(pin_key)
    if waiting:
        take = waiting[: int(min(len(waiting), pin.upper))]
        if len(take) >= max(pin.lower, 1):
            options.append(PinFeed(pin_key, pin_key, take))
    return options


def input_assignments(
    state: ExecState,
    index: InstanceIndex,
    pin_keys: Sequence[str],
    pins_only: bool = False,
    greedy: Sequence[str] = (),
) -> List[Assignment]:
    """
    Injective source choices for `pin_keys`.

    Pins with lower 0 may stay unfed; pins listed in `greedy` are optional
    but consume whenever they can. At least one pin must receive tokens.
    With `pins_only` the tokens must already wait on the pins.
    """
    per_pin: List[List[PinFeed]] = []
    for pin_key in pin_keys:
        options = _pin_options(state, index, pin_key, pins_only)
        pin: Pin = index.holder(pin_key)
        if pin_key in greedy:
            options = options or [PinFeed(pin_key, None, ())]
        elif pin.lower == 0:
            options = options + [PinFeed(pin_key, None, ())]
        if not options:
            return []
        per_pin.append(options)

    assignments: List[Assignment] = []
    for combo in itertools.product(*per_pin):
        sources = [feed.source for feed in combo if feed.source is not None]
        if len(sources) != len(set(sources)) or not sources:
            continue
        assignments.append(tuple(combo))
    return assignments


def consume(builder: StateBuilder, assignment: Assignment) -> None:
    """Source holders lose the consumed tokens (sequence difference)."""
    for feed in assignment:
        if feed.source is not None:
            builder.set_tokens(feed.source, remove_tokens(builder.tokens(feed.source), feed.tokens))


def consumed_inputs(index: InstanceIndex, assignment: Assignment) -> Tuple[Tuple[str, Tokens], ...]:
    """f_in: tokens per pin name, reordered by the pin's discipline when they crossed an edge."""
    f_in = []
    for feed in assignment:
        if feed.source is None:
            continue
        pin: Pin = index.holder(feed.pin)
        tokens = feed.tokens if feed.source == feed.pin else order_tokens(pin.ordering, feed.tokens)
        f_in.append((pin.name, tokens))
    return tuple(f_in)


def fits(builder_or_state, index: InstanceIndex, holder_key: str, tokens: Sequence) -> bool:
    """|V ∪ V'| ≤ upper_bound."""
    return len(builder_or_state.tokens(holder_key)) + len(tokens) <= index.holder(holder_key).upper_bound


def offer(builder: StateBuilder, index: InstanceIndex, holder_key: str, tokens: Sequence) -> None:
    """V ∪ V' under the holder's ordering discipline."""
    if tokens:
        holder = index.holder(holder_key)
        builder.set_tokens(holder_key, store_tokens(holder.ordering, builder.tokens(holder_key), tokens))


def move(builder: StateBuilder, index: InstanceIndex, source: str, target: str, tokens: Sequence) -> None:
    builder.set_tokens(source, remove_tokens(builder.tokens(source), tokens))
    offer(builder, index, target, tokens)


def edge_ids(assignment: Assignment) -> Tuple[str, ...]:
    return tuple(feed.edge for feed in assignment if feed.edge)


def fed_pins(assignment: Assignment) -> Dict[str, Tokens]:
    return {feed.pin: feed.tokens for feed in assignment if feed.source is not None}
