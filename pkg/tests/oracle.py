"""
Brute-force reduced-state-space enumerator for control-only models.

Written against the model entities alone: every step is derived directly
from node kinds and edge endpoints, without the engine's rules, transfer
or instance index. Supports InitialNode, Action, Fork, Join, Merge,
FlowFinalNode and ActivityFinalNode in a single root activity. States are
converted to ExecState only to share the fingerprint.
"""
import itertools
from collections import deque
from typing import Dict, FrozenSet, List, Set, Tuple

from activity_sos.components.state import fingerprint
from activity_sos.entity.model_entity import Model, NodeKind
from activity_sos.entity.state_entity import (
    CONTROL_TOKEN,
    ActivityPhase,
    ActivityStatus,
    ExecState,
    NodeStatus,
    Phase,
)

SUPPORTED = {
    NodeKind.INITIAL,
    NodeKind.ACTION,
    NodeKind.FORK,
    NodeKind.JOIN,
    NodeKind.MERGE,
    NodeKind.FLOW_FINAL,
    NodeKind.ACTIVITY_FINAL,
}
SWITCHES = {NodeKind.FORK, NodeKind.JOIN, NodeKind.MERGE}

# (root alive, running node -> consumed pin names, holder -> token count)
State = Tuple[bool, FrozenSet[Tuple[str, Tuple[str, ...]]], FrozenSet[Tuple[str, int]]]


class NaiveEnumerator:
    def __init__(self, model: Model):
        activity = model.root_activity
        unsupported = sorted(n.id for n in activity.nodes if n.kind not in SUPPORTED)
        if unsupported or len(model.activities) != 1:
            raise ValueError(f"model outside the control-only fragment: {unsupported}")
        self.root_key = activity.root_key
        self.kinds = {n.id: n.kind for n in activity.nodes}
        self.inputs = {n.id: [(p.name, f"{n.id}.{p.name}") for p in n.inputs] for n in activity.nodes}
        self.outputs = {n.id: [f"{n.id}.{p.name}" for p in n.outputs] for n in activity.nodes}
        self.feeding: Dict[str, List[str]] = {}
        for edge in activity.edges:
            self.feeding.setdefault(edge.target, []).append(edge.source)

    # ---- state helpers ----
    def initial(self) -> State:
        running = frozenset((n, ()) for n, k in self.kinds.items() if k is NodeKind.INITIAL)
        return (True, running, frozenset())

    @staticmethod
    def _make(alive: bool, running: Dict[str, Tuple[str, ...]], tokens: Dict[str, int]) -> State:
        return (alive, frozenset(running.items()), frozenset((k, v) for k, v in tokens.items() if v))

    def to_exec(self, state: State) -> ExecState:
        alive, running, tokens = state
        nodes = {
            n: NodeStatus(Phase.EXECUTING, f_in=tuple((pin, (CONTROL_TOKEN,)) for pin in pins)) for n, pins in running
        }
        activities = {self.root_key: ActivityStatus(ActivityPhase.EXECUTING)} if alive else {}
        holders = {k: (CONTROL_TOKEN,) * v for k, v in tokens}
        return ExecState.build(nodes, activities, holders, {})

    def visible(self, state: State) -> bool:
        _, running, tokens = state
        running_ids = {n for n, _ in running}
        held = {k for k, v in tokens if v}
        for node, kind in self.kinds.items():
            if kind not in SWITCHES:
                continue
            if node in running_ids or any(key in held for _, key in self.inputs[node]):
                return False
            outs = self.outputs[node]
            if kind is NodeKind.FORK:
                if outs and all(q in held for q in outs):
                    return False
            elif any(q in held for q in outs):
                return False
        return True

    # ---- single steps: (label, macro, successor) ----
    def steps(self, state: State) -> List[Tuple[str, bool, State]]:
        alive, running_set, token_set = state
        running = dict(running_set)
        tokens = dict(token_set)
        found = []

        def fed(pin_key: str) -> List[str]:
            return [src for src in self.feeding.get(pin_key, []) if tokens.get(src, 0) > 0]

        def after(take=(), give=(), run=None, stop=None, kill=False):
            t = dict(tokens)
            for key in take:
                t[key] -= 1
            for key in give:
                t[key] = t.get(key, 0) + 1
            r = dict(running)
            if stop is not None:
                r.pop(stop, None)
            if run is not None:
                r[run[0]] = run[1]
            if kill:
                return (False, frozenset(), frozenset())
            return self._make(alive, r, t)

        for node in sorted(self.kinds):
            kind = self.kinds[node]
            is_running = node in running
            outs = self.outputs[node]
            if kind is NodeKind.INITIAL:
                if is_running and alive:
                    found.append((f"t({node})", True, after(give=outs, stop=node)))
            elif kind in (NodeKind.ACTION, NodeKind.FLOW_FINAL):
                if not is_running and alive:
                    (pin, key), = self.inputs[node]
                    for src in fed(key):
                        found.append((f"i({node})", True, after(take=[src], run=(node, (pin,)))))
                if is_running and alive:
                    found.append((f"t({node})", True, after(give=outs, stop=node)))
            elif kind is NodeKind.ACTIVITY_FINAL:
                if not is_running and alive:
                    for src in fed(self.inputs[node][0][1]):
                        found.append((f"i({node})", True, after(kill=True)))
            elif kind is NodeKind.FORK:
                if not is_running and alive:
                    (pin, key), = self.inputs[node]
                    for src in fed(key):
                        found.append((f"r({src}-{key})", False, after(take=[src], run=(node, (pin,)))))
                if is_running:
                    found.append(("tau", False, after(give=outs, stop=node)))
            elif kind is NodeKind.MERGE:
                if alive:
                    for _, key in self.inputs[node]:
                        for src in fed(key):
                            found.append((f"r({src}-{key})", False, after(take=[src], give=outs)))
            elif kind is NodeKind.JOIN:
                if not is_running and alive:
                    per_pin = [[(src, key) for src in fed(key)] for _, key in self.inputs[node]]
                    if all(per_pin):
                        for combo in itertools.product(*per_pin):
                            sources = [src for src, _ in combo]
                            if len(set(sources)) != len(sources):
                                continue
                            label = "r(" + ";".join(f"{src}-{key}" for src, key in combo) + ")"
                            pins = tuple(pin for pin, _ in self.inputs[node])
                            found.append((label, False, after(take=sources, run=(node, pins))))
                if is_running:
                    found.append(("tau", False, after(give=outs, stop=node)))
        return found

    # ---- closure and exploration ----
    def transitions(self, state: State) -> Set[Tuple[str, State]]:
        seen = {state}
        stack = [state]
        found: Set[Tuple[str, State]] = set()
        while stack:
            current = stack.pop()
            for label, macro, nxt in self.steps(current):
                if not macro:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
                elif self.visible(nxt):
                    found.add((label, nxt))
        return found

    def explore(self, max_states: int = 5000) -> Tuple[Set[str], Set[Tuple[str, str, str]]]:
        """Fingerprints of reachable states and (src, label, dst) fingerprint triples."""
        start = self.initial()
        prints: Dict[State, str] = {start: fingerprint(self.to_exec(start))}
        edges: Set[Tuple[str, str, str]] = set()
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for label, nxt in self.transitions(current):
                if nxt not in prints:
                    if len(prints) >= max_states:
                        raise RuntimeError("oracle state limit reached")
                    prints[nxt] = fingerprint(self.to_exec(nxt))
                    queue.append(nxt)
                edges.add((prints[current], label, prints[nxt]))
        return set(prints.values()), edges
