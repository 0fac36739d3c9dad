# ============================ #
#   Simulation Preorder Check
# ============================ #

"""
Decides whether a concrete Kripke structure is simulated by an abstract
one, matching transitions on their labels only.

The greatest simulation is computed by refinement over boolean relation
matrices: a pair (c, a) is dropped as soon as some l-step of c has no
l-step of a into a related pair. With hiding enabled, τ and exeTime
steps are internal: the abstract side may answer a hidden concrete step
by any number of its own hidden steps and a visible label l by
hidden* l hidden*.
"""
import sys
from collections import deque
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from activity_sos.components.explorer import explore
from activity_sos.components.profiles import SemanticsProfile
from activity_sos.constant.semantics import MODE_REDUCED
from activity_sos.entity.artifact_entity import ConformanceArtifact, KripkeStructure, SimulationResult
from activity_sos.entity.config_entity import ConformanceConfig, ExploreLimits
from activity_sos.entity.model_entity import Model
from activity_sos.entity.state_entity import StepLabel
from activity_sos.exception.exception import ActivitySemanticsException, AlphabetMismatchError, reraise
from activity_sos.logging.logger import logging
from activity_sos.utils.main_utils.utils import dump_json, write_text_file

HIDDEN = "<hidden>"


# ================================
# 🧮 Relation matrices
# ================================
def _label_key(label: StepLabel, hide_tau: bool) -> str:
    return HIDDEN if hide_tau and label.is_hidden else str(label)


def _matrices(structure: KripkeStructure, hide_tau: bool) -> Dict[str, np.ndarray]:
    n = len(structure.states)
    out: Dict[str, np.ndarray] = {}
    for src, label, dst in structure.transitions:
        key = _label_key(label, hide_tau)
        if key not in out:
            out[key] = np.zeros((n, n), dtype=bool)
        out[key][src, dst] = True
    return out


def _bool_product(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return (left.astype(np.int64) @ right.astype(np.int64)) > 0


def reflexive_transitive_closure(step: np.ndarray) -> np.ndarray:
    closure = step | np.eye(step.shape[0], dtype=bool)
    while True:
        wider = closure | _bool_product(closure, closure)
        if np.array_equal(wider, closure):
            return closure
        closure = wider


def _abstract_moves(abstract: KripkeStructure, hide_tau: bool) -> Dict[str, np.ndarray]:
    """Per label: which abstract state may answer with which successor."""
    strong = _matrices(abstract, hide_tau)
    if not hide_tau:
        return strong
    n = len(abstract.states)
    internal = reflexive_transitive_closure(strong.pop(HIDDEN, np.zeros((n, n), dtype=bool)))
    weak = {key: _bool_product(_bool_product(internal, step), internal) for key, step in strong.items()}
    weak[HIDDEN] = internal
    return weak


def check_alphabets(abstract: KripkeStructure, concrete: KripkeStructure) -> None:
    """Without hiding, every label kind of the concrete structure must occur in the abstract one."""
    missing = sorted({l.kind.value for l in concrete.labels()} - {l.kind.value for l in abstract.labels()})
    if missing:
        raise AlphabetMismatchError(
            f"concrete structure uses label kinds {missing} unknown to the abstract structure; enable hiding"
        )


def greatest_simulation(abstract: KripkeStructure, concrete: KripkeStructure, hide_tau: bool = False) -> np.ndarray:
    """Boolean matrix R[c, a]: a simulates c."""
    answers = _abstract_moves(abstract, hide_tau)
    steps = _matrices(concrete, hide_tau)
    n_abs = len(abstract.states)
    relation = np.ones((len(concrete.states), n_abs), dtype=bool)
    rounds = 0
    while True:
        rounds += 1
        refined = relation.copy()
        for key, concrete_step in steps.items():
            answer = answers.get(key, np.zeros((n_abs, n_abs), dtype=bool))
            matched = _bool_product(relation, answer.T)
            refined &= ~_bool_product(concrete_step, ~matched)
        if np.array_equal(refined, relation):
            logging.info(f"Simulation fixpoint after {rounds} round(s): {int(relation.sum())} pairs")
            return relation
        relation = refined


# ================================
# 🔍 Counterexamples
# ================================
def _successor_sets(structure: KripkeStructure, hide_tau: bool) -> Dict[int, Dict[str, Set[int]]]:
    table: Dict[int, Dict[str, Set[int]]] = {s.id: {} for s in structure.states}
    for src, label, dst in structure.transitions:
        table[src].setdefault(_label_key(label, hide_tau), set()).add(dst)
    return table


def _internal_closure(states: Set[int], table: Dict[int, Dict[str, Set[int]]]) -> FrozenSet[int]:
    seen = set(states)
    stack = list(states)
    while stack:
        for nxt in table[stack.pop()].get(HIDDEN, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def _after(states: FrozenSet[int], key: str, table, hide_tau: bool) -> FrozenSet[int]:
    reached = {dst for s in states for dst in table[s].get(key, ())}
    return _internal_closure(reached, table) if hide_tau else frozenset(reached)


def unmatched_trace(
    abstract: KripkeStructure, concrete: KripkeStructure, hide_tau: bool = False
) -> Optional[List[StepLabel]]:
    """
    Shortest visible label sequence the concrete structure can perform and
    the abstract one cannot, or None when every concrete trace is matched.
    """
    a_table = _successor_sets(abstract, hide_tau)
    c_table = _successor_sets(concrete, hide_tau)
    labels = {_label_key(l, hide_tau): l for l in concrete.labels()}
    start_set = frozenset({abstract.initial})
    if hide_tau:
        start_set = _internal_closure(set(start_set), a_table)
    start = (concrete.initial, start_set)
    parents: Dict[Tuple[int, FrozenSet[int]], Optional[Tuple]] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        c, abstract_set = node
        for key in sorted(c_table[c]):
            if hide_tau and key == HIDDEN:
                follow = abstract_set
            else:
                follow = _after(abstract_set, key, a_table, hide_tau)
                if not follow:
                    return _path(parents, node, labels) + [labels[key]]
            for c_next in sorted(c_table[c][key]):
                nxt = (c_next, follow)
                if nxt not in parents:
                    parents[nxt] = (node, key)
                    queue.append(nxt)
    return None


def _path(parents, node, labels: Dict[str, StepLabel]) -> List[StepLabel]:
    keys = []
    while parents[node] is not None:
        node, key = parents[node]
        keys.append(key)
    return [labels[k] for k in reversed(keys) if k != HIDDEN]


def _unmatched_branch(
    abstract: KripkeStructure, concrete: KripkeStructure, relation: np.ndarray, hide_tau: bool
) -> List[StepLabel]:
    """
    For trace-included failures: the shortest concrete path through
    unrelated pairs ending in a step no related answer exists for.
    """
    answers = _abstract_moves(abstract, hide_tau)
    c_table = _successor_sets(concrete, hide_tau)
    labels = {_label_key(l, hide_tau): l for l in concrete.labels()}
    start = (concrete.initial, abstract.initial)
    parents: Dict[Tuple[int, int], Optional[Tuple]] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        c, a = node
        for key in sorted(c_table[c]):
            answer = answers.get(key)
            for c_next in sorted(c_table[c][key]):
                options = [] if answer is None else [int(x) for x in np.flatnonzero(answer[a])]
                if not any(relation[c_next, x] for x in options):
                    return _path(parents, node, labels) + ([labels[key]] if key != HIDDEN else [])
                for a_next in options:
                    nxt = (c_next, a_next)
                    if nxt not in parents:
                        parents[nxt] = (node, key)
                        queue.append(nxt)
    return []


def accepts(structure: KripkeStructure, labels: Sequence[StepLabel], hide_tau: bool = False) -> bool:
    """The label sequence is executable from the initial state (hidden steps interleaved freely when hiding)."""
    table = _successor_sets(structure, hide_tau)
    current = frozenset({structure.initial})
    if hide_tau:
        current = _internal_closure(set(current), table)
    for label in labels:
        current = _after(current, _label_key(label, hide_tau), table, hide_tau)
        if not current:
            return False
    return True


# ================================
# ⚖️ Verdict
# ================================
def simulates(abstract: KripkeStructure, concrete: KripkeStructure, hide_tau: bool = False) -> SimulationResult:
    """
    concrete ≤ abstract. Strong by default; with `hide_tau` τ and exeTime
    steps are matched weakly. Raises AlphabetMismatchError when the
    concrete structure uses label kinds the abstract one lacks and hiding
    is off.
    """
    try:
        if not hide_tau:
            check_alphabets(abstract, concrete)
        relation = greatest_simulation(abstract, concrete, hide_tau)
        if relation[concrete.initial, abstract.initial]:
            pairs = {(int(c), int(a)) for c, a in zip(*np.nonzero(relation))}
            return SimulationResult(holds=True, relation=pairs, weak=hide_tau)
        trace = unmatched_trace(abstract, concrete, hide_tau)
        if trace is not None:
            logging.info(f"Counterexample of length {len(trace)}")
            return SimulationResult(holds=False, counterexample=trace, weak=hide_tau)
        return SimulationResult(
            holds=False,
            counterexample=_unmatched_branch(abstract, concrete, relation, hide_tau),
            weak=hide_tau,
            trace_included=True,
        )
    except Exception as e:
        raise reraise(e)


# ================================
# 🧩 Component
# ================================
class Conformance:
    def __init__(
        self,
        model: Model,
        abstract_profile: SemanticsProfile,
        concrete_profile: SemanticsProfile,
        conformance_config: ConformanceConfig,
        limits: Optional[ExploreLimits] = None,
        jobs: int = 1,
    ):
        self.model = model
        self.abstract_profile = abstract_profile
        self.concrete_profile = concrete_profile
        self.conformance_config = conformance_config
        self.limits = limits
        self.jobs = jobs

    def _explore(self, profile: SemanticsProfile) -> KripkeStructure:
        structure = explore(self.model, profile, self.limits, MODE_REDUCED, self.jobs)
        if structure.truncated:
            raise ActivitySemanticsException(f"exploration under '{profile.name}' was truncated; raise max_states", sys)
        return structure

    def initiate_conformance_check(self) -> ConformanceArtifact:
        try:
            config = self.conformance_config
            abstract = self._explore(self.abstract_profile)
            concrete = self._explore(self.concrete_profile)
            result = simulates(abstract, concrete, config.hide_tau)
            logging.info(f"{self.concrete_profile.name} <= {self.abstract_profile.name}: {result.summary()}")
            verdict = dict(result.to_dict())
            verdict["abstract"] = dict(sorted(abstract.meta.items()))
            verdict["concrete"] = dict(sorted(concrete.meta.items()))
            write_text_file(config.verdict_file_path, dump_json(verdict))
            return ConformanceArtifact(result, config.verdict_file_path)
        except Exception as e:
            raise reraise(e)
