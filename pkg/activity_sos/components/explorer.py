# ============================ #
#   State-Space Explorer
# ============================ #

"""
Breadth-first construction of reduced or complete Kripke structures.

Each frontier level is sorted by fingerprint before expansion and the
finished structure is indexed by fingerprint order, so the result does
not depend on how the frontier was scheduled across worker processes.
"""
import sys
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Set, Tuple

import dill
import numpy as np

from activity_sos.components.emitter import emit
from activity_sos.components.instances import InstanceIndex
from activity_sos.components.profiles import SemanticsProfile
from activity_sos.components.semantics import Semantics, Transition
from activity_sos.components.state import fingerprint, macro_view, switch_condition_violations
from activity_sos.constant.semantics import MAX_TRACE_LEN, MODE_COMPLETE, MODE_REDUCED
from activity_sos.entity.artifact_entity import (
    ExplorationArtifact,
    KripkeState,
    KripkeStructure,
    SimulationArtifact,
    Trace,
)
from activity_sos.entity.config_entity import ExploreLimits, ExplorerConfig, SimulationConfig
from activity_sos.entity.model_entity import Model, NodeKind
from activity_sos.entity.state_entity import TAU, ActivityPhase, ExecState, StepLabel
from activity_sos.exception.exception import ActivitySemanticsException, reraise
from activity_sos.logging.logger import logging
from activity_sos.utils.main_utils.utils import save_object, write_text_file

TERMINATED = "terminated"
DEADLOCK = "deadlock"
EXCEPTION = "exception"
UNEXPLORED = "unexplored"


# ================================
# 🏷️ Propositions
# ================================
def _persistent(node) -> bool:
    return node.kind is NodeKind.ACCEPT_EVENT and not node.inputs


def is_terminated(state: ExecState, index: InstanceIndex) -> bool:
    """Root no longer executing, or nothing left running and no token outside the root's output APNs."""
    if not state.activity(index.root_key).is_executing:
        return True
    running = [k for k, s in state.nodes if s.is_running and not _persistent(index.nodes[k].node)]
    results = {k for k in index.apns_of(index.root_key) if index.holder(k).direction == "out"}
    return not running and all(k in results for k, _ in state.holders)


def propositions(state: ExecState, index: InstanceIndex, terminal: bool) -> List[str]:
    view = macro_view(state, index)
    statuses = dict(view.nodes)
    props = []
    for key in sorted(index.nodes):
        if index.nodes[key].node.is_switch:
            continue
        status = statuses.get(key)
        props.append(f"executing({key})" if status is not None and status.is_running else f"idle({key})")
    for key, status in view.activities:
        if status.phase is ActivityPhase.EXCEPTION:
            props.append(f"{EXCEPTION}({key})")
    if terminal:
        props.append(TERMINATED if is_terminated(state, index) else DEADLOCK)
    return props


# ================================
# 🧮 Frontier expansion
# ================================
def _expand_batch(payload: bytes) -> bytes:
    """Worker entry point: dill payload in, dill payload out."""
    model, profile, complete, depth, states = dill.loads(payload)
    semantics = Semantics(model, profile, max_micro_depth=depth)
    return dill.dumps([semantics.successors(state, complete) for state in states])


def _chunks(items: Sequence, count: int) -> List[Sequence]:
    size = max(1, -(-len(items) // count))
    return [items[i:i + size] for i in range(0, len(items), size)]


class _Expander:
    def __init__(self, semantics: Semantics, complete: bool, jobs: int, executor: Optional[Executor]):
        self.semantics = semantics
        self.complete = complete
        self.jobs = jobs
        self.executor = executor

    def __call__(self, states: List[ExecState]) -> List[List[Transition]]:
        if self.executor is None or len(states) < 2 * self.jobs:
            return [self.semantics.successors(s, self.complete) for s in states]
        sem = self.semantics
        payloads = [
            dill.dumps((sem.model, sem.profile, self.complete, sem.max_micro_depth, list(chunk)))
            for chunk in _chunks(states, self.jobs)
        ]
        results: List[List[Transition]] = []
        for blob in self.executor.map(_expand_batch, payloads):
            results.extend(dill.loads(blob))
        return results


# ================================
# 🗺️ Exploration
# ================================
def explore(
    model: Model,
    profile: SemanticsProfile,
    limits: Optional[ExploreLimits] = None,
    mode: str = MODE_REDUCED,
    jobs: int = 1,
) -> KripkeStructure:
    """
    Reduced mode follows the transition closure; complete mode records every
    micro- and macro-step as its own edge. Hitting `max_states` stops the
    search and flags the structure as truncated; states it never expanded
    carry `unexplored` instead of a terminal proposition.
    """
    try:
        if mode not in (MODE_REDUCED, MODE_COMPLETE):
            raise ActivitySemanticsException(f"unknown exploration mode '{mode}'", sys)
        limits = limits or ExploreLimits()
        semantics = Semantics(model, profile, max_micro_depth=limits.max_micro_depth)
        executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
        try:
            expand = _Expander(semantics, mode == MODE_COMPLETE, jobs, executor)
            return _search(semantics, expand, limits, mode)
        finally:
            if executor is not None:
                executor.shutdown()
    except Exception as e:
        logging.error(f"Exploration failed: {e}")
        raise reraise(e)


def _search(semantics: Semantics, expand: _Expander, limits: ExploreLimits, mode: str) -> KripkeStructure:
    initial = semantics.initial_state()
    initial_key = fingerprint(initial)
    known: Dict[str, ExecState] = {initial_key: initial}
    edges: Set[Tuple[str, str, str]] = set()
    labels: Dict[str, StepLabel] = {}
    frontier = [initial_key]
    expanded: Set[str] = set()
    truncated = False
    level = 0

    while frontier:
        frontier.sort()
        logging.info(f"Level {level}: expanding {len(frontier)} states ({len(known)} known)")
        next_frontier = []
        for source, successors in zip(frontier, expand([known[k] for k in frontier])):
            dropped = False
            for label, target in successors:
                key = fingerprint(target)
                if key not in known:
                    if len(known) >= limits.max_states:
                        truncated = dropped = True
                        continue
                    known[key] = target
                    next_frontier.append(key)
                labels[str(label)] = label
                edges.add((source, str(label), key))
            if not dropped:
                expanded.add(source)
        frontier = next_frontier
        level += 1
        if truncated:
            logging.warning(f"State limit {limits.max_states} reached; structure truncated")
            break

    order = sorted(known)
    ids = {key: i for i, key in enumerate(order)}
    has_successor = {src for src, _, _ in edges}
    states = []
    for k in order:
        # states cut off by the limit are neither deadlocked nor terminated
        props = propositions(known[k], semantics.index, k in expanded and k not in has_successor)
        if k not in expanded:
            props.append(UNEXPLORED)
        states.append(KripkeState(ids[k], k, props, known[k]))
    transitions = sorted(((ids[src], labels[text], ids[dst]) for src, text, dst in edges), key=lambda t: (t[0], str(t[1]), t[2]))
    logging.info(f"Explored {len(states)} states and {len(transitions)} transitions ({mode})")
    return KripkeStructure(
        states=states,
        initial=ids[initial_key],
        transitions=transitions,
        truncated=truncated,
        meta={"root": semantics.model.root_activity.name, "profile": semantics.profile.name, "mode": mode},
    )


# ================================
# 🔚 Queries over explored structures
# ================================
def terminal_states(structure: KripkeStructure) -> List[int]:
    """States without successors, leaving out those a truncated search never expanded."""
    sources = {src for src, _, _ in structure.transitions}
    return [s.id for s in structure.states if s.id not in sources and UNEXPLORED not in s.props]


def terminal_partition(structure: KripkeStructure) -> Dict[str, List[int]]:
    """Terminal states split into terminated, deadlock and exception."""
    parts: Dict[str, List[int]] = {TERMINATED: [], DEADLOCK: [], EXCEPTION: []}
    for i in terminal_states(structure):
        props = structure.states[i].props
        if any(p.startswith(f"{EXCEPTION}(") for p in props):
            parts[EXCEPTION].append(i)
        elif TERMINATED in props:
            parts[TERMINATED].append(i)
        else:
            parts[DEADLOCK].append(i)
    return parts


def collapse_tau_loops(structure: KripkeStructure) -> KripkeStructure:
    """Drops τ self-loops; they only change bookkeeping that the state view ignores."""
    kept = [(s, label, d) for s, label, d in structure.transitions if not (s == d and label == TAU)]
    return KripkeStructure(structure.states, structure.initial, kept, structure.truncated, dict(structure.meta))


def visibility_violations(structure: KripkeStructure, index: InstanceIndex) -> Dict[int, List[str]]:
    """Switch-node conditions broken by any stored state, keyed by state id."""
    found = {}
    for s in structure.states:
        if s.state is None:
            continue
        problems = switch_condition_violations(s.state, index)
        if problems:
            found[s.id] = problems
    return found


def random_trace(
    model: Model,
    profile: SemanticsProfile,
    seed: int = 0,
    max_len: int = MAX_TRACE_LEN,
    limits: Optional[ExploreLimits] = None,
) -> Trace:
    """Uniformly picks one reduced transition per step with a seeded generator."""
    try:
        limits = limits or ExploreLimits()
        semantics = Semantics(model, profile, max_micro_depth=limits.max_micro_depth)
        rng = np.random.default_rng(seed)
        state = semantics.initial_state()
        trace = Trace(states=[state], labels=[])
        while len(trace.labels) < max_len:
            successors = semantics.transitions(state)
            if not successors:
                trace.terminal = True
                break
            label, state = successors[int(rng.integers(len(successors)))]
            trace.labels.append(label)
            trace.states.append(state)
        logging.info(f"Random trace with seed {seed}: {len(trace)} steps, terminal={trace.terminal}")
        return trace
    except Exception as e:
        raise reraise(e)


# ================================
# 🧩 Components
# ================================
class Explorer:
    def __init__(self, model: Model, profile: SemanticsProfile, explorer_config: ExplorerConfig):
        self.model = model
        self.profile = profile
        self.explorer_config = explorer_config

    def initiate_exploration(self) -> ExplorationArtifact:
        try:
            config = self.explorer_config
            logging.info(f"Exploring in {config.mode} mode with {config.jobs} job(s)")
            structure = explore(self.model, self.profile, config.limits, config.mode, config.jobs)
            if config.collapse_tau:
                structure = collapse_tau_loops(structure)
            write_text_file(config.output_file_path, emit(structure, config.output_format, config.dump_states))
            save_object(config.object_file_path, structure)
            return ExplorationArtifact(structure, config.output_file_path, config.object_file_path)
        except Exception as e:
            raise reraise(e)


class Simulator:
    def __init__(self, model: Model, profile: SemanticsProfile, simulation_config: SimulationConfig, limits: Optional[ExploreLimits] = None):
        self.model = model
        self.profile = profile
        self.simulation_config = simulation_config
        self.limits = limits

    def initiate_simulation(self) -> SimulationArtifact:
        try:
            config = self.simulation_config
            trace = random_trace(self.model, self.profile, config.seed, config.max_len, self.limits)
            write_text_file(config.trace_file_path, trace.render() + "\n")
            return SimulationArtifact(trace, config.trace_file_path)
        except Exception as e:
            raise reraise(e)
