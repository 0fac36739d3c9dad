# ============================ #
#   Analysis Artifact Classes
# ============================ #

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from activity_sos.entity.state_entity import ExecState, StepLabel


# ============================ #
#   Validation
# ============================ #
@dataclass(frozen=True)
class Violation:
    """
    One violated well-formedness invariant.

    Attributes:
        code (str): stable violation code, e.g. "fork-single-input".
        element (str): id of the offending element.
        message (str): human readable detail.
    """
    code: str
    element: str
    message: str = ""


@dataclass
class ValidationReport:
    """
    Result of validate_model. Empty ⇔ the model is well-formed.

    Attributes:
        violations (list): every violated invariant, sorted by (code, element).
    """
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_clean(self) -> bool:
        return not self.violations

    def codes(self) -> Set[str]:
        return {v.code for v in self.violations}

    def to_dict(self) -> Dict:
        return {
            "clean": self.is_clean,
            "violations": [{"code": v.code, "element": v.element, "message": v.message} for v in self.violations],
        }


@dataclass
class ValidationArtifact:
    report: ValidationReport
    report_file_path: str


# ============================ #
#   Exploration
# ============================ #
@dataclass
class KripkeState:
    """
    Attributes:
        id (int): index after canonical sorting.
        fingerprint (str): hex digest of the full state.
        props (list): atomic propositions holding in the state.
        state (ExecState): full state, None when loaded from a file without states.
    """
    id: int
    fingerprint: str
    props: List[str] = field(default_factory=list)
    state: Optional[ExecState] = None


@dataclass
class KripkeStructure:
    """
    Labelled state graph.

    Attributes:
        states (list): KripkeState by index.
        initial (int): index of the initial state.
        transitions (list): (src, label, dst) triples, sorted.
        truncated (bool): exploration stopped on a limit.
        meta (dict): model, profile and mode the structure was built from.
    """
    states: List[KripkeState]
    initial: int
    transitions: List[Tuple[int, StepLabel, int]]
    truncated: bool = False
    meta: Dict[str, str] = field(default_factory=dict)

    def successors(self, index: int) -> List[Tuple[StepLabel, int]]:
        return [(label, dst) for src, label, dst in self.transitions if src == index]

    def labels(self) -> Set[StepLabel]:
        return {label for _, label, _ in self.transitions}

    def adjacency(self) -> Dict[int, List[Tuple[StepLabel, int]]]:
        out: Dict[int, List[Tuple[StepLabel, int]]] = {s.id: [] for s in self.states}
        for src, label, dst in self.transitions:
            out[src].append((label, dst))
        return out


@dataclass
class ExplorationArtifact:
    structure: KripkeStructure
    output_file_path: str
    object_file_path: str


# ============================ #
#   Simulation (random traces)
# ============================ #
@dataclass
class Trace:
    """
    Alternating state₀, label₁, state₁, … sequence.

    Attributes:
        states (list): visited states, one more than labels.
        labels (list): labels of the taken transitions.
        terminal (bool): last state has no outgoing transition.
    """
    states: List[ExecState]
    labels: List[StepLabel]
    terminal: bool = False

    def __len__(self) -> int:
        return len(self.labels)

    def render(self) -> str:
        return "\n".join(str(label) for label in self.labels)


@dataclass
class SimulationArtifact:
    trace: Trace
    trace_file_path: str


# ============================ #
#   Conformance
# ============================ #
@dataclass
class SimulationResult:
    """
    Verdict of simulates(abstract, concrete).

    Attributes:
        holds (bool): concrete ≤ abstract.
        relation (set): (concrete, abstract) state pairs of the greatest simulation, when it holds.
        counterexample (list): shortest distinguishing label sequence, when it fails.
        weak (bool): τ/exeTime steps were hidden.
        trace_included (bool): the counterexample only refutes simulation, not trace inclusion.
    """
    holds: bool
    relation: Set[Tuple[int, int]] = field(default_factory=set)
    counterexample: List[StepLabel] = field(default_factory=list)
    weak: bool = False
    trace_included: bool = False

    def to_dict(self) -> Dict:
        return {
            "holds": self.holds,
            "mode": "weak" if self.weak else "strong",
            "relation_size": len(self.relation),
            "counterexample": [str(label) for label in self.counterexample],
            "trace_included": self.trace_included,
        }

    def summary(self) -> str:
        if self.holds:
            return f"simulation holds ({'weak' if self.weak else 'strong'}, {len(self.relation)} related pairs)"
        trace = " ".join(str(label) for label in self.counterexample) or "<initial>"
        return f"simulation fails: concrete trace not matched: {trace}"


@dataclass
class ConformanceArtifact:
    result: SimulationResult
    verdict_file_path: str
