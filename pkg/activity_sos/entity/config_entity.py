# ================================
# 📦 Imports
# ================================
import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, Optional

from activity_sos.constant import semantics


# ================================
# 📏 Exploration Limits
# ================================
@dataclass(frozen=True)
class ExploreLimits:
    """
    Bounds for state-space construction.

    Attributes:
    ----------
    max_states : int
        Exploration stops (truncated) once this many states are known.
    max_micro_depth : int
        Micro-step states examined per transition closure before giving up.
    max_trace_len : int
        Longest random trace produced by the simulator.
    """
    max_states: int = semantics.MAX_STATES
    max_micro_depth: int = semantics.MAX_MICRO_DEPTH
    max_trace_len: int = semantics.MAX_TRACE_LEN

    def __post_init__(self):
        for name in ("max_states", "max_micro_depth", "max_trace_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


# ================================
# ⚙️ Analysis Pipeline Configuration
# ================================
class AnalysisPipelineConfig:
    """
    Configuration for one analysis run.

    Attributes:
    ----------
    pipeline_name : str
        Name used in logs and artifact folders.
    artifact_dir : str
        Timestamped folder receiving the run's artifacts.
    timestamp : str
        Timestamp string used for folder naming.
    """

    def __init__(self, timestamp: Optional[datetime] = None, artifact_root: str = semantics.ARTIFACT_DIR):
        timestamp_str = (timestamp or datetime.now()).strftime("%d_%m_%Y_%H_%M_%S")
        self.pipeline_name: str = semantics.PIPELINE_NAME
        self.artifact_name: str = artifact_root
        self.artifact_dir: str = os.path.join(self.artifact_name, timestamp_str)
        self.timestamp: str = timestamp_str


# ================================
# ⚙️ Model Validation Configuration
# ================================
class ModelValidationConfig:
    """
    Attributes:
    ----------
    validation_dir : str
        Folder for validation outputs.
    report_file_path : str
        YAML report listing every violation.
    schema_file_path : str
        Declarative document schema.
    """

    def __init__(self, pipeline_config: AnalysisPipelineConfig):
        self.validation_dir: str = os.path.join(pipeline_config.artifact_dir, semantics.VALIDATION_DIR_NAME)
        self.report_file_path: str = os.path.join(self.validation_dir, semantics.VALIDATION_REPORT_FILE_NAME)
        self.schema_file_path: str = semantics.SCHEMA_FILE_PATH


# ================================
# ⚙️ Explorer Configuration
# ================================
class ExplorerConfig:
    """
    Configuration for state-space exploration.

    Attributes:
    ----------
    mode : str
        "reduced" (transition closure) or "complete" (every micro/macro step).
    limits : ExploreLimits
        State and closure bounds.
    jobs : int
        Worker processes for frontier expansion (1 = in-process).
    output_format : str
        "json" or "dot".
    dump_states : bool
        Include full canonical states in JSON output.
    collapse_tau : bool
        Drop τ self-loops from the emitted structure.
    output_file_path : str
        Where the emitted structure is written.
    object_file_path : str
        dill snapshot of the explored structure.
    """

    def __init__(
        self,
        pipeline_config: AnalysisPipelineConfig,
        mode: str = semantics.MODE_REDUCED,
        limits: Optional[ExploreLimits] = None,
        jobs: int = 1,
        output_format: str = semantics.FORMAT_JSON,
        dump_states: bool = False,
        collapse_tau: bool = False,
        output_file_path: Optional[str] = None,
    ):
        self.exploration_dir: str = os.path.join(pipeline_config.artifact_dir, semantics.EXPLORATION_DIR_NAME)
        self.mode: str = mode
        self.limits: ExploreLimits = limits or ExploreLimits()
        if int(jobs) < 1:
            raise ValueError(f"jobs must be at least 1, got {jobs}")
        self.jobs: int = int(jobs)
        self.output_format: str = output_format
        self.dump_states: bool = dump_states
        self.collapse_tau: bool = collapse_tau
        self.output_file_path: str = output_file_path or os.path.join(
            self.exploration_dir, semantics.EXPLORATION_FILE_NAME
        )
        self.object_file_path: str = os.path.join(self.exploration_dir, semantics.EXPLORATION_OBJECT_FILE_NAME)


# ================================
# ⚙️ Simulation Configuration
# ================================
class SimulationConfig:
    """
    Attributes:
    ----------
    seed : int
        Seed of the trace generator.
    max_len : int
        Longest trace.
    trace_file_path : str
        Where the rendered trace is saved.
    """

    def __init__(self, pipeline_config: AnalysisPipelineConfig, seed: int = 0, max_len: int = semantics.MAX_TRACE_LEN):
        self.simulation_dir: str = os.path.join(pipeline_config.artifact_dir, semantics.SIMULATION_DIR_NAME)
        self.seed: int = seed
        self.max_len: int = max_len
        self.trace_file_path: str = os.path.join(self.simulation_dir, semantics.TRACE_FILE_NAME)


# ================================
# ⚙️ Conformance Configuration
# ================================
class ConformanceConfig:
    """
    Attributes:
    ----------
    abstract_profile : str
        Profile spec of the simulating (reference) structure.
    concrete_profile : str
        Profile spec of the simulated structure.
    hide_tau : bool
        Weak simulation: τ and exeTime steps are internal.
    verdict_file_path : str
        JSON verdict with counterexample.
    """

    def __init__(
        self,
        pipeline_config: AnalysisPipelineConfig,
        abstract_profile: str = semantics.PROFILE_REFERENCE,
        concrete_profile: str = semantics.PROFILE_REFERENCE,
        hide_tau: bool = False,
    ):
        self.conformance_dir: str = os.path.join(pipeline_config.artifact_dir, semantics.CONFORMANCE_DIR_NAME)
        self.abstract_profile: str = abstract_profile
        self.concrete_profile: str = concrete_profile
        self.hide_tau: bool = hide_tau
        self.verdict_file_path: str = os.path.join(self.conformance_dir, semantics.VERDICT_FILE_NAME)


@dataclass
class Invocation:
    """
    One parsed command line.

    Attributes:
        command (str): validate | explore | simulate | check.
        model_path (str): model document.
        profile (str): comma separated profile spec.
        options (dict): remaining flags after config-file and env merging.
    """
    command: str
    model_path: str
    profile: str = semantics.PROFILE_REFERENCE
    options: Dict[str, object] = field(default_factory=dict)
