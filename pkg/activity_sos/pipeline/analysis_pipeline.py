import sys
from typing import Mapping, Optional

from activity_sos.components.conformance import Conformance
from activity_sos.components.explorer import Explorer, Simulator
from activity_sos.components.model_parser import load_model
from activity_sos.components.model_validation import ModelValidation, require_valid
from activity_sos.components.profiles import SemanticsProfile, parse_profile_spec
from activity_sos.constant import semantics
from activity_sos.entity.artifact_entity import (
    ConformanceArtifact,
    ExplorationArtifact,
    SimulationArtifact,
    ValidationArtifact,
)
from activity_sos.entity.config_entity import (
    AnalysisPipelineConfig,
    ConformanceConfig,
    ExploreLimits,
    ExplorerConfig,
    ModelValidationConfig,
    SimulationConfig,
)
from activity_sos.entity.model_entity import Model
from activity_sos.exception.exception import ActivitySemanticsException
from activity_sos.logging.logger import logging


class AnalysisPipeline:
    """
    One model, analysed stage by stage. Each `start_*` method builds its
    stage config from the shared pipeline config, runs the component and
    returns the component's artifact.
    """

    def __init__(
        self,
        model_path: str,
        timing: Optional[Mapping[str, int]] = None,
        limits: Optional[ExploreLimits] = None,
        jobs: int = 1,
        artifact_root: str = semantics.ARTIFACT_DIR,
        model: Optional[Model] = None,
    ):
        try:
            self.analysis_pipeline_config = AnalysisPipelineConfig(artifact_root=artifact_root)
            self.model_path = model_path
            self.model = model if model is not None else load_model(model_path)
            self.timing = timing
            self.limits = limits or ExploreLimits()
            if int(jobs) < 1:
                raise ValueError(f"jobs must be at least 1, got {jobs}")
            self.jobs = int(jobs)
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def profile(self, spec: str, implicit_timing: bool = True) -> SemanticsProfile:
        """With `implicit_timing` off, the timing table only applies to specs naming exec-time."""
        names = [part.strip() for part in spec.split(",")]
        timing = self.timing if implicit_timing or semantics.PROFILE_EXEC_TIME in names else None
        return parse_profile_spec(spec, timing, self.model)

    def start_validation(self, write_report: bool = True) -> ValidationArtifact:
        try:
            model_validation_config = ModelValidationConfig(self.analysis_pipeline_config)
            logging.info(f"Validating model {self.model_path}")
            model_validation = ModelValidation(self.model, model_validation_config)
            model_validation_artifact = model_validation.initiate_model_validation(write_report)
            logging.info(f"Model validation completed and artifact: {model_validation_artifact.report_file_path}")
            return model_validation_artifact
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def start_exploration(
        self,
        profile: str = semantics.PROFILE_REFERENCE,
        mode: str = semantics.MODE_REDUCED,
        output_format: str = semantics.FORMAT_JSON,
        dump_states: bool = False,
        collapse_tau: bool = False,
        output_file_path: Optional[str] = None,
    ) -> ExplorationArtifact:
        try:
            require_valid(self.model)
            explorer_config = ExplorerConfig(
                self.analysis_pipeline_config,
                mode=mode,
                limits=self.limits,
                jobs=self.jobs,
                output_format=output_format,
                dump_states=dump_states,
                collapse_tau=collapse_tau,
                output_file_path=output_file_path,
            )
            explorer = Explorer(self.model, self.profile(profile), explorer_config)
            exploration_artifact = explorer.initiate_exploration()
            logging.info(f"Exploration completed and artifact: {exploration_artifact.output_file_path}")
            return exploration_artifact
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def start_simulation(
        self, profile: str = semantics.PROFILE_REFERENCE, seed: int = 0, max_len: Optional[int] = None
    ) -> SimulationArtifact:
        try:
            require_valid(self.model)
            simulation_config = SimulationConfig(
                self.analysis_pipeline_config, seed=seed, max_len=max_len or self.limits.max_trace_len
            )
            simulator = Simulator(self.model, self.profile(profile), simulation_config, self.limits)
            simulation_artifact = simulator.initiate_simulation()
            logging.info(f"Simulation completed and artifact: {simulation_artifact.trace_file_path}")
            return simulation_artifact
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)

    def start_check(
        self,
        abstract: str = semantics.PROFILE_REFERENCE,
        concrete: str = semantics.PROFILE_REFERENCE,
        hide_tau: bool = False,
    ) -> ConformanceArtifact:
        try:
            require_valid(self.model)
            conformance_config = ConformanceConfig(self.analysis_pipeline_config, abstract, concrete, hide_tau)
            conformance = Conformance(
                self.model,
                self.profile(abstract, implicit_timing=False),
                self.profile(concrete, implicit_timing=False),
                conformance_config,
                self.limits,
                self.jobs,
            )
            conformance_artifact = conformance.initiate_conformance_check()
            logging.info(f"Conformance check completed and artifact: {conformance_artifact.verdict_file_path}")
            return conformance_artifact
        except ActivitySemanticsException:
            raise
        except Exception as e:
            raise ActivitySemanticsException(e, sys)
