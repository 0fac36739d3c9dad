# ============================ #
#   Command Line Front End
# ============================ #

"""
activity-sos validate MODEL
activity-sos explore  MODEL [--profile P] [--mode reduced|complete] [--out FILE] [--format json|dot]
activity-sos simulate MODEL [--profile P] [--seed S] [--max-len L]
activity-sos check    MODEL --abstract P1 --concrete P2 [--hide-tau]

Exit codes: 0 success, 1 domain failure (invalid model, simulation fails),
2 usage or IO error.
"""
import argparse
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from activity_sos.components.emitter import emit
from activity_sos.components.explorer import terminal_partition
from activity_sos.constant import semantics
from activity_sos.entity.config_entity import ExploreLimits, Invocation
from activity_sos.exception.exception import (
    ActivitySemanticsException,
    AlphabetMismatchError,
    ModelParseError,
    ProfileError,
)
from activity_sos.logging.logger import logging
from activity_sos.pipeline.analysis_pipeline import AnalysisPipeline
from activity_sos.utils.main_utils.utils import dump_json, read_yaml_file, write_text_file

COMMANDS = ("validate", "explore", "simulate", "check")

# option name -> default, applied after flags, config file and environment
DEFAULTS: Dict[str, Any] = {
    "profile": semantics.PROFILE_REFERENCE,
    "mode": semantics.MODE_REDUCED,
    "format": semantics.FORMAT_JSON,
    "jobs": os.cpu_count() or 1,
    "seed": 0,
    "max_len": semantics.MAX_TRACE_LEN,
    "max_states": semantics.MAX_STATES,
    "max_micro_depth": semantics.MAX_MICRO_DEPTH,
    "hide_tau": False,
    "dump_states": False,
    "collapse_tau": False,
    "abstract": semantics.PROFILE_REFERENCE,
    "concrete": semantics.PROFILE_REFERENCE,
    "timing": None,
    "out": None,
    "artifacts": semantics.ARTIFACT_DIR,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="activity-sos", description="Executable semantics for UML activity diagrams")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("model", help="model document (YAML)")
    # every option defaults to None so that config-file values can fill the gaps
    parser.add_argument("--profile", help="comma list of reference, exec-time, single-core, var1, var2")
    parser.add_argument("--mode", choices=(semantics.MODE_REDUCED, semantics.MODE_COMPLETE))
    parser.add_argument("--out", help="write the structure or verdict here instead of standard output")
    parser.add_argument("--format", choices=(semantics.FORMAT_JSON, semantics.FORMAT_DOT))
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-len", dest="max_len", type=int)
    parser.add_argument("--max-states", dest="max_states", type=int)
    parser.add_argument("--max-micro-depth", dest="max_micro_depth", type=int)
    parser.add_argument("--hide-tau", dest="hide_tau", action="store_const", const=True)
    parser.add_argument("--dump-states", dest="dump_states", action="store_const", const=True)
    parser.add_argument("--collapse-tau", dest="collapse_tau", action="store_const", const=True)
    parser.add_argument("--timing", help="YAML table of node id -> execution time")
    parser.add_argument("--config", help="YAML file supplying any of the options above")
    parser.add_argument("--abstract", help="profile of the simulating structure (check)")
    parser.add_argument("--concrete", help="profile of the simulated structure (check)")
    parser.add_argument("--artifacts", help="root folder for run artifacts")
    return parser


def _read_yaml(path: str, what: str) -> Any:
    if not os.path.isfile(path):
        raise UsageError(f"{what} file '{path}' does not exist")
    return read_yaml_file(path)


def resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags win over the config file, the file over the environment, the environment over defaults."""
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "model", "config") and v is not None}
    from_file: Dict[str, Any] = {}
    if args.config:
        document = _read_yaml(args.config, "config") or {}
        if not isinstance(document, dict):
            raise UsageError("config file must be a mapping")
        from_file = {str(k).replace("-", "_"): v for k, v in document.items()}
        unknown = sorted(set(from_file) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys {unknown}")
    from_env: Dict[str, Any] = {}
    if os.getenv(semantics.JOBS_ENV_VAR):
        try:
            from_env["jobs"] = int(os.environ[semantics.JOBS_ENV_VAR])
        except ValueError:
            raise UsageError(f"{semantics.JOBS_ENV_VAR} must be an integer")
    options = dict(DEFAULTS)
    options.update(from_env)
    options.update(from_file)
    options.update(flags)
    try:
        jobs = int(options["jobs"])
    except (TypeError, ValueError):
        raise UsageError(f"jobs must be an integer, got {options['jobs']!r}")
    if jobs < 1:
        raise UsageError(f"jobs must be at least 1, got {jobs}")
    options["jobs"] = jobs
    return options


def _timing_table(value: Any) -> Optional[Dict[str, int]]:
    if value is None:
        return None
    table = _read_yaml(value, "timing") if isinstance(value, str) else value
    if not isinstance(table, dict):
        raise UsageError("timing table must map node ids to execution times")
    try:
        return {str(k): int(v) for k, v in table.items()}
    except (TypeError, ValueError):
        raise UsageError("execution times must be integers")


def _write(options: Dict[str, Any], text: str) -> None:
    if options["out"]:
        write_text_file(options["out"], text)
    else:
        sys.stdout.write(text)


def _execute(invocation: Invocation) -> int:
    options = invocation.options
    if not os.path.isfile(invocation.model_path):
        raise UsageError(f"model file '{invocation.model_path}' does not exist")
    try:
        limits = ExploreLimits(
            max_states=int(options["max_states"]),
            max_micro_depth=int(options["max_micro_depth"]),
            max_trace_len=int(options["max_len"]),
        )
    except ValueError as e:
        raise UsageError(str(e))
    pipeline = AnalysisPipeline(
        invocation.model_path,
        timing=_timing_table(options["timing"]),
        limits=limits,
        jobs=int(options["jobs"]),
        artifact_root=options["artifacts"],
    )

    if invocation.command == "validate":
        report = pipeline.start_validation().report
        sys.stdout.write("model is well-formed\n" if report.is_clean else "")
        for v in report.violations:
            sys.stdout.write(f"{v.code} {v.element}: {v.message}\n")
        return semantics.EXIT_OK if report.is_clean else semantics.EXIT_DOMAIN_FAILURE

    report = pipeline.start_validation().report
    if not report.is_clean:
        for v in report.violations:
            sys.stderr.write(f"{v.code} {v.element}: {v.message}\n")
        return semantics.EXIT_DOMAIN_FAILURE

    if invocation.command == "explore":
        artifact = pipeline.start_exploration(
            profile=invocation.profile,
            mode=options["mode"],
            output_format=options["format"],
            dump_states=bool(options["dump_states"]),
            collapse_tau=bool(options["collapse_tau"]),
            output_file_path=options["out"],
        )
        structure = artifact.structure
        if not options["out"]:
            sys.stdout.write(emit(structure, options["format"], bool(options["dump_states"])))
        parts = terminal_partition(structure)
        sys.stderr.write(
            f"{len(structure.states)} states, {len(structure.transitions)} transitions, "
            f"{len(parts['terminated'])} terminated, {len(parts['deadlock'])} deadlock, "
            f"{len(parts['exception'])} exception{' (truncated)' if structure.truncated else ''}\n"
        )
        return semantics.EXIT_OK

    if invocation.command == "simulate":
        trace = pipeline.start_simulation(invocation.profile, int(options["seed"]), int(options["max_len"])).trace
        _write(options, trace.render() + "\n")
        return semantics.EXIT_OK

    result = pipeline.start_check(options["abstract"], options["concrete"], bool(options["hide_tau"])).result
    sys.stdout.write(result.summary() + "\n")
    if options["out"]:
        write_text_file(options["out"], dump_json(result.to_dict()))
    return semantics.EXIT_OK if result.holds else semantics.EXIT_DOMAIN_FAILURE


def run(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        options = resolve_options(args)
        invocation = Invocation(args.command, args.model, str(options["profile"]), options)
        logging.info(f"Command line: {invocation.command} {invocation.model_path} profile={invocation.profile}")
        return _execute(invocation)
    except (UsageError, ModelParseError, ProfileError, AlphabetMismatchError) as e:
        logging.error(f"Usage error: {e}")
        sys.stderr.write(f"error: {e}\n")
        return semantics.EXIT_USAGE_ERROR
    except ActivitySemanticsException as e:
        logging.error(f"Analysis failed: {e}")
        sys.stderr.write(f"error: {e.error_message}\n")
        return semantics.EXIT_DOMAIN_FAILURE


def main() -> None:
    sys.exit(run())
