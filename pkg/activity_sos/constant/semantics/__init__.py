# ================================
# 📦 Imports
# ================================
import math
import os
from typing import Tuple


# ================================
# 🎯 Common Constants
# ================================
"""
Constants shared by every stage of the engine: parsing, exploration,
conformance checking and the command line.
"""

PIPELINE_NAME: str = "ActivitySOS"

# Root folder for run artifacts (explorations, traces, verdicts)
ARTIFACT_DIR: str = "Artifacts"

# Declarative schema of the model document, shipped inside the package
SCHEMA_FILE_PATH: str = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), "data_schema", "model_schema.yaml")

# Unbounded multiplicities ("*" in documents)
UNBOUNDED: float = math.inf
UNBOUNDED_TEXT: str = "*"

# Nested call instances deeper than this are rejected
MAX_CALL_DEPTH: int = 8

# Separators used in instance keys
PATH_SEPARATOR: str = "/"
PIN_SEPARATOR: str = "."
ACTIVITY_SEPARATOR: str = "@"


# ================================
# 🧩 Model Defaults
# ================================
DEFAULT_UPPER_BOUND: float = UNBOUNDED
DEFAULT_UPPER: float = 1
DEFAULT_LOWER: int = 1
DEFAULT_WEIGHT: float = 1
DEFAULT_ORDERING: str = "FIFO"
DEFAULT_GUARD: str = "true"
DEFAULT_EVENT_POOL: str = "default"
DEFAULT_EXECUTION_TIME: int = 1
DEFAULT_PARAMETER_SET: str = "default"

CONTROL_TYPE: str = "ControlToken"
BUILTIN_TYPES: Tuple[str, ...] = ("ControlToken", "Int", "Bool", "Str", "Any")

# names given to pins synthesised for control flows
CONTROL_IN_PIN: str = "ctl_in"
CONTROL_OUT_PIN: str = "ctl_out"
FRESH_IN_PREFIX: str = "from_"
FRESH_OUT_PREFIX: str = "to_"


# ================================
# 📏 Exploration Limits
# ================================
MAX_STATES: int = 100_000
MAX_MICRO_DEPTH: int = 10_000
MAX_TRACE_LEN: int = 1_000

# Environment variable mirroring --jobs
JOBS_ENV_VAR: str = "ACTIVITY_SOS_JOBS"


# ================================
# 📜 Rule Catalog Ids
# ================================
ACTION_INVOKE: str = "A1"
ACTION_TERMINATE: str = "A2"
INITIAL_TERMINATE: str = "I1"
FORK_CONSUME: str = "F1"
FORK_OFFER: str = "F2"
JOIN_INVOKE: str = "J1"
JOIN_ORDER_ADD: str = "J2"
JOIN_ORDER_REMOVE: str = "J3"
JOIN_TERMINATE: str = "J4"
MERGE_TRANSFER: str = "M1"
DECISION_INVOKE: str = "D1"
DECISION_TERMINATE: str = "D2"
DECISION_EVAL_INPUT: str = "D3"
DECISION_EVAL_DFLOW: str = "D4"
DECISION_EVAL_DBEHAVIOR: str = "D5"
DECISION_INVOKE_DBEHAVIOR: str = "D6"
DECISION_DBEHAVIOR_TERMINATE: str = "D7"
FLOWFINAL_INVOKE: str = "FF1"
FLOWFINAL_TERMINATE: str = "FF2"
FINAL_ASYNC: str = "AF1"
FINAL_SYNC: str = "AF2"
ACCEPT_INVOKE: str = "AE1"
ACCEPT_RECEIVE_TERMINATE: str = "AE2"
ACCEPT_RECEIVE_PERSISTENT: str = "AE3"
SEND_INVOKE: str = "S1"
SEND_TERMINATE: str = "S2"
CALL_INVOKE_MIXED: str = "C1"
CALL_INVOKE_STREAMING: str = "C2"
CALL_STREAM_IN: str = "C3"
CALL_STREAM_OUT: str = "C4"
ACTIVITY_INVOKE: str = "V1"
ACTIVITY_TERMINATE: str = "V2"
OUT_PARAM_TRANSFER: str = "V3"
EXCEPTION_THROW: str = "X1"
HANDLER_INVOKE: str = "X2"
EXCEPTION_PROPAGATE: str = "X3"
EXCEPTION_ASYNC_DROP: str = "X4"
HANDLER_RESULT: str = "X5"

REFERENCE_RULE_IDS: Tuple[str, ...] = (
    "A1", "A2", "I1", "F1", "F2", "J1", "J2", "J3", "J4", "M1",
    "D1", "D2", "D3", "D4", "D5", "D6", "D7", "FF1", "FF2", "AF1",
    "AF2", "AE1", "AE2", "AE3", "S1", "S2", "C1", "C2", "C3", "C4",
    "V1", "V2", "V3", "X1", "X2", "X3", "X4", "X5",
)

# rules contributed by extension profiles
EDGE_TRANSFER: str = "R1"
EXECUTION_TIME: str = "EX"
CLOCK_TICK: str = "TK"


# ================================
# 🧪 Profiles
# ================================
PROFILE_REFERENCE: str = "reference"
PROFILE_EXEC_TIME: str = "exec-time"
PROFILE_SINGLE_CORE: str = "single-core"
PROFILE_VAR1: str = "var1"
PROFILE_VAR2: str = "var2"
PROFILE_NAMES: Tuple[str, ...] = (
    PROFILE_REFERENCE, PROFILE_EXEC_TIME, PROFILE_SINGLE_CORE, PROFILE_VAR1, PROFILE_VAR2,
)

CLOSURE_STANDARD: str = "standard"
CLOSURE_EAGER_TRANSFER: str = "eager-transfer"

SINGLE_CORE_PREMISE: str = "single-core"


# ================================
# 🗺️ Exploration Modes & Formats
# ================================
MODE_REDUCED: str = "reduced"
MODE_COMPLETE: str = "complete"
FORMAT_JSON: str = "json"
FORMAT_DOT: str = "dot"


# ================================
# 🔚 Exit Codes
# ================================
EXIT_OK: int = 0
EXIT_DOMAIN_FAILURE: int = 1
EXIT_USAGE_ERROR: int = 2


# ================================
# 💾 Artifact Layout
# ================================
VALIDATION_DIR_NAME: str = "validation"
VALIDATION_REPORT_FILE_NAME: str = "report.yaml"
EXPLORATION_DIR_NAME: str = "exploration"
EXPLORATION_FILE_NAME: str = "kripke.json"
EXPLORATION_OBJECT_FILE_NAME: str = "kripke.dill"
SIMULATION_DIR_NAME: str = "simulation"
TRACE_FILE_NAME: str = "trace.txt"
CONFORMANCE_DIR_NAME: str = "conformance"
VERDICT_FILE_NAME: str = "verdict.json"


# ================================
# 🔑 JSON Keys
# ================================
KEY_STATES: str = "states"
KEY_TRANSITIONS: str = "transitions"
KEY_INITIAL: str = "initial"
KEY_TRUNCATED: str = "truncated"
KEY_ID: str = "id"
KEY_FINGERPRINT: str = "fingerprint"
KEY_PROPS: str = "props"
KEY_SRC: str = "src"
KEY_LABEL: str = "label"
KEY_DST: str = "dst"
KEY_STATE: str = "state"
KEY_META: str = "meta"
