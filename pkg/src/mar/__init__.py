"""Retrieval-augmented hierarchical agent loop for mobile UI automation.

Public surface: the action model, retrieval, the four reasoning roles, the
scenario simulator, the task loop, evaluation metrics, and the KB pipeline.
"""

from .actions import (
    AtomicAction,
    Back,
    Enter,
    Home,
    OpenApp,
    OutcomeLabel,
    Swipe,
    Tap,
    TapTypeEnter,
    TypeText,
    Wait,
    action_name,
    parse_action,
    render_action,
    validate_action,
)
from .embedding import FallbackEmbedder, HttpEmbedder, cosine_similarity, make_embedder
from .memory import (
    ActionLogEntry,
    BoundingBox,
    ErrorLogEntry,
    PerceptionResult,
    Screenshot,
    Subtask,
    TaskInstruction,
    WorkingMemory,
)
from .metrics import (
    MetricsRecord,
    compute_cr,
    compute_efficiency,
    compute_oa,
    compute_ra,
    judge_sr,
)
from .orchestrator import RunConfig, detect_repetition, run_task, update_error_flag
from .retrieval import (
    ManagerDoc,
    ManagerKB,
    OperatorDoc,
    OperatorKBRegistry,
    manager_retrieve,
    operator_retrieve,
)
from .scenario import Scenario, load_scenario
from .simulator import DeviceState, SimulatedDevice, sim_execute, sim_perceive
from .trajectory import Trajectory, load_trajectory, normalize_trajectory_text

__version__ = "0.1.0"

__all__ = [
    "ActionLogEntry",
    "AtomicAction",
    "Back",
    "BoundingBox",
    "DeviceState",
    "Enter",
    "ErrorLogEntry",
    "FallbackEmbedder",
    "Home",
    "HttpEmbedder",
    "ManagerDoc",
    "ManagerKB",
    "MetricsRecord",
    "OpenApp",
    "OperatorDoc",
    "OperatorKBRegistry",
    "OutcomeLabel",
    "PerceptionResult",
    "RunConfig",
    "Scenario",
    "Screenshot",
    "SimulatedDevice",
    "Subtask",
    "Swipe",
    "Tap",
    "TapTypeEnter",
    "TaskInstruction",
    "Trajectory",
    "TypeText",
    "Wait",
    "WorkingMemory",
    "action_name",
    "compute_cr",
    "compute_efficiency",
    "compute_oa",
    "compute_ra",
    "cosine_similarity",
    "detect_repetition",
    "judge_sr",
    "load_scenario",
    "load_trajectory",
    "make_embedder",
    "manager_retrieve",
    "normalize_trajectory_text",
    "operator_retrieve",
    "parse_action",
    "render_action",
    "run_task",
    "sim_execute",
    "sim_perceive",
    "update_error_flag",
    "validate_action",
]
