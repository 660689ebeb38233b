from modelshim.config import ConfigurationError, ShimConfig, load_config
from modelshim.models import (
    BINDABLE_STAGES,
    ModelLoadError,
    Serialized,
    TASK_CODES,
    TaskScorer,
    StandinModel,
    WIRE_STAGES,
    load_stage_model,
)
from modelshim.server import ShimState, build_state, create_app

__all__ = [
    "BINDABLE_STAGES",
    "ConfigurationError",
    "ModelLoadError",
    "Serialized",
    "ShimConfig",
    "ShimState",
    "TASK_CODES",
    "TaskScorer",
    "StandinModel",
    "WIRE_STAGES",
    "build_state",
    "create_app",
    "load_config",
    "load_stage_model",
]
