"""modalconv: modality-conversion assistant toolkit.

Routes free-text requests to modality-conversion experts (text/audio/image/
video), ships a dependency-light native task classifier (TF-IDF + logistic
regression / KNN), pluggable conversion backends, and a benchmark harness.
"""

from modalconv.core import (
    FileArtifact,
    ParseFailure,
    SUPPORTED_TASKS,
    TaskType,
    UserRequest,
    format_task_label,
    is_supported,
    parse_task_label,
)

__all__ = [
    "FileArtifact",
    "ParseFailure",
    "SUPPORTED_TASKS",
    "TaskType",
    "UserRequest",
    "format_task_label",
    "is_supported",
    "parse_task_label",
]

__version__ = "0.1.0"
