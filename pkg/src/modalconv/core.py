"""Task taxonomy, file typing, and label parsing shared by every other module."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path


class TaskType(str, enum.Enum):
    """Closed ten-way label space for modality-conversion requests.

    The enum value is the wire/report code; serialization is always the
    uppercase code itself.
    """

    TTS = "TTS"  # text -> speech
    STT = "STT"  # speech -> text
    ITT = "ITT"  # image -> text
    ITA = "ITA"  # image -> audio
    VTT = "VTT"  # video -> text
    TTI = "TTI"  # text -> image
    ATI = "ATI"  # audio -> image
    TTV = "TTV"  # text -> video
    ATV = "ATV"  # audio -> video
    UNK = "UNK"  # unclassifiable request

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


#: Tasks an expert pipeline exists for. TTV/ATV appear in datasets but have
#: no expert; UNK is not a conversion.
SUPPORTED_TASKS: frozenset[TaskType] = frozenset(
    {
        TaskType.TTS,
        TaskType.TTI,
        TaskType.ATI,
        TaskType.STT,
        TaskType.ITT,
        TaskType.ITA,
        TaskType.VTT,
    }
)

TASK_DESCRIPTIONS: dict[TaskType, str] = {
    TaskType.TTS: "text to speech",
    TaskType.STT: "speech to text",
    TaskType.ITT: "image to text",
    TaskType.ITA: "image to audio",
    TaskType.VTT: "video to text",
    TaskType.TTI: "text to image",
    TaskType.ATI: "audio to image",
    TaskType.TTV: "text to video",
    TaskType.ATV: "audio to video",
    TaskType.UNK: "unclassifiable",
}


class ParseFailure(ValueError):
    """Raised when a raw string is not exactly one of the ten label codes."""

    def __init__(self, raw: str):
        super().__init__(f"not a task label: {raw!r}")
        self.raw = raw


def parse_task_label(raw: str) -> TaskType:
    """Map a raw string to a :class:`TaskType` by strict code equality.

    The only normalization applied is whitespace trimming and uppercasing;
    anything else ("TTS.", "text to speech", ...) raises :class:`ParseFailure`.
    Strictness keeps the invalid-label predicate unambiguous for failure-rate
    accounting.
    """
    code = raw.strip().upper()
    try:
        return TaskType(code)
    except ValueError:
        raise ParseFailure(raw) from None


def format_task_label(t: TaskType) -> str:
    """Inverse of :func:`parse_task_label` for valid labels."""
    return t.value


def is_supported(t: TaskType) -> bool:
    """True iff an expert pipeline exists for ``t``."""
    return t in SUPPORTED_TASKS


def extension_of(path: str | Path) -> str:
    """Extension by last-dot rule, lowercased, without the dot; "" if none."""
    suffix = Path(path).suffix
    return suffix[1:].lower() if suffix else ""


@dataclass(frozen=True)
class FileArtifact:
    """A file on disk plus the two attributes routing cares about."""

    path: Path
    extension: str
    byte_size: int

    def __post_init__(self) -> None:
        if self.extension != extension_of(self.path):
            raise ValueError(
                f"extension {self.extension!r} does not match path {self.path}"
            )
        if self.byte_size < 0:
            raise ValueError("byte_size must be non-negative")

    @classmethod
    def from_path(cls, path: str | Path) -> "FileArtifact":
        p = Path(path)
        return cls(path=p, extension=extension_of(p), byte_size=p.stat().st_size)


@dataclass(frozen=True)
class UserRequest:
    """A free-text request, optionally carrying an input file."""

    prompt_text: str
    attached_input: FileArtifact | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.prompt_text.strip():
            raise ValueError("prompt_text must be non-empty after trimming")
