"""Session workflow: classify a request, route it to an expert, validate the
input file, run the conversion stages, and hand back an output path.

The expert registry is the single source of truth for what each task accepts
and emits. Stage lists stored in the registry assume the input already matches
the first stage's kind; execute() prepends an extraction stage (TEXTX for
documents, ADEMUX for video containers) when the actual input needs it.
"""

from __future__ import annotations

import shutil
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from modalconv.core import (
    SUPPORTED_TASKS,
    TASK_DESCRIPTIONS,
    FileArtifact,
    TaskType,
    extension_of,
    is_supported,
)
from modalconv.experts import (
    KIND_BY_EXTENSION,
    ConversionStage,
    ConverterBackend,
    StageFailure,
    run_pipeline,
)
from modalconv.interpreter import InterpreterBackend, classify


class UnsupportedTask(ValueError):
    """Raised when routing a task no expert handles (UNK, TTV, ATV)."""


@dataclass(frozen=True)
class ExpertSpec:
    """One registry row: what a task accepts, what it emits, how it runs."""

    task: TaskType
    accepted_input_extensions: frozenset[str]
    output_extension: str
    stages: tuple[ConversionStage, ...]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValueError(f"{self.task.value}: stage list is empty")
        for a, b in zip(self.stages, self.stages[1:]):
            if a.output_kind != b.input_kind:
                raise ValueError(
                    f"{self.task.value}: {a.value} emits {a.output_kind},"
                    f" {b.value} expects {b.input_kind}"
                )
        if self.stages[-1].output_extension != self.output_extension:
            raise ValueError(
                f"{self.task.value}: final stage emits"
                f" .{self.stages[-1].output_extension}, spec says .{self.output_extension}"
            )
        if not self.accepted_input_extensions:
            raise ValueError(f"{self.task.value}: no accepted extensions")

    @property
    def accepts_stdin(self) -> bool:
        return "stdin" in self.accepted_input_extensions

    @property
    def file_extensions(self) -> frozenset[str]:
        return self.accepted_input_extensions - {"stdin"}


_AUDIO_IN = frozenset({"mp3", "mp4", "mpeg", "mpga", "m4a", "wav", "webm"})
_TEXT_IN = frozenset({"txt", "pdf", "docx", "stdin"})
_IMAGE_IN = frozenset({"png", "jpeg", "jpg"})


def default_registry() -> tuple[ExpertSpec, ...]:
    """The seven built-in experts, one per supported task."""
    s = ConversionStage
    return (
        ExpertSpec(TaskType.TTS, _TEXT_IN, "wav", (s.TTS,)),
        ExpertSpec(TaskType.TTI, _TEXT_IN, "png", (s.TTI,)),
        ExpertSpec(TaskType.STT, _AUDIO_IN, "txt", (s.STT,)),
        ExpertSpec(TaskType.ITT, _IMAGE_IN, "txt", (s.ITT,)),
        ExpertSpec(TaskType.ATI, _AUDIO_IN, "png", (s.STT, s.TTI)),
        ExpertSpec(TaskType.ITA, _IMAGE_IN, "wav", (s.ITT, s.TTS)),
        ExpertSpec(TaskType.VTT, frozenset({"mp4", "webm"}), "txt", (s.STT,)),
    )


def route(task: TaskType, registry: Sequence[ExpertSpec]) -> ExpertSpec:
    if not is_supported(task):
        raise UnsupportedTask(f"no expert handles {task.value}")
    matches = [spec for spec in registry if spec.task == task]
    if len(matches) != 1:
        raise ValueError(
            f"registry must bind exactly one expert to {task.value}, found {len(matches)}"
        )
    return matches[0]


# --- Output directory discovery --------------------------------------------


@dataclass(frozen=True)
class OutputDirPolicy:
    candidates: tuple[str, ...]
    fallback: str

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidate list must be non-empty")


DEFAULT_OUTPUT_POLICY = OutputDirPolicy(
    candidates=("agents_output", "agents output", "data", "output"),
    fallback="agents_output",
)


def resolve_output_dir(
    root: str | Path, policy: OutputDirPolicy = DEFAULT_OUTPUT_POLICY
) -> Path:
    """First existing candidate under root, else the created fallback."""
    base = Path(root)
    if not base.is_dir():
        raise NotADirectoryError(f"{base} is not a directory")
    for name in policy.candidates:
        candidate = base / name
        if candidate.is_dir():
            return candidate
    fallback = base / policy.fallback
    fallback.mkdir(exist_ok=True)
    return fallback


# --- Input validation -------------------------------------------------------


class ValidationError(ValueError):
    """Carries the accepted extensions so re-prompts can list them."""

    def __init__(self, message: str, expected: frozenset[str]):
        super().__init__(message)
        self.expected_extensions = expected


class MissingFile(ValidationError):
    pass


class EmptyFile(ValidationError):
    pass


class WrongExtension(ValidationError):
    pass


def looks_like_path(text: str) -> bool:
    """Heuristic for AwaitFile input: paths have separators or an extension."""
    stripped = text.strip()
    if "/" in stripped or "\\" in stripped:
        return True
    return extension_of(stripped) != ""


def validate_input(
    source: str | Path,
    spec: ExpertSpec,
    *,
    inline_dir: str | Path | None = None,
) -> FileArtifact:
    """Check a user-supplied input against an expert's contract.

    When the expert accepts stdin and ``source`` does not look like a path,
    the text itself becomes the input: it is written to a .txt file under
    ``inline_dir``. Without an ``inline_dir`` every source is treated as a path.
    """
    text = str(source)
    if spec.accepts_stdin and inline_dir is not None and not looks_like_path(text):
        if not text.strip():
            raise EmptyFile("inline text is empty", spec.file_extensions)
        target = Path(inline_dir) / "stdin.txt"
        target.write_text(text, encoding="utf-8")
        return FileArtifact.from_path(target)
    path = Path(text.strip())
    if not path.is_file():
        raise MissingFile(f"no such file: {path}", spec.file_extensions)
    if path.stat().st_size == 0:
        raise EmptyFile(f"file is empty: {path}", spec.file_extensions)
    ext = extension_of(path)
    if ext not in spec.file_extensions:
        raise WrongExtension(
            f".{ext or '?'} not accepted for {spec.task.value};"
            f" expected one of {sorted(spec.file_extensions)}",
            spec.file_extensions,
        )
    return FileArtifact.from_path(path)


# --- Execution ---------------------------------------------------------------


def _effective_stages(
    spec: ExpertSpec, input_extension: str
) -> tuple[ConversionStage, ...]:
    """Registry stages, with an extraction stage prepended when needed."""
    kind = KIND_BY_EXTENSION.get(input_extension)
    first = spec.stages[0].input_kind
    if kind == first:
        return spec.stages
    if kind == "document" and first == "text":
        return (ConversionStage.TEXTX,) + spec.stages
    if kind == "video" and first == "audio":
        return (ConversionStage.ADEMUX,) + spec.stages
    raise ValueError(
        f"no stage adapts .{input_extension} ({kind}) to {spec.task.value}"
    )


def _utc_stamp() -> str:
    return time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())


def _pick_output_path(output_dir: Path, stem: str, code: str, ext: str) -> Path:
    base = f"{stem}_{code}_{_utc_stamp()}"
    dest = output_dir / f"{base}.{ext}"
    n = 1
    while dest.exists():
        dest = output_dir / f"{base}_{n}.{ext}"
        n += 1
    return dest


def execute(
    spec: ExpertSpec,
    input_artifact: FileArtifact,
    backends: ConverterBackend | Mapping[ConversionStage, ConverterBackend],
    output_dir: str | Path,
    *,
    keep_intermediates: bool = False,
) -> FileArtifact:
    """Run the expert's stages and land the result under output_dir.

    The output name is <input-stem>_<task-code>_<UTC seconds>.<ext>, with a
    numeric suffix on collision. Intermediates live in a scratch directory
    under output_dir and are removed unless keep_intermediates is set, so
    nothing is ever written outside output_dir.
    """
    out_root = Path(output_dir)
    stages = _effective_stages(spec, input_artifact.extension)
    workdir = Path(tempfile.mkdtemp(prefix=".work-", dir=out_root))
    try:
        final = run_pipeline(stages, input_artifact, backends, workdir)
    except StageFailure:
        shutil.rmtree(workdir, ignore_errors=True)
        raise
    dest = _pick_output_path(
        out_root, Path(input_artifact.path).stem, spec.task.value, spec.output_extension
    )
    shutil.move(str(final.path), dest)
    if not keep_intermediates:
        shutil.rmtree(workdir, ignore_errors=True)
    return FileArtifact.from_path(dest)


# --- Interactive session -----------------------------------------------------


class SessionState(Enum):
    AWAIT_PROMPT = "await_prompt"
    AWAIT_FILE = "await_file"
    EXECUTING = "executing"
    DONE = "done"
    FAILED = "failed"


DEFAULT_UNK_MENU_LIMIT = 5


@dataclass
class Session:
    """One user conversation. Strictly sequential; share nothing mutable."""

    output_dir: Path
    state: SessionState = SessionState.AWAIT_PROMPT
    resolved_task: TaskType | None = None
    pending_expert: ExpertSpec | None = None
    transcript: list[tuple[str, str]] = field(default_factory=list)
    unk_streak: int = 0
    unk_menu_limit: int = DEFAULT_UNK_MENU_LIMIT
    keep_intermediates: bool = False


def new_session(
    output_dir: str | Path,
    *,
    unk_menu_limit: int = DEFAULT_UNK_MENU_LIMIT,
    keep_intermediates: bool = False,
) -> Session:
    return Session(
        output_dir=Path(output_dir),
        unk_menu_limit=unk_menu_limit,
        keep_intermediates=keep_intermediates,
    )


def _task_menu() -> str:
    lines = ["Supported conversions:"]
    for task in sorted(SUPPORTED_TASKS, key=lambda t: t.value):
        lines.append(f"  {task.value} - {TASK_DESCRIPTIONS[task]}")
    return "\n".join(lines)


def _ask_for_file(spec: ExpertSpec) -> str:
    exts = ", ".join(f".{e}" for e in sorted(spec.file_extensions))
    note = " (or paste the text directly)" if spec.accepts_stdin else ""
    return f"Task {spec.task.value}. Provide an input file ({exts}){note}."


def step(
    session: Session,
    user_message: str,
    interpreter: InterpreterBackend,
    registry: Sequence[ExpertSpec],
    backends: ConverterBackend | Mapping[ConversionStage, ConverterBackend],
) -> tuple[Session, str]:
    """Advance the session one exchange. Every fault becomes a response."""
    if session.state in (SessionState.DONE, SessionState.FAILED):
        raise ValueError("session is closed")
    session.transcript.append(("user", user_message))

    if session.state is SessionState.AWAIT_PROMPT:
        response = _handle_prompt(session, user_message, interpreter, registry)
    else:
        response = _handle_file(session, user_message, backends)

    session.transcript.append(("system", response))
    return session, response


def _handle_prompt(
    session: Session,
    message: str,
    interpreter: InterpreterBackend,
    registry: Sequence[ExpertSpec],
) -> str:
    def reprompt(reason: str) -> str:
        session.unk_streak += 1
        text = f"{reason} Please describe the conversion you need."
        if session.unk_streak >= session.unk_menu_limit:
            text = f"{text}\n{_task_menu()}"
        return text

    if not message.strip():
        return reprompt("Empty message.")
    outcome = classify(interpreter, message)
    if outcome.failed or outcome.parsed is TaskType.UNK:
        return reprompt("I could not map that to a conversion task.")
    task = outcome.parsed
    assert task is not None
    if not is_supported(task):
        return reprompt(f"{task.value} is not supported yet.")
    session.unk_streak = 0
    session.resolved_task = task
    session.pending_expert = route(task, registry)
    session.state = SessionState.AWAIT_FILE
    return _ask_for_file(session.pending_expert)


def _handle_file(
    session: Session,
    message: str,
    backends: ConverterBackend | Mapping[ConversionStage, ConverterBackend],
) -> str:
    spec = session.pending_expert
    assert spec is not None, "AwaitFile requires a routed expert"
    inline_dir: Path | None = None
    if spec.accepts_stdin and not looks_like_path(message):
        inline_dir = Path(tempfile.mkdtemp(prefix=".stdin-", dir=session.output_dir))
    try:
        artifact = validate_input(message, spec, inline_dir=inline_dir)
    except ValidationError as exc:
        if inline_dir is not None:
            shutil.rmtree(inline_dir, ignore_errors=True)
        exts = ", ".join(f".{e}" for e in sorted(exc.expected_extensions))
        return f"{exc} Expected one of: {exts}. Try again."

    session.state = SessionState.EXECUTING
    try:
        result = execute(
            spec,
            artifact,
            backends,
            session.output_dir,
            keep_intermediates=session.keep_intermediates,
        )
    except StageFailure as exc:
        session.state = SessionState.FAILED
        return f"Conversion failed at stage {exc.stage.value}: {exc.cause}"
    finally:
        if inline_dir is not None:
            shutil.rmtree(inline_dir, ignore_errors=True)
    session.state = SessionState.DONE
    return f"Done. Output written to {result.path.resolve()}"
