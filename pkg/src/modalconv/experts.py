"""Conversion stages and the backends that run them.

Each stage has a fixed kind signature (text to audio, audio to text, and so
on). Backends come in three flavors: deterministic stubs, external commands,
and an HTTP model server. Nothing in this module links a model in-process;
real models always sit behind a command or an HTTP boundary.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import io
import shlex
import struct
import subprocess
import threading
import wave
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import requests

from modalconv.core import FileArtifact

# Extension vocabulary shared with routing. Last-dot, lowercased, no dot.
KIND_BY_EXTENSION: dict[str, str] = {
    "txt": "text",
    "pdf": "document",
    "docx": "document",
    "mp3": "audio",
    "mpga": "audio",
    "m4a": "audio",
    "wav": "audio",
    "mp4": "video",
    "mpeg": "video",
    "webm": "video",
    "png": "image",
    "jpg": "image",
    "jpeg": "image",
}

#: Only these kinds ever leave a stage, so only they need an extension.
CANONICAL_EXTENSION: dict[str, str] = {"text": "txt", "audio": "wav", "image": "png"}


class ConversionStage(enum.Enum):
    TTS = "TTS"  # text -> audio
    STT = "STT"  # audio -> text
    ITT = "ITT"  # image -> text
    TTI = "TTI"  # text -> image
    TEXTX = "TEXTX"  # document -> text (extraction)
    ADEMUX = "ADEMUX"  # video -> audio (track demux)

    @property
    def input_kind(self) -> str:
        return _SIGNATURE[self][0]

    @property
    def output_kind(self) -> str:
        return _SIGNATURE[self][1]

    @property
    def output_extension(self) -> str:
        return CANONICAL_EXTENSION[self.output_kind]


_SIGNATURE: dict[ConversionStage, tuple[str, str]] = {
    ConversionStage.TTS: ("text", "audio"),
    ConversionStage.STT: ("audio", "text"),
    ConversionStage.ITT: ("image", "text"),
    ConversionStage.TTI: ("text", "image"),
    ConversionStage.TEXTX: ("document", "text"),
    ConversionStage.ADEMUX: ("video", "audio"),
}


class ConversionError(RuntimeError):
    pass


class UnsupportedStage(ConversionError):
    pass


class BackendFailure(ConversionError):
    pass


class OutputMissing(ConversionError):
    pass


class SpawnFailure(ConversionError):
    pass


class StageFailure(ConversionError):
    """A pipeline stage failed; carries which one."""

    def __init__(self, stage: ConversionStage, cause: Exception):
        super().__init__(f"stage {stage.value} failed: {cause}")
        self.stage = stage
        self.cause = cause


class ConverterBackend(Protocol):
    kind: str

    def supports(self, stage: ConversionStage) -> bool: ...

    def convert(
        self, stage: ConversionStage, input_artifact: FileArtifact, out_path: Path
    ) -> FileArtifact: ...


def convert(
    backend: ConverterBackend,
    stage: ConversionStage,
    input_artifact: FileArtifact,
    out_path: str | Path,
) -> FileArtifact:
    """Run one stage through a backend with the contract checks applied.

    The output path's extension must already be the stage's canonical output
    extension; the input's extension must map to the stage's input kind.
    """
    out = Path(out_path)
    if not backend.supports(stage):
        raise UnsupportedStage(f"{backend.kind} backend does not support {stage.value}")
    in_kind = KIND_BY_EXTENSION.get(input_artifact.extension)
    if in_kind != stage.input_kind:
        raise ValueError(
            f"{stage.value} expects {stage.input_kind} input,"
            f" got .{input_artifact.extension or '?'} ({in_kind or 'unknown kind'})"
        )
    if out.suffix[1:].lower() != stage.output_extension:
        raise ValueError(
            f"output path for {stage.value} must end in .{stage.output_extension}"
        )
    result = backend.convert(stage, input_artifact, out)
    if not out.exists() or out.stat().st_size == 0:
        raise OutputMissing(f"{stage.value} produced no output at {out}")
    return result


def run_pipeline(
    stages: Sequence[ConversionStage],
    input_artifact: FileArtifact,
    backends: ConverterBackend | Mapping[ConversionStage, ConverterBackend],
    workdir: str | Path,
) -> FileArtifact:
    """Left-to-right stage composition. Intermediates land in workdir.

    The first failing stage aborts the run and removes whatever files the
    pipeline had written so far, so a failed run leaves no partial debris.
    """
    if not stages:
        raise ValueError("pipeline needs at least one stage")
    expected = KIND_BY_EXTENSION.get(input_artifact.extension)
    for i, stage in enumerate(stages):
        if stage.input_kind != expected:
            raise ValueError(
                f"stage {i} ({stage.value}) expects {stage.input_kind},"
                f" chain carries {expected}"
            )
        expected = stage.output_kind
    wd = Path(workdir)
    current = input_artifact
    written: list[Path] = []
    for i, stage in enumerate(stages):
        backend = backends if not isinstance(backends, Mapping) else backends.get(stage)
        if backend is None:
            raise UnsupportedStage(f"no backend bound for {stage.value}")
        out = wd / f"{i:02d}_{stage.value.lower()}.{stage.output_extension}"
        try:
            current = convert(backend, stage, current, out)
        except ConversionError as exc:
            for p in written:
                p.unlink(missing_ok=True)
            out.unlink(missing_ok=True)
            raise StageFailure(stage, exc) from exc
        written.append(out)
    return current


# --- Deterministic stub backend -------------------------------------------


def _content_tag(data: bytes) -> str:
    """First 8 bytes of the sha256, hex. Stable across runs and platforms."""
    return hashlib.sha256(data).digest()[:8].hex()


def silence_wave_bytes(seconds: float = 1.0, rate: int = 8000) -> bytes:
    """Minimal valid RIFF/WAVE: 44-byte header, mono 16-bit silence."""
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(b"\x00\x00" * int(rate * seconds))
    return buf.getvalue()


def tiny_png_bytes(rgb: tuple[int, int, int]) -> bytes:
    """One-pixel RGB PNG built from raw chunks; passes standard signature checks."""

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload))
        )

    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 2, 0, 0, 0)
    idat = zlib.compress(b"\x00" + bytes(rgb))
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


@dataclass
class StubBackend:
    """Supports every stage with canned, input-hash-derived outputs.

    STT/ITT/TEXTX write "STUB:<stage>:<tag>"; TTS/ADEMUX write one second of
    silence; TTI writes a one-pixel PNG colored from the hash. Two runs on the
    same input are byte-identical.
    """

    kind: str = "stub"
    calls: list[tuple[ConversionStage, Path]] = field(default_factory=list)

    def supports(self, stage: ConversionStage) -> bool:
        return True

    def convert(
        self, stage: ConversionStage, input_artifact: FileArtifact, out_path: Path
    ) -> FileArtifact:
        data = Path(input_artifact.path).read_bytes()
        self.calls.append((stage, Path(input_artifact.path)))
        if stage.output_kind == "text":
            out_path.write_text(f"STUB:{stage.value}:{_content_tag(data)}", encoding="utf-8")
        elif stage.output_kind == "audio":
            out_path.write_bytes(silence_wave_bytes())
        else:
            digest = hashlib.sha256(data).digest()
            out_path.write_bytes(tiny_png_bytes((digest[0], digest[1], digest[2])))
        return FileArtifact.from_path(out_path)


# --- External command backend ---------------------------------------------


@dataclass
class _CommandBackend:
    kind: str
    templates: dict[ConversionStage, str]
    timeout: float
    _gate: threading.Semaphore

    def supports(self, stage: ConversionStage) -> bool:
        return stage in self.templates

    def convert(
        self, stage: ConversionStage, input_artifact: FileArtifact, out_path: Path
    ) -> FileArtifact:
        argv = [
            tok.replace("{input}", str(input_artifact.path)).replace(
                "{output}", str(out_path)
            )
            for tok in shlex.split(self.templates[stage])
        ]
        with self._gate:
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True, timeout=self.timeout
                )
            except FileNotFoundError as exc:
                raise SpawnFailure(f"cannot spawn {argv[0]!r}: {exc}") from exc
            except subprocess.TimeoutExpired as exc:
                raise BackendFailure(f"{stage.value} command timed out") from exc
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-1] if proc.stderr.strip() else ""
            raise BackendFailure(
                f"{stage.value} command exited {proc.returncode}: {tail}"
            )
        if not out_path.exists():
            raise OutputMissing(f"{stage.value} command wrote nothing at {out_path}")
        return FileArtifact.from_path(out_path)


def make_command_backend(
    templates: Mapping[ConversionStage, str],
    *,
    timeout: float = 300.0,
    max_processes: int = 2,
) -> _CommandBackend:
    """Backend that shells out. Templates need {input} and {output} placeholders.

    Substitution happens per argv token after shlex splitting, so paths with
    spaces survive. At most max_processes children run at once.
    """
    for stage, template in templates.items():
        if "{input}" not in template or "{output}" not in template:
            raise ValueError(
                f"template for {stage.value} must contain {{input}} and {{output}}"
            )
    return _CommandBackend(
        kind="command",
        templates=dict(templates),
        timeout=timeout,
        _gate=threading.Semaphore(max_processes),
    )


# --- HTTP model-server backend ---------------------------------------------


@dataclass
class _HttpBackend:
    kind: str
    url: str
    timeout: float
    stages: frozenset[ConversionStage]

    def supports(self, stage: ConversionStage) -> bool:
        return stage in self.stages

    def convert(
        self, stage: ConversionStage, input_artifact: FileArtifact, out_path: Path
    ) -> FileArtifact:
        payload = {
            "stage": stage.value,
            "input_name": Path(input_artifact.path).name,
            "input_base64": base64.b64encode(
                Path(input_artifact.path).read_bytes()
            ).decode("ascii"),
        }
        try:
            resp = requests.post(self.url, json=payload, timeout=self.timeout)
        except requests.Timeout as exc:
            raise BackendFailure(f"{stage.value} timeout after {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise BackendFailure(str(exc)) from exc
        if resp.status_code != 200:
            raise BackendFailure(f"{stage.value} server answered HTTP {resp.status_code}")
        try:
            encoded = resp.json()["output_base64"]
            blob = base64.b64decode(encoded, validate=True)
        except Exception as exc:  # malformed JSON, missing key, bad base64
            raise BackendFailure(f"malformed convert response: {exc}") from exc
        out_path.write_bytes(blob)
        return FileArtifact.from_path(out_path)


def make_http_backend(
    endpoint: str,
    *,
    timeout: float = 120.0,
    stages: Iterable[ConversionStage] | None = None,
) -> _HttpBackend:
    if not endpoint.startswith(("http://", "https://")):
        raise ValueError(f"endpoint must be an http(s) URL: {endpoint!r}")
    supported = frozenset(stages) if stages is not None else frozenset(ConversionStage)
    return _HttpBackend(
        kind="http",
        url=endpoint.rstrip("/") + "/convert",
        timeout=timeout,
        stages=supported,
    )
