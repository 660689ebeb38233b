"""Model loading and inference.

Two families live here: the task classifier (a persisted classifier bundle
read straight from its JSON file) and the per-stage conversion models. This
build ships deterministic "test" conversion models; a deployment that has
real checkpoints registers loaders for them under new identifiers.

Every loaded model is wrapped in a Serialized guard: the HTTP layer may
handle requests concurrently, but invocations of one model instance are
queued on its lock.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import struct
import threading
import wave
import zlib
from pathlib import Path

import numpy as np

TASK_CODES = ("TTS", "STT", "ITT", "ITA", "VTT", "TTI", "ATI", "TTV", "ATV", "UNK")

# Everything a /convert request may name.
WIRE_STAGES = ("TTS", "STT", "ITT", "TTI", "TEXTX", "ADEMUX")

# Stages a model can be bound to. TEXTX and ADEMUX are local plumbing in the
# client; they never route to a served model.
BINDABLE_STAGES = ("TTS", "STT", "ITT", "TTI")


class ModelLoadError(RuntimeError):
    """A configured model identifier or file could not be turned into a model."""


class Serialized:
    """Per-model mutex. Hold .lock around every use of .inner."""

    def __init__(self, inner):
        self.inner = inner
        self.lock = threading.Lock()


# --- Task classifier ----------------------------------------------------------

_TOKEN = re.compile(r"[a-z0-9]+")

_FORMAT_NAME = "modalconv-model"
_FORMAT_VERSION = 1


class TaskScorer:
    """Classifier bundle reader: TF-IDF embedding plus a linear or KNN head.

    The label head (class list) is read from the file itself; nothing about
    the ordering is assumed. Inference is pure, so repeated calls with the
    same prompt return identical scores.
    """

    def __init__(self, vocabulary, idf, head):
        self.index = {token: i for i, token in enumerate(vocabulary)}
        self.idf = np.asarray(idf, dtype=np.float64)
        self._head = head

    @classmethod
    def from_file(cls, path: str | Path) -> "TaskScorer":
        file = Path(path)
        try:
            doc = json.loads(file.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ModelLoadError(f"cannot read classifier file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ModelLoadError(f"classifier file is not JSON: {exc}") from exc

        if doc.get("format") != _FORMAT_NAME:
            raise ModelLoadError(f"not a {_FORMAT_NAME} file: {file}")
        if doc.get("format_version") != _FORMAT_VERSION:
            raise ModelLoadError(
                f"unsupported format_version {doc.get('format_version')!r}"
            )
        try:
            tfidf = doc["tfidf"]
            kind = doc["kind"]
            if kind == "logreg":
                head = _LinearHead(doc["logreg"])
            elif kind == "knn":
                head = _NeighborHead(doc["knn"])
            else:
                raise ModelLoadError(f"unknown classifier kind {kind!r}")
            scorer = cls(tfidf["vocabulary"], tfidf["idf"], head)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelLoadError(f"malformed classifier file: {exc}") from exc
        if len(scorer.index) != scorer.idf.shape[0]:
            raise ModelLoadError("vocabulary and idf lengths disagree")
        return scorer

    def _embed(self, prompt: str) -> np.ndarray:
        vector = np.zeros(self.idf.shape[0])
        for token in _TOKEN.findall(prompt.lower()):
            i = self.index.get(token)
            if i is not None:
                vector[i] += 1.0
        vector *= self.idf
        norm = np.linalg.norm(vector)
        return vector / norm if norm else vector

    def classify(self, prompt: str) -> tuple[str, dict[str, float]]:
        return self._head.classify(self._embed(prompt))


class _LinearHead:
    def __init__(self, doc):
        self.classes = [str(c) for c in doc["classes"]]
        self.weights = np.asarray(doc["weights"], dtype=np.float64)
        self.bias = np.asarray(doc["bias"], dtype=np.float64)
        if (
            self.weights.ndim != 2
            or self.weights.shape[0] != len(self.classes)
            or self.bias.shape != (len(self.classes),)
        ):
            raise ValueError("weight matrix does not match the class list")

    def classify(self, vector: np.ndarray) -> tuple[str, dict[str, float]]:
        logits = self.weights @ vector + self.bias
        logits -= logits.max()
        exp = np.exp(logits)
        probs = exp / exp.sum()
        # argmax takes the first maximum, so ties resolve to head order
        label = self.classes[int(np.argmax(probs))]
        return label, {c: float(p) for c, p in zip(self.classes, probs)}


class _NeighborHead:
    def __init__(self, doc):
        self.k = int(doc["k"])
        self.labels = [str(c) for c in doc["labels"]]
        self.vectors = np.asarray(doc["vectors"], dtype=np.float64)
        if self.k < 1 or self.k > len(self.labels):
            raise ValueError(f"k={self.k} out of range for {len(self.labels)} rows")

    def classify(self, vector: np.ndarray) -> tuple[str, dict[str, float]]:
        norms = np.linalg.norm(self.vectors, axis=1) * (np.linalg.norm(vector) or 1.0)
        sims = (self.vectors @ vector) / np.where(norms > 0, norms, 1.0)
        top = np.argsort(-sims, kind="stable")[: self.k]
        shares: dict[str, float] = {}
        for i in top:
            label = self.labels[int(i)]
            shares[label] = shares.get(label, 0.0) + 1.0 / self.k
        label = max(sorted(shares), key=lambda c: shares[c])
        return label, shares


# --- Conversion models -----------------------------------------------------------


def _tiny_png(rgb: tuple[int, int, int]) -> bytes:
    def chunk(tag: bytes, body: bytes) -> bytes:
        raw = tag + body
        return struct.pack(">I", len(body)) + raw + struct.pack(">I", zlib.crc32(raw))

    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 2, 0, 0, 0)
    idat = zlib.compress(b"\x00" + bytes(rgb))
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


def _beep_wave(seed: bytes) -> bytes:
    # quarter second of a low square wave; pitch keyed to the input digest
    period = 20 + seed[0] % 30
    frames = bytearray()
    for n in range(2000):
        value = 6000 if (n // period) % 2 == 0 else -6000
        frames += struct.pack("<h", value)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(8000)
        w.writeframes(bytes(frames))
    return buf.getvalue()


class StandinModel:
    """Offline stand-in for a real conversion checkpoint.

    Outputs are deterministic functions of the input bytes and carry the
    stage's canonical kind: text stages emit UTF-8, TTS emits a parseable
    WAVE, TTI a valid PNG.
    """

    def __init__(self, stage: str):
        self.stage = stage

    def run(self, input_name: str, data: bytes) -> bytes:
        digest = hashlib.sha256(data).digest()
        tag = digest[:8].hex()
        if self.stage == "STT":
            return f"test transcript of {input_name} ({tag})".encode()
        if self.stage == "ITT":
            return f"test caption of {input_name} ({tag})".encode()
        if self.stage == "TTS":
            return _beep_wave(digest)
        return _tiny_png((digest[0], digest[1], digest[2]))


def load_stage_model(stage: str, identifier: str):
    """Turn a configured identifier into a ready model for one stage."""
    if identifier == "test":
        return StandinModel(stage)
    raise ModelLoadError(
        f"unknown model identifier {identifier!r} for stage {stage};"
        " this build ships only the built-in 'test' models"
    )
