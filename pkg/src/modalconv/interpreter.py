"""Request interpretation: pluggable backends that turn a prompt into a task label.

A backend only has to produce a raw string; parsing is centralized here so that
every backend is held to the same strict single-code contract. Transport errors
are folded into the failed-outcome count rather than raised, because benchmark
runs must keep going and report a failure rate instead of aborting.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import requests

from modalconv.core import TaskType, parse_task_label, ParseFailure
from modalconv.classifier.store import ModelBundle

DEFAULT_API_KEY_ENV = "MATE_LLM_API_KEY"


class TransportError(RuntimeError):
    """A backend could not obtain any answer (network, HTTP status, bad wire shape)."""


class EmptyOutcomeList(ValueError):
    """failure_rate needs at least one outcome."""


class InterpreterBackend(Protocol):
    name: str

    def classify_raw(self, prompt: str) -> str:
        """Raw answer text for the prompt. May raise TransportError."""
        ...


@dataclass(frozen=True)
class ClassificationOutcome:
    """One classification attempt. ``failed`` is true exactly when no label parsed."""

    raw_output: str
    parsed: TaskType | None

    @property
    def failed(self) -> bool:
        return self.parsed is None


def classify(backend: InterpreterBackend, prompt: str) -> ClassificationOutcome:
    if not prompt.strip():
        raise ValueError("prompt must be non-empty")
    try:
        raw = backend.classify_raw(prompt)
    except TransportError as exc:
        return ClassificationOutcome(raw_output=f"transport error: {exc}", parsed=None)
    try:
        return ClassificationOutcome(raw_output=raw, parsed=parse_task_label(raw))
    except ParseFailure:
        return ClassificationOutcome(raw_output=raw, parsed=None)


def failure_rate(outcomes: Sequence[ClassificationOutcome]) -> float:
    """Fraction of outcomes that produced no valid label."""
    if len(outcomes) == 0:
        raise EmptyOutcomeList("no outcomes to rate")
    return sum(1 for o in outcomes if o.failed) / len(outcomes)


# --- LLM backend ---------------------------------------------------------


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class LlmPromptTemplate:
    """System instruction for a chat model. Must name each code exactly once."""

    instruction: str

    def __post_init__(self) -> None:
        for task in TaskType:
            hits = len(re.findall(rf"\b{task.value}\b", self.instruction))
            if hits != 1:
                raise TemplateError(
                    f"instruction must mention {task.value} exactly once, found {hits}"
                )

    def messages(self, prompt: str) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.instruction},
            {"role": "user", "content": prompt},
        ]


DEFAULT_TEMPLATE = LlmPromptTemplate(
    instruction=(
        "You classify modality-conversion requests. Reply with exactly one code"
        " and nothing else. Codes: TTS (text to speech), STT (speech to text),"
        " ITT (image to text), ITA (image to audio), VTT (video to text),"
        " TTI (text to image), ATI (audio to image), TTV (text to video),"
        " ATV (audio to video), UNK (unclear or none of the above)."
    )
)


@dataclass(frozen=True)
class RetryPolicy:
    """Retries apply to transport failures only; unparsable answers never retry."""

    max_retries: int = 2
    backoff_seconds: float = 0.5


@dataclass
class _LlmBackend:
    name: str
    endpoint: str
    model_name: str
    template: LlmPromptTemplate
    retry: RetryPolicy
    temperature: float
    timeout: float
    api_key_env: str

    def classify_raw(self, prompt: str) -> str:
        payload = {
            "model": self.model_name,
            "messages": self.template.messages(prompt),
            "temperature": self.temperature,
        }
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        last_error = "no attempt made"
        for attempt in range(self.retry.max_retries + 1):
            if attempt and self.retry.backoff_seconds:
                time.sleep(self.retry.backoff_seconds)
            try:
                resp = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if resp.status_code // 100 != 2:
                last_error = f"HTTP {resp.status_code}"
                continue
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                # Wire shape broken on a 2xx: retrying will not help.
                raise TransportError(f"malformed completion response: {exc}") from exc
        raise TransportError(last_error)


def make_llm_backend(
    endpoint: str,
    model_name: str,
    template: LlmPromptTemplate = DEFAULT_TEMPLATE,
    retry: RetryPolicy = RetryPolicy(),
    *,
    temperature: float = 0.0,
    timeout: float = 60.0,
    api_key_env: str = DEFAULT_API_KEY_ENV,
) -> _LlmBackend:
    """Chat-completions backend. Temperature 0 keeps benchmark runs repeatable."""
    if not endpoint.startswith(("http://", "https://")):
        raise ValueError(f"endpoint must be an http(s) URL: {endpoint!r}")
    return _LlmBackend(
        name=f"llm:{model_name}",
        endpoint=endpoint,
        model_name=model_name,
        template=template,
        retry=retry,
        temperature=temperature,
        timeout=timeout,
        api_key_env=api_key_env,
    )


# --- Remote classifier backend -------------------------------------------


@dataclass
class _RemoteClassifierBackend:
    name: str
    url: str
    timeout: float

    def classify_raw(self, prompt: str) -> str:
        try:
            resp = requests.post(self.url, json={"prompt": prompt}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}")
        try:
            label = resp.json()["label"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed classifier response: {exc}") from exc
        if not isinstance(label, str):
            raise TransportError(f"label field is not a string: {label!r}")
        return label


def make_remote_classifier_backend(
    endpoint: str, *, timeout: float = 60.0
) -> _RemoteClassifierBackend:
    if not endpoint.startswith(("http://", "https://")):
        raise ValueError(f"endpoint must be an http(s) URL: {endpoint!r}")
    url = endpoint.rstrip("/") + "/classify"
    return _RemoteClassifierBackend(name="remote-classifier", url=url, timeout=timeout)


# --- Local backends -------------------------------------------------------


@dataclass
class _NativeBackend:
    """Wraps a trained bundle. Emits codes directly, so parsing cannot fail."""

    name: str
    bundle: ModelBundle

    def classify_raw(self, prompt: str) -> str:
        label, _ = self.bundle.predict(prompt)
        return label.value


def make_native_backend(bundle: ModelBundle, name: str = "native") -> _NativeBackend:
    return _NativeBackend(name=name, bundle=bundle)


@dataclass
class _KeywordBackend:
    name: str
    rules: tuple[tuple[TaskType, tuple[str, ...]], ...]

    def classify_raw(self, prompt: str) -> str:
        text = prompt.lower()
        best: TaskType | None = None
        best_hits = 0
        for task, words in self.rules:
            hits = sum(1 for w in words if w in text)
            if hits > best_hits:
                best, best_hits = task, hits
        return best.value if best is not None else TaskType.UNK.value


def make_keyword_backend(
    rules: Mapping[TaskType, Sequence[str]], name: str = "keyword"
) -> _KeywordBackend:
    """Substring-matching backend. Ties go to the lexicographically first code.

    Good enough for offline smoke tests and as a zero-dependency default; not a
    substitute for a trained model.
    """
    ordered = tuple(
        (task, tuple(w.lower() for w in rules[task]))
        for task in sorted(rules, key=lambda t: t.value)
    )
    for task, words in ordered:
        if not words:
            raise ValueError(f"rule for {task.value} has no keywords")
    return _KeywordBackend(name=name, rules=ordered)


@dataclass
class _FixedBackend:
    """Always answers the same string. Test and wiring aid."""

    name: str
    answer: str

    def classify_raw(self, prompt: str) -> str:
        return self.answer


def make_fixed_backend(answer: str, name: str = "fixed") -> _FixedBackend:
    return _FixedBackend(name=name, answer=answer)
