"""Command-line entry point: interactive REPL plus train/eval/validate workflows.

Exit codes: 0 success, 1 user or config error, 2 data validation failure,
3 backend or transport failure. Responses go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from modalconv.core import TaskType
from modalconv.classifier import (
    DegenerateLabels,
    KTooLarge,
    ModelBundle,
    embed,
    fit_tfidf,
    load_model,
    save_model,
    split_dataset,
    train_logreg,
)
from modalconv.classifier.linear import (
    DEFAULT_EPOCHS,
    DEFAULT_L2_PENALTY,
    DEFAULT_LEARNING_RATE,
)
from modalconv.classifier.neighbors import DEFAULT_K
from modalconv.evalharness import (
    DatasetError,
    DatasetVersion,
    emit_report,
    load_dataset,
    run_benchmark,
)
from modalconv.evalharness.bench import DEFAULT_MAX_IN_FLIGHT
from modalconv.experts import (
    ConversionError,
    ConversionStage,
    StubBackend,
    make_command_backend,
    make_http_backend,
)
from modalconv.interpreter import (
    DEFAULT_API_KEY_ENV,
    InterpreterBackend,
    RetryPolicy,
    TransportError,
    make_keyword_backend,
    make_llm_backend,
    make_native_backend,
    make_remote_classifier_backend,
)
from modalconv.orchestrator import (
    DEFAULT_OUTPUT_POLICY,
    OutputDirPolicy,
    SessionState,
    default_registry,
    new_session,
    resolve_output_dir,
    step,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_BACKEND = 3

# Ships as the zero-config default so the REPL works offline. Phrases are
# pairwise substring-disjoint across tasks to keep scoring unambiguous.
DEFAULT_KEYWORD_RULES: dict[TaskType, tuple[str, ...]] = {
    TaskType.TTS: ("text to audio", "text to speech", "read aloud", "narrate"),
    TaskType.STT: ("audio to text", "speech to text", "transcribe", "transcript"),
    TaskType.ITT: ("image to text", "describe the image", "caption", "alt text"),
    TaskType.ITA: ("image to audio", "image to speech", "picture to audio"),
    TaskType.VTT: ("video to text", "subtitles", "subtitle"),
    TaskType.TTI: ("text to image", "illustrate", "draw a picture"),
    TaskType.ATI: ("audio to image", "sound to image", "visualize the audio"),
    TaskType.TTV: ("text to video", "animate the text"),
    TaskType.ATV: ("audio to video", "music video"),
}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    interpreter_kind: str = "keyword"
    model_path: str = ""
    endpoint: str = ""
    model_name: str = ""
    api_key_env: str = DEFAULT_API_KEY_ENV
    max_retries: int = 2
    interpreter_timeout: float = 60.0
    keyword_rules: dict[TaskType, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_KEYWORD_RULES)
    )
    converter_kind: str = "stub"
    converter_endpoint: str = ""
    converter_timeout: float = 120.0
    command_templates: dict[ConversionStage, str] = field(default_factory=dict)
    output_root: str = "."
    output_policy: OutputDirPolicy = DEFAULT_OUTPUT_POLICY
    unk_menu_limit: int = 5
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT


def _require_url(value: str, label: str) -> str:
    if not value.startswith(("http://", "https://")):
        raise ConfigError(f"{label} must be an http(s) URL, got {value!r}")
    return value


def load_config(path: str | None) -> Config:
    """Parse the INI config; absent path yields the offline defaults."""
    cfg = Config()
    if path is None:
        return cfg
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"config file not found: {file}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(file.read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {file}: {exc}") from exc

    try:
        if parser.has_section("interpreter"):
            sec = parser["interpreter"]
            cfg.interpreter_kind = sec.get("backend", cfg.interpreter_kind).strip()
            cfg.model_path = sec.get("model_path", "").strip()
            cfg.endpoint = sec.get("endpoint", "").strip()
            cfg.model_name = sec.get("model_name", "").strip()
            cfg.api_key_env = sec.get("api_key_env", cfg.api_key_env).strip()
            cfg.max_retries = sec.getint("max_retries", cfg.max_retries)
            cfg.interpreter_timeout = sec.getfloat("timeout", cfg.interpreter_timeout)
            cfg.max_in_flight = sec.getint("max_in_flight", cfg.max_in_flight)
        if parser.has_section("keyword_rules"):
            rules: dict[TaskType, tuple[str, ...]] = {}
            for code, phrases in parser["keyword_rules"].items():
                task = TaskType(code.strip().upper())
                rules[task] = tuple(
                    p.strip() for p in phrases.split(";") if p.strip()
                )
            cfg.keyword_rules = rules
        if parser.has_section("converters"):
            sec = parser["converters"]
            cfg.converter_kind = sec.get("backend", cfg.converter_kind).strip()
            cfg.converter_endpoint = sec.get("endpoint", "").strip()
            cfg.converter_timeout = sec.getfloat("timeout", cfg.converter_timeout)
        if parser.has_section("converter_commands"):
            for code, template in parser["converter_commands"].items():
                cfg.command_templates[ConversionStage(code.strip().upper())] = template
        if parser.has_section("output"):
            sec = parser["output"]
            cfg.output_root = sec.get("root", cfg.output_root).strip()
            if sec.get("candidates"):
                names = tuple(
                    c.strip() for c in sec["candidates"].split(",") if c.strip()
                )
                fallback = sec.get("fallback", names[0] if names else "").strip()
                cfg.output_policy = OutputDirPolicy(names, fallback)
        if parser.has_section("session"):
            cfg.unk_menu_limit = parser["session"].getint(
                "unk_menu_limit", cfg.unk_menu_limit
            )
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in {file}: {exc}") from exc

    _check_config(cfg)
    return cfg


def _check_config(cfg: Config) -> None:
    if cfg.interpreter_kind not in {"keyword", "native", "llm", "remote"}:
        raise ConfigError(f"unknown interpreter backend {cfg.interpreter_kind!r}")
    if cfg.interpreter_kind == "native":
        if not cfg.model_path:
            raise ConfigError("native interpreter needs model_path")
        if not Path(cfg.model_path).is_file():
            raise ConfigError(f"model file not found: {cfg.model_path}")
    if cfg.interpreter_kind == "llm":
        if not cfg.model_name:
            raise ConfigError("llm interpreter needs model_name")
        _require_url(cfg.endpoint, "interpreter endpoint")
    if cfg.interpreter_kind == "remote":
        _require_url(cfg.endpoint, "interpreter endpoint")
    if cfg.converter_kind not in {"stub", "command", "http"}:
        raise ConfigError(f"unknown converter backend {cfg.converter_kind!r}")
    if cfg.converter_kind == "http":
        _require_url(cfg.converter_endpoint, "converter endpoint")
    if cfg.converter_kind == "command" and not cfg.command_templates:
        raise ConfigError("command converter needs a [converter_commands] section")


def build_interpreter(cfg: Config) -> InterpreterBackend:
    if cfg.interpreter_kind == "keyword":
        return make_keyword_backend(cfg.keyword_rules)
    if cfg.interpreter_kind == "native":
        return make_native_backend(load_model(cfg.model_path))
    if cfg.interpreter_kind == "llm":
        return make_llm_backend(
            cfg.endpoint,
            cfg.model_name,
            retry=RetryPolicy(max_retries=cfg.max_retries),
            timeout=cfg.interpreter_timeout,
            api_key_env=cfg.api_key_env,
        )
    return make_remote_classifier_backend(cfg.endpoint, timeout=cfg.interpreter_timeout)


def build_converters(cfg: Config):
    if cfg.converter_kind == "stub":
        return StubBackend()
    if cfg.converter_kind == "command":
        return make_command_backend(cfg.command_templates, timeout=cfg.converter_timeout)
    return make_http_backend(cfg.converter_endpoint, timeout=cfg.converter_timeout)


# --- Subcommands -------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    interpreter = build_interpreter(cfg)
    converters = build_converters(cfg)
    registry = default_registry()
    root = Path(cfg.output_root)
    if not root.is_dir():
        raise ConfigError(f"output root is not a directory: {root}")
    output_dir = resolve_output_dir(root, cfg.output_policy)
    print(f"Output directory: {output_dir.resolve()}")
    print("Describe the conversion you need (quit or exit to leave).")

    session = new_session(
        output_dir,
        unk_menu_limit=cfg.unk_menu_limit,
        keep_intermediates=args.keep_intermediates,
    )
    for line in sys.stdin:
        message = line.rstrip("\n")
        if message.strip().lower() in {"quit", "exit"}:
            print("Bye.")
            return EXIT_OK
        session, response = step(session, message, interpreter, registry, converters)
        print(response)
        if session.state in (SessionState.DONE, SessionState.FAILED):
            # One conversion per session; open a fresh one for the next request.
            session = new_session(
                output_dir,
                unk_menu_limit=cfg.unk_menu_limit,
                keep_intermediates=args.keep_intermediates,
            )
            print("Anything else? (quit or exit to leave)")
    return EXIT_OK


def _summary_line(report) -> str:
    return (
        f"backend={report.backend_name or 'unnamed'}"
        f" n={report.confusion.total()}"
        f" accuracy={report.accuracy:.4f}"
        f" precision={report.weighted_precision:.4f}"
        f" recall={report.weighted_recall:.4f}"
        f" f1={report.weighted_f1:.4f}"
        f" failure_rate={report.failure_rate:.4f}"
    )


def _parse_version(flag: str | None) -> DatasetVersion | None:
    if flag is None:
        return None
    try:
        return DatasetVersion(flag.lower())
    except ValueError:
        raise ConfigError(f"--expect-version must be v1 or v2, got {flag!r}") from None


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    backend = build_interpreter(cfg)
    dataset = load_dataset(args.dataset, _parse_version(args.expect_version))
    report = run_benchmark(backend, dataset, max_in_flight=cfg.max_in_flight)
    ext = "md" if args.format == "markdown" else args.format
    report_path = Path(args.report) if args.report else Path(f"eval_report.{ext}")
    emit_report(report, args.format, report_path)
    print(_summary_line(report))
    print(f"Report written to {report_path.resolve()}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset, _parse_version(args.expect_version))
    train, test = split_dataset(dataset, args.test_fraction, args.seed)
    tfidf = fit_tfidf(train.prompts())

    if args.algo == "logreg":
        linear = train_logreg(
            train,
            tfidf,
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            l2_penalty=args.l2,
            seed=args.seed,
        )
        bundle = ModelBundle(kind="logreg", tfidf=tfidf, linear=linear)
    else:
        if args.k > len(train):
            raise KTooLarge(f"k={args.k} exceeds training size {len(train)}")
        vectors = np.stack([embed(tfidf, p) for p in train.prompts()])
        bundle = ModelBundle(
            kind="knn",
            tfidf=tfidf,
            knn_vectors=vectors,
            knn_labels=tuple(train.labels()),
            knn_k=args.k,
        )

    save_model(bundle, args.model_out)
    report = run_benchmark(make_native_backend(bundle, name=f"native-{args.algo}"), test)
    print(f"train={len(train)} test={len(test)} algo={args.algo}")
    print(_summary_line(report))
    print(f"Model written to {Path(args.model_out).resolve()}")
    return EXIT_OK


def cmd_validate_data(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset, _parse_version(args.expect_version))
    counts = dataset.label_counts()
    print("label  count")
    for task in sorted(TaskType, key=lambda t: t.value):
        print(f"{task.value:<6} {counts.get(task, 0)}")
    print(f"total  {len(dataset)}")
    return EXIT_OK


# --- Argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalconv",
        description="Modality conversion assistant and benchmark tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="interactive conversion session")
    run.add_argument("--config", help="INI config file")
    run.add_argument("--keep-intermediates", action="store_true")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="benchmark an interpreter backend")
    ev.add_argument("--config", help="INI config file")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--expect-version", choices=["v1", "v2"])
    ev.add_argument("--report", help="report output path")
    ev.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    ev.set_defaults(func=cmd_eval)

    tr = sub.add_parser("train", help="train a prompt classifier")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--expect-version", choices=["v1", "v2"])
    tr.add_argument("--algo", choices=["logreg", "knn"], default="logreg")
    tr.add_argument("--model-out", default="model.json")
    tr.add_argument("--seed", type=int, default=7)
    tr.add_argument("--test-fraction", type=float, default=0.2)
    tr.add_argument("--learning-rate", type=float, default=DEFAULT_LEARNING_RATE)
    tr.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    tr.add_argument("--l2", type=float, default=DEFAULT_L2_PENALTY)
    tr.add_argument("--k", type=int, default=DEFAULT_K)
    tr.set_defaults(func=cmd_train)

    vd = sub.add_parser("validate-data", help="check a dataset file")
    vd.add_argument("--dataset", required=True)
    vd.add_argument("--expect-version", choices=["v1", "v2"])
    vd.set_defaults(func=cmd_validate_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, KTooLarge, DegenerateLabels) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConversionError, TransportError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
