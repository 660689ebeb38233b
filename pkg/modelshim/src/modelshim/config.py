"""Server configuration: an INI file, command-line flags, or both."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from modelshim.models import BINDABLE_STAGES


class ConfigurationError(ValueError):
    pass


@dataclass
class ShimConfig:
    host: str = "127.0.0.1"
    port: int = 8100
    classifier_path: str = ""
    # stage code -> model identifier, e.g. {"STT": "test"}
    stage_models: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for stage in self.stage_models:
            if stage not in BINDABLE_STAGES:
                raise ConfigurationError(
                    f"stage {stage!r} cannot be bound; choose from {BINDABLE_STAGES}"
                )


def load_config(path: str | Path) -> ShimConfig:
    file = Path(path)
    if not file.is_file():
        raise ConfigurationError(f"config file not found: {file}")
    parser = configparser.ConfigParser()
    # keep stage codes uppercase
    parser.optionxform = str
    try:
        parser.read_string(file.read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {file}: {exc}") from exc

    cfg = ShimConfig()
    try:
        if parser.has_section("server"):
            cfg.host = parser["server"].get("host", cfg.host).strip()
            cfg.port = parser["server"].getint("port", cfg.port)
        if parser.has_section("classifier"):
            cfg.classifier_path = parser["classifier"].get("path", "").strip()
        if parser.has_section("stages"):
            cfg.stage_models = {
                code.strip().upper(): ident.strip()
                for code, ident in parser["stages"].items()
            }
    except ValueError as exc:
        raise ConfigurationError(f"bad value in {file}: {exc}") from exc
    return ShimConfig(cfg.host, cfg.port, cfg.classifier_path, cfg.stage_models)
