"""Configuration management for cm2."""

import os
import yaml
import logging
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass
from dotenv import load_dotenv

from .errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_MAX_PENALTY = 200
DEFAULT_LINE_TOLERANCE = 5
DEFAULT_GAP_TOLERANCE = 60


@dataclass(frozen=True)
class ClassifierConfig:
    """Matching and scoring parameters.

    ``max_penalty`` is the largest distance a single keyword may contribute;
    it is also the distance of a keyword that cannot be found.
    """
    max_penalty: int = DEFAULT_MAX_PENALTY
    line_tolerance: int = DEFAULT_LINE_TOLERANCE
    gap_tolerance: int = DEFAULT_GAP_TOLERANCE
    page_index: int = 1

    def __post_init__(self):
        if self.max_penalty < 1:
            raise InputError(f"max_penalty must be >= 1, got {self.max_penalty}")
        if self.line_tolerance < 0:
            raise InputError(f"line_tolerance must be >= 0, got {self.line_tolerance}")
        if self.gap_tolerance < 0:
            raise InputError(f"gap_tolerance must be >= 0, got {self.gap_tolerance}")
        if self.page_index < 1:
            raise InputError(f"page_index must be >= 1, got {self.page_index}")


class Config:
    """Application configuration: defaults, then YAML, then environment."""

    DEFAULT_CONFIG_PATH = Path.home() / ".cm2" / "config.yaml"
    LOCAL_CONFIG_PATH = Path("cm2.yaml")

    # env var -> (yaml section, key, type)
    ENV_KEYS = {
        "CM2_MAX_PENALTY": ("classifier", "max_penalty", int),
        "CM2_LINE_TOLERANCE": ("classifier", "line_tolerance", int),
        "CM2_GAP_TOLERANCE": ("classifier", "gap_tolerance", int),
        "CM2_PAGE_INDEX": ("classifier", "page_index", int),
        "CM2_REGISTRY_PATH": (None, "registry_path", str),
        "CM2_WORKERS": (None, "workers", int),
        "CM2_LOG_LEVEL": (None, "log_level", str),
        "CM2_METRICS_FILE": (None, "metrics_file", str),
    }

    def __init__(self, config_path: Optional[Path] = None, env_path: Optional[Path] = None):
        if config_path is None:
            if self.LOCAL_CONFIG_PATH.exists():
                self.config_path = self.LOCAL_CONFIG_PATH
            else:
                self.config_path = self.DEFAULT_CONFIG_PATH
        else:
            self.config_path = Path(config_path)

        self.env_path = Path(env_path) if env_path else self.config_path.parent / ".env"
        if self.env_path.exists():
            load_dotenv(self.env_path)

        self.max_penalty = DEFAULT_MAX_PENALTY
        self.line_tolerance = DEFAULT_LINE_TOLERANCE
        self.gap_tolerance = DEFAULT_GAP_TOLERANCE
        self.page_index = 1
        self.registry_path = Path("registry.cm2")
        self.workers = 1
        self.log_level = "INFO"
        self.metrics_file: Optional[Path] = None

        if self.config_path.exists():
            self.load_yaml_config()

        # Environment always wins over the YAML file
        self._apply_env()

    def _set(self, key: str, value: Any):
        if key in ("registry_path", "metrics_file"):
            value = Path(value) if value else None
            if key == "registry_path" and value is None:
                return
        setattr(self, key, value)

    def _apply_env(self):
        for env_name, (_, key, cast) in self.ENV_KEYS.items():
            raw = os.getenv(env_name)
            if raw is None or raw == "":
                continue
            try:
                self._set(key, cast(raw))
            except ValueError:
                logger.error(f"Ignoring {env_name}={raw!r}: expected {cast.__name__}")

    def load_yaml_config(self):
        """Load configuration from YAML file."""
        try:
            with open(self.config_path, 'r') as f:
                data = yaml.safe_load(f) or {}

            for section, key, cast in self.ENV_KEYS.values():
                source = data.get(section, {}) if section else data
                if isinstance(source, dict) and source.get(key) is not None:
                    self._set(key, cast(source[key]))

            logger.info(f"Loaded configuration from {self.config_path}")

        except Exception as e:
            logger.error(f"Failed to load YAML config: {e}")

    def save_yaml_config(self):
        """Save current configuration to YAML file."""
        self.config_path.parent.mkdir(parents=True, exist_ok=True)

        # Save with atomic write
        temp_path = self.config_path.with_suffix('.tmp')
        try:
            with open(temp_path, 'w') as f:
                yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)
            temp_path.replace(self.config_path)
            logger.info(f"Saved configuration to {self.config_path}")
        except Exception as e:
            logger.error(f"Failed to save configuration: {e}")
            if temp_path.exists():
                temp_path.unlink()
            raise

    def classifier_config(self, **overrides: Optional[int]) -> ClassifierConfig:
        """Build a ClassifierConfig; non-None overrides (CLI flags) take precedence."""
        values = {
            'max_penalty': self.max_penalty,
            'line_tolerance': self.line_tolerance,
            'gap_tolerance': self.gap_tolerance,
            'page_index': self.page_index,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return ClassifierConfig(**values)

    def validate(self) -> bool:
        """Validate configuration."""
        errors = []

        try:
            self.classifier_config()
        except InputError as e:
            errors.append(str(e))

        if self.workers < 1:
            errors.append(f"Invalid workers: {self.workers} (must be >= 1)")

        if self.log_level.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"Invalid log level: {self.log_level}")

        if errors:
            for error in errors:
                logger.error(error)
            return False

        return True

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            'classifier': {
                'max_penalty': self.max_penalty,
                'line_tolerance': self.line_tolerance,
                'gap_tolerance': self.gap_tolerance,
                'page_index': self.page_index,
            },
            'registry_path': str(self.registry_path),
            'workers': self.workers,
            'log_level': self.log_level,
            'metrics_file': str(self.metrics_file) if self.metrics_file else None,
        }
