import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

PROJECT_ROOT = Path(__file__).resolve().parent.parent
ENV_FILE = PROJECT_ROOT / ".env"

DEFAULT_MAX_STRUCTURES = 100_000
DEFAULT_SEARCH_BUDGET = 20_000
DEFAULT_SCHEMA_BUDGET = 64


@lru_cache(maxsize=1)
def _env_file_values(env_path: Path = ENV_FILE) -> Dict[str, str]:
    """
    KEY=VALUE pairs from the project .env file, read once per process.
    Blank lines and ``#`` comments are skipped; surrounding quotes are dropped.
    """
    if not env_path.is_file():
        return {}
    values: Dict[str, str] = {}
    for line in env_path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.strip().partition("=")
        if not sep or key.startswith("#"):
            continue
        values[key.strip()] = value.strip().strip("\"'")
    return values


def get_env_var(name: str, default: Optional[str] = None) -> Optional[str]:
    """The process environment wins over the .env file."""
    if name in os.environ:
        return os.environ[name]
    return _env_file_values().get(name, default)


def get_budget(name: str, default: int) -> int:
    raw = get_env_var(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"Environment variable '{name}' must be an integer, got {raw!r}") from None
    if value < 1:
        raise RuntimeError(f"Environment variable '{name}' must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    max_structures: int = DEFAULT_MAX_STRUCTURES
    search_budget: int = DEFAULT_SEARCH_BUDGET
    schema_budget: int = DEFAULT_SCHEMA_BUDGET


def load_settings() -> Settings:
    """Budget ceilings shared by the CLI and the API."""
    return Settings(
        max_structures=get_budget("SCOTTLAB_MAX_STRUCTURES", DEFAULT_MAX_STRUCTURES),
        search_budget=get_budget("SCOTTLAB_SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET),
        schema_budget=get_budget("SCOTTLAB_SCHEMA_BUDGET", DEFAULT_SCHEMA_BUDGET),
    )
