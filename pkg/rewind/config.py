import os
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import ConfigError

BACKEND_CHOICES = ("hardware", "portable", "record")

KIB = 1024
MIB = 1024 * KIB


@dataclass(frozen=True)
class Settings:
    """
    Process-wide settings read from the environment.

    Attributes
    ----------
    backend: str
        Isolation backend: hardware, portable or record.
    portable_max_keys: int
        Key limit of the portable backend.
    record_max_keys: int
        Key limit of the recording test double.
    max_nesting: int
        Deepest allowed chain of nested domain executions.
    stack_bytes: int
        Default domain stack size.
    arena_bytes: int
        Default domain arena size.
    zero_fill: bool
        Whether arenas are zero-filled when discarded.
    log_level: str
        Loguru level used by the command-line tools.
    """
    backend: str = "hardware"
    portable_max_keys: int = 64
    record_max_keys: int = 15
    max_nesting: int = 4
    stack_bytes: int = 256 * KIB
    arena_bytes: int = 16 * MIB
    zero_fill: bool = True
    log_level: str = "INFO"

    def __post_init__(self):
        if self.backend not in BACKEND_CHOICES:
            raise ConfigError(f"Unknown backend {self.backend!r}, expected one of {BACKEND_CHOICES}")
        for name in ("portable_max_keys", "record_max_keys", "max_nesting", "stack_bytes", "arena_bytes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


def _read_int(env: Mapping[str, str], name: str, default: int) -> int:
    raw = env.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw, 0)
    except ValueError as err:
        raise ConfigError(f"{name}={raw!r} is not an integer") from err


def _read_bool(env: Mapping[str, str], name: str, default: bool) -> bool:
    raw = env.get(name)
    if raw is None or raw == "":
        return default
    lowered = raw.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"{name}={raw!r} is not a boolean")


def load_settings(env: Optional[Mapping[str, str]] = None) -> Settings:
    """
    Builds the settings from environment variables.

    Parameters
    ----------
    env: Mapping[str, str]
        Variables to read. Defaults to ``os.environ``.

    Returns
    -------
    settings: rewind.config.Settings

    Raises
    ------
    rewind.errors.ConfigError: if a variable holds an invalid value.
    """
    env = os.environ if env is None else env
    defaults = Settings()

    return Settings(
        backend=env.get("REWIND_BACKEND", defaults.backend).strip().lower() or defaults.backend,
        portable_max_keys=_read_int(env, "REWIND_PORTABLE_MAX_KEYS", defaults.portable_max_keys),
        record_max_keys=_read_int(env, "REWIND_RECORD_MAX_KEYS", defaults.record_max_keys),
        max_nesting=_read_int(env, "REWIND_MAX_NESTING", defaults.max_nesting),
        stack_bytes=_read_int(env, "REWIND_STACK_BYTES", defaults.stack_bytes),
        arena_bytes=_read_int(env, "REWIND_ARENA_BYTES", defaults.arena_bytes),
        zero_fill=_read_bool(env, "REWIND_ZERO_FILL", defaults.zero_fill),
        log_level=env.get("REWIND_LOG_LEVEL", defaults.log_level).upper(),
    )
