import pytest

from rewind.config import MIB, Settings, load_settings
from rewind.errors import ConfigError


@pytest.mark.unit
def test_empty_environment_gives_defaults():
    assert load_settings({}) == Settings()


@pytest.mark.unit
def test_environment_overrides_settings():
    settings = load_settings({
        "REWIND_BACKEND": "Portable",
        "REWIND_PORTABLE_MAX_KEYS": "8",
        "REWIND_MAX_NESTING": "2",
        "REWIND_ARENA_BYTES": "0x100000",
        "REWIND_ZERO_FILL": "off",
        "REWIND_LOG_LEVEL": "debug",
    })

    assert settings.backend == "portable"
    assert settings.portable_max_keys == 8
    assert settings.max_nesting == 2
    assert settings.arena_bytes == MIB
    assert settings.zero_fill is False
    assert settings.log_level == "DEBUG"


@pytest.mark.unit
@pytest.mark.parametrize("env", [
    {"REWIND_BACKEND": "vmx"},
    {"REWIND_MAX_NESTING": "many"},
    {"REWIND_MAX_NESTING": "0"},
    {"REWIND_ZERO_FILL": "maybe"},
])
def test_invalid_values_raise_config_error(env):
    with pytest.raises(ConfigError):
        load_settings(env)
