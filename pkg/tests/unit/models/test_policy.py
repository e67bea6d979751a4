import pytest

from rewind.errors import ConfigError
from rewind.models import DomainConfig, DomainMode, GuardPolicy, OnViolation


@pytest.mark.unit
def test_policy_accepts_textual_modes():
    policy = GuardPolicy(domain_mode="persistent", on_violation="retry-then-error", retry_limit=2)

    assert policy.domain_mode is DomainMode.persistent
    assert policy.on_violation is OnViolation.retry_then_error


@pytest.mark.unit
@pytest.mark.parametrize("fields", [
    {"retry_limit": -1},
    {"retry_limit": 1},
    {"on_violation": "fallback-value"},
    {"domain_mode": "sometimes"},
])
def test_policy_rejects_inconsistent_fields(fields):
    with pytest.raises((ConfigError, ValueError)):
        GuardPolicy(**fields)


@pytest.mark.unit
def test_policy_builds_domain_config():
    config = GuardPolicy(stack_bytes=8192, arena_bytes=65536, confidentiality=True, retain_heap=True,
                         zero_fill=False).domain_config()

    assert (config.stack_bytes, config.arena_bytes) == (8192, 65536)
    assert config.confidentiality and config.retain_heap and not config.zero_fill


@pytest.mark.unit
def test_policy_sizes_default_to_domain_config():
    config = GuardPolicy().domain_config()

    assert (config.stack_bytes, config.arena_bytes) == (DomainConfig().stack_bytes, DomainConfig().arena_bytes)
