import itertools

import pytest

from rewind.errors import ConfigError
from rewind.models import DomainConfig, DomainState

ALLOWED = {
    (DomainState.initialized, DomainState.active),
    (DomainState.initialized, DomainState.retired),
    (DomainState.active, DomainState.initialized),
    (DomainState.active, DomainState.faulted),
    (DomainState.faulted, DomainState.initialized),
    (DomainState.faulted, DomainState.retired),
}


@pytest.mark.unit
@pytest.mark.parametrize("source, target", list(itertools.product(DomainState, DomainState)))
def test_only_lifecycle_transitions_are_allowed(source, target):
    assert source.can_become(target) is ((source, target) in ALLOWED)


@pytest.mark.unit
def test_retired_is_terminal():
    assert not any(DomainState.retired.can_become(state) for state in DomainState)


@pytest.mark.unit
@pytest.mark.parametrize("field", ["stack_bytes", "arena_bytes"])
def test_domain_config_rejects_non_positive_sizes(field):
    with pytest.raises(ConfigError):
        DomainConfig(**{field: 0})


@pytest.mark.unit
def test_domain_config_defaults():
    config = DomainConfig()

    assert config.zero_fill
    assert not config.confidentiality
    assert not config.retain_heap
