import pytest

from rewind.models import KvCommand, Verb


@pytest.mark.unit
@pytest.mark.parametrize("command", [
    KvCommand(Verb.get, "a"),
    KvCommand(Verb.set, "a", b"value"),
    KvCommand(Verb.delete, "a"),
    KvCommand(Verb.stats),
    KvCommand(Verb.crashme, "a"),
])
def test_command_deserializes_its_serialization(command):
    assert KvCommand.deserialize(command.serialize()) == command


@pytest.mark.unit
def test_command_requires_value_for_set_only():
    with pytest.raises(AssertionError):
        KvCommand(Verb.set, "a")
    with pytest.raises(AssertionError):
        KvCommand(Verb.get, "a", b"x")
    with pytest.raises(AssertionError):
        KvCommand(Verb.stats, "a")
