import random

import pytest

from rewind.errors import DecodeError, EncodingError, OversizedArgument
from rewind.marshal import (MAGIC, MAX_DEPTH, BinaryCodec, decode, encode, marshal_call, marshal_in, quota_for,
                            unmarshal_out)
from rewind.models import SCHEMA_TAG, DomainConfig
from tests.helpers import deterministic_test


@pytest.mark.unit
@pytest.mark.parametrize("value", [
    None, True, False, 0, -1, 2 ** 70, -(2 ** 70), 1.5, float("inf"), "", "ünïcode", b"\x00\xff",
    [1, [2, [3]]], (1, "a"), {"k": b"v", 3: None}, {1, 2}, frozenset({"x"}),
])
def test_decode_restores_value_and_type(value):
    restored = decode(encode(value))

    assert restored == value
    assert type(restored) is type(value)


@pytest.mark.unit
def test_bytearray_arrives_as_bytes():
    assert decode(encode(bytearray(b"ab"))) == b"ab"


@pytest.mark.unit
def test_payload_is_a_deep_copy():
    original = {"items": [1, 2]}
    copy = decode(encode(original))
    copy["items"].append(3)

    assert original == {"items": [1, 2]}


@pytest.mark.unit
def test_header_carries_magic_and_schema_tag():
    payload = encode(1)

    assert payload[:2] == MAGIC
    assert payload[2] == SCHEMA_TAG


@pytest.mark.unit
@pytest.mark.parametrize("value", [object(), lambda: None, [1, object()], 1j])
def test_unsupported_types_raise_encoding_error(value):
    with pytest.raises(EncodingError):
        encode(value)


@pytest.mark.unit
def test_nesting_past_limit_raises_encoding_error():
    value = []
    for _ in range(MAX_DEPTH + 2):
        value = [value]

    with pytest.raises(EncodingError):
        encode(value)


@pytest.mark.unit
@pytest.mark.parametrize("payload", [
    b"",
    b"XX" + encode(1)[2:],
    encode(1)[:2] + bytes([SCHEMA_TAG + 1]) + encode(1)[3:],
    encode("hello")[:-1],
    encode("hello") + b"!",
    MAGIC + bytes([SCHEMA_TAG, 1]) + b"?",
    MAGIC + bytes([SCHEMA_TAG, 3]) + b"s\x01\xff",
    MAGIC + bytes([SCHEMA_TAG, 3]) + b"e\x01l\x00"[:3],
])
def test_corrupt_payloads_raise_decode_error(payload):
    with pytest.raises(DecodeError):
        decode(payload)


@pytest.mark.unit
def test_unhashable_set_member_raises_decode_error():
    body = b"e\x01l\x00"
    with pytest.raises(DecodeError):
        decode(MAGIC + bytes([SCHEMA_TAG, len(body)]) + body)


@pytest.mark.unit
def test_marshal_call_encodes_arguments():
    call = marshal_call("module.f", (1, "a"), {"flag": True})

    assert call.function_id == "module.f"
    assert call.schema_tag == SCHEMA_TAG
    assert call.payload_len == len(call.payload)
    assert unmarshal_out(call.payload) == ((1, "a"), {"flag": True})


@pytest.mark.unit
def test_marshal_call_enforces_quota():
    with pytest.raises(OversizedArgument):
        marshal_call("f", (b"x" * 100,), quota=50)


@pytest.mark.unit
def test_marshal_in_copies_into_the_arena(record_manager):
    domain = record_manager.domain_create(DomainConfig(stack_bytes=4096, arena_bytes=8192))
    value = {"answer": 42}

    address = marshal_in(domain, value, record_manager.space)

    assert domain.arena.contains(address, len(encode(value)))
    assert decode(record_manager.space.read(address, len(encode(value)))) == value
    assert quota_for(domain) == 4096
    with pytest.raises(OversizedArgument):
        marshal_in(domain, b"x" * 4096, record_manager.space)


@pytest.mark.unit
def test_codec_instances_are_interchangeable():
    assert BinaryCodec().encode([1]) == encode([1])


def random_scalar():
    return random.choice([
        None,
        random.random() < 0.5,
        random.randint(-2 ** 80, 2 ** 80),
        random.uniform(-1e12, 1e12),
        "".join(chr(random.randint(32, 0x2FFF)) for _ in range(random.randint(0, 12))),
        bytes(random.getrandbits(8) for _ in range(random.randint(0, 16))),
    ])


def random_value(depth: int = 0):
    if depth >= 4 or random.random() < 0.4:
        return random_scalar()
    size = random.randint(0, 4)
    kind = random.choice(["list", "tuple", "dict", "set", "frozenset"])
    if kind == "list":
        return [random_value(depth + 1) for _ in range(size)]
    if kind == "tuple":
        return tuple(random_value(depth + 1) for _ in range(size))
    if kind == "dict":
        return {f"k{random.randint(0, 99)}": random_value(depth + 1) for _ in range(size)}
    members = {random.randint(-1000, 1000) for _ in range(size)}
    return members if kind == "set" else frozenset(members)


@pytest.mark.unit
@deterministic_test(seed=11)
def test_generated_values_survive_the_codec():
    for _ in range(1000):
        value = random_value()

        restored = decode(encode(value))

        assert restored == value
        assert type(restored) is type(value)
