"""
Serialization of values crossing a domain boundary.

Payloads are deep copies in a compact self-describing binary format. They are stable within one process
only; the header carries a schema tag so a future encoding can be told apart.
"""

import struct
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence

from .allocator import arena_alloc
from .errors import DecodeError, EncodingError, OversizedArgument
from .models import DomainDescriptor, MarshalledCall, SCHEMA_TAG

MAGIC = b"\xd5\x7e"
MAX_DEPTH = 64

_NONE, _TRUE, _FALSE = b"N", b"T", b"F"
_INT, _FLOAT, _STR, _BYTES = b"i", b"d", b"s", b"b"
_LIST, _TUPLE, _DICT, _SET, _FROZENSET = b"l", b"t", b"m", b"e", b"z"

_DOUBLE = struct.Struct(">d")


def _varint(value: int) -> bytes:
    assert value >= 0
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


class Codec(ABC):
    """Encoding used for arguments and return values."""

    schema_tag = SCHEMA_TAG

    @abstractmethod
    def encode(self, value: Any) -> bytes:
        """
        Raises
        ------
        rewind.errors.EncodingError: if the value holds an unsupported type or nests too deep.
        """

    @abstractmethod
    def decode(self, payload: bytes) -> Any:
        """
        Raises
        ------
        rewind.errors.DecodeError: if the payload is truncated, corrupt or of another schema.
        """


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        end = self.pos + count
        if end > len(self.data):
            raise DecodeError(f"Truncated payload: need {count} byte(s) at offset {self.pos}")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def varint(self) -> int:
        result, shift = 0, 0
        while True:
            byte = self.take(1)[0]
            result |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return result
            shift += 7


class BinaryCodec(Codec):
    """
    Tag-length-value encoding of None, bool, int, float, str, bytes, list, tuple, dict, set and frozenset.

    Layout: magic (2 bytes), schema tag (1 byte), varint body length, body.
    """

    def encode(self, value: Any) -> bytes:
        body = bytearray()
        self._encode(value, body, 0)
        return MAGIC + bytes([self.schema_tag]) + _varint(len(body)) + bytes(body)

    def _encode(self, value: Any, out: bytearray, depth: int) -> None:
        if depth > MAX_DEPTH:
            raise EncodingError(f"Value nests deeper than {MAX_DEPTH} levels")

        kind = type(value)
        if value is None:
            out += _NONE
        elif value is True:
            out += _TRUE
        elif value is False:
            out += _FALSE
        elif kind is int:
            out += _INT
            out += _varint(value << 1 if value >= 0 else (-value << 1) - 1)
        elif kind is float:
            out += _FLOAT
            out += _DOUBLE.pack(value)
        elif kind is str:
            try:
                raw = value.encode("utf-8")
            except UnicodeEncodeError as err:
                raise EncodingError(f"String is not valid unicode: {err}") from err
            out += _STR + _varint(len(raw)) + raw
        elif kind in (bytes, bytearray, memoryview):
            raw = bytes(value)
            out += _BYTES + _varint(len(raw)) + raw
        elif kind in (list, tuple, set, frozenset):
            out += {list: _LIST, tuple: _TUPLE, set: _SET, frozenset: _FROZENSET}[kind]
            out += _varint(len(value))
            for item in value:
                self._encode(item, out, depth + 1)
        elif kind is dict:
            out += _DICT + _varint(len(value))
            for key, item in value.items():
                self._encode(key, out, depth + 1)
                self._encode(item, out, depth + 1)
        else:
            raise EncodingError(f"Values of type {kind.__name__} cannot cross a domain boundary")

    def decode(self, payload: bytes) -> Any:
        reader = _Reader(bytes(payload))
        if reader.take(2) != MAGIC:
            raise DecodeError("Bad magic")
        tag = reader.take(1)[0]
        if tag != self.schema_tag:
            raise DecodeError(f"Schema tag {tag} does not match {self.schema_tag}")
        length = reader.varint()
        if len(reader.data) - reader.pos != length:
            raise DecodeError(f"Body length {length} does not match the {len(reader.data) - reader.pos} bytes present")
        value = self._decode(reader, 0)
        if reader.pos != len(reader.data):
            raise DecodeError(f"{len(reader.data) - reader.pos} trailing byte(s)")
        return value

    def _decode(self, reader: _Reader, depth: int) -> Any:
        if depth > MAX_DEPTH:
            raise DecodeError(f"Payload nests deeper than {MAX_DEPTH} levels")

        tag = reader.take(1)
        if tag == _NONE:
            return None
        if tag == _TRUE:
            return True
        if tag == _FALSE:
            return False
        if tag == _INT:
            raw = reader.varint()
            return raw >> 1 if not raw & 1 else -((raw + 1) >> 1)
        if tag == _FLOAT:
            return _DOUBLE.unpack(reader.take(_DOUBLE.size))[0]
        if tag == _STR:
            try:
                return reader.take(reader.varint()).decode("utf-8")
            except UnicodeDecodeError as err:
                raise DecodeError(f"Invalid UTF-8 in string: {err}") from err
        if tag == _BYTES:
            return reader.take(reader.varint())
        if tag in (_LIST, _TUPLE, _SET, _FROZENSET):
            items = [self._decode(reader, depth + 1) for _ in range(reader.varint())]
            try:
                return {_LIST: list, _TUPLE: tuple, _SET: set, _FROZENSET: frozenset}[tag](items)
            except TypeError as err:
                raise DecodeError(f"Unhashable set member: {err}") from err
        if tag == _DICT:
            result = {}
            for _ in range(reader.varint()):
                key = self._decode(reader, depth + 1)
                try:
                    result[key] = self._decode(reader, depth + 1)
                except TypeError as err:
                    raise DecodeError(f"Unhashable dict key: {err}") from err
            return result
        raise DecodeError(f"Unknown type tag {tag!r} at offset {reader.pos - 1}")


DEFAULT_CODEC: Codec = BinaryCodec()


def encode(value: Any, codec: Optional[Codec] = None) -> bytes:
    return (codec or DEFAULT_CODEC).encode(value)


def decode(payload: bytes, codec: Optional[Codec] = None) -> Any:
    return (codec or DEFAULT_CODEC).decode(payload)


def quota_for(domain: DomainDescriptor) -> int:
    """Largest payload accepted into the domain arena: half its capacity."""
    return domain.arena.capacity // 2


def _check_quota(size: int, quota: Optional[int]) -> None:
    if quota is not None and size > quota:
        raise OversizedArgument(f"Encoded value takes {size} bytes, quota is {quota}")


def marshal_call(function_id: str, args: Sequence = (), kwargs: Optional[Dict[str, Any]] = None,
                 quota: Optional[int] = None) -> MarshalledCall:
    """
    Encodes the arguments of a call into a domain.

    Parameters
    ----------
    function_id: str
    args: sequence
    kwargs: dict, optional
    quota: int, optional
        Largest accepted payload.

    Returns
    -------
    call: rewind.models.MarshalledCall

    Raises
    ------
    rewind.errors.EncodingError
    rewind.errors.OversizedArgument
    """
    payload = encode((tuple(args), dict(kwargs or {})))
    _check_quota(len(payload), quota)
    return MarshalledCall(function_id=function_id, payload=payload)


def copy_in(domain: DomainDescriptor, payload: bytes, space) -> int:
    """
    Copies an encoded payload into the domain arena.

    Returns
    -------
    address: int
        Start of the copy inside the arena.
    """
    _check_quota(len(payload), quota_for(domain))
    address = arena_alloc(domain, max(len(payload), 1), 8)
    space.write(address, payload)
    return address


def marshal_in(domain: DomainDescriptor, value: Any, space) -> int:
    """
    Places a deep copy of `value` inside the domain arena.

    Parameters
    ----------
    domain: rewind.models.DomainDescriptor
    value: Any
        Built from the types `BinaryCodec` supports.
    space: rewind.memory.AddressSpace

    Returns
    -------
    address: int
        The copy spans ``[address, address + len(encode(value)))``.

    Raises
    ------
    rewind.errors.OversizedArgument: if the encoding exceeds half the arena.
    rewind.errors.EncodingError: if the value cannot be encoded.
    """
    return copy_in(domain, encode(value), space)


def unmarshal_out(payload: bytes) -> Any:
    """
    Rebuilds a value from a payload copied out of a domain.

    Raises
    ------
    rewind.errors.DecodeError
    """
    return decode(bytes(payload))
