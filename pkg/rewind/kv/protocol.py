"""
Text protocol of the key-value service.

Requests are CRLF-terminated lines; SET is followed by a data block of the announced length and a CRLF::

    SET <key> <len>\\r\\n<len bytes>\\r\\n  ->  STORED
    GET <key>\\r\\n                         ->  VALUE <key> <len>\\r\\n<bytes>\\r\\nEND  |  END
    DELETE <key>\\r\\n                      ->  DELETED  |  NOT_FOUND
    STATS\\r\\n                             ->  STAT <name> <value> ... END
    CRASHME <key>\\r\\n                     ->  SERVER_ERROR recovered
"""

import threading
from typing import Dict, Optional

from ..domains import current_context
from ..errors import NoActiveDomain, ParseError
from ..models import MAX_KEY_LENGTH, MAX_VALUE_LENGTH, AccessType, FaultInfo, KvCommand, Verb
from ..monitor import deliver_fault

CRLF = b"\r\n"
MAX_LINE = MAX_KEY_LENGTH + 64

_ARITY = {Verb.get: 2, Verb.set: 3, Verb.delete: 2, Verb.stats: 1, Verb.crashme: 2}


def _parse_key(raw: bytes) -> str:
    if not raw:
        raise ParseError("empty key")
    if len(raw) > MAX_KEY_LENGTH:
        raise ParseError(f"key longer than {MAX_KEY_LENGTH} bytes")
    if any(byte <= 0x20 or byte == 0x7F for byte in raw):
        raise ParseError("key contains whitespace or control characters")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("key is not valid UTF-8") from None


def announced_length(line: bytes) -> Optional[int]:
    """Length announced by a SET line, whatever its size; None for other lines."""
    tokens = line.split(b" ")
    if len(tokens) != 3 or tokens[0] != b"SET" or not tokens[2].isdigit():
        return None
    return int(tokens[2])


def set_length(line: bytes) -> Optional[int]:
    """
    Length of the data block announced by a SET line, as needed to frame the request.

    Returns
    -------
    length: int, optional
        None when the line is not a SET with a usable length; `parse_request` reports why.
    """
    length = announced_length(line)
    return length if length is not None and length <= MAX_VALUE_LENGTH else None


def parse_request(line: bytes, body: Optional[bytes] = None) -> KvCommand:
    """
    Validates one request.

    Parameters
    ----------
    line: bytes
        Request line without its CRLF.
    body: bytes, optional
        Data block of a SET including its trailing CRLF.

    Returns
    -------
    command: rewind.models.KvCommand

    Raises
    ------
    rewind.errors.ParseError: for unknown verbs, bad arity, invalid keys and bad data blocks.
    """
    tokens = line.split(b" ")
    try:
        verb = Verb(tokens[0].decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise ParseError(f"unknown command {tokens[0][:16]!r}") from None

    if len(tokens) != _ARITY[verb]:
        raise ParseError(f"{verb.value} takes {_ARITY[verb] - 1} argument(s)")
    if verb is Verb.stats:
        return KvCommand(verb)

    key = _parse_key(tokens[1])
    if verb is not Verb.set:
        if body is not None:
            raise ParseError(f"{verb.value} takes no data block")
        return KvCommand(verb, key)

    if not tokens[2].isdigit():
        raise ParseError("bad data length")
    length = int(tokens[2])
    if length > MAX_VALUE_LENGTH:
        raise ParseError(f"value longer than {MAX_VALUE_LENGTH} bytes")
    if body is None or len(body) != length + len(CRLF) or not body.endswith(CRLF):
        raise ParseError("bad data chunk")
    return KvCommand(verb, key, body[:length])


def wild_store(key: str) -> None:
    """Writes past the end of the active domain's arena; outside a domain the fault escalates."""
    try:
        context = current_context()
    except NoActiveDomain:
        deliver_fault(FaultInfo(0, AccessType.store, threading.get_ident()))
        return
    context.store(context.arena_end, key.encode("utf-8"))


def handle_request(line: bytes, body: Optional[bytes] = None) -> Dict:
    """
    Request handler run inside a domain: stages the raw request in the arena, parses it and returns the
    command as data. CRASHME performs a wild store instead of returning.
    """
    try:
        context = current_context()
    except NoActiveDomain:
        command = parse_request(line, body)
    else:
        raw = line + CRLF + (body or b"")
        staged = context.alloc(len(raw))
        context.store(staged, raw)
        raw = context.load(staged, len(raw))
        command = parse_request(raw[:len(line)], raw[len(line) + len(CRLF):] if body is not None else None)

    if command.verb is Verb.crashme:
        wild_store(command.key)
    return command.serialize()


def format_value(key: str, value: Optional[bytes]) -> bytes:
    if value is None:
        return b"END\r\n"
    return b"VALUE " + key.encode("utf-8") + b" " + str(len(value)).encode() + CRLF + value + CRLF + b"END\r\n"


def format_stats(stats: Dict[str, object]) -> bytes:
    lines = [f"STAT {name} {value}\r\n".encode("utf-8") for name, value in stats.items()]
    return b"".join(lines) + b"END\r\n"


def format_error(kind: str, message: str) -> bytes:
    """Error line, e.g. ``SERVER_ERROR recovered``; CR and LF are stripped from `message`."""
    clean = message.replace("\r", " ").replace("\n", " ")
    return f"{kind} {clean}\r\n".encode("utf-8")
