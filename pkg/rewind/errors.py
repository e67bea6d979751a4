class RewindError(Exception):
    """Base class of every error raised by the rewind package."""


# isolation backend

class BackendUnavailable(RewindError):
    """The requested isolation mechanism cannot be used on this machine."""


class KeyExhausted(RewindError):
    """All protection keys of the backend are currently acquired."""


class KeyInUse(RewindError):
    """A protection key cannot be released while a region is still tagged with it."""


class UnknownKey(RewindError):
    """The handle does not name a live protection key of this backend."""


class AlignmentError(RewindError, ValueError):
    """A memory region is not page aligned or its length is not a page multiple."""


class OsRejected(RewindError, OSError):
    """The operating system refused a memory-management request."""


# allocator

class ArenaExhausted(RewindError):
    """A domain arena cannot satisfy an allocation."""


# domain lifecycle

class ConfigError(RewindError, ValueError):
    """Invalid configuration value."""


class IllegalState(RewindError):
    """The domain is not in a state that allows the requested operation."""


class NestingLimit(RewindError):
    """Entering the domain would exceed the configured nesting depth."""


class BusyDomain(RewindError):
    """The domain is already being executed."""


class EntryRaised(RewindError):
    """
    The domain entry raised an ordinary Python exception.

    Only the exception type name and message cross the domain boundary.

    Attributes
    ----------
    type_name: str
    message: str
    """

    def __init__(self, type_name: str, message: str) -> None:
        super().__init__(f"{type_name}: {message}")
        self.type_name = type_name
        self.message = message


# snapshot / monitor

class StaleSnapshot(RewindError):
    """A rewind targeted a snapshot that is no longer the live one of its domain."""


class HandlerConflict(RewindError):
    """A foreign handler for protection faults is installed; domains are not armed."""


class NoActiveDomain(RewindError):
    """The calling thread is not executing inside a domain."""


# marshal

class MarshalError(RewindError):
    """Base class of the serialization errors."""


class OversizedArgument(MarshalError, ValueError):
    """Encoded value exceeds the marshalling quota."""


class EncodingError(MarshalError):
    """Value cannot be encoded."""


class DecodeError(MarshalError):
    """Payload is truncated, corrupt or was produced by another encoding version."""


# guard

class GuardError(RewindError):
    """
    A guarded call ended in a memory violation and the policy did not produce a value.

    Attributes
    ----------
    report: rewind.models.ViolationReport
        Report of the last violation.
    attempts: int
        Number of executions performed, including retries.
    function_id: str
    """

    def __init__(self, report, attempts: int, function_id: str = "") -> None:
        super().__init__(f"{function_id or 'guarded call'} violated after {attempts} attempt(s): "
                         f"{report.kind.value} in domain {report.domain_id}")
        self.report = report
        self.attempts = attempts
        self.function_id = function_id


class DuplicateFunctionId(RewindError):
    """A guarded function with the same identifier is already registered."""


class NonSerializableSignature(RewindError, TypeError):
    """Guarded target declares argument or return types the codec cannot carry."""


# kv service

class ParseError(RewindError, ValueError):
    """Malformed request."""


# availability model

class DomainError(RewindError, ValueError):
    """An availability-model input lies outside the mathematical domain of the function."""


class KvResponseError(RewindError):
    """The key-value service answered with an error line."""
