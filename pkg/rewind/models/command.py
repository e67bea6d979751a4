from dataclasses import dataclass
from enum import Enum
from typing import Optional

MAX_KEY_LENGTH = 250
MAX_VALUE_LENGTH = 1024 * 1024


class Verb(Enum):
    """Requests understood by the key-value service."""
    get: str = "GET"
    set: str = "SET"
    delete: str = "DELETE"
    stats: str = "STATS"
    crashme: str = "CRASHME"


_KEYED = {Verb.get, Verb.set, Verb.delete, Verb.crashme}


@dataclass(frozen=True)
class KvCommand:
    """
    Validated key-value request.

    Attributes
    ----------
    verb: rewind.models.Verb
    key: str
        At most 250 bytes, no whitespace or control characters. Empty for STATS.
    value: bytes, optional
        Present for SET only, at most 1 MiB.
    """
    verb: Verb
    key: str = ""
    value: Optional[bytes] = None

    def __post_init__(self):
        assert (self.value is not None) == (self.verb is Verb.set)
        assert bool(self.key) == (self.verb in _KEYED)

    def serialize(self) -> dict:
        """
        Serializes this command into a dict.

        Returns
        -------
        serializable_dict: dict
        """
        return {"verb": self.verb.value, "key": self.key, "value": self.value}

    @staticmethod
    def deserialize(data: dict) -> "KvCommand":
        """
        Builds a command from the output of `serialize`.

        Parameters
        ----------
        data: dict
            Dictionary with the following format: {verb: str, key: str, value: bytes or None}
        """
        return KvCommand(Verb(data["verb"]), data["key"], data["value"])
