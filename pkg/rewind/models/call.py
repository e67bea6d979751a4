from dataclasses import dataclass

SCHEMA_TAG = 1


@dataclass(frozen=True)
class MarshalledCall:
    """
    Serialized arguments crossing a domain boundary.

    Attributes
    ----------
    function_id: str
    payload: bytes
    schema_tag: int
    """
    function_id: str
    payload: bytes
    schema_tag: int = SCHEMA_TAG

    @property
    def payload_len(self) -> int:
        return len(self.payload)
