from dataclasses import dataclass

ROOT_KEY_ID = 0


@dataclass(frozen=True)
class ProtectionKeyHandle:
    """
    Handle of a protection key acquired from an isolation backend.

    Attributes
    ----------
    key_id: int
        Identifier assigned by the backend. Key 0 covers untagged memory and is never handed out.
    """
    key_id: int

    @property
    def is_root(self) -> bool:
        return self.key_id == ROOT_KEY_ID


ROOT_KEY = ProtectionKeyHandle(ROOT_KEY_ID)
