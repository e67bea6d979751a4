from enum import Enum


class AccessRights(Enum):
    """Rights a thread holds on the memory tagged with one protection key."""
    no_access: int = 0
    read_only: int = 1
    read_write: int = 2

    def allows(self, write: bool) -> bool:
        """
        Tells whether an access is permitted.

        Parameters
        ----------
        write: bool
            Whether the access is a store.

        Returns
        -------
        allowed: bool
        """
        if write:
            return self is AccessRights.read_write
        return self is not AccessRights.no_access

    @staticmethod
    def most_permissive(rights) -> "AccessRights":
        """Returns the widest rights in `rights`, or no_access when empty."""
        return max(rights, key=lambda value: value.value, default=AccessRights.no_access)
