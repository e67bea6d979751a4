from functools import lru_cache
from typing import Optional

from loguru import logger

from ..config import Settings, load_settings
from ..errors import BackendUnavailable
from .base import BackendCapabilities, IsolationBackend, SwitchCost, ThreadRightsTable  # noqa:F401
from .hardware import HardwareKeysBackend, discover_key_count  # noqa:F401
from .portable import PortableBackend  # noqa:F401
from .recording import RecordingBackend  # noqa:F401


@lru_cache(maxsize=1)
def hardware_available() -> bool:
    """Tells whether protection keys can be allocated in this process."""
    return discover_key_count() > 0


def select_backend(settings: Optional[Settings] = None) -> IsolationBackend:
    """
    Builds the isolation backend named by the settings.

    The hardware backend falls back to the portable one when protection keys cannot be acquired.

    Parameters
    ----------
    settings: rewind.config.Settings
        Defaults to the settings read from the environment.

    Returns
    -------
    backend: rewind.backends.IsolationBackend
    """
    settings = settings or load_settings()

    if settings.backend == "record":
        return RecordingBackend(settings.record_max_keys)
    if settings.backend == "portable":
        return PortableBackend(settings.portable_max_keys)

    try:
        return HardwareKeysBackend()
    except BackendUnavailable as err:
        logger.warning(f"{err}, falling back to the portable backend")
        return PortableBackend(settings.portable_max_keys)
