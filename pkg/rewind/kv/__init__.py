from .client import KvClient  # noqa:F401
from .protocol import handle_request, parse_request  # noqa:F401
from .server import KvServer, serve  # noqa:F401
from .store import KvStore  # noqa:F401
