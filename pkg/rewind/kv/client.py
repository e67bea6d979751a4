import socket
from typing import Dict, Optional

from ..errors import KvResponseError
from .protocol import CRLF


class KvClient:
    """
    Blocking client of the key-value service.

    Parameters
    ----------
    host: str
    port: int
    timeout: float
        Socket timeout in seconds.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 11311, timeout: float = 10.0) -> None:
        self.socket = socket.create_connection((host, port), timeout=timeout)
        self._reader = self.socket.makefile("rb")

    def __enter__(self) -> "KvClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        self._reader.close()
        self.socket.close()

    def raw(self, data: bytes) -> None:
        """Sends bytes as they are."""
        self.socket.sendall(data)

    def read_line(self) -> bytes:
        line = self._reader.readline()
        if not line.endswith(CRLF):
            raise ConnectionError("connection closed by the server")
        return line[:-len(CRLF)]

    def _expect(self, *accepted: bytes) -> bytes:
        line = self.read_line()
        if line not in accepted:
            raise KvResponseError(line.decode("utf-8", "replace"))
        return line

    def get(self, key: str) -> Optional[bytes]:
        self.raw(f"GET {key}\r\n".encode("utf-8"))
        line = self.read_line()
        if line == b"END":
            return None
        if not line.startswith(b"VALUE "):
            raise KvResponseError(line.decode("utf-8", "replace"))
        length = int(line.rsplit(b" ", 1)[1])
        value = self._reader.read(length + len(CRLF))[:length]
        self._expect(b"END")
        return value

    def set(self, key: str, value: bytes) -> None:
        self.raw(f"SET {key} {len(value)}\r\n".encode("utf-8") + value + CRLF)
        self._expect(b"STORED")

    def delete(self, key: str) -> bool:
        self.raw(f"DELETE {key}\r\n".encode("utf-8"))
        return self._expect(b"DELETED", b"NOT_FOUND") == b"DELETED"

    def stats(self) -> Dict[str, str]:
        self.raw(b"STATS\r\n")
        stats = {}
        while True:
            line = self.read_line()
            if line == b"END":
                return stats
            if not line.startswith(b"STAT "):
                raise KvResponseError(line.decode("utf-8", "replace"))
            _, name, value = line.decode("utf-8").split(" ", 2)
            stats[name] = value

    def crashme(self, key: str = "boom") -> str:
        """Sends a CRASHME and returns the response line."""
        self.raw(f"CRASHME {key}\r\n".encode("utf-8"))
        return self.read_line().decode("utf-8")
