import os
import signal
import socketserver
import sys
import threading
from typing import Optional, Tuple

from loguru import logger

from ..domains import DomainManager
from ..errors import EntryRaised, GuardError, KeyExhausted, ParseError
from ..guard import guard, unregister
from ..models import MAX_VALUE_LENGTH, DomainMode, GuardPolicy, KvCommand, Verb
from .protocol import (CRLF, MAX_LINE, announced_length, format_error, format_stats, format_value,
                       handle_request, set_length)
from .store import KvStore

PRELOAD_VALUE_BYTES = 64 * 1024
HANDLER_ARENA_BYTES = 4 * 1024 * 1024


def parse_address(listen: str) -> Tuple[str, int]:
    """Splits ``host:port``; an empty host means all interfaces."""
    host, separator, port = str(listen).rpartition(":")
    if not separator or not port.isdigit():
        raise ValueError(f"listen address must look like host:port, got {listen!r}")
    return host or "0.0.0.0", int(port)


class KvRequestHandler(socketserver.StreamRequestHandler):
    """Serves one connection, one request in flight at a time."""

    server: "KvServer"

    def handle(self) -> None:
        if not self.server.connection_opened():
            self.wfile.write(format_error("SERVER_ERROR", "too many connections"))
            return

        try:
            while True:
                line = self.rfile.readline(MAX_LINE + len(CRLF))
                if not line:
                    break
                if not line.endswith(CRLF):
                    self.wfile.write(format_error("CLIENT_ERROR", "line too long"))
                    break

                line = line[:-len(CRLF)]
                announced = announced_length(line)
                if announced is not None and announced > MAX_VALUE_LENGTH:
                    # the data block cannot be framed
                    self.wfile.write(format_error("CLIENT_ERROR", f"value longer than {MAX_VALUE_LENGTH} bytes"))
                    break
                length = set_length(line)
                body = self.rfile.read(length + len(CRLF)) if length is not None else None
                self.wfile.write(self.server.process(line, body))
        except ConnectionError:
            pass
        finally:
            self.server.connection_closed()

    def finish(self) -> None:
        try:
            super().finish()
        finally:
            if self.server.handler is not None:
                self.server.handler.release_thread()


class KvServer(socketserver.ThreadingTCPServer):
    """
    Key-value service whose request parsing runs in guarded domains.

    Parameters
    ----------
    address: (str, int)
    guard_mode: str
        per-call or persistent.
    guarded: bool
        False runs the handler outside any domain (unprotected baseline).
    max_conns: int
        Connections beyond this limit are refused with an error line.
    manager: rewind.domains.DomainManager, optional
    """

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: Tuple[str, int], guard_mode: str = "persistent", guarded: bool = True,
                 max_conns: int = 64, manager: Optional[DomainManager] = None) -> None:
        super().__init__(address, KvRequestHandler)
        self.store = KvStore()
        self.max_conns = max_conns
        self.guard_mode = DomainMode(guard_mode).value if guarded else "off"
        self.requests = 0
        self.rewinds = 0
        self.curr_connections = 0
        self._counter_lock = threading.Lock()

        self.handler = None
        if guarded:
            policy = GuardPolicy(domain_mode=guard_mode, arena_bytes=HANDLER_ARENA_BYTES)
            self.handler = guard(handle_request, policy, f"rewind.kv.handle_request@{id(self):x}", manager)

    def connection_opened(self) -> bool:
        with self._counter_lock:
            if self.curr_connections >= self.max_conns:
                return False
            self.curr_connections += 1
            return True

    def connection_closed(self) -> None:
        with self._counter_lock:
            self.curr_connections -= 1

    def process(self, line: bytes, body: Optional[bytes]) -> bytes:
        """Parses a framed request in a domain and applies it to the store."""
        with self._counter_lock:
            self.requests += 1

        try:
            command = KvCommand.deserialize(self.handler(line, body) if self.handler else handle_request(line, body))
        except GuardError:
            with self._counter_lock:
                self.rewinds += 1
            return format_error("SERVER_ERROR", "recovered")
        except EntryRaised as err:
            kind = "CLIENT_ERROR" if err.type_name == ParseError.__name__ else "SERVER_ERROR"
            return format_error(kind, err.message)
        except ParseError as err:
            return format_error("CLIENT_ERROR", str(err))
        except KeyExhausted:
            return format_error("SERVER_ERROR", "out of isolation domains")

        return self.apply(command)

    def apply(self, command: KvCommand) -> bytes:
        if command.verb is Verb.get:
            return format_value(command.key, self.store.get(command.key))
        if command.verb is Verb.set:
            self.store.set(command.key, command.value)
            return b"STORED\r\n"
        if command.verb is Verb.delete:
            return b"DELETED\r\n" if self.store.delete(command.key) else b"NOT_FOUND\r\n"
        if command.verb is Verb.stats:
            return format_stats(self.stats())
        # CRASHME that did not fault
        return format_error("SERVER_ERROR", "not crashed")

    def stats(self) -> dict:
        return {
            "items": self.store.item_count,
            "bytes": self.store.byte_count,
            "rewinds": self.rewinds,
            "requests": self.requests,
            "pid": os.getpid(),
            "violations": self.handler.violations if self.handler else 0,
            "curr_connections": self.curr_connections,
            "guard_mode": self.guard_mode,
        }

    def preload(self, dataset_bytes: int) -> int:
        """Fills the store with ``key:<n>`` entries of 64 KiB until `dataset_bytes` are held; returns the count."""
        count = 0
        while self.store.byte_count < dataset_bytes:
            size = min(PRELOAD_VALUE_BYTES, dataset_bytes - self.store.byte_count)
            self.store.set(f"key:{count}", bytes([count % 251]) * size)
            count += 1
        return count

    def server_close(self) -> None:
        super().server_close()
        if self.handler is not None:
            unregister(self.handler.function_id)


def serve(listen: str = "127.0.0.1:11311", max_conns: int = 64, guard_mode: str = "persistent",
          no_guard: bool = False, preload_bytes: int = 0, port_file: Optional[str] = None) -> None:
    """
    Runs the key-value service until SIGINT or SIGTERM.

    The bound address is printed as ``LISTENING <host>:<port>`` on standard output.
    """
    server = KvServer(parse_address(listen), guard_mode=guard_mode, guarded=not no_guard, max_conns=max_conns)
    try:
        if preload_bytes:
            count = server.preload(preload_bytes)
            logger.info(f"preloaded {count} items, {server.store.byte_count} bytes")

        host, port = server.server_address[:2]
        if port_file:
            with open(port_file, "w") as handle:
                handle.write(f"{port}\n")
        print(f"LISTENING {host}:{port}", flush=True)
        logger.info(f"serving on {host}:{port} (guard {server.guard_mode}, pid {os.getpid()})")

        signal.signal(signal.SIGTERM, lambda *_: sys.exit(0))
        server.serve_forever()
    except (KeyboardInterrupt, SystemExit):
        logger.info("shutting down")
    finally:
        server.server_close()
