import fire
from loguru import logger

from ..kv import serve
from . import configure_logging


def run_server(listen: str = "127.0.0.1:11311", max_conns: int = 64, guard_mode: str = "persistent",
               no_guard: bool = False, preload_bytes: int = 0, port_file: str = None,
               log_level: str = None) -> None:
    """
    Runs the key-value demo service.

    Parameters
    ----------
    listen: str
        host:port to bind, port 0 picks a free port.
    max_conns: int
        Concurrent connections accepted.
    guard_mode: str
        per-call or persistent domains for request parsing.
    no_guard: bool
        Parse requests outside any domain.
    preload_bytes: int
        Size of the synthetic dataset loaded before listening.
    port_file: str
        Optional file receiving the bound port.
    log_level: str
        Overrides REWIND_LOG_LEVEL.
    """
    configure_logging(log_level)
    serve(listen, max_conns, guard_mode, no_guard, preload_bytes, port_file)


@logger.catch
def main():
    configure_logging()
    fire.Fire(run_server)


if __name__ == "__main__":
    main()
