import threading
from contextlib import contextmanager

import pytest

from rewind.errors import KvResponseError
from rewind.kv import KvClient, KvServer
from rewind.kv.server import parse_address


@contextmanager
def running(manager, **options):
    server = KvServer(("127.0.0.1", 0), manager=manager, **options)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
        thread.join()


def connect(server) -> KvClient:
    host, port = server.server_address[:2]
    return KvClient(host, port, timeout=10)


@pytest.mark.unit
@pytest.mark.parametrize("listen, expected", [
    ("127.0.0.1:11311", ("127.0.0.1", 11311)),
    (":0", ("0.0.0.0", 0)),
    ("localhost:80", ("localhost", 80)),
])
def test_parse_address(listen, expected):
    assert parse_address(listen) == expected


@pytest.mark.unit
@pytest.mark.parametrize("listen", ["11311", "host:", "host:port"])
def test_parse_address_rejects_garbage(listen):
    with pytest.raises(ValueError):
        parse_address(listen)


@pytest.mark.unit
@pytest.mark.parametrize("guard_mode", ["per-call", "persistent"])
def test_guarded_service_answers_requests(manager, guard_mode):
    with running(manager, guard_mode=guard_mode) as server:
        with connect(server) as client:
            client.set("alpha", b"one two")
            assert client.get("alpha") == b"one two"
            assert client.get("beta") is None
            assert client.delete("alpha")
            assert not client.delete("alpha")
            stats = client.stats()

    assert stats["guard_mode"] == guard_mode
    assert stats["requests"] == "6"
    assert stats["rewinds"] == "0"


@pytest.mark.unit
def test_crashme_is_recovered_and_connection_stays_usable(manager):
    with running(manager) as server:
        with connect(server) as client:
            client.set("alpha", b"1")
            assert client.crashme("alpha") == "SERVER_ERROR recovered"
            assert client.get("alpha") == b"1"
            assert client.stats()["rewinds"] == "1"


@pytest.mark.unit
def test_malformed_request_is_a_client_error(manager):
    with running(manager) as server:
        with connect(server) as client:
            client.raw(b"FLUSH_ALL\r\n")
            assert client.read_line().startswith(b"CLIENT_ERROR")
            client.raw(b"SET alpha 3\r\nabcXY")
            assert client.read_line().startswith(b"CLIENT_ERROR")
            assert client.get("alpha") is None


@pytest.mark.unit
def test_error_lines_raise_in_client(manager):
    with running(manager) as server:
        with connect(server) as client:
            with pytest.raises(KvResponseError):
                client.set("bad key", b"x")


@pytest.mark.unit
def test_overlong_line_closes_connection(manager):
    with running(manager) as server:
        with connect(server) as client:
            client.raw(b"GET " + b"k" * 1000 + b"\r\n")
            assert client.read_line() == b"CLIENT_ERROR line too long"


@pytest.mark.unit
def test_oversized_set_closes_the_connection(manager):
    with running(manager) as server:
        with connect(server) as client:
            client.raw(b"SET big 2000000\r\n")
            assert client.read_line() == b"CLIENT_ERROR value longer than 1048576 bytes"
            with pytest.raises(ConnectionError):
                client.read_line()

        with connect(server) as client:
            assert client.get("big") is None
            assert client.stats()["requests"] == "2"


@pytest.mark.unit
def test_connection_limit(manager):
    with running(manager, max_conns=1) as server:
        with connect(server) as first:
            assert first.get("alpha") is None
            with connect(server) as second:
                assert second.read_line() == b"SERVER_ERROR too many connections"


@pytest.mark.unit
def test_one_attacker_does_not_disturb_an_honest_client(manager):
    errors = []

    with running(manager) as server:
        def honest():
            with connect(server) as client:
                for index in range(200):
                    client.set(f"honest:{index % 10}", str(index).encode())
                    if client.get(f"honest:{index % 10}") != str(index).encode():
                        errors.append(index)

        def attacker():
            with connect(server) as client:
                for index in range(50):
                    if client.crashme(f"evil:{index}") != "SERVER_ERROR recovered":
                        errors.append(f"evil:{index}")

        threads = [threading.Thread(target=honest), threading.Thread(target=attacker)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        with connect(server) as observer:
            stats = observer.stats()

    assert errors == []
    assert stats["rewinds"] == "50"
    assert int(stats["items"]) == 10


@pytest.mark.unit
def test_unguarded_service_reports_off(manager):
    with running(manager, guarded=False) as server:
        with connect(server) as client:
            client.set("a", b"b")
            assert client.stats()["guard_mode"] == "off"


@pytest.mark.unit
def test_preload_fills_requested_bytes(manager):
    server = KvServer(("127.0.0.1", 0), guarded=False, manager=manager)
    try:
        count = server.preload(200 * 1024)
    finally:
        server.server_close()

    assert count == 4
    assert server.store.byte_count == 200 * 1024
    assert len(server.store.get("key:3")) == 200 * 1024 - 3 * 64 * 1024
