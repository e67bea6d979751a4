import os
import signal
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest

from rewind.bench import start_server

ROOT = Path(__file__).parents[2]


def run_child(source: str) -> subprocess.CompletedProcess:
    env = dict(os.environ, PYTHONPATH=str(ROOT), REWIND_LOG_LEVEL="ERROR")
    return subprocess.run([sys.executable, "-c", textwrap.dedent(source)], capture_output=True, env=env,
                          timeout=120)


@pytest.mark.integration
def test_raw_access_to_revoked_page_kills_the_process():
    result = run_child("""
        import ctypes
        from rewind import libc
        from rewind.backends import PortableBackend
        from rewind.models import AccessRights, MemoryRegion

        backend = PortableBackend()
        region = MemoryRegion(libc.mmap_anonymous(libc.PAGE_SIZE), libc.PAGE_SIZE)
        key = backend.acquire_key()
        backend.tag_region(region, key)
        backend.set_thread_access(key, AccessRights.no_access)
        print("armed", flush=True)
        ctypes.string_at(region.base, 1)
        print("survived", flush=True)
    """)

    assert result.returncode == -signal.SIGSEGV
    assert b"armed" in result.stdout and b"survived" not in result.stdout


@pytest.mark.integration
def test_checked_fault_outside_any_domain_escalates():
    result = run_child("""
        from rewind.backends import RecordingBackend
        from rewind.memory import AddressSpace

        AddressSpace(RecordingBackend()).checked_store(0x10, b"x")
        print("survived", flush=True)
    """)

    assert result.returncode == -signal.SIGSEGV
    assert b"survived" not in result.stdout
    assert b"outside any domain" in result.stderr


@pytest.mark.integration
def test_rewind_to_stale_snapshot_escalates():
    result = run_child("""
        import threading
        from types import SimpleNamespace
        from rewind.models import SavedContext, ViolationKind, ViolationReport
        from rewind.snapshot import rewind_to, snapshot_capture, snapshot_release

        snapshot = snapshot_capture(SimpleNamespace(id=1), SavedContext(threading.get_ident(), 0, ()))
        snapshot_release(snapshot)
        rewind_to(snapshot, ViolationReport(ViolationKind.explicit_abort, 1, threading.get_ident(), 0))
    """)

    assert result.returncode == -signal.SIGSEGV
    assert b"is not live" in result.stderr


@pytest.mark.integration
def test_unguarded_service_dies_on_crashme():
    server = start_server("--no-guard", log_level="ERROR")
    try:
        with server.client() as client:
            client.set("alpha", b"1")
            with pytest.raises((ConnectionError, OSError)):
                client.crashme("alpha")
        assert server.process.wait(timeout=60) == -signal.SIGSEGV
    finally:
        server.stop()


@pytest.mark.integration
@pytest.mark.parametrize("guard_mode", ["per-call", "persistent"])
def test_guarded_service_keeps_running_after_crashme(guard_mode):
    server = start_server("--guard-mode", guard_mode)
    try:
        with server.client() as client:
            pid = client.stats()["pid"]
            for index in range(20):
                assert client.crashme(f"evil:{index}") == "SERVER_ERROR recovered"
            stats = client.stats()
        assert stats["pid"] == pid == str(server.pid)
        assert stats["rewinds"] == "20"
        assert server.process.poll() is None
    finally:
        server.stop()
