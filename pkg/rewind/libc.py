"""ctypes bindings to the memory-management and protection-key functions of the C library."""

import ctypes
import ctypes.util
import mmap
import os

from .errors import OsRejected

PAGE_SIZE = mmap.PAGESIZE

PROT_NONE = 0x0
PROT_READ = 0x1
PROT_WRITE = 0x2

MAP_PRIVATE = 0x02
MAP_ANONYMOUS = 0x20

PKEY_DISABLE_ACCESS = 0x1
PKEY_DISABLE_WRITE = 0x2

_libc = ctypes.CDLL(ctypes.util.find_library("c"), use_errno=True)

MAP_FAILED = ctypes.c_void_p(-1).value


def _check_errno(result, func, arguments):
    if result == -1:
        errno = ctypes.get_errno()
        raise OsRejected(errno, f"{func.__name__}{tuple(arguments)} failed: {os.strerror(errno)}")
    return result


def _check_mmap(result, func, arguments):
    if result is None or result == MAP_FAILED:
        errno = ctypes.get_errno()
        raise OsRejected(errno, f"mmap of {arguments[1]} bytes failed: {os.strerror(errno)}")
    return result


_mmap = _libc.mmap
_mmap.argtypes = [ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int, ctypes.c_int, ctypes.c_int, ctypes.c_long]
_mmap.restype = ctypes.c_void_p
_mmap.errcheck = _check_mmap

_munmap = _libc.munmap
_munmap.argtypes = [ctypes.c_void_p, ctypes.c_size_t]
_munmap.restype = ctypes.c_int
_munmap.errcheck = _check_errno

_mprotect = _libc.mprotect
_mprotect.argtypes = [ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int]
_mprotect.restype = ctypes.c_int
_mprotect.errcheck = _check_errno


def _bind_pkey_functions():
    try:
        alloc, free, protect = _libc.pkey_alloc, _libc.pkey_free, _libc.pkey_mprotect
        get, set_ = _libc.pkey_get, _libc.pkey_set
    except AttributeError:
        return None

    alloc.argtypes = [ctypes.c_uint, ctypes.c_uint]
    free.argtypes = [ctypes.c_int]
    protect.argtypes = [ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int, ctypes.c_int]
    get.argtypes = [ctypes.c_int]
    set_.argtypes = [ctypes.c_int, ctypes.c_uint]
    for func in (alloc, free, protect, get, set_):
        func.restype = ctypes.c_int
        func.errcheck = _check_errno

    return alloc, free, protect, get, set_


_pkeys = _bind_pkey_functions()

HAS_PKEY_FUNCTIONS = _pkeys is not None


def mmap_anonymous(length: int, prot: int = PROT_READ | PROT_WRITE) -> int:
    """Maps `length` bytes of private anonymous memory and returns the base address."""
    return _mmap(None, length, prot, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0)


def munmap(address: int, length: int) -> None:
    _munmap(address, length)


def mprotect(address: int, length: int, prot: int) -> None:
    _mprotect(address, length, prot)


def pkey_alloc(access_rights: int = 0) -> int:
    return _pkeys[0](0, access_rights)


def pkey_free(key: int) -> None:
    _pkeys[1](key)


def pkey_mprotect(address: int, length: int, prot: int, key: int) -> None:
    _pkeys[2](address, length, prot, key)


def pkey_get(key: int) -> int:
    return _pkeys[3](key)


def pkey_set(key: int, access_rights: int) -> None:
    _pkeys[4](key, access_rights)
