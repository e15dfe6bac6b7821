"""Hot loops over the profile domain, with a numba and a pure-numpy backend.

The numba backend is used when numba imports cleanly and ``HALLOT_NUMBA`` is
not set to ``0``. Both backends return identical results, including which
violation is reported first.
"""
import os

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is optional
    _numba = None

BACKENDS = {"numpy": _numpy}
if _numba is not None:
    BACKENDS["numba"] = _numba

_default = "numba" if _numba is not None and os.environ.get("HALLOT_NUMBA", "1") != "0" else "numpy"
_active = BACKENDS[_default]


def backend_name() -> str:
    return next(name for name, mod in BACKENDS.items() if mod is _active)


def set_backend(name: str) -> None:
    global _active
    try:
        _active = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None


def perm_indices(objs):
    return _active.perm_indices(objs)


def serial_dictatorship(prof, rank, priority):
    return _active.serial_dictatorship(prof, rank, priority)


def sp_scan(prof, alloc, rank, strides, full=False):
    return _active.sp_scan(prof, alloc, rank, strides, full)


def nb_scan(prof, entries, alloc, strides, full=False):
    return _active.nb_scan(prof, entries, alloc, strides, full)


def pairwise_scan(prof, alloc, rank, full=False):
    return _active.pairwise_scan(prof, alloc, rank, full)


def iplb_scan(prof, alloc, rank, unanimous_step, full=False):
    return _active.iplb_scan(prof, alloc, rank, unanimous_step, full)


def pareto_scan(prof, alloc, rank, perms, full=False):
    return _active.pareto_scan(prof, alloc, rank, perms, full)


def no_envy(prof, alloc, rank):
    return _active.no_envy(prof, alloc, rank)
