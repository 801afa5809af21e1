"""Selection of the path-stepping backend.

The compiled extension is preferred when importable; the numpy mirror is the
fallback.  ``MEMFOLIO_BACKEND=python`` forces the fallback,
``MEMFOLIO_BACKEND=cython`` demands the extension.  Tests can switch
temporarily with :func:`use`.
"""

import os
from contextlib import contextmanager

from . import _pathcore_py

_requested = os.environ.get("MEMFOLIO_BACKEND", "").strip().lower()

if _requested in ("python", "py"):
    _core = _pathcore_py
elif _requested in ("cython", "compiled", "c"):
    from . import _pathcore as _core  # noqa: F401  (raises if not built)
else:
    try:
        from . import _pathcore as _core  # type: ignore
    except ImportError:
        _core = _pathcore_py


def get_core():
    return _core


def backend_name() -> str:
    return _core.NAME


@contextmanager
def use(name: str):
    """Temporarily switch backend ('python' or 'cython'); for tests/benchmarks."""
    global _core
    previous = _core
    if name in ("python", "py"):
        _core = _pathcore_py
    elif name in ("cython", "compiled", "c"):
        from . import _pathcore

        _core = _pathcore
    else:
        raise ValueError(f"unknown backend {name!r}")
    try:
        yield _core
    finally:
        _core = previous
