"""Pick the coordinate-descent kernels: compiled if available, else pure Python.

Set ``PHARMONIC_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND_ENV = "PHARMONIC_BACKEND"

kernels = _kernels_py
BACKEND = "python"

if os.environ.get(BACKEND_ENV, "").lower() != "python":
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "compiled"
    except ImportError:
        pass


def get(name: str | None = None):
    """Kernel module by name ("compiled" or "python"); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
