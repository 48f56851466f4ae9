"""Pick the compiled sweep kernel when it imports, else the numpy fallback.

Set ``COLORCACTI_BACKEND=python`` to force the fallback.
"""

import os

from . import _pysweep

BACKEND = "python"
sweep = _pysweep.sweep

if os.environ.get("COLORCACTI_BACKEND", "").lower() != "python":
    try:
        from ._sweep import sweep  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

update_one = _pysweep.update_one


def get_sweep(name=None):
    """Return the sweep function for ``name`` (``"cython"``/``"python"``/None)."""
    if name in (None, BACKEND):
        return sweep
    if name == "python":
        return _pysweep.sweep
    if name == "cython":
        from ._sweep import sweep as compiled
        return compiled
    raise ValueError(f"unknown backend {name!r}")
