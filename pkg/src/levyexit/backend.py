"""Stepping-backend selection: compiled kernel when available and
applicable, numpy fallback otherwise.

Set LEVYEXIT_BACKEND=python (or =cython) to force a choice globally.
"""

import os

from . import _engine_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def available_backends():
    out = ["python"]
    if _compiled is not None:
        out.append("cython")
    return out


def resolve(requested="auto", needs_python=False):
    """Pick a kernel module.

    needs_python forces the fallback (recording mode, scheduled jumps,
    callable costs, d > 8).  An explicit request for the compiled kernel
    when it cannot serve is an error.
    """
    env = os.environ.get("LEVYEXIT_BACKEND")
    if env:
        requested = env
    if requested not in ("auto", "python", "cython"):
        raise ValueError(f"unknown backend {requested!r}")
    if needs_python:
        if requested == "cython":
            raise ValueError("this configuration requires the python "
                             "backend (recording / scheduled jumps / "
                             "callable cost)")
        return _engine_py
    if requested == "python":
        return _engine_py
    if requested == "cython":
        if _compiled is None:
            raise ValueError("compiled kernel not available")
        return _compiled
    return _compiled if _compiled is not None else _engine_py
