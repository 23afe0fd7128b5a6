"""Pick compiled or pure-Python builds of the accelerated modules.

A compiled module is used only if the build stamp records the hash of the
current source; otherwise (or with ``ARBORSORT_PURE_PYTHON=1``) the ``.py``
file is loaded explicitly so a stale binary can never shadow it. Both builds
come from the same source and produce identical results.
"""

from __future__ import annotations

import hashlib
import importlib.machinery
import importlib.util
import json
import os
import sys
from pathlib import Path

ACCELERATED = ("finger_tree", "adaptive_sort")
PURE_ENV = "ARBORSORT_PURE_PYTHON"

_HERE = Path(__file__).resolve().parent
_PACKAGE = __name__.rpartition(".")[0]


def _stamp() -> dict[str, str]:
    try:
        return json.loads((_HERE / "_build_stamp.json").read_text())
    except (OSError, ValueError):
        return {}


def _load_source(name: str) -> None:
    full = f"{_PACKAGE}.{name}"
    path = _HERE / f"{name}.py"
    loader = importlib.machinery.SourceFileLoader(full, str(path))
    spec = importlib.util.spec_from_file_location(full, path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    sys.modules[full] = module
    try:
        loader.exec_module(module)
    except BaseException:
        del sys.modules[full]
        raise


def select_builds() -> dict[str, bool]:
    """Import the accelerated modules; return which of them run compiled."""
    pure = os.environ.get(PURE_ENV, "") not in ("", "0")
    stamp = {} if pure else _stamp()
    status = {}
    # dependency order: adaptive_sort imports finger_tree
    for name in ACCELERATED:
        src = _HERE / f"{name}.py"
        fresh = stamp.get(name) == hashlib.sha256(src.read_bytes()).hexdigest()
        if not fresh:
            _load_source(name)
        module = importlib.import_module(f"{_PACKAGE}.{name}")
        status[name] = not str(getattr(module, "__file__", "")).endswith(".py")
    return status
