"""Measured space accounting.

Walks a structure's object graph and adds up sys.getsizeof for every
reachable allocation, so space reports reflect what is actually held in
memory rather than a model.  Shared module-level tables (mask caches
and the like) are code, not instance state, and are not reachable from
instances, so they never show up here.
"""

from __future__ import annotations

import sys
from types import FunctionType, ModuleType

import numpy as np

_SKIP_TYPES = (type, FunctionType, ModuleType)


def _referents(obj) -> list:
    out = []
    if isinstance(obj, dict):
        out.extend(obj.keys())
        out.extend(obj.values())
    elif isinstance(obj, (list, tuple, set, frozenset)):
        out.extend(obj)
    else:
        cls = type(obj)
        for name in getattr(cls, "__slots__", ()):
            if hasattr(obj, name):
                out.append(getattr(obj, name))
        d = getattr(obj, "__dict__", None)
        if d is not None:
            out.append(d)
    return out


def measure_bits(*roots) -> int:
    """Total bits allocated for everything reachable from ``roots``."""
    seen: set[int] = set()
    total = 0
    stack = list(roots)
    while stack:
        obj = stack.pop()
        if obj is None or isinstance(obj, _SKIP_TYPES):
            continue
        oid = id(obj)
        if oid in seen:
            continue
        seen.add(oid)
        total += sys.getsizeof(obj)
        if isinstance(obj, (int, float, str, bytes, bytearray, np.ndarray)):
            continue
        stack.extend(_referents(obj))
    return total * 8
