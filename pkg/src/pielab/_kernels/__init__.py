"""Backend selection for the tree-growth kernel.

The compiled Cython kernel is preferred; a numpy implementation of the
identical algorithm is the fallback. Set ``PIELAB_PURE_PYTHON=1`` to force
the fallback (used by the benchmark and for debugging). Both backends
consume the same PRNG stream and accumulate in the same order, so they
produce identical trees for identical inputs.
"""

import os

from . import _tree_py

_force_py = os.environ.get("PIELAB_PURE_PYTHON", "").strip().lower() in {"1", "true", "yes"}

if _force_py:
    _impl = _tree_py
    BACKEND = "python"
else:
    try:
        from . import _tree_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _tree_py
        BACKEND = "python"

grow_tree = _impl.grow_tree

__all__ = ["grow_tree", "BACKEND"]
