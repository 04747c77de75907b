"""Selects the propagation kernel: the compiled extension when importable."""

from __future__ import annotations

import os

if os.environ.get("LEAKCHECK_PURE_PYTHON"):
    from ._propagate import propagate

    KERNEL = "python"
else:
    try:
        from ._kernel import propagate

        KERNEL = "cython"
    except ImportError:  # extension not built
        from ._propagate import propagate

        KERNEL = "python"

__all__ = ["KERNEL", "propagate"]
