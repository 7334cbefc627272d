"""Dense bounded-variable simplex with a swappable pivot kernel.

The hot pivot loop exists twice: a Cython extension (``_pivot_cy``) and a
pure-Python/numpy fallback (``_pivot_py``).  The compiled kernel is used
when present unless ``NETDES_CUTS_PURE=1`` is set; ``KERNEL`` names the
active one.  ``benchmarks/bench_simplex.py`` compares the two.
"""

import os

from ._pivot_py import pivot_loop as _pivot_py_loop

if os.environ.get("NETDES_CUTS_PURE"):
    pivot_loop = _pivot_py_loop
    KERNEL = "python"
else:
    try:
        from ._pivot_cy import pivot_loop  # type: ignore[attr-defined]

        KERNEL = "cython"
    except ImportError:
        pivot_loop = _pivot_py_loop
        KERNEL = "python"

from .solver import EQ, GE, LE, LPResult, solve_lp  # noqa: E402

__all__ = ["solve_lp", "LPResult", "LE", "GE", "EQ", "pivot_loop", "KERNEL"]
