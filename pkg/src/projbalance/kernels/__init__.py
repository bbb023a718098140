"""Backend dispatch for the hot numerical kernels.

Two interchangeable implementations exist: a pure-numpy one built on
batched BLAS calls (`_numpy`) and a numba one built on jit-compiled
loops (`_numba`).  The active backend is chosen once, at import time,
from the ``PROJBALANCE_BACKEND`` environment variable:

* unset or ``auto``: use numba when importable, else fall back to numpy;
* ``numba`` / ``numpy``: force that backend (forcing numba without the
  package installed raises the underlying ImportError).

Both backends expose the same four functions with identical contracts;
``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import os

_requested = os.environ.get("PROJBALANCE_BACKEND", "").strip().lower()

if _requested in ("", "auto"):
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        from . import _numpy as _impl

        BACKEND = "numpy"
elif _requested == "numba":
    from . import _numba as _impl

    BACKEND = "numba"
elif _requested == "numpy":
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    raise ValueError(
        f"PROJBALANCE_BACKEND={_requested!r} is not recognized; "
        "use 'numba', 'numpy', or 'auto'"
    )

mgs_columns = _impl.mgs_columns
frame_pair_stats = _impl.frame_pair_stats
cross_min_frobenius = _impl.cross_min_frobenius
moment_profile = _impl.moment_profile

__all__ = [
    "BACKEND",
    "mgs_columns",
    "frame_pair_stats",
    "cross_min_frobenius",
    "moment_profile",
]
