"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy port in ``_kernels_py``.  Setting ``GIBBSTEST_PURE_PYTHON=1`` forces
the fallback.  Both expose the same four functions and, for enumeration and
simulation, the same bits.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("GIBBSTEST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

perron = backend.perron
enumerate_words = backend.enumerate_words
simulate_sums = backend.simulate_sums
walk = backend.walk
