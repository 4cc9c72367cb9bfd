"""Kernel backend selection.

Imports the compiled extension when it was built, otherwise the numpy
reference implementation.  Set NOISYQEC_PURE=1 to force the fallback (used
by the benchmark and for debugging).
"""

import os

if os.environ.get("NOISYQEC_PURE"):
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

integrate_segment_pauli = _impl.integrate_segment_pauli
