"""Numerical kernels with a compiled core and a numpy fallback.

The Cython extension is used when it built successfully and the
environment variable RFDA_NO_EXT is unset; otherwise the pure-numpy
reference implementation takes over.  Both expose the same functions
with identical semantics (see benchmarks/bench_kernels.py for the
speed comparison).
"""

import os

from . import _reference

if os.environ.get("RFDA_NO_EXT"):
    _impl = _reference
    HAVE_COMPILED = False
else:
    try:
        from . import _rho as _impl
        HAVE_COMPILED = True
    except ImportError:
        _impl = _reference
        HAVE_COMPILED = False

rho_pointwise = _impl.rho_pointwise
reference_rho_pointwise = _reference.rho_pointwise


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "numpy"
