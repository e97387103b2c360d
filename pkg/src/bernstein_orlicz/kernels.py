"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback. ``BERNSTEIN_ORLICZ_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

python_backend = _pykernels

if os.environ.get("BERNSTEIN_ORLICZ_PURE_PYTHON"):
    compiled_backend = None
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = backend.BACKEND

philox4x32 = backend.philox4x32
uniform_block = backend.uniform_block
psi_values = backend.psi_values
psi_mean = backend.psi_mean
ks_sup = backend.ks_sup


def available_backends():
    """Backends importable in this process, compiled first."""
    out = []
    if compiled_backend is not None:
        out.append(compiled_backend)
    out.append(python_backend)
    return out
