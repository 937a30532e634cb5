"""Hot-loop kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it was built; otherwise the
numpy module ``_pykernels`` takes over.  Set ``NSGREEDY_KERNELS=python`` to
force the fallback (handy for comparing backends).
"""

import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("NSGREEDY_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = active.BACKEND

gamma_scan = active.gamma_scan
alpha_scan = active.alpha_scan
monotone_scan = active.monotone_scan
expected_top_k_batch = active.expected_top_k_batch
replay_top_k = active.replay_top_k


def available_backends():
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
