"""Select the kernel backend at import time.

The compiled extension is used when it was built; ``BDA_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if not os.environ.get("BDA_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def sq_distances(Q, R):
    return kernels.sq_distances(_f64(Q), _f64(R))


def nearest_index(Q, R):
    return kernels.nearest_index(_f64(Q), _f64(R))


def mmd_combined(domain, cls, m0coef, class_coef, mu):
    return kernels.mmd_combined(
        np.ascontiguousarray(domain, dtype=np.int8),
        np.ascontiguousarray(cls, dtype=np.int64),
        _f64(m0coef), _f64(class_coef), float(mu))
