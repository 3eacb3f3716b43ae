"""Numpy implementations of the compiled kernels.

Each function performs the same floating-point operations in the same order
as its counterpart in ``_ckernels.pyx`` so the two backends agree bit for bit.
"""
import numpy as np

# rows of the query block per chunk; bounds the (chunk x refs) temporaries
_CHUNK = 256


def sq_distances(Q, R):
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    R = np.ascontiguousarray(R, dtype=np.float64)
    nq, nf = Q.shape
    out = np.empty((nq, R.shape[0]), dtype=np.float64)
    RT = np.ascontiguousarray(R.T)
    for start in range(0, nq, _CHUNK):
        block = Q[start:start + _CHUNK]
        acc = np.zeros((block.shape[0], R.shape[0]), dtype=np.float64)
        for f in range(nf):
            d = block[:, f, None] - RT[f][None, :]
            acc += d * d
        out[start:start + _CHUNK] = acc
    return out


def nearest_index(Q, R):
    out = np.empty(np.shape(Q)[0], dtype=np.int64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    for start in range(0, Q.shape[0], _CHUNK):
        # argmin returns the first minimum: lowest reference index wins ties
        out[start:start + _CHUNK] = np.argmin(sq_distances(Q[start:start + _CHUNK], R), axis=1)
    return out


def mmd_combined(domain, cls, m0coef, class_coef, mu):
    domain = np.asarray(domain, dtype=np.intp)
    cls = np.asarray(cls, dtype=np.int64)
    w0 = 1.0 - mu
    marginal = m0coef[domain[:, None], domain[None, :]]
    same = (cls[:, None] == cls[None, :]) & (cls >= 0)[:, None]
    safe = np.where(cls >= 0, cls, 0)
    cterm = np.where(same, class_coef[safe[:, None], domain[:, None], domain[None, :]], 0.0)
    return w0 * marginal + mu * cterm
