# cython: language_level=3
"""Compiled hot loops. Semantics must match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, expm1, fabs
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()

cdef uint32_t PHILOX_M0 = 0xD2511F53u
cdef uint32_t PHILOX_M1 = 0xCD9E8D57u
cdef uint32_t PHILOX_W0 = 0x9E3779B9u
cdef uint32_t PHILOX_W1 = 0xBB67AE85u
cdef double TWO_M52 = 2.220446049250313e-16
cdef double LOG_PSI_MAX = 690.7755278982137
cdef double PSI_MAX = 1e300

BACKEND = "cython"


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t x0, x1, x2, x3
    cdef int r
    x0 = c[0]; x1 = c[1]; x2 = c[2]; x3 = c[3]
    for r in range(10):
        p0 = <uint64_t>PHILOX_M0 * x0
        p1 = <uint64_t>PHILOX_M1 * x2
        x0 = <uint32_t>(p1 >> 32) ^ x1 ^ k0
        x1 = <uint32_t>p1
        x2 = <uint32_t>(p0 >> 32) ^ x3 ^ k1
        x3 = <uint32_t>p0
        k0 = k0 + PHILOX_W0
        k1 = k1 + PHILOX_W1
    c[0] = x0; c[1] = x1; c[2] = x2; c[3] = x3


def philox4x32(ctr, key):
    """Philox4x32-10 block function on arrays of shape (..., 4) and (..., 2)."""
    ctr = np.ascontiguousarray(ctr, dtype=np.uint32)
    key = np.ascontiguousarray(key, dtype=np.uint32)
    shape = np.broadcast_shapes(ctr.shape[:-1], key.shape[:-1])
    c = np.array(np.broadcast_to(ctr, shape + (4,)).reshape(-1, 4), dtype=np.uint32)
    k = np.array(np.broadcast_to(key, shape + (2,)).reshape(-1, 2), dtype=np.uint32)
    cdef Py_ssize_t i, m = c.shape[0]
    cdef uint32_t[:, ::1] cv = c
    cdef uint32_t[:, ::1] kv = k
    with nogil:
        for i in range(m):
            _philox(&cv[i, 0], kv[i, 0], kv[i, 1])
    return c.reshape(shape + (4,))


def uniform_block(uint64_t seed, uint32_t stream, uint64_t rep_start,
                  Py_ssize_t nrep, Py_ssize_t ndraw):
    """Uniforms in (0, 1) for replicates rep_start .. rep_start+nrep-1."""
    out = np.empty((nrep, ndraw), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef uint32_t k0 = <uint32_t>(seed & 0xFFFFFFFFu)
    cdef uint32_t k1 = <uint32_t>(seed >> 32)
    cdef uint32_t c[4]
    cdef Py_ssize_t r, j, npair = (ndraw + 1) // 2
    cdef uint64_t rep, m0, m1
    with nogil:
        for r in range(nrep):
            rep = rep_start + <uint64_t>r
            for j in range(npair):
                c[0] = <uint32_t>j
                c[1] = <uint32_t>(rep & 0xFFFFFFFFu)
                c[2] = <uint32_t>(rep >> 32)
                c[3] = stream
                _philox(c, k0, k1)
                m0 = ((<uint64_t>(c[0] >> 6)) << 26) | (c[1] >> 6)
                ov[r, 2 * j] = (<double>m0 + 0.5) * TWO_M52
                if 2 * j + 1 < ndraw:
                    m1 = ((<uint64_t>(c[2] >> 6)) << 26) | (c[3] >> 6)
                    ov[r, 2 * j + 1] = (<double>m1 + 0.5) * TWO_M52
    return out


cdef inline double _psi(double z, double L) noexcept nogil:
    cdef double u = 2.0 * z / (sqrt(1.0 + 2.0 * L * z) + 1.0)
    cdef double e = u * u
    if e > LOG_PSI_MAX:
        return PSI_MAX
    return expm1(e)


def psi_values(double L, z):
    """Elementwise Psi_L on a float64 array (saturating at 1e300)."""
    arr = np.ascontiguousarray(z, dtype=np.float64)
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    cdef double[::1] zv = flat
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m = flat.shape[0]
    with nogil:
        for i in range(m):
            ov[i] = _psi(zv[i], L)
    return out.reshape(arr.shape)


def psi_mean(z_abs, double scale, double L):
    """Mean of Psi_L(|z| / scale); saturated terms contribute 1e300."""
    cdef double[::1] zv = np.ascontiguousarray(z_abs, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, m = zv.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(m):
            acc += _psi(fabs(zv[i]) / scale, L)
            if acc > PSI_MAX:
                acc = PSI_MAX
    return acc / m


def ks_sup(u_sorted):
    """sqrt(n) * sup_q |F_n(q) - q| per row of row-sorted uniforms."""
    cdef double[:, ::1] uv = np.ascontiguousarray(u_sorted, dtype=np.float64)
    cdef Py_ssize_t r, i, R = uv.shape[0], n = uv.shape[1]
    out = np.empty(R, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double d, a, b, fn = <double>n
    with nogil:
        for r in range(R):
            d = 0.0
            for i in range(n):
                a = (i + 1) / fn - uv[r, i]
                b = uv[r, i] - i / fn
                if a > d:
                    d = a
                if b > d:
                    d = b
            ov[r] = sqrt(fn) * d
    return out
