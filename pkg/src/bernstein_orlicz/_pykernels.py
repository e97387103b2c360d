"""Pure numpy implementations of the kernels in ``_ckernels.pyx``."""

import numpy as np

BACKEND = "python"

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_TWO_M52 = 2.0**-52
LOG_PSI_MAX = float(np.log(1e300))
PSI_MAX = 1e300


def _rounds(x0, x1, x2, x3, k0, k1):
    # all operands uint64 holding 32-bit values
    for _ in range(10):
        p0 = _M0 * x0
        p1 = _M1 * x2
        x0, x1, x2, x3 = (
            (p1 >> np.uint64(32)) ^ x1 ^ k0,
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ x3 ^ k1,
            p0 & _MASK32,
        )
        k0 = (k0 + np.uint64(_W0)) & _MASK32
        k1 = (k1 + np.uint64(_W1)) & _MASK32
    return x0, x1, x2, x3


def philox4x32(ctr, key):
    ctr = np.asarray(ctr, dtype=np.uint32).astype(np.uint64)
    key = np.asarray(key, dtype=np.uint32).astype(np.uint64)
    shape = np.broadcast_shapes(ctr.shape[:-1], key.shape[:-1])
    c = np.broadcast_to(ctr, shape + (4,))
    k = np.broadcast_to(key, shape + (2,))
    out = _rounds(c[..., 0], c[..., 1], c[..., 2], c[..., 3], k[..., 0], k[..., 1])
    return np.stack(out, axis=-1).astype(np.uint32)


def uniform_block(seed, stream, rep_start, nrep, ndraw):
    npair = (ndraw + 1) // 2
    rep = np.uint64(rep_start) + np.arange(nrep, dtype=np.uint64)
    j = np.arange(npair, dtype=np.uint64)
    shape = (nrep, npair)
    x0 = np.broadcast_to(j[None, :], shape)
    x1 = np.broadcast_to((rep & _MASK32)[:, None], shape)
    x2 = np.broadcast_to((rep >> np.uint64(32))[:, None], shape)
    x3 = np.full(shape, np.uint64(stream))
    k0 = np.uint64(seed) & _MASK32
    k1 = np.uint64(seed) >> np.uint64(32)
    y0, y1, y2, y3 = _rounds(x0, x1, x2, x3, k0, k1)
    six = np.uint64(6)
    m0 = ((y0 >> six) << np.uint64(26)) | (y1 >> six)
    m1 = ((y2 >> six) << np.uint64(26)) | (y3 >> six)
    out = np.empty((nrep, 2 * npair))
    out[:, 0::2] = (m0.astype(np.float64) + 0.5) * _TWO_M52
    out[:, 1::2] = (m1.astype(np.float64) + 0.5) * _TWO_M52
    return np.ascontiguousarray(out[:, :ndraw])


def psi_values(L, z):
    z = np.asarray(z, dtype=np.float64)
    u = 2.0 * z / (np.sqrt(1.0 + 2.0 * L * z) + 1.0)
    e = u * u
    with np.errstate(over="ignore"):
        out = np.expm1(np.minimum(e, LOG_PSI_MAX))
    return np.where(e > LOG_PSI_MAX, PSI_MAX, out)


def psi_mean(z_abs, scale, L):
    vals = psi_values(L, np.abs(np.asarray(z_abs, dtype=np.float64)) / scale)
    return min(float(np.sum(vals)), PSI_MAX) / vals.size


def ks_sup(u_sorted):
    u = np.asarray(u_sorted, dtype=np.float64)
    n = u.shape[1]
    i = np.arange(1, n + 1, dtype=np.float64)
    d = np.maximum(np.max(i / n - u, axis=1), np.max(u - (i - 1) / n, axis=1))
    return np.sqrt(float(n)) * np.maximum(d, 0.0)
