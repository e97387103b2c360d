"""Counter-based random streams.

Every uniform is a pure function of ``(seed, stream, replicate, index)``:
Philox4x32-10 keyed by the 64-bit seed, with counter words
``(index // 2, replicate_lo, replicate_hi, stream)``. Each block yields two
doubles built from 26+26 bits, ``(k + 0.5) * 2**-52``, so draws lie strictly
inside (0, 1) and inverse-CDF sampling never sees 0 or 1.

Because nothing depends on call order, replicate values do not depend on
how replicates are chunked or on how many worker threads run them.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels

SEED_MASK = (1 << 64) - 1
CHUNK = 2048


def uniforms(seed, stream, rep_start, nrep, ndraw, backend=None):
    """Array of shape (nrep, ndraw) for replicates rep_start .. rep_start+nrep-1."""
    be = backend or kernels.backend
    return be.uniform_block(int(seed) & SEED_MASK, int(stream), int(rep_start),
                            int(nrep), int(ndraw))


def run_replicates(statistic, *, seed, stream, replicates, ndraw, workers=1,
                   chunk=CHUNK):
    """Evaluate ``statistic`` on per-replicate uniform rows.

    ``statistic`` maps a (m, ndraw) block of uniforms to an array whose first
    axis has length m. Chunks have a fixed size and are concatenated in
    replicate order, so the output is identical for any ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    starts = list(range(0, replicates, chunk))

    def one(start):
        m = min(chunk, replicates - start)
        return np.asarray(statistic(uniforms(seed, stream, start, m, ndraw)))

    if workers <= 1 or len(starts) == 1:
        parts = [one(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, starts))
    return np.concatenate(parts, axis=0)
