"""Pure-numpy kernel implementations (fallback when the extension is absent)."""

import numpy as np


def rho_pointwise(m, q, p, out=None):
    """Carrier-stripped beampattern values for a batch of frequency draws.

    m : (n_trials, n_elements) frequency multipliers, one draw per row
    q : (n_offsets,) direction offsets
    p : (n_offsets,) range offsets, paired with q

    Returns complex (n_trials, n_offsets) with entry
    (1/N) * sum_n exp(j*2*pi*((n-(N-1)/2)*q[g] + m[t,n]*p[g])).
    """
    m = np.ascontiguousarray(m, dtype=float)
    q = np.ascontiguousarray(q, dtype=float)
    p = np.ascontiguousarray(p, dtype=float)
    n_trials, n = m.shape
    idx = np.arange(n) - (n - 1) / 2.0
    if out is None:
        out = np.empty((n_trials, q.size), dtype=complex)
    # chunk the trial axis to bound the (chunk, N, G) temporary
    chunk = max(1, int(2**22 // max(1, n * q.size)))
    for lo in range(0, n_trials, chunk):
        hi = min(lo + chunk, n_trials)
        phase = idx[None, :, None] * q[None, None, :] + m[lo:hi, :, None] * p[None, None, :]
        out[lo:hi] = np.exp(2j * np.pi * phase).sum(axis=1) / n
    return out
