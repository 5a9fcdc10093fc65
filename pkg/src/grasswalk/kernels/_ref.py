"""Pure numpy reference implementations of the hot kernels.

These define the semantics; the compiled extension in ``_speedups.pyx``
must agree (bit-for-bit for the integer sampler, to rounding for the
trigonometric kernel).
"""
from __future__ import annotations

import numpy as np


def sample_rows(cum, outcomes, states, u):
    """Sample one categorical outcome per trajectory from padded row tables.

    ``cum`` is (n_rows, K) of cumulative probabilities padded with 1.0,
    ``outcomes`` the matching (n_rows, K) outcome codes, ``states`` the row
    index per trajectory and ``u`` a uniform draw in [0, 1) per trajectory.
    The selected column is the count of cumulative entries <= u.
    """
    rows = cum[states]
    k = (rows <= u[:, None]).sum(axis=1)
    np.minimum(k, cum.shape[1] - 1, out=k)
    return outcomes[states, k]


def orbit_sums(vectors, offsets, points):
    """Evaluate normalized orbit sums on a batch of points.

    ``vectors`` stacks the orbit vectors of all weights, ``offsets`` marks
    each weight's slice, ``points`` is (n_points, q).  Returns the
    (n_weights, n_points) matrix of orbit-averaged cosines.
    """
    n_weights = offsets.shape[0] - 1
    out = np.empty((n_weights, points.shape[0]))
    for i in range(n_weights):
        block = vectors[offsets[i]:offsets[i + 1]]
        out[i] = np.cos(points @ block.T).mean(axis=1)
    return out
