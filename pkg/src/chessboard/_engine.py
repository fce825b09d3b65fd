"""Compiled inner loop of the simulation.

Deposits are written straight from the leg decomposition: the bond after a
step of leg ``j`` (0-based) carries ``+1`` when ``j % 4 < 2`` (blue), else
``-1``, on the sampled path; on the twin the sign is reversed.  This equals
the time direction of that bond in the entwined traversal, which is
checked against the explicit loop construction in the test suite.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _colour(j):
    return 1 if j % 4 < 2 else -1


@njit(cache=True, nogil=True)
def accumulate(raw, n, threshold, counts, offset):
    """Run one block of loops; ``raw[i, k]`` drives the flip before step k+2.

    ``counts[channel, sigma_index, t, x + offset]``. Returns the largest t
    touched.
    """
    leg_dir = np.empty(n + 2, dtype=np.int64)
    leg_len = np.empty(n + 2, dtype=np.int64)
    max_t = 0
    for i in range(raw.shape[0]):
        nl = 0
        d = 1
        length = 1
        for k in range(n - 1):
            if (raw[i, k] >> np.uint64(11)) < threshold:
                leg_dir[nl] = d
                leg_len[nl] = length
                nl += 1
                d = -d
                length = 1
            else:
                length += 1
        leg_dir[nl] = d
        leg_len[nl] = length
        nl += 1
        if nl % 2 == 1:
            # even corner count: mirror the last leg
            leg_dir[nl] = -d
            leg_len[nl] = length
            nl += 1

        x = 0
        t = 0
        for j in range(nl):
            s = leg_dir[j]
            si = 0 if s > 0 else 1
            c = _colour(j)
            for _ in range(leg_len[j]):
                x += s
                t += 1
                counts[0, si, t, x + offset] += c
        if t > max_t:
            max_t = t

        # twin: legs swapped within each pair, colour starts red
        x = 0
        t = 0
        for p in range(0, nl, 2):
            for h in range(2):
                j = p + 1 - h
                s = leg_dir[j]
                si = 0 if s > 0 else 1
                c = -_colour(p + h)
                for _ in range(leg_len[j]):
                    x += s
                    t += 1
                    counts[1, si, t, x + offset] += c
    return max_t
