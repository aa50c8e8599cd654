"""Compiled jump loop for the minimal chain on a CSR graph.

The loop is resumable: it consumes a caller-supplied block of uniforms (two
per jump) and returns when the block runs out, the output buffer fills, or
the path terminates.  Feeding consecutive blocks of one stream therefore
gives the same path whatever the block sizes.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

RUNNING = 0
HORIZON = 1
BUDGET = 2
LEFT = 3
ABSORBED = 4
OCCUPIED = 5

# state vector layout (float64): vertex, jumps, time, occupation, status, checkpoint cursor
S_V, S_N, S_T, S_OCC, S_STATUS, S_CP = range(6)


@njit(cache=True, nogil=True)
def advance(indptr, indices, cumw, rate, boundary, stop, occ_mask, occ_limit,
            horizon, budget, state, u, out_t, out_v, n_out, record, checkpoints, cp_times):
    """Run until termination or until ``u``/the output buffer is exhausted.

    Returns ``(uniforms_used, n_out)``; ``state`` is updated in place.
    """
    v = np.int64(state[S_V])
    n = np.int64(state[S_N])
    t = state[S_T]
    occ = state[S_OCC]
    status = np.int64(state[S_STATUS])
    cp = np.int64(state[S_CP])
    k = 0
    m = len(u)
    cap = len(out_t)
    while status == RUNNING:
        if n >= budget:
            status = BUDGET
            break
        if k + 2 > m:
            break
        if record and n_out >= cap:
            break
        hold = -math.log(u[k]) / rate[v]
        if occ_mask[v] and occ + hold >= occ_limit:
            if t + (occ_limit - occ) < horizon:
                t += occ_limit - occ
                occ = occ_limit
                status = OCCUPIED
                k += 2
                break
        if t + hold >= horizon:
            if occ_mask[v]:
                occ += horizon - t
            t = horizon
            status = HORIZON
            k += 2
            break
        t += hold
        if occ_mask[v]:
            occ += hold
        lo = indptr[v]
        hi = indptr[v + 1]
        target = u[k + 1] * cumw[hi - 1]
        j = lo + np.searchsorted(cumw[lo:hi], target, side="right")
        if j >= hi:
            j = hi - 1
        v = indices[j]
        n += 1
        k += 2
        if record:
            out_t[n_out] = t
            out_v[n_out] = v
            n_out += 1
        while cp < len(checkpoints) and checkpoints[cp] == n:
            cp_times[cp] = t
            cp += 1
        if boundary[v]:
            status = LEFT
        elif stop[v]:
            status = ABSORBED
    state[S_V] = v
    state[S_N] = n
    state[S_T] = t
    state[S_OCC] = occ
    state[S_STATUS] = status
    state[S_CP] = cp
    return k, n_out
